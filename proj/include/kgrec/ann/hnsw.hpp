#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::ann {

using rdf::TermId;

struct HnswParams {
    std::size_t m = 16;
    std::size_t ef_construction = 400;
    std::size_t ef_search = 50;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless m >= 2, ef_construction >= m, ef_search >= 1.
    void validate() const;

    friend bool operator==(const HnswParams&, const HnswParams&) = default;
};

struct Neighbor {
    TermId id = 0;
    double similarity = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Unit-length copy of `v`. Throws DataError on a zero or non-finite vector.
std::vector<double> normalize(std::span<const double> v);

/// Inner product; on unit vectors this is the cosine similarity.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Row-major matrix of n vectors of width `dim`.
struct VectorSet {
    std::size_t dim = 0;
    std::vector<double> data;

    [[nodiscard]] std::size_t size() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }

    friend bool operator==(const VectorSet&, const VectorSet&) = default;
};

/// Row-wise normalize(); the index stores exactly these rows.
VectorSet normalize_rows(const VectorSet& vectors, std::span<const TermId> ids);

/// Exact top-k by cosine similarity over all rows, ties by ascending id.
/// k = 0 yields an empty list.
std::vector<Neighbor> brute_force_knn(const VectorSet& vectors, std::span<const TermId> ids,
                                      std::span<const double> query, std::size_t k);

/// Hierarchical navigable small-world graph over unit-normalized vectors.
/// Immutable after build; concurrent searches are safe.
class HnswIndex {
public:
    /// Inserts rows in order. Throws DataError on zero vectors (naming the
    /// id), ConfigError on bad params or id/row count mismatch.
    static HnswIndex build(const VectorSet& vectors, std::span<const TermId> ids, const HnswParams& params);

    /// Top-k by descending cosine similarity using a beam of max(ef_search, k).
    [[nodiscard]] std::vector<Neighbor> search(std::span<const double> query, std::size_t k,
                                               std::size_t ef_search) const;
    [[nodiscard]] std::vector<Neighbor> search(std::span<const double> query, std::size_t k) const {
        return search(query, k, params_.ef_search);
    }

    [[nodiscard]] const HnswParams& params() const noexcept { return params_; }
    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return vectors_.dim; }
    [[nodiscard]] int max_level() const noexcept { return max_level_; }
    [[nodiscard]] std::uint32_t entry_point() const noexcept { return entry_point_; }
    [[nodiscard]] double level_norm() const noexcept;
    [[nodiscard]] int level_of(std::uint32_t node) const { return static_cast<int>(links_[node].size()) - 1; }
    [[nodiscard]] std::span<const std::uint32_t> neighbors(std::uint32_t node, int level) const {
        return links_[node][static_cast<std::size_t>(level)];
    }
    [[nodiscard]] std::span<const double> vector(std::uint32_t node) const { return vectors_.row(node); }
    [[nodiscard]] TermId id(std::uint32_t node) const { return ids_[node]; }
    [[nodiscard]] const VectorSet& vectors() const noexcept { return vectors_; }
    [[nodiscard]] const std::vector<TermId>& ids() const noexcept { return ids_; }

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static HnswIndex load(std::istream& in);
    static HnswIndex load(const std::filesystem::path& path);

    friend bool operator==(const HnswIndex&, const HnswIndex&) = default;

private:
    struct Candidate {
        double sim;
        std::uint32_t node;
    };

    [[nodiscard]] double sim(std::span<const double> q, std::uint32_t node) const { return dot(q, vectors_.row(node)); }
    [[nodiscard]] std::uint32_t greedy_descend(std::span<const double> q, std::uint32_t start, int from_level,
                                               int to_level) const;
    [[nodiscard]] std::vector<Candidate> search_layer(std::span<const double> q, std::uint32_t entry, std::size_t ef,
                                                      int level, std::vector<std::uint32_t>& visited,
                                                      std::uint32_t& visit_tag) const;
    [[nodiscard]] std::vector<std::uint32_t> select_neighbors(const std::vector<Candidate>& sorted,
                                                              std::size_t limit) const;
    void insert(std::uint32_t node, int level, std::vector<std::uint32_t>& visited, std::uint32_t& visit_tag);
    void check_invariants() const;

    HnswParams params_;
    VectorSet vectors_;
    std::vector<TermId> ids_;
    // links_[node][level] -> neighbor nodes.
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::uint32_t entry_point_ = 0;
    int max_level_ = -1;
};

/// Seeded Gaussian directions, normalized.
VectorSet random_unit_vectors(std::size_t n, std::size_t dim, std::uint64_t seed);

}  // namespace kgrec::ann
