#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "kgrec/kge/train_config.hpp"
#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::kge {

using rdf::TermId;

/// A triple expressed in model rows rather than term ids.
struct IndexedTriple {
    std::uint32_t head = 0;
    std::uint32_t relation = 0;
    std::uint32_t tail = 0;

    friend auto operator<=>(const IndexedTriple&, const IndexedTriple&) = default;
};

struct IndexedTripleHash {
    std::size_t operator()(const IndexedTriple& t) const noexcept {
        std::uint64_t h = (static_cast<std::uint64_t>(t.head) << 32) | t.tail;
        h ^= static_cast<std::uint64_t>(t.relation) * 0x9e3779b97f4a7c15ULL;
        h ^= h >> 29;
        h *= 0xbf58476d1ce4e5b9ULL;
        return static_cast<std::size_t>(h ^ (h >> 32));
    }
};

/// Re(sum_k h_k * r_k * conj(t_k)) over rows laid out [re..., im...].
double score_complex(std::span<const double> h, std::span<const double> r, std::span<const double> t);

/// -||h + r - t||_1; higher is better, like ComplEx.
double score_transe(std::span<const double> h, std::span<const double> r, std::span<const double> t);

/// Entity and relation parameter matrices plus the term-id to row maps.
class EmbeddingModel {
public:
    EmbeddingModel(TrainConfig config, std::vector<TermId> entity_ids, std::vector<TermId> relation_ids);

    [[nodiscard]] const TrainConfig& config() const noexcept { return config_; }
    [[nodiscard]] ModelKind kind() const noexcept { return config_.model; }
    /// Replaces training hyperparameters; kind and dim must stay the same.
    void set_hyperparameters(const TrainConfig& config);
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t n_entities() const noexcept { return entity_ids_.size(); }
    [[nodiscard]] std::size_t n_relations() const noexcept { return relation_ids_.size(); }

    [[nodiscard]] std::span<double> entity_row(std::size_t row) {
        return {entity_params_.data() + row * width_, width_};
    }
    [[nodiscard]] std::span<const double> entity_row(std::size_t row) const {
        return {entity_params_.data() + row * width_, width_};
    }
    [[nodiscard]] std::span<double> relation_row(std::size_t row) {
        return {relation_params_.data() + row * width_, width_};
    }
    [[nodiscard]] std::span<const double> relation_row(std::size_t row) const {
        return {relation_params_.data() + row * width_, width_};
    }

    [[nodiscard]] std::vector<double>& entity_params() noexcept { return entity_params_; }
    [[nodiscard]] const std::vector<double>& entity_params() const noexcept { return entity_params_; }
    [[nodiscard]] std::vector<double>& relation_params() noexcept { return relation_params_; }
    [[nodiscard]] const std::vector<double>& relation_params() const noexcept { return relation_params_; }

    [[nodiscard]] const std::vector<TermId>& entity_ids() const noexcept { return entity_ids_; }
    [[nodiscard]] const std::vector<TermId>& relation_ids() const noexcept { return relation_ids_; }
    [[nodiscard]] std::optional<std::uint32_t> entity_row_of(TermId id) const;
    [[nodiscard]] std::optional<std::uint32_t> relation_row_of(TermId id) const;

    /// Copy of the entity's row; this is what the ANN index stores.
    /// Throws DataError for unknown entities.
    [[nodiscard]] std::vector<double> entity_vector(TermId entity) const;

    [[nodiscard]] double score(const IndexedTriple& t) const;

    /// Maps a store triple to rows; nullopt if any term is unknown.
    [[nodiscard]] std::optional<IndexedTriple> index(const rdf::Triple& t) const;

    [[nodiscard]] bool all_finite() const noexcept;

private:
    TrainConfig config_;
    std::size_t width_;
    std::vector<TermId> entity_ids_;
    std::vector<TermId> relation_ids_;
    std::unordered_map<TermId, std::uint32_t> entity_rows_;
    std::unordered_map<TermId, std::uint32_t> relation_rows_;
    std::vector<double> entity_params_;
    std::vector<double> relation_params_;
};

/// Draws every parameter uniformly from [-6/sqrt(dim), 6/sqrt(dim)],
/// deterministic under config.seed.
EmbeddingModel init_model(const TrainConfig& config, std::vector<TermId> entity_ids,
                          std::vector<TermId> relation_ids);

/// Same, with ids 0..n-1.
EmbeddingModel init_model(const TrainConfig& config, std::size_t n_entities, std::size_t n_relations);

}  // namespace kgrec::kge
