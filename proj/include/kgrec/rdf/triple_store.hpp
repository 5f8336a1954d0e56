#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgrec/rdf/ntriples.hpp"
#include "kgrec/rdf/term.hpp"

namespace kgrec::rdf {

using TermId = std::uint32_t;

struct Triple {
    TermId s = 0;
    TermId p = 0;
    TermId o = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = (static_cast<std::uint64_t>(t.s) << 32) ^ t.p;
        h *= 0x9e3779b97f4a7c15ULL;
        h ^= t.o + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

/// Dense bijection between terms and ids 0..size()-1.
class Dictionary {
public:
    /// Returns the existing id, or assigns the next dense id.
    TermId intern(const Term& term);
    [[nodiscard]] std::optional<TermId> lookup(const Term& term) const;
    [[nodiscard]] const Term& resolve(TermId id) const;
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }

    /// Tab-separated `id<TAB>kind<TAB>lexical` dump.
    void dump_tsv(std::ostream& out) const;

private:
    std::vector<Term> terms_;
    std::unordered_map<Term, TermId, TermHash> ids_;
};

enum class IndexOrder { Spo, Pos, Osp };

/// Immutable after construction; safe for concurrent readers.
class TripleStore {
public:
    class Builder;

    TripleStore() = default;

    [[nodiscard]] const Dictionary& dictionary() const noexcept { return dict_; }
    [[nodiscard]] std::size_t size() const noexcept { return spo_.size(); }
    [[nodiscard]] bool empty() const noexcept { return spo_.empty(); }

    [[nodiscard]] std::optional<TermId> lookup(const Term& t) const { return dict_.lookup(t); }
    [[nodiscard]] std::optional<TermId> lookup_iri(std::string_view iri) const;
    [[nodiscard]] const Term& resolve(TermId id) const { return dict_.resolve(id); }

    /// Triples matching all bound positions, served as a contiguous slice of
    /// whichever index has the longest bound prefix.
    [[nodiscard]] std::span<const Triple> match(std::optional<TermId> s, std::optional<TermId> p,
                                                std::optional<TermId> o) const;

    [[nodiscard]] bool contains(const Triple& t) const;

    /// All triples in (s, p, o) order.
    [[nodiscard]] std::span<const Triple> triples() const noexcept { return spo_; }
    [[nodiscard]] std::span<const Triple> index(IndexOrder order) const noexcept;

    /// Subjects with an asserted rdf:type in `classes` (no inference). Sorted.
    [[nodiscard]] std::vector<TermId> instances_of(std::span<const TermId> classes) const;
    [[nodiscard]] bool has_type(TermId subject, std::span<const TermId> classes) const;

    void write_ntriples(std::ostream& out) const;

private:
    Dictionary dict_;
    std::vector<Triple> spo_;
    std::vector<Triple> pos_;
    std::vector<Triple> osp_;
    std::optional<TermId> rdf_type_;
};

class TripleStore::Builder {
public:
    TermId intern(const Term& t) { return dict_.intern(t); }
    void add(const Term& s, const Term& p, const Term& o);
    void add(const TermTriple& t) { add(t.subject, t.predicate, t.object); }
    void add(Triple t) { pending_.push_back(t); }
    [[nodiscard]] const Dictionary& dictionary() const noexcept { return dict_; }

    /// Sorts, deduplicates and indexes. `duplicates` receives the number of
    /// repeated statements dropped.
    TripleStore build(std::size_t* duplicates = nullptr) &&;

private:
    Dictionary dict_;
    std::vector<Triple> pending_;
};

struct LoadResult {
    TripleStore store;
    ParseStats stats;
};

LoadResult load_ntriples(std::istream& in, ParseMode mode = ParseMode::Strict);
LoadResult load_ntriples_file(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict);
TripleStore store_from_text(std::string_view text);

}  // namespace kgrec::rdf
