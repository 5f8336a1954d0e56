#include "kgrec/rdf/triple_store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include "kgrec/common/error.hpp"
#include "kgrec/rdf/vocabulary.hpp"

namespace kgrec::rdf {

TermId Dictionary::intern(const Term& term) {
    if (auto it = ids_.find(term); it != ids_.end()) return it->second;
    if (terms_.size() >= std::numeric_limits<TermId>::max()) throw DataError("term dictionary full");
    auto id = static_cast<TermId>(terms_.size());
    terms_.push_back(term);
    ids_.emplace(term, id);
    return id;
}

std::optional<TermId> Dictionary::lookup(const Term& term) const {
    if (auto it = ids_.find(term); it != ids_.end()) return it->second;
    return std::nullopt;
}

const Term& Dictionary::resolve(TermId id) const {
    if (id >= terms_.size()) throw DataError("unknown term id " + std::to_string(id));
    return terms_[id];
}

void Dictionary::dump_tsv(std::ostream& out) const {
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        out << i << '\t' << to_string(terms_[i].kind) << '\t' << terms_[i].lexical << '\n';
    }
}

namespace {

// Key projections for the three orders.
struct SpoLess {
    bool operator()(const Triple& a, const Triple& b) const {
        return std::tie(a.s, a.p, a.o) < std::tie(b.s, b.p, b.o);
    }
};
struct PosLess {
    bool operator()(const Triple& a, const Triple& b) const {
        return std::tie(a.p, a.o, a.s) < std::tie(b.p, b.o, b.s);
    }
};
struct OspLess {
    bool operator()(const Triple& a, const Triple& b) const {
        return std::tie(a.o, a.s, a.p) < std::tie(b.o, b.s, b.p);
    }
};

// Compares only the first `depth` key components of the given order, so
// equal_range over it yields the prefix slice.
template <typename Proj>
struct PrefixLess {
    int depth;
    Proj proj;
    bool operator()(const Triple& a, const Triple& b) const {
        auto ka = proj(a);
        auto kb = proj(b);
        for (int i = 0; i < depth; ++i) {
            if (ka[i] != kb[i]) return ka[i] < kb[i];
        }
        return false;
    }
};

template <typename Proj>
std::span<const Triple> prefix_range(const std::vector<Triple>& index, const Triple& probe, int depth,
                                     Proj proj) {
    if (depth == 0) return index;
    auto [lo, hi] = std::equal_range(index.begin(), index.end(), probe, PrefixLess<Proj>{depth, proj});
    return {lo, hi};
}

}  // namespace

std::optional<TermId> TripleStore::lookup_iri(std::string_view iri) const {
    return dict_.lookup(Term::iri(std::string(iri)));
}

std::span<const Triple> TripleStore::index(IndexOrder order) const noexcept {
    switch (order) {
        case IndexOrder::Spo: return spo_;
        case IndexOrder::Pos: return pos_;
        case IndexOrder::Osp: return osp_;
    }
    return spo_;
}

std::span<const Triple> TripleStore::match(std::optional<TermId> s, std::optional<TermId> p,
                                           std::optional<TermId> o) const {
    const Triple probe{s.value_or(0), p.value_or(0), o.value_or(0)};
    auto spo = [](const Triple& t) { return std::array<TermId, 3>{t.s, t.p, t.o}; };
    auto pos = [](const Triple& t) { return std::array<TermId, 3>{t.p, t.o, t.s}; };
    auto osp = [](const Triple& t) { return std::array<TermId, 3>{t.o, t.s, t.p}; };

    // Every bound-position pattern is a prefix of exactly one rotation.
    if (s && p && o) return prefix_range(spo_, probe, 3, spo);
    if (s && p) return prefix_range(spo_, probe, 2, spo);
    if (s && o) return prefix_range(osp_, probe, 2, osp);
    if (p && o) return prefix_range(pos_, probe, 2, pos);
    if (s) return prefix_range(spo_, probe, 1, spo);
    if (p) return prefix_range(pos_, probe, 1, pos);
    if (o) return prefix_range(osp_, probe, 1, osp);
    return spo_;
}

bool TripleStore::contains(const Triple& t) const {
    return std::binary_search(spo_.begin(), spo_.end(), t, SpoLess{});
}

bool TripleStore::has_type(TermId subject, std::span<const TermId> classes) const {
    if (!rdf_type_) return false;
    for (const Triple& t : match(subject, *rdf_type_, std::nullopt)) {
        if (std::find(classes.begin(), classes.end(), t.o) != classes.end()) return true;
    }
    return false;
}

std::vector<TermId> TripleStore::instances_of(std::span<const TermId> classes) const {
    std::vector<TermId> out;
    if (!rdf_type_) return out;
    for (TermId c : classes) {
        for (const Triple& t : match(std::nullopt, *rdf_type_, c)) out.push_back(t.s);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void TripleStore::write_ntriples(std::ostream& out) const {
    for (const Triple& t : spo_) {
        write_ntriples_line(out, dict_.resolve(t.s), dict_.resolve(t.p), dict_.resolve(t.o));
    }
}

void TripleStore::Builder::add(const Term& s, const Term& p, const Term& o) {
    if (!s.is_resource()) throw DataError("subject must be an IRI or blank node");
    if (!p.is_iri()) throw DataError("predicate must be an IRI");
    pending_.push_back({dict_.intern(s), dict_.intern(p), dict_.intern(o)});
}

TripleStore TripleStore::Builder::build(std::size_t* duplicates) && {
    TripleStore store;
    std::sort(pending_.begin(), pending_.end(), SpoLess{});
    const std::size_t before = pending_.size();
    pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
    if (duplicates != nullptr) *duplicates = before - pending_.size();

    store.spo_ = std::move(pending_);
    store.pos_ = store.spo_;
    std::sort(store.pos_.begin(), store.pos_.end(), PosLess{});
    store.osp_ = store.spo_;
    std::sort(store.osp_.begin(), store.osp_.end(), OspLess{});
    store.dict_ = std::move(dict_);
    store.rdf_type_ = store.dict_.lookup(Term::iri(std::string(vocab::kRdfType)));
    return store;
}

LoadResult load_ntriples(std::istream& in, ParseMode mode) {
    TripleStore::Builder builder;
    auto stats = parse_ntriples(in, mode, [&builder](TermTriple&& t) { builder.add(t); });
    LoadResult result;
    result.store = std::move(builder).build(&stats.duplicates);
    result.stats = std::move(stats);
    return result;
}

LoadResult load_ntriples_file(const std::filesystem::path& path, ParseMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open graph file " + path.string());
    return load_ntriples(in, mode);
}

TripleStore store_from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_ntriples(in, ParseMode::Strict).store;
}

}  // namespace kgrec::rdf
