#pragma once

// Scan-based reference implementations for the semantic filter. They use
// only store.triples() and term resolution, never the indexed match().

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "kgrec/filter/filter_spec.hpp"
#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::testing {

using rdf::TermId;
using rdf::Triple;

/// Listing-1 rows (candidate, property, value) by nested loops over all triples.
inline std::vector<std::tuple<TermId, TermId, TermId>> listing_rows_oracle(const rdf::TripleStore& store,
                                                                           TermId target,
                                                                           const std::vector<TermId>& candidates,
                                                                           const std::vector<TermId>& properties) {
    std::set<std::tuple<TermId, TermId, TermId>> rows;
    for (const Triple& a : store.triples()) {
        if (a.s != target) continue;
        if (std::find(properties.begin(), properties.end(), a.p) == properties.end()) continue;
        for (const Triple& b : store.triples()) {
            if (b.p != a.p || b.o != a.o) continue;
            if (std::find(candidates.begin(), candidates.end(), b.s) == candidates.end() || b.s == target) continue;
            rows.insert({b.s, a.p, a.o});
        }
    }
    return {rows.begin(), rows.end()};
}

/// All chains from `start` along `path`, found by scanning every triple at each hop.
inline std::vector<std::vector<Triple>> enumerate_chains(const rdf::TripleStore& store, TermId start,
                                                         const filter::PropertyPath& path, std::vector<TermId>* ends) {
    struct Partial {
        TermId at;
        std::vector<Triple> triples;
    };
    std::vector<Partial> frontier{{start, {}}};
    for (const auto& step : path.steps) {
        std::vector<Partial> next;
        for (const auto& p : frontier) {
            for (const Triple& t : store.triples()) {
                if (store.resolve(t.p).lexical != step.predicate) continue;
                if (step.direction == filter::Direction::Forward && t.s == p.at) {
                    auto tr = p.triples;
                    tr.push_back(t);
                    next.push_back({t.o, tr});
                } else if (step.direction == filter::Direction::Inverse && t.o == p.at) {
                    auto tr = p.triples;
                    tr.push_back(t);
                    next.push_back({t.s, tr});
                }
            }
        }
        frontier = std::move(next);
    }
    std::vector<std::vector<Triple>> out;
    for (auto& p : frontier) {
        if (ends != nullptr) ends->push_back(p.at);
        out.push_back(std::move(p.triples));
    }
    return out;
}

/// Shared terminal values and their witness sets, per candidate.
inline std::map<TermId, std::map<TermId, std::set<Triple>>> path_oracle(const rdf::TripleStore& store, TermId target,
                                                                        const std::vector<TermId>& candidates,
                                                                        const filter::PropertyPath& path) {
    std::vector<TermId> target_ends;
    const auto target_chains = enumerate_chains(store, target, path, &target_ends);
    std::map<TermId, std::map<TermId, std::set<Triple>>> out;
    for (TermId c : candidates) {
        if (c == target) continue;
        std::vector<TermId> ends;
        const auto chains = enumerate_chains(store, c, path, &ends);
        for (std::size_t i = 0; i < chains.size(); ++i) {
            if (std::find(target_ends.begin(), target_ends.end(), ends[i]) == target_ends.end()) continue;
            auto& w = out[c][ends[i]];
            w.insert(chains[i].begin(), chains[i].end());
            for (std::size_t j = 0; j < target_chains.size(); ++j) {
                if (target_ends[j] == ends[i]) w.insert(target_chains[j].begin(), target_chains[j].end());
            }
        }
    }
    return out;
}

inline bool has_type_oracle(const rdf::TripleStore& store, TermId node, const std::string& cls) {
    for (const Triple& t : store.triples()) {
        if (t.s == node && store.resolve(t.p).lexical == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type" &&
            store.resolve(t.o).lexical == cls) {
            return true;
        }
    }
    return false;
}

}  // namespace kgrec::testing
