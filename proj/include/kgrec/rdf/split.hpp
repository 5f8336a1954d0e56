#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::rdf {

struct SplitRatios {
    double train = 0.8;
    double valid = 0.1;
    double test = 0.1;
};

struct TripleSplit {
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
    /// Valid/test triples moved to train because a term was unseen there.
    std::size_t reassigned = 0;
};

/// Deterministic shuffle-and-cut. Sizes before reassignment are
/// round(n*valid) and round(n*test), train takes the rest. Any valid/test
/// triple mentioning a subject, predicate or object absent from train is then
/// moved to train, so every held-out term has training signal.
TripleSplit split_triples(std::span<const Triple> triples, const SplitRatios& ratios, std::uint64_t seed);

inline TripleSplit split_triples(const TripleStore& store, const SplitRatios& ratios, std::uint64_t seed) {
    return split_triples(store.triples(), ratios, seed);
}

}  // namespace kgrec::rdf
