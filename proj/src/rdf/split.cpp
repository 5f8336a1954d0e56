#include "kgrec/rdf/split.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kgrec/common/error.hpp"
#include "kgrec/common/random.hpp"

namespace kgrec::rdf {

TripleSplit split_triples(std::span<const Triple> triples, const SplitRatios& ratios, std::uint64_t seed) {
    if (ratios.train <= 0 || ratios.valid <= 0 || ratios.test <= 0) {
        throw ConfigError("split ratios must be positive");
    }
    if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1");
    }

    const std::size_t n = triples.size();
    const auto n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.valid));
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.test));
    if (n_valid == 0 || n_test == 0 || n_valid + n_test >= n) {
        throw DataError("store too small to split: " + std::to_string(n) + " triples");
    }
    const std::size_t n_train = n - n_valid - n_test;

    std::vector<Triple> order(triples.begin(), triples.end());
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());

    TripleSplit split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));

    TermId max_id = 0;
    for (const Triple& t : order) max_id = std::max({max_id, t.s, t.p, t.o});
    std::vector<bool> seen_entity(static_cast<std::size_t>(max_id) + 1, false);
    std::vector<bool> seen_relation(static_cast<std::size_t>(max_id) + 1, false);
    auto cover = [&](const Triple& t) {
        seen_entity[t.s] = true;
        seen_entity[t.o] = true;
        seen_relation[t.p] = true;
    };
    for (const Triple& t : split.train) cover(t);

    auto assign = [&](auto first, auto last, std::vector<Triple>& dest) {
        for (auto it = first; it != last; ++it) {
            if (seen_entity[it->s] && seen_entity[it->o] && seen_relation[it->p]) {
                dest.push_back(*it);
            } else {
                split.train.push_back(*it);
                cover(*it);
                ++split.reassigned;
            }
        }
    };
    auto valid_begin = order.begin() + static_cast<std::ptrdiff_t>(n_train);
    auto test_begin = valid_begin + static_cast<std::ptrdiff_t>(n_valid);
    assign(valid_begin, test_begin, split.valid);
    assign(test_begin, order.end(), split.test);
    return split;
}

}  // namespace kgrec::rdf
