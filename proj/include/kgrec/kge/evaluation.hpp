#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kgrec/kge/model.hpp"

namespace kgrec::kge {

enum class RankingMode { Raw, Filtered };

std::string_view to_string(RankingMode mode);
RankingMode parse_ranking_mode(std::string_view name);

struct RankingReport {
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
    /// Tail query then head query for each evaluation triple, in input order.
    std::vector<std::size_t> per_query_ranks;
    RankingMode mode = RankingMode::Filtered;
    double wall_time_s = 0.0;
};

/// Aggregates ranks into MRR and Hits@{1,3,10}.
RankingReport summarize_ranks(std::vector<std::size_t> ranks, RankingMode mode);

/// Link-prediction ranking. For each triple the true tail is ranked against
/// every entity as (h, r, ?) and the true head as (?, r, t). Ties count
/// against the true entity. In filtered mode corruptions that appear in
/// `known` are removed from the competitor list first.
/// Throws DataError on an empty evaluation set.
RankingReport evaluate_ranking(const EmbeddingModel& model, std::span<const IndexedTriple> eval,
                               std::span<const IndexedTriple> known, RankingMode mode = RankingMode::Filtered,
                               std::size_t threads = 1);

/// Scores (h, r, e) for every entity e, and (e, r, t) respectively.
void score_all_tails(const EmbeddingModel& model, std::uint32_t head, std::uint32_t relation, std::span<double> out);
void score_all_heads(const EmbeddingModel& model, std::uint32_t relation, std::uint32_t tail, std::span<double> out);

/// Expected MRR of a scorer that ranks candidates uniformly at random, by
/// enumerating each query's candidate count N: E[1/rank] = H(N) / N.
double random_baseline_mrr(std::size_t n_entities, std::span<const IndexedTriple> eval,
                           std::span<const IndexedTriple> known, RankingMode mode);

}  // namespace kgrec::kge
