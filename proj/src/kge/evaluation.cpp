#include "kgrec/kge/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <unordered_map>

#include "kgrec/common/error.hpp"
#include "kgrec/common/parallel.hpp"

namespace kgrec::kge {

std::string_view to_string(RankingMode mode) { return mode == RankingMode::Raw ? "raw" : "filtered"; }

RankingMode parse_ranking_mode(std::string_view name) {
    if (name == "raw") return RankingMode::Raw;
    if (name == "filtered") return RankingMode::Filtered;
    throw ConfigError("unknown ranking mode '" + std::string(name) + "' (expected raw or filtered)");
}

RankingReport summarize_ranks(std::vector<std::size_t> ranks, RankingMode mode) {
    RankingReport report;
    report.mode = mode;
    if (ranks.empty()) return report;
    double rr = 0;
    std::size_t h1 = 0, h3 = 0, h10 = 0;
    for (auto r : ranks) {
        rr += 1.0 / static_cast<double>(r);
        h1 += r <= 1;
        h3 += r <= 3;
        h10 += r <= 10;
    }
    const auto n = static_cast<double>(ranks.size());
    report.mrr = rr / n;
    report.hits1 = static_cast<double>(h1) / n;
    report.hits3 = static_cast<double>(h3) / n;
    report.hits10 = static_cast<double>(h10) / n;
    report.per_query_ranks = std::move(ranks);
    return report;
}

void score_all_tails(const EmbeddingModel& model, std::uint32_t head, std::uint32_t relation, std::span<double> out) {
    auto h = model.entity_row(head);
    auto r = model.relation_row(relation);
    const std::size_t w = model.width();
    if (model.kind() == ModelKind::ComplEx) {
        // score(h, r, e) = <q, e> with q = (Re(h*r), Im(h*r)).
        const std::size_t d = w / 2;
        std::vector<double> q(w);
        for (std::size_t k = 0; k < d; ++k) {
            q[k] = h[k] * r[k] - h[d + k] * r[d + k];
            q[d + k] = h[d + k] * r[k] + h[k] * r[d + k];
        }
        for (std::size_t e = 0; e < model.n_entities(); ++e) {
            auto row = model.entity_row(e);
            double s = 0;
            for (std::size_t k = 0; k < w; ++k) s += q[k] * row[k];
            out[e] = s;
        }
    } else {
        std::vector<double> q(w);
        for (std::size_t k = 0; k < w; ++k) q[k] = h[k] + r[k];
        for (std::size_t e = 0; e < model.n_entities(); ++e) {
            auto row = model.entity_row(e);
            double s = 0;
            for (std::size_t k = 0; k < w; ++k) s += std::abs(q[k] - row[k]);
            out[e] = -s;
        }
    }
}

void score_all_heads(const EmbeddingModel& model, std::uint32_t relation, std::uint32_t tail, std::span<double> out) {
    auto r = model.relation_row(relation);
    auto t = model.entity_row(tail);
    const std::size_t w = model.width();
    if (model.kind() == ModelKind::ComplEx) {
        // score(e, r, t) = <q, e> with q_re = r_re t_re + r_im t_im, q_im = r_re t_im - r_im t_re.
        const std::size_t d = w / 2;
        std::vector<double> q(w);
        for (std::size_t k = 0; k < d; ++k) {
            q[k] = r[k] * t[k] + r[d + k] * t[d + k];
            q[d + k] = r[k] * t[d + k] - r[d + k] * t[k];
        }
        for (std::size_t e = 0; e < model.n_entities(); ++e) {
            auto row = model.entity_row(e);
            double s = 0;
            for (std::size_t k = 0; k < w; ++k) s += q[k] * row[k];
            out[e] = s;
        }
    } else {
        std::vector<double> q(w);
        for (std::size_t k = 0; k < w; ++k) q[k] = t[k] - r[k];
        for (std::size_t e = 0; e < model.n_entities(); ++e) {
            auto row = model.entity_row(e);
            double s = 0;
            for (std::size_t k = 0; k < w; ++k) s += std::abs(row[k] - q[k]);
            out[e] = -s;
        }
    }
}

namespace {

std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

// Known answers per (head, relation) and per (relation, tail), sorted.
struct KnownIndex {
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> tails;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> heads;

    explicit KnownIndex(std::span<const IndexedTriple> known) {
        for (const auto& t : known) {
            tails[pair_key(t.head, t.relation)].push_back(t.tail);
            heads[pair_key(t.relation, t.tail)].push_back(t.head);
        }
        for (auto* m : {&tails, &heads}) {
            for (auto& [_, v] : *m) {
                std::sort(v.begin(), v.end());
                v.erase(std::unique(v.begin(), v.end()), v.end());
            }
        }
    }

    static const std::vector<std::uint32_t>& find(const std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>& m,
                                                  std::uint64_t key) {
        static const std::vector<std::uint32_t> kEmpty;
        auto it = m.find(key);
        return it == m.end() ? kEmpty : it->second;
    }
};

// Pessimistic rank: 1 + competitors scoring >= the true entity, skipping
// filtered-out entities (sorted) and the true entity itself.
std::size_t rank_of(std::span<const double> scores, std::uint32_t truth, const std::vector<std::uint32_t>& skip) {
    const double target = scores[truth];
    std::size_t rank = 1;
    for (std::size_t e = 0; e < scores.size(); ++e) {
        if (e != truth && scores[e] >= target) ++rank;
    }
    for (auto e : skip) {
        if (e != truth && scores[e] >= target) --rank;
    }
    return rank;
}

}  // namespace

RankingReport evaluate_ranking(const EmbeddingModel& model, std::span<const IndexedTriple> eval,
                               std::span<const IndexedTriple> known, RankingMode mode, std::size_t threads) {
    if (eval.empty()) throw DataError("evaluation set is empty");
    const auto started = std::chrono::steady_clock::now();
    for (const auto& t : eval) {
        if (t.head >= model.n_entities() || t.tail >= model.n_entities() || t.relation >= model.n_relations()) {
            throw DataError("evaluation triple references an unknown row");
        }
    }

    const KnownIndex index(mode == RankingMode::Filtered ? known : std::span<const IndexedTriple>{});
    const std::vector<std::uint32_t> none;
    std::vector<std::size_t> ranks(2 * eval.size());

    parallel_for(eval.size(), threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> scores(model.n_entities());
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& t = eval[i];
            const bool filtered = mode == RankingMode::Filtered;
            score_all_tails(model, t.head, t.relation, scores);
            ranks[2 * i] = rank_of(scores, t.tail, filtered ? KnownIndex::find(index.tails, pair_key(t.head, t.relation)) : none);
            score_all_heads(model, t.relation, t.tail, scores);
            ranks[2 * i + 1] = rank_of(scores, t.head, filtered ? KnownIndex::find(index.heads, pair_key(t.relation, t.tail)) : none);
        }
    });

    auto report = summarize_ranks(std::move(ranks), mode);
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

double random_baseline_mrr(std::size_t n_entities, std::span<const IndexedTriple> eval,
                           std::span<const IndexedTriple> known, RankingMode mode) {
    if (eval.empty()) throw DataError("evaluation set is empty");
    const KnownIndex index(mode == RankingMode::Filtered ? known : std::span<const IndexedTriple>{});
    std::vector<double> harmonic(n_entities + 1, 0.0);
    for (std::size_t k = 1; k <= n_entities; ++k) harmonic[k] = harmonic[k - 1] + 1.0 / static_cast<double>(k);

    auto expected_rr = [&](std::uint32_t truth, const std::vector<std::uint32_t>& skip) {
        std::size_t removed = 0;
        for (auto e : skip) removed += e != truth;
        const std::size_t candidates = n_entities - removed;
        return harmonic[candidates] / static_cast<double>(candidates);
    };
    double total = 0;
    for (const auto& t : eval) {
        total += expected_rr(t.tail, KnownIndex::find(index.tails, pair_key(t.head, t.relation)));
        total += expected_rr(t.head, KnownIndex::find(index.heads, pair_key(t.relation, t.tail)));
    }
    return total / static_cast<double>(2 * eval.size());
}

}  // namespace kgrec::kge
