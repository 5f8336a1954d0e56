#include "kgrec/ann/grid_search.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <unordered_set>

#include "kgrec/common/error.hpp"

namespace kgrec::ann {

double recall_at_k(const std::vector<std::vector<Neighbor>>& approx,
                   const std::vector<std::vector<Neighbor>>& exact) {
    if (approx.size() != exact.size()) throw Error("recall: query count mismatch");
    if (exact.empty()) return 0.0;
    double total = 0;
    for (std::size_t q = 0; q < exact.size(); ++q) {
        if (exact[q].empty()) continue;
        std::unordered_set<TermId> truth;
        for (const auto& n : exact[q]) truth.insert(n.id);
        std::size_t hit = 0;
        for (const auto& n : approx[q]) hit += truth.count(n.id);
        total += static_cast<double>(hit) / static_cast<double>(exact[q].size());
    }
    return total / static_cast<double>(exact.size());
}

std::vector<std::vector<Neighbor>> exact_neighbors(const VectorSet& vectors, std::span<const TermId> ids,
                                                   const VectorSet& queries, std::size_t k) {
    std::vector<std::vector<Neighbor>> out;
    out.reserve(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) out.push_back(brute_force_knn(vectors, ids, queries.row(q), k));
    return out;
}

std::vector<std::vector<Neighbor>> run_queries(const HnswIndex& index, const VectorSet& queries, std::size_t k,
                                               std::size_t ef_search, double* mean_latency_s) {
    using Clock = std::chrono::steady_clock;
    std::vector<std::vector<Neighbor>> out;
    out.reserve(queries.size());
    const auto start = Clock::now();
    for (std::size_t q = 0; q < queries.size(); ++q) out.push_back(index.search(queries.row(q), k, ef_search));
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    if (mean_latency_s != nullptr) {
        *mean_latency_s = queries.size() == 0 ? 0.0 : elapsed.count() / static_cast<double>(queries.size());
    }
    return out;
}

std::vector<RetrievalReport> grid_search(const VectorSet& vectors, std::span<const TermId> ids,
                                         const VectorSet& queries, const GridSpec& spec) {
    if (spec.m.empty() || spec.ef_construction.empty() || spec.ef_search.empty()) {
        throw ConfigError("grid search needs at least one value per parameter");
    }
    if (spec.k == 0) throw ConfigError("grid search k must be positive");
    for (auto m : spec.m) {
        for (auto efc : spec.ef_construction) {
            for (auto efs : spec.ef_search) HnswParams{m, efc, efs, spec.seed}.validate();
        }
    }

    using Clock = std::chrono::steady_clock;
    const auto exact = exact_neighbors(vectors, ids, queries, spec.k);
    std::vector<RetrievalReport> reports;
    for (auto m : spec.m) {
        for (auto efc : spec.ef_construction) {
            HnswParams params{m, efc, spec.ef_search.front(), spec.seed};
            const auto start = Clock::now();
            const auto index = HnswIndex::build(vectors, ids, params);
            const std::chrono::duration<double> build_time = Clock::now() - start;
            for (auto efs : spec.ef_search) {
                RetrievalReport r;
                r.params = params;
                r.params.ef_search = efs;
                r.k = spec.k;
                r.build_time_s = build_time.count();
                const auto approx = run_queries(index, queries, spec.k, efs, &r.mean_latency_s);
                r.recall_at_k = recall_at_k(approx, exact);
                reports.push_back(r);
            }
        }
    }
    std::stable_sort(reports.begin(), reports.end(), [](const RetrievalReport& a, const RetrievalReport& b) {
        return a.mean_latency_s < b.mean_latency_s;
    });
    return reports;
}

void write_grid_csv(std::ostream& out, const std::vector<RetrievalReport>& reports) {
    out << "M,efConstruction,efSearch,mean_latency_s,recall_at_k,build_time_s\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (const auto& r : reports) {
        out << r.params.m << ',' << r.params.ef_construction << ',' << r.params.ef_search << ',' << r.mean_latency_s
            << ',' << r.recall_at_k << ',' << r.build_time_s << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace kgrec::ann
