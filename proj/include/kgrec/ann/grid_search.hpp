#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "kgrec/ann/hnsw.hpp"

namespace kgrec::ann {

struct RetrievalReport {
    HnswParams params;
    std::size_t k = 10;
    double recall_at_k = 0.0;
    double mean_latency_s = 0.0;
    double build_time_s = 0.0;
};

struct GridSpec {
    std::vector<std::size_t> m{8, 16, 32};
    std::vector<std::size_t> ef_construction{100, 200, 400};
    std::vector<std::size_t> ef_search{50, 100, 150, 200, 300};
    std::size_t k = 10;
    std::uint64_t seed = 0;
};

/// |approx ∩ exact| / |exact| per query, averaged. Both lists hold ids.
double recall_at_k(const std::vector<std::vector<Neighbor>>& approx,
                   const std::vector<std::vector<Neighbor>>& exact);

/// Exact neighbor lists for every query row.
std::vector<std::vector<Neighbor>> exact_neighbors(const VectorSet& vectors, std::span<const TermId> ids,
                                                   const VectorSet& queries, std::size_t k);

/// Runs every query against `index`; returns results and mean latency.
std::vector<std::vector<Neighbor>> run_queries(const HnswIndex& index, const VectorSet& queries, std::size_t k,
                                               std::size_t ef_search, double* mean_latency_s);

/// One report per (M, efC, efS) combination, sorted by mean latency
/// ascending. Each (M, efC) index is built once.
std::vector<RetrievalReport> grid_search(const VectorSet& vectors, std::span<const TermId> ids,
                                         const VectorSet& queries, const GridSpec& spec);

/// CSV with header M,efConstruction,efSearch,mean_latency_s,recall_at_k,build_time_s.
void write_grid_csv(std::ostream& out, const std::vector<RetrievalReport>& reports);

}  // namespace kgrec::ann
