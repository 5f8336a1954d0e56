#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgrec/pipeline/config.hpp"
#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::pipeline {

inline constexpr std::string_view kSyntheticBase = "http://example.org/kgrec/";

struct SyntheticGraph {
    rdf::TripleStore store;
    std::vector<std::string> persons;
    /// community[i] lists the persons planted together; persons left over
    /// after the last full community belong to none.
    std::vector<std::vector<std::string>> communities;
    std::vector<std::string> targets;
};

/// CIDOC-CRM-shaped graph of persons with births, deaths, residences,
/// identifiers and event participation. Each community of community_size
/// persons shares events_per_community events (one participation property
/// per event) plus a production and a document referring to one of those
/// events; background events mix persons at random. Deterministic in spec.
SyntheticGraph generate_synthetic_graph(const SyntheticSpec& spec);

/// Writes graph.nt, communities.tsv (person<TAB>community) and targets.txt.
void write_synthetic_graph(const SyntheticGraph& graph, const std::filesystem::path& dir);

/// Person -> community index, read back from communities.tsv.
std::vector<std::pair<std::string, std::size_t>> read_communities(const std::filesystem::path& path);

}  // namespace kgrec::pipeline
