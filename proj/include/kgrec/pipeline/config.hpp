#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kgrec/ann/grid_search.hpp"
#include "kgrec/ann/hnsw.hpp"
#include "kgrec/kge/evaluation.hpp"
#include "kgrec/kge/train_config.hpp"
#include "kgrec/rdf/ntriples.hpp"
#include "kgrec/rdf/split.hpp"

namespace kgrec::pipeline {

/// Sizes for the synthetic CIDOC-CRM-shaped graph.
struct SyntheticSpec {
    std::size_t n_persons = 1000;
    std::size_t community_size = 5;
    std::size_t events_per_community = 2;
    std::size_t background_events = 100;
    std::size_t places = 40;
    /// Persons sampled into targets.txt.
    std::size_t n_targets = 100;
    std::uint64_t seed = 42;
};

/// Everything one CLI invocation needs. Section and key names in the INI
/// file mirror the field names below.
struct PipelineConfig {
    // [pipeline]
    std::filesystem::path input_graph;
    std::filesystem::path output_dir = "kgrec-out";
    std::vector<std::string> targets;
    std::filesystem::path targets_file;
    std::size_t raw_k = 100;
    std::size_t top_n = 10;
    std::string filter_config = "builtin";
    std::uint64_t seed = 0;
    std::filesystem::path checkpoint;  // load instead of training when set
    std::filesystem::path index;       // load instead of building when set
    std::string label_predicate = "http://www.w3.org/2000/01/rdf-schema#label";
    rdf::ParseMode parse_mode = rdf::ParseMode::Strict;
    bool deterministic = true;
    std::size_t threads = 0;  // 0: all available workers

    // [train]
    kge::TrainConfig train;
    // [hnsw]
    ann::HnswParams hnsw;
    // [eval]
    rdf::SplitRatios split;
    kge::RankingMode ranking_mode = kge::RankingMode::Filtered;
    // [grid]
    ann::GridSpec grid;
    std::size_t grid_queries = 200;
    std::string grid_source = "model";  // or "random"
    std::size_t grid_vectors = 10000;
    std::size_t grid_dim = 400;
    // [sweep]
    std::vector<double> sweep_lrs{0.001, 0.01};
    std::vector<std::size_t> sweep_dims{100, 200};
    // [compare]
    std::vector<kge::ModelKind> compare_models{kge::ModelKind::ComplEx, kge::ModelKind::TransE};
    // [synth]
    SyntheticSpec synth;

    /// Fills per-module seeds from `seed` and checks cross-field invariants.
    /// Throws ConfigError.
    void finalize();

    /// Flat section.key -> value view of every setting, for manifests.
    [[nodiscard]] std::map<std::string, std::string> snapshot() const;
};

/// Per-module seed offsets: module_seed = seed + offset.
inline constexpr std::uint64_t kSplitSeedOffset = 101;
inline constexpr std::uint64_t kTrainSeedOffset = 202;
inline constexpr std::uint64_t kIndexSeedOffset = 303;
inline constexpr std::uint64_t kGridSeedOffset = 404;

/// Applies one `section.key=value` setting. Unknown keys throw ConfigError.
void apply_setting(PipelineConfig& config, const std::string& dotted_key, const std::string& value);

/// Parses an INI document; unknown sections or keys throw ConfigError.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);

/// Every accepted `section.key`, sorted.
std::vector<std::string> known_keys();

/// Targets from `targets` plus the first column of each targets_file line.
std::vector<std::string> resolve_targets(const PipelineConfig& config);

}  // namespace kgrec::pipeline
