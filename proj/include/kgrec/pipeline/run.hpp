#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgrec/ann/hnsw.hpp"
#include "kgrec/kge/model.hpp"
#include "kgrec/kge/trainer.hpp"
#include "kgrec/pipeline/config.hpp"
#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::pipeline {

/// File names inside the output directory.
inline constexpr const char* kCheckpointFile = "model.kge";
inline constexpr const char* kIndexFile = "index.hnsw";
inline constexpr const char* kLossFile = "loss.csv";
inline constexpr const char* kRecommendationsFile = "recommendations.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTimingsFile = "run_timings.json";

/// Throws ConfigError when input_graph is unset, ParseError/DataError otherwise.
rdf::LoadResult load_graph(const PipelineConfig& config);

/// Trains on every relational triple of the store.
kge::EmbeddingModel train_model(const rdf::TripleStore& store, const PipelineConfig& config,
                                kge::LossTrace* loss = nullptr);

/// Index over every entity row of the model.
ann::HnswIndex build_entity_index(const kge::EmbeddingModel& model, const ann::HnswParams& params);

struct TargetOutcome {
    std::string target;
    std::optional<std::string> error;
    std::size_t raw = 0;
    std::size_t gated = 0;
    std::size_t connected = 0;
    std::size_t emitted = 0;
};

struct RunSummary {
    std::filesystem::path recommendations;
    std::filesystem::path manifest;
    std::vector<TargetOutcome> targets;

    [[nodiscard]] std::size_t failed() const;
};

/// Parse, train or load the model, build or load the index, then rank and
/// filter candidates for every target. Writes recommendations.jsonl,
/// manifest.json and run_timings.json (plus model.kge, loss.csv and
/// index.hnsw when they are produced here) into config.output_dir. A
/// target that is missing, untyped or unembedded gets an error record; the
/// run continues. Expects a finalized config.
RunSummary run(const PipelineConfig& config);

struct VerifyReport {
    std::size_t artifacts_checked = 0;
    std::size_t recommendations_checked = 0;
    std::size_t witnesses_checked = 0;
    std::vector<std::string> problems;

    [[nodiscard]] bool ok() const noexcept { return problems.empty(); }
};

/// Re-hashes every artifact named in the manifest and checks that each
/// emitted witness triple is in the input graph, that every recommendation
/// carries evidence and that the per-target counts are consistent.
VerifyReport verify_run(const std::filesystem::path& manifest);

}  // namespace kgrec::pipeline
