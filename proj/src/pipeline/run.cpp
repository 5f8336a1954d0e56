#include "kgrec/pipeline/run.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "kgrec/common/checksum.hpp"
#include "kgrec/common/error.hpp"
#include "kgrec/common/parallel.hpp"
#include "kgrec/filter/semantic_filter.hpp"
#include "kgrec/kge/checkpoint.hpp"
#include "kgrec/kge/dataset.hpp"
#include "kgrec/rdf/vocabulary.hpp"

namespace kgrec::pipeline {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;
using rdf::TermId;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string term_name(const rdf::Term& t) { return t.is_iri() ? t.lexical : rdf::to_ntriples(t); }

/// Smallest label literal in term order, so the choice does not depend on
/// dictionary ids.
Json label_of(const rdf::TripleStore& store, TermId subject, std::optional<TermId> label_predicate) {
    if (!label_predicate) return nullptr;
    const rdf::Term* best = nullptr;
    for (const auto& t : store.match(subject, label_predicate, std::nullopt)) {
        const auto& o = store.resolve(t.o);
        if (!o.is_literal()) continue;
        if (best == nullptr || rdf::compare_terms(o, *best) < 0) best = &o;
    }
    return best == nullptr ? Json(nullptr) : Json(best->lexical);
}

Json triple_json(const rdf::TripleStore& store, const rdf::Triple& t) {
    return Json::array({rdf::to_ntriples(store.resolve(t.s)), rdf::to_ntriples(store.resolve(t.p)),
                        rdf::to_ntriples(store.resolve(t.o))});
}

Json evidence_json(const rdf::TripleStore& store, const filter::Evidence& e) {
    Json steps = Json::array();
    for (const auto& step : e.path.steps) steps.push_back(filter::to_string(filter::PropertyPath{{step}}));
    Json out;
    out["filter"] = e.filter_name;
    out["path"] = std::move(steps);
    out["shared_value"] = e.shared_value ? Json(rdf::to_ntriples(store.resolve(*e.shared_value))) : Json(nullptr);
    if (e.temporal) {
        out["temporal"] = {{"target_date", store.resolve(e.temporal->target_date).lexical},
                           {"candidate_date", store.resolve(e.temporal->candidate_date).lexical},
                           {"delta_years", e.temporal->delta_years}};
    }
    Json witnesses = Json::array();
    for (const auto& w : e.witnesses) witnesses.push_back(triple_json(store, w));
    out["witnesses"] = std::move(witnesses);
    return out;
}

Json artifact(const fs::path& file, const fs::path& recorded) {
    return {{"path", recorded.generic_string()}, {"sha256", sha256_file(file)}};
}

/// Runs one stage, prefixing any failure with the stage name.
template <typename F>
auto stage(const char* name, F&& body) {
    const auto prefix = std::string(name) + " stage: ";
    try {
        return body();
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const Error& e) {
        throw Error(prefix + e.what());
    }
}

struct TargetWork {
    TargetOutcome outcome;
    Json record;
};

}  // namespace

std::size_t RunSummary::failed() const {
    return static_cast<std::size_t>(
        std::count_if(targets.begin(), targets.end(), [](const TargetOutcome& t) { return t.error.has_value(); }));
}

rdf::LoadResult load_graph(const PipelineConfig& config) {
    if (config.input_graph.empty()) throw ConfigError("pipeline.input_graph is not set");
    auto result = rdf::load_ntriples_file(config.input_graph, config.parse_mode);
    spdlog::info("loaded {} triples from {} ({} skipped, {} duplicates)", result.store.size(),
                 config.input_graph.string(), result.stats.skipped, result.stats.duplicates);
    return result;
}

kge::EmbeddingModel train_model(const rdf::TripleStore& store, const PipelineConfig& config, kge::LossTrace* loss) {
    const auto relational = kge::relational_triples(store);
    if (relational.empty()) throw DataError("graph has no relational triples to train on");
    auto vocab = kge::collect_vocabulary(relational);
    auto model = kge::init_model(config.train, std::move(vocab.entities), std::move(vocab.relations));
    const auto rows = kge::index_triples(model, relational);
    spdlog::info("training {} dim={} on {} triples, {} entities, {} relations", kge::to_string(config.train.model),
                 config.train.dim, rows.size(), model.n_entities(), model.n_relations());
    auto trace = kge::train(model, rows, config.train, [](const kge::EpochRecord& e) {
        spdlog::debug("epoch {}: loss {:.6f}", e.epoch, e.mean_loss);
    });
    if (loss != nullptr) *loss = std::move(trace);
    return model;
}

ann::HnswIndex build_entity_index(const kge::EmbeddingModel& model, const ann::HnswParams& params) {
    ann::VectorSet vectors{model.width(), model.entity_params()};
    return ann::HnswIndex::build(vectors, model.entity_ids(), params);
}

RunSummary run(const PipelineConfig& config) {
    const auto total_start = Clock::now();
    Json timings;
    Json artifacts;
    Json counts;
    const fs::path out_dir = config.output_dir;

    auto start = Clock::now();
    auto loaded = stage("parse", [&] { return load_graph(config); });
    fs::create_directories(out_dir);
    const auto& store = loaded.store;
    timings["parse_s"] = seconds_since(start);
    counts["triples"] = store.size();
    counts["skipped_lines"] = loaded.stats.skipped;
    counts["duplicates"] = loaded.stats.duplicates;
    counts["relational_triples"] = kge::relational_triples(store).size();

    std::optional<ann::HnswIndex> index;
    if (!config.index.empty()) {
        start = Clock::now();
        index = stage("index", [&] { return ann::HnswIndex::load(config.index); });
        timings["load_index_s"] = seconds_since(start);
        artifacts["index"] = artifact(config.index, fs::absolute(config.index));
    } else {
        start = Clock::now();
        std::optional<kge::EmbeddingModel> model;
        if (!config.checkpoint.empty()) {
            model = stage("model", [&] { return kge::load_checkpoint(config.checkpoint); });
            timings["load_model_s"] = seconds_since(start);
            artifacts["checkpoint"] = artifact(config.checkpoint, fs::absolute(config.checkpoint));
        } else {
            kge::LossTrace loss;
            model = stage("train", [&] { return train_model(store, config, &loss); });
            timings["train_s"] = seconds_since(start);
            kge::save_checkpoint(*model, out_dir / kCheckpointFile);
            artifacts["checkpoint"] = artifact(out_dir / kCheckpointFile, kCheckpointFile);
            std::ofstream loss_out(out_dir / kLossFile, std::ios::binary);
            kge::write_loss_csv(loss_out, loss);
        }
        counts["entities"] = model->n_entities();
        counts["relations"] = model->n_relations();
        start = Clock::now();
        index = stage("index", [&] { return build_entity_index(*model, config.hnsw); });
        timings["index_s"] = seconds_since(start);
        index->save(out_dir / kIndexFile);
        artifacts["index"] = artifact(out_dir / kIndexFile, kIndexFile);
    }
    counts["indexed_entities"] = index->size();

    const auto filters = stage("filter", [&] { return filter::resolve_filter_config(config.filter_config); });
    if (config.filter_config != "builtin") {
        artifacts["filter_config"] = artifact(config.filter_config, fs::absolute(config.filter_config));
    }
    const auto targets = resolve_targets(config);
    if (targets.empty()) throw ConfigError("no targets given (pipeline.targets or pipeline.targets_file)");

    std::unordered_map<TermId, std::uint32_t> node_of;
    for (std::uint32_t n = 0; n < index->size(); ++n) node_of.emplace(index->id(n), n);
    std::vector<TermId> allowed_ids;
    for (const auto& c : filters.allowed_classes) {
        if (auto id = store.lookup_iri(c)) allowed_ids.push_back(*id);
    }
    const auto label_predicate = store.lookup_iri(config.label_predicate);
    const std::size_t fetch = config.raw_k + 1;
    const std::size_t ef = std::max(config.hnsw.ef_search, fetch);

    start = Clock::now();
    std::vector<TargetWork> work(targets.size());
    auto process = [&](std::size_t i) {
        auto& [outcome, record] = work[i];
        outcome.target = targets[i];
        record["target"] = targets[i];
        const auto id = store.lookup_iri(targets[i]);
        record["target_label"] = id ? label_of(store, *id, label_predicate) : Json(nullptr);
        record["recommendations"] = Json::array();
        filter::FilterDiagnostics diag;
        auto fail = [&](std::string message) {
            outcome.error = message;
            record["diagnostics"] = {{"raw_k", 0}, {"gated", 0}, {"connected", 0}, {"unparseable_dates", 0}};
            record["error"] = std::move(message);
        };
        if (!id || store.match(*id, std::nullopt, std::nullopt).empty()) return fail("target not found in graph");
        if (!store.has_type(*id, allowed_ids)) return fail("target is not typed with an allowed actor class");
        const auto node = node_of.find(*id);
        if (node == node_of.end()) return fail("target has no embedding in the index");

        auto neighbors = index->search(index->vector(node->second), fetch, ef);
        std::erase_if(neighbors, [&](const ann::Neighbor& n) { return n.id == *id; });
        if (neighbors.size() > config.raw_k) neighbors.resize(config.raw_k);
        std::vector<filter::Candidate> candidates;
        for (const auto& n : neighbors) candidates.push_back({n.id, n.similarity});
        outcome.raw = candidates.size();
        outcome.gated = filter::type_gate(store, candidates, filters.allowed_classes).size();
        auto recs = filter::filter_candidates(store, *id, candidates, filters.specs, filters.allowed_classes, &diag);
        outcome.connected = recs.size();
        if (recs.size() > config.top_n) recs.resize(config.top_n);
        outcome.emitted = recs.size();

        for (const auto& r : recs) {
            Json evidence = Json::array();
            for (const auto& e : r.evidence) evidence.push_back(evidence_json(store, e));
            Json rec;
            rec["iri"] = term_name(store.resolve(r.candidate));
            rec["label"] = label_of(store, r.candidate, label_predicate);
            rec["similarity"] = r.similarity;
            rec["rank"] = r.rank;
            rec["evidence"] = std::move(evidence);
            record["recommendations"].push_back(std::move(rec));
        }
        record["diagnostics"] = {{"raw_k", outcome.raw},
                                 {"gated", outcome.gated},
                                 {"connected", outcome.connected},
                                 {"unparseable_dates", diag.unparseable_dates}};
    };
    const std::size_t workers = config.deterministic ? 1 : config.threads;
    parallel_for(targets.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) process(i);
    });
    timings["recommend_s"] = seconds_since(start);

    RunSummary summary;
    summary.recommendations = out_dir / kRecommendationsFile;
    {
        std::ofstream jsonl(summary.recommendations, std::ios::binary);
        if (!jsonl) throw ConfigError("cannot write " + summary.recommendations.string());
        for (const auto& w : work) jsonl << w.record.dump() << '\n';
    }
    artifacts["recommendations"] = artifact(summary.recommendations, kRecommendationsFile);

    Json target_rows = Json::array();
    for (auto& w : work) {
        Json row;
        row["target"] = w.outcome.target;
        row["status"] = w.outcome.error ? "error" : "ok";
        if (w.outcome.error) row["error"] = *w.outcome.error;
        row["raw_k"] = w.outcome.raw;
        row["gated"] = w.outcome.gated;
        row["connected"] = w.outcome.connected;
        row["emitted"] = w.outcome.emitted;
        target_rows.push_back(std::move(row));
        summary.targets.push_back(std::move(w.outcome));
    }
    counts["targets"] = summary.targets.size();
    counts["failed_targets"] = summary.failed();

    Json filter_names = Json::array();
    for (const auto& s : filters.specs) filter_names.push_back(s.name);

    Json manifest;
    manifest["format"] = "kgrec-run-1";
    manifest["config"] = config.snapshot();
    manifest["input_graph"] = artifact(config.input_graph, fs::absolute(config.input_graph));
    manifest["artifacts"] = std::move(artifacts);
    manifest["counts"] = std::move(counts);
    manifest["filters"] = std::move(filter_names);
    manifest["targets"] = std::move(target_rows);
    manifest["resource_metrics"] = {{"wall_time", kTimingsFile},
                                    {"memory", "not recorded: platform-specific and not reproducible"}};
    summary.manifest = out_dir / kManifestFile;
    {
        std::ofstream out(summary.manifest, std::ios::binary);
        out << manifest.dump(2) << '\n';
    }
    timings["total_s"] = seconds_since(total_start);
    std::ofstream(out_dir / kTimingsFile, std::ios::binary) << timings.dump(2) << '\n';
    spdlog::info("wrote {} records ({} failed) to {}", summary.targets.size(), summary.failed(),
                 summary.recommendations.string());
    return summary;
}

VerifyReport verify_run(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open manifest " + manifest_path.string());
    Json manifest;
    try {
        manifest = Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError("manifest is not valid JSON: " + std::string(e.what()));
    }
    const fs::path base = manifest_path.parent_path();
    auto resolve = [&](const Json& entry) {
        const fs::path p = entry.at("path").get<std::string>();
        return p.is_absolute() ? p : base / p;
    };

    VerifyReport report;
    auto check = [&](const std::string& name, const Json& entry) {
        ++report.artifacts_checked;
        const auto file = resolve(entry);
        if (!fs::exists(file)) {
            report.problems.push_back(name + ": file missing: " + file.string());
            return false;
        }
        if (sha256_file(file) != entry.at("sha256").get<std::string>()) {
            report.problems.push_back(name + ": checksum mismatch: " + file.string());
            return false;
        }
        return true;
    };

    try {
        check("input_graph", manifest.at("input_graph"));
        for (const auto& [name, entry] : manifest.at("artifacts").items()) check(name, entry);

        const auto& config = manifest.at("config");
        PipelineConfig graph_config;
        graph_config.input_graph = resolve(manifest.at("input_graph"));
        apply_setting(graph_config, "pipeline.parse_mode", config.at("pipeline.parse_mode").get<std::string>());
        const auto raw_k = std::stoull(config.at("pipeline.raw_k").get<std::string>());
        const auto top_n = std::stoull(config.at("pipeline.top_n").get<std::string>());
        const auto store = load_graph(graph_config).store;

        auto term_id = [&](const std::string& nt) -> std::optional<TermId> {
            auto parsed = rdf::parse_ntriples_line("<urn:s> <urn:p> " + nt + " .", 1);
            return parsed ? store.lookup(parsed->object) : std::nullopt;
        };

        std::ifstream jsonl(resolve(manifest.at("artifacts").at("recommendations")));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(jsonl, line)) {
            ++line_no;
            const auto record = Json::parse(line);
            const auto where = "record " + std::to_string(line_no) + " (" + record.at("target").get<std::string>() + ")";
            if (record.contains("error")) continue;
            const auto& d = record.at("diagnostics");
            const auto raw = d.at("raw_k").get<std::size_t>();
            const auto gated = d.at("gated").get<std::size_t>();
            const auto connected = d.at("connected").get<std::size_t>();
            const auto& recs = record.at("recommendations");
            if (!(connected <= gated && gated <= raw && raw <= raw_k)) {
                report.problems.push_back(where + ": inconsistent candidate counts");
            }
            if (recs.size() > std::min<std::size_t>(top_n, connected)) {
                report.problems.push_back(where + ": more recommendations than allowed");
            }
            for (const auto& rec : recs) {
                ++report.recommendations_checked;
                const auto& evidence = rec.at("evidence");
                if (evidence.empty()) {
                    report.problems.push_back(where + ": " + rec.at("iri").get<std::string>() + " has no evidence");
                }
                for (const auto& e : evidence) {
                    for (const auto& w : e.at("witnesses")) {
                        ++report.witnesses_checked;
                        const auto s = term_id(w.at(0).get<std::string>());
                        const auto p = term_id(w.at(1).get<std::string>());
                        const auto o = term_id(w.at(2).get<std::string>());
                        if (!s || !p || !o || !store.contains({*s, *p, *o})) {
                            report.problems.push_back(where + ": witness not in graph: " + w.dump());
                        }
                    }
                }
            }
        }
    } catch (const Json::exception& e) {
        report.problems.push_back(std::string("malformed run output: ") + e.what());
    } catch (const ParseError& e) {
        report.problems.push_back(std::string("unparseable term: ") + e.what());
    }
    return report;
}

}  // namespace kgrec::pipeline
