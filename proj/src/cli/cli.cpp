#include "kgrec/cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgrec/ann/grid_search.hpp"
#include "kgrec/common/checksum.hpp"
#include "kgrec/common/error.hpp"
#include "kgrec/common/random.hpp"
#include "kgrec/kge/checkpoint.hpp"
#include "kgrec/kge/dataset.hpp"
#include "kgrec/kge/trainer.hpp"
#include "kgrec/pipeline/config.hpp"
#include "kgrec/pipeline/experiments.hpp"
#include "kgrec/pipeline/run.hpp"
#include "kgrec/pipeline/synthetic.hpp"

namespace kgrec::cli {
namespace {

namespace fs = std::filesystem;
using pipeline::PipelineConfig;
using Json = nlohmann::ordered_json;

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    bool strict = false;
    bool lenient = false;
    bool deterministic = false;
    bool parallel = false;
    std::optional<std::uint64_t> seed;
    std::string output_dir;
    int verbosity = 0;
    std::string manifest;
};

PipelineConfig build_config(const Options& opt) {
    PipelineConfig config;
    if (!opt.config_path.empty()) config = pipeline::load_config(opt.config_path);
    for (const auto& o : opt.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + o + "'");
        pipeline::apply_setting(config, o.substr(0, eq), o.substr(eq + 1));
    }
    if (opt.strict) config.parse_mode = rdf::ParseMode::Strict;
    if (opt.lenient) config.parse_mode = rdf::ParseMode::Lenient;
    if (opt.deterministic) config.deterministic = true;
    if (opt.parallel) config.deterministic = false;
    if (opt.seed) config.seed = *opt.seed;
    if (!opt.output_dir.empty()) config.output_dir = opt.output_dir;
    config.finalize();
    return config;
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

/// The checkpoint named in the config, else the one `train` leaves in the
/// output directory.
fs::path checkpoint_path(const PipelineConfig& config) {
    if (!config.checkpoint.empty()) return config.checkpoint;
    auto p = config.output_dir / pipeline::kCheckpointFile;
    if (!fs::exists(p)) throw ConfigError("no checkpoint: set pipeline.checkpoint or run 'train' first");
    return p;
}

int cmd_ingest(const PipelineConfig& config, std::ostream& out) {
    auto loaded = pipeline::load_graph(config);
    const auto relational = kge::relational_triples(loaded.store);
    const auto vocab = kge::collect_vocabulary(relational);
    Json report;
    report["input_graph"] = fs::absolute(config.input_graph).string();
    report["sha256"] = sha256_file(config.input_graph);
    report["lines"] = loaded.stats.lines;
    report["triples"] = loaded.store.size();
    report["skipped_lines"] = loaded.stats.skipped;
    report["duplicates"] = loaded.stats.duplicates;
    report["terms"] = loaded.store.dictionary().size();
    report["relational_triples"] = relational.size();
    report["entities"] = vocab.entities.size();
    report["relations"] = vocab.relations.size();
    Json diagnostics = Json::array();
    for (const auto& d : loaded.stats.diagnostics) diagnostics.push_back({{"line", d.line}, {"message", d.message}});
    report["diagnostics"] = std::move(diagnostics);
    open_output(config.output_dir / "ingest.json") << report.dump(2) << '\n';
    out << loaded.store.size() << " triples, " << vocab.entities.size() << " entities, " << vocab.relations.size()
        << " relations, " << loaded.stats.skipped << " skipped lines\n";
    return kExitOk;
}

int cmd_train(const PipelineConfig& config, std::ostream& out) {
    const auto store = pipeline::load_graph(config).store;
    kge::LossTrace loss;
    const auto model = pipeline::train_model(store, config, &loss);
    fs::create_directories(config.output_dir);
    kge::save_checkpoint(model, config.output_dir / pipeline::kCheckpointFile);
    auto csv = open_output(config.output_dir / pipeline::kLossFile);
    kge::write_loss_csv(csv, loss);
    out << "final loss " << (loss.empty() ? 0.0 : loss.back().mean_loss) << ", checkpoint "
        << (config.output_dir / pipeline::kCheckpointFile).string() << '\n';
    return kExitOk;
}

int cmd_eval(const PipelineConfig& config, std::ostream& out) {
    const auto store = pipeline::load_graph(config).store;
    const auto data = pipeline::prepare_evaluation(store, config);
    const auto r = pipeline::train_and_evaluate(data, config.train, config.ranking_mode);
    Json report;
    report["model"] = kge::to_string(r.train.model);
    report["mode"] = kge::to_string(r.report.mode);
    report["train_triples"] = data.split.train.size();
    report["test_triples"] = data.split.test.size();
    report["mrr"] = r.report.mrr;
    report["hits1"] = r.report.hits1;
    report["hits3"] = r.report.hits3;
    report["hits10"] = r.report.hits10;
    report["random_baseline_mrr"] = r.random_baseline_mrr;
    report["train_time_s"] = r.train_time_s;
    report["eval_time_s"] = r.eval_time_s;
    open_output(config.output_dir / "eval.json") << report.dump(2) << '\n';
    out << "MRR " << r.report.mrr << " (random " << r.random_baseline_mrr << "), Hits@1 " << r.report.hits1
        << ", Hits@3 " << r.report.hits3 << ", Hits@10 " << r.report.hits10 << '\n';
    return kExitOk;
}

int cmd_index(const PipelineConfig& config, std::ostream& out) {
    const auto model = kge::load_checkpoint(checkpoint_path(config));
    const auto index = pipeline::build_entity_index(model, config.hnsw);
    fs::create_directories(config.output_dir);
    index.save(config.output_dir / pipeline::kIndexFile);
    out << index.size() << " vectors indexed, max level " << index.max_level() << '\n';
    return kExitOk;
}

int cmd_grid(const PipelineConfig& config, std::ostream& out) {
    ann::VectorSet vectors;
    std::vector<rdf::TermId> ids;
    if (config.grid_source == "random") {
        vectors = ann::random_unit_vectors(config.grid_vectors, config.grid_dim, config.grid.seed);
        ids.resize(vectors.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<rdf::TermId>(i);
    } else {
        const auto model = kge::load_checkpoint(checkpoint_path(config));
        vectors = ann::VectorSet{model.width(), model.entity_params()};
        ids = model.entity_ids();
    }
    if (vectors.size() == 0) throw DataError("no vectors to search");
    // Queries are stored vectors drawn without replacement.
    std::vector<std::size_t> rows(vectors.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    Rng rng(config.grid.seed + 1);
    rng.shuffle(rows.begin(), rows.end());
    rows.resize(std::min(rows.size(), config.grid_queries));
    ann::VectorSet queries{vectors.dim, {}};
    for (auto r : rows) {
        const auto row = vectors.row(r);
        queries.data.insert(queries.data.end(), row.begin(), row.end());
    }
    const auto reports = ann::grid_search(vectors, ids, queries, config.grid);
    auto csv = open_output(config.output_dir / "hnsw_grid.csv");
    ann::write_grid_csv(csv, reports);
    for (const auto& r : reports) {
        out << "M=" << r.params.m << " efC=" << r.params.ef_construction << " efS=" << r.params.ef_search
            << " recall@" << r.k << "=" << r.recall_at_k << " latency=" << r.mean_latency_s << "s\n";
    }
    return kExitOk;
}

int cmd_sweep(const PipelineConfig& config, std::ostream& out) {
    const auto store = pipeline::load_graph(config).store;
    const auto rows = pipeline::sweep_hyperparams(store, config);
    auto csv = open_output(config.output_dir / "sweep.csv");
    pipeline::write_sweep_csv(csv, rows);
    pipeline::write_sweep_csv(out, rows);
    return kExitOk;
}

int cmd_compare(const PipelineConfig& config, std::ostream& out) {
    const auto store = pipeline::load_graph(config).store;
    const auto rows = pipeline::compare_models(store, config);
    auto csv = open_output(config.output_dir / "compare.csv");
    pipeline::write_compare_csv(csv, rows);
    pipeline::write_compare_csv(out, rows);
    return kExitOk;
}

int cmd_recommend(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
    const auto summary = pipeline::run(config);
    out << summary.targets.size() << " targets, " << summary.failed() << " failed; wrote "
        << summary.recommendations.string() << '\n';
    for (const auto& t : summary.targets) {
        if (t.error) err << "target " << t.target << ": " << *t.error << '\n';
    }
    return summary.failed() == 0 ? kExitOk : kExitData;
}

int cmd_synth(const PipelineConfig& config, std::ostream& out) {
    const auto graph = pipeline::generate_synthetic_graph(config.synth);
    pipeline::write_synthetic_graph(graph, config.output_dir);
    out << graph.store.size() << " triples, " << graph.persons.size() << " persons, " << graph.communities.size()
        << " communities written to " << config.output_dir.string() << '\n';
    return kExitOk;
}

int cmd_verify(const PipelineConfig& config, const std::string& manifest, std::ostream& out, std::ostream& err) {
    const fs::path path = manifest.empty() ? config.output_dir / pipeline::kManifestFile : fs::path(manifest);
    const auto report = pipeline::verify_run(path);
    for (const auto& p : report.problems) err << p << '\n';
    out << report.artifacts_checked << " artifacts, " << report.recommendations_checked << " recommendations, "
        << report.witnesses_checked << " witnesses checked; " << report.problems.size() << " problems\n";
    return report.ok() ? kExitOk : kExitData;
}

/// Routes log output to `err` until destroyed, then restores the previous logger.
class LogScope {
public:
    LogScope(int verbosity, std::ostream& err) : previous_(spdlog::default_logger()) {
        configure_logging(verbosity, err);
    }
    ~LogScope() { spdlog::set_default_logger(previous_); }
    LogScope(const LogScope&) = delete;
    LogScope& operator=(const LogScope&) = delete;

private:
    static void configure_logging(int verbosity, std::ostream& err);
    std::shared_ptr<spdlog::logger> previous_;
};

void LogScope::configure_logging(int verbosity, std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("kgrec", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(verbosity >= 2 ? spdlog::level::debug : verbosity == 1 ? spdlog::level::info
                                                                               : spdlog::level::warn);
    spdlog::set_default_logger(logger);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge-graph recommender: embeddings, HNSW retrieval and explainable semantic filtering",
                 "kgrec"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config_path, "INI config file");
    app.add_option("--set", opt.overrides, "Override one setting: section.key=value (repeatable)")
        ->allow_extra_args(false);
    auto* strict = app.add_flag("--strict", opt.strict, "Abort on the first malformed N-Triples line");
    app.add_flag("--lenient", opt.lenient, "Skip malformed N-Triples lines")->excludes(strict);
    auto* det = app.add_flag("--deterministic", opt.deterministic, "Bit-reproducible single-order execution");
    app.add_flag("--parallel", opt.parallel, "Multi-threaded training and recommendation")->excludes(det);
    app.add_option("--seed", opt.seed, "Top-level seed; module seeds are derived from it");
    app.add_option("--output-dir", opt.output_dir, "Directory for all outputs");
    app.add_flag("-v", opt.verbosity, "Verbose logging (-vv for debug)");

    struct Command {
        const char* name;
        const char* help;
    };
    const Command commands[] = {
        {"ingest", "Parse the input graph and report counts"},
        {"train", "Train an embedding model on all relational triples"},
        {"eval", "Train on a split and report link-prediction metrics"},
        {"index", "Build the HNSW index from a checkpoint"},
        {"grid-search-hnsw", "Recall and latency over an HNSW parameter grid"},
        {"sweep", "Learning-rate by dimension sweep"},
        {"compare", "Compare embedding models under shared hyperparameters"},
        {"recommend", "Run the full pipeline for the configured targets"},
        {"synth", "Write a synthetic CIDOC-CRM graph with planted communities"},
        {"verify", "Re-check a run's checksums and evidence"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : commands) subs[c.name] = app.add_subcommand(c.name, c.help);
    subs["verify"]->add_option("manifest", opt.manifest, "Manifest path (default: <output-dir>/manifest.json)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    const LogScope log_scope(opt.verbosity, err);

    try {
        const auto config = build_config(opt);
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "ingest") return cmd_ingest(config, out);
        if (name == "train") return cmd_train(config, out);
        if (name == "eval") return cmd_eval(config, out);
        if (name == "index") return cmd_index(config, out);
        if (name == "grid-search-hnsw") return cmd_grid(config, out);
        if (name == "sweep") return cmd_sweep(config, out);
        if (name == "compare") return cmd_compare(config, out);
        if (name == "recommend") return cmd_recommend(config, out, err);
        if (name == "synth") return cmd_synth(config, out);
        return cmd_verify(config, opt.manifest, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

}  // namespace kgrec::cli
