#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgrec/common/error.hpp"
#include "kgrec/filter/filter_spec.hpp"
#include "kgrec/filter/semantic_filter.hpp"
#include "kgrec/pipeline/config.hpp"
#include "kgrec/pipeline/experiments.hpp"
#include "kgrec/pipeline/run.hpp"
#include "kgrec/pipeline/synthetic.hpp"
#include "kgrec/rdf/vocabulary.hpp"
#include "support/scratch_dir.hpp"

using namespace kgrec;
using namespace kgrec::pipeline;
using kgrec::testing::read_file;
using kgrec::testing::ScratchDir;
using kgrec::testing::write_file;
using Json = nlohmann::json;

namespace {

PipelineConfig parse(const std::string& ini) {
    std::istringstream in(ini);
    return parse_config(in);
}

SyntheticSpec small_spec(std::size_t persons = 40) {
    SyntheticSpec s;
    s.n_persons = persons;
    s.places = 6;
    s.background_events = 8;
    s.n_targets = 10;
    return s;
}

/// Small, fast run over a synthetic graph written into `dir`.
PipelineConfig small_run(const ScratchDir& dir, std::size_t persons = 40) {
    auto graph = generate_synthetic_graph(small_spec(persons));
    write_synthetic_graph(graph, dir.path());
    PipelineConfig c;
    c.input_graph = dir / "graph.nt";
    c.targets_file = dir / "targets.txt";
    c.output_dir = dir / "out";
    c.train.dim = 16;
    c.train.epochs = 10;
    c.hnsw.m = 8;
    c.hnsw.ef_construction = 50;
    c.raw_k = 30;
    c.seed = 7;
    c.finalize();
    return c;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::vector<Json> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) out.push_back(Json::parse(line));
    return out;
}

}  // namespace

TEST(Config, ParsesSectionsListsAndEnums) {
    const auto c = parse(
        "[pipeline]\ninput_graph = g.nt\nraw_k = 50\ntop_n = 5\nseed = 9\ntargets = crm:E21_Person, <urn:x>\n"
        "parse_mode = lenient\n"
        "[train]\nmodel = TransE\ndim = 32\nlr = 0.05\noptimizer = adagrad\n"
        "[hnsw]\nM = 12\n"
        "[eval]\nsplit = 0.7, 0.1, 0.2\nmode = raw\n"
        "[grid]\nM = 4, 8\nef_search = 10\n"
        "[sweep]\nlrs = 0.1\ndims = 8, 16, 32\n"
        "[compare]\nmodels = TransE\n"
        "[synth]\nn_persons = 12\n");
    EXPECT_EQ(c.input_graph, "g.nt");
    EXPECT_EQ(c.raw_k, 50u);
    EXPECT_EQ(c.top_n, 5u);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.targets, (std::vector<std::string>{rdf::vocab::crm("E21_Person"), "urn:x"}));
    EXPECT_EQ(c.parse_mode, rdf::ParseMode::Lenient);
    EXPECT_EQ(c.train.model, kge::ModelKind::TransE);
    EXPECT_EQ(c.train.dim, 32u);
    EXPECT_DOUBLE_EQ(c.train.lr, 0.05);
    EXPECT_EQ(c.train.optimizer, kge::OptimizerKind::Adagrad);
    EXPECT_EQ(c.hnsw.m, 12u);
    EXPECT_DOUBLE_EQ(c.split.test, 0.2);
    EXPECT_EQ(c.ranking_mode, kge::RankingMode::Raw);
    EXPECT_EQ(c.grid.m, (std::vector<std::size_t>{4, 8}));
    EXPECT_EQ(c.grid.ef_search, (std::vector<std::size_t>{10}));
    EXPECT_EQ(c.sweep_dims, (std::vector<std::size_t>{8, 16, 32}));
    EXPECT_EQ(c.compare_models, (std::vector<kge::ModelKind>{kge::ModelKind::TransE}));
    EXPECT_EQ(c.synth.n_persons, 12u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse("[pipeline]\nraw_kk = 5\n"), ConfigError);
    EXPECT_THROW(parse("[nosuch]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse("raw_k = 5\n"), ConfigError);
    EXPECT_THROW(parse("[pipeline]\nraw_k = five\n"), ConfigError);
    EXPECT_THROW(parse("[pipeline]\nraw_k = -3\n"), ConfigError);
    EXPECT_THROW(parse("[train]\nmodel = ConvE\n"), ConfigError);
    EXPECT_THROW(parse("[eval]\nsplit = 0.5, 0.5\n"), ConfigError);
    EXPECT_THROW(parse("[grid]\nsource = file\n"), ConfigError);
    EXPECT_THROW(parse("[pipeline\nraw_k = 5\n"), ConfigError);

    PipelineConfig c;
    EXPECT_THROW(apply_setting(c, "pipeline.nope", "1"), ConfigError);
    apply_setting(c, "train.epochs", "3");
    EXPECT_EQ(c.train.epochs, 3u);
}

TEST(Config, FinalizeFansOutSeedsAndChecksRawK) {
    PipelineConfig c;
    c.seed = 1000;
    c.finalize();
    EXPECT_EQ(c.train.seed, 1000 + kTrainSeedOffset);
    EXPECT_EQ(c.hnsw.seed, 1000 + kIndexSeedOffset);
    EXPECT_EQ(c.grid.seed, 1000 + kGridSeedOffset);
    EXPECT_EQ(c.synth.seed, 1000u);
    EXPECT_GE(c.threads, 1u);

    PipelineConfig bad;
    bad.raw_k = 5;
    bad.top_n = 10;
    EXPECT_THROW(bad.finalize(), ConfigError);
    bad.raw_k = 10;
    EXPECT_NO_THROW(bad.finalize());
    bad.train.dim = 0;
    EXPECT_THROW(bad.finalize(), ConfigError);
}

TEST(Config, SnapshotCoversEveryKeyButOutputLocation) {
    PipelineConfig a;
    a.output_dir = "one";
    PipelineConfig b;
    b.output_dir = "two";
    b.threads = 7;
    const auto snap = a.snapshot();
    EXPECT_EQ(snap, b.snapshot());
    EXPECT_FALSE(snap.contains("pipeline.output_dir"));
    EXPECT_EQ(snap.at("train.lr"), "0.01");
    EXPECT_EQ(snap.at("grid.ef_search"), "50,100,150,200,300");
    // Every snapshot key is accepted back, and round-trips.
    PipelineConfig c;
    for (const auto& [k, v] : snap) apply_setting(c, k, v);
    EXPECT_EQ(c.snapshot(), snap);
    for (const auto& [k, _] : snap) {
        const auto keys = known_keys();
        EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
    }
}

TEST(Config, LoadResolvesPathsAgainstTheFile) {
    ScratchDir dir("config");
    std::filesystem::create_directories(dir / "sub");
    write_file(dir / "sub" / "run.cfg", "[pipeline]\ninput_graph = g.nt\ntargets_file = t.txt\n");
    write_file(dir / "sub" / "t.txt", "# comment\n<urn:a>\n\ncrm:E21_Person\textra\n");
    auto c = load_config(dir / "sub" / "run.cfg");
    EXPECT_EQ(c.input_graph, dir / "sub" / "g.nt");
    c.targets = {"urn:first"};
    EXPECT_EQ(resolve_targets(c), (std::vector<std::string>{"urn:first", "urn:a", rdf::vocab::crm("E21_Person")}));
    EXPECT_THROW(load_config(dir / "missing.cfg"), ConfigError);
}

TEST(Synthetic, EmptySpecStillWritesValidNTriples) {
    ScratchDir dir("synth-empty");
    SyntheticSpec spec;
    spec.n_persons = 0;
    spec.places = 0;
    const auto g = generate_synthetic_graph(spec);
    EXPECT_TRUE(g.persons.empty());
    EXPECT_TRUE(g.targets.empty());
    write_synthetic_graph(g, dir.path());
    EXPECT_NO_THROW(rdf::load_ntriples_file(dir / "graph.nt", rdf::ParseMode::Strict));
}

TEST(Synthetic, EveryPersonTypedExactlyOnce) {
    const auto g = generate_synthetic_graph(small_spec(53));
    const auto type = *g.store.lookup_iri(rdf::vocab::kRdfType);
    const auto person_class = *g.store.lookup_iri(rdf::vocab::crm("E21_Person"));
    ASSERT_EQ(g.persons.size(), 53u);
    for (const auto& p : g.persons) {
        const auto id = g.store.lookup_iri(p);
        ASSERT_TRUE(id.has_value());
        const auto types = g.store.match(*id, type, std::nullopt);
        ASSERT_EQ(types.size(), 1u) << p;
        EXPECT_EQ(types[0].o, person_class);
    }
    // 53 persons in communities of 5: ten communities, three left over.
    EXPECT_EQ(g.communities.size(), 10u);
    EXPECT_EQ(g.store.instances_of(std::vector<rdf::TermId>{person_class}).size(), 53u);
}

TEST(Synthetic, DeterministicUnderSeed) {
    ScratchDir a("synth-a");
    ScratchDir b("synth-b");
    write_synthetic_graph(generate_synthetic_graph(small_spec()), a.path());
    write_synthetic_graph(generate_synthetic_graph(small_spec()), b.path());
    for (const char* f : {"graph.nt", "communities.tsv", "targets.txt"}) {
        EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    }
    auto other = small_spec();
    other.seed = 43;
    ScratchDir c("synth-c");
    write_synthetic_graph(generate_synthetic_graph(other), c.path());
    EXPECT_NE(read_file(a / "graph.nt"), read_file(c / "graph.nt"));
}

TEST(Synthetic, PlantedPairsPassSameEvents) {
    const auto g = generate_synthetic_graph(small_spec());
    const auto builtin = filter::builtin_filters();
    const auto& same_events =
        *std::find_if(builtin.begin(), builtin.end(), [](const auto& s) { return s.name == "same_events"; });
    for (const auto& members : g.communities) {
        const auto target = *g.store.lookup_iri(members[0]);
        std::vector<rdf::TermId> others;
        for (std::size_t i = 1; i < members.size(); ++i) others.push_back(*g.store.lookup_iri(members[i]));
        const auto evidence = filter::run_filter(g.store, target, others, same_events);
        for (auto id : others) EXPECT_TRUE(evidence.contains(id));
    }
}

TEST(Synthetic, CommunitiesFileRoundTrips) {
    ScratchDir dir("synth-comm");
    const auto g = generate_synthetic_graph(small_spec(12));
    write_synthetic_graph(g, dir.path());
    const auto rows = read_communities(dir / "communities.tsv");
    ASSERT_EQ(rows.size(), 10u);
    EXPECT_EQ(rows[0], (std::pair<std::string, std::size_t>{g.communities[0][0], 0}));
    EXPECT_EQ(rows[9].second, 1u);
    std::set<std::string> targets(g.targets.begin(), g.targets.end());
    EXPECT_EQ(targets.size(), 10u);
}

TEST(Experiments, CompareWritesOneRowPerModel) {
    const auto g = generate_synthetic_graph(small_spec());
    PipelineConfig c;
    c.train.dim = 8;
    c.train.epochs = 3;
    c.finalize();
    const auto rows = compare_models(g.store, c);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].train.model, kge::ModelKind::ComplEx);
    EXPECT_EQ(rows[1].train.model, kge::ModelKind::TransE);
    std::ostringstream csv;
    write_compare_csv(csv, rows);
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    EXPECT_EQ(header, "model,mrr,hits1,hits3,hits10,time_s");
    std::size_t n = 0;
    while (std::getline(lines, row)) {
        ++n;
        EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
    }
    EXPECT_EQ(n, 2u);

    // Identical seed: identical metrics.
    const auto again = compare_models(g.store, c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].report.per_query_ranks, again[i].report.per_query_ranks);
        EXPECT_EQ(rows[i].report.mrr, again[i].report.mrr);
    }
}

TEST(Experiments, SweepIsTheFullCrossProduct) {
    const auto g = generate_synthetic_graph(small_spec(20));
    PipelineConfig c;
    c.train.epochs = 2;
    c.sweep_lrs = {0.001, 0.01};
    c.sweep_dims = {4, 8};
    c.finalize();
    const auto rows = sweep_hyperparams(g.store, c);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_DOUBLE_EQ(rows[0].train.lr, 0.001);
    EXPECT_EQ(rows[0].train.dim, 4u);
    EXPECT_EQ(rows[1].train.dim, 8u);
    EXPECT_DOUBLE_EQ(rows[2].train.lr, 0.01);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "lr,dim,mrr,hits1,hits3,hits10,time_s");

    c.sweep_lrs = {0.01};
    c.sweep_dims = {8};
    const auto single = sweep_hyperparams(g.store, c);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].report.per_query_ranks, rows[3].report.per_query_ranks);
}

/// Clustered graph: twelve groups of five persons who all know each other and
/// share the group's organisation, city and sport.
rdf::TripleStore clustered_graph() {
    rdf::TripleStore::Builder b;
    const auto iri = [](const std::string& s) { return rdf::Term::iri("urn:" + s); };
    for (int g = 0; g < 12; ++g) {
        const auto group = iri("group" + std::to_string(g));
        const auto org = iri("org" + std::to_string(g));
        const auto city = iri("city" + std::to_string(g % 4));
        b.add(group, iri("based_in"), city);
        b.add(org, iri("located_in"), city);
        for (int i = 0; i < 5; ++i) {
            const auto p = iri("p" + std::to_string(g * 5 + i));
            b.add(p, iri("member_of"), group);
            b.add(p, iri("works_at"), org);
            b.add(p, iri("lives_in"), city);
            b.add(p, iri("plays"), iri("sport" + std::to_string(g % 3)));
            for (int j = 0; j < 5; ++j) {
                if (j != i) b.add(p, iri("knows"), iri("p" + std::to_string(g * 5 + j)));
            }
        }
    }
    return std::move(b).build();
}

TEST(Experiments, ComplexBeatsRandomFiveFoldOnAClusteredGraph) {
    const auto store = clustered_graph();
    ASSERT_EQ(store.size(), 504u);
    PipelineConfig c;
    c.train.dim = 50;
    c.train.epochs = 100;
    c.seed = 3;
    c.finalize();
    const auto data = prepare_evaluation(store, c);
    const auto r = train_and_evaluate(data, c.train, kge::RankingMode::Filtered);
    EXPECT_GE(r.report.mrr, 5 * r.random_baseline_mrr) << r.report.mrr << " vs " << r.random_baseline_mrr;
}

TEST(Run, WritesRecordsManifestAndVerifies) {
    ScratchDir dir("run");
    auto c = small_run(dir);
    c.targets = {"http://example.org/kgrec/nobody"};
    const auto summary = run(c);
    const auto records = read_jsonl(summary.recommendations);
    const auto targets = resolve_targets(c);
    ASSERT_EQ(records.size(), targets.size());
    ASSERT_EQ(summary.failed(), 1u);

    // Records follow the target list; the missing one carries an error.
    for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(records[i]["target"], targets[i]);
    EXPECT_EQ(records[0]["error"], "target not found in graph");
    EXPECT_TRUE(records[0]["recommendations"].empty());

    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        const auto& d = r["diagnostics"];
        const std::size_t raw = d["raw_k"], gated = d["gated"], connected = d["connected"];
        EXPECT_EQ(raw, c.raw_k);
        EXPECT_LE(gated, raw);
        EXPECT_LE(connected, gated);
        EXPECT_EQ(r["recommendations"].size(), std::min(c.top_n, connected));
        EXPECT_TRUE(r["target_label"].is_string());
        double prev = 2.0;
        std::size_t rank = 0;
        for (const auto& rec : r["recommendations"]) {
            EXPECT_EQ(rec["rank"], ++rank);
            EXPECT_LE(rec["similarity"].get<double>(), prev);
            prev = rec["similarity"];
            EXPECT_FALSE(rec["evidence"].empty());
            EXPECT_NE(rec["iri"], r["target"]);
        }
    }

    const auto manifest = Json::parse(read_file(summary.manifest));
    EXPECT_EQ(manifest["counts"]["failed_targets"], 1);
    EXPECT_EQ(manifest["targets"][0]["status"], "error");
    EXPECT_EQ(manifest["artifacts"]["checkpoint"]["path"], kCheckpointFile);
    EXPECT_EQ(manifest["artifacts"]["index"]["path"], kIndexFile);
    EXPECT_TRUE(std::filesystem::exists(c.output_dir / kTimingsFile));
    EXPECT_TRUE(std::filesystem::exists(c.output_dir / kLossFile));

    const auto report = verify_run(summary.manifest);
    EXPECT_TRUE(report.ok()) << report.problems.front();
    EXPECT_GT(report.witnesses_checked, 0u);
    EXPECT_EQ(report.artifacts_checked, 4u);
}

TEST(Run, DeterministicRerunsAreByteIdentical) {
    ScratchDir dir("run-det");
    auto c = small_run(dir);
    const auto first = run(c);
    const auto jsonl = read_file(first.recommendations);
    const auto manifest = read_file(first.manifest);
    c.output_dir = dir / "second";
    const auto second = run(c);
    EXPECT_EQ(jsonl, read_file(second.recommendations));
    EXPECT_EQ(manifest, read_file(second.manifest));
}

TEST(Run, ReusesCheckpointAndIndex) {
    ScratchDir dir("run-reuse");
    auto c = small_run(dir);
    const auto first = run(c);

    auto from_checkpoint = c;
    from_checkpoint.output_dir = dir / "ckpt";
    from_checkpoint.checkpoint = c.output_dir / kCheckpointFile;
    EXPECT_EQ(read_file(run(from_checkpoint).recommendations), read_file(first.recommendations));

    auto from_index = c;
    from_index.output_dir = dir / "idx";
    from_index.index = c.output_dir / kIndexFile;
    const auto reused = run(from_index);
    EXPECT_EQ(read_file(reused.recommendations), read_file(first.recommendations));
    EXPECT_TRUE(verify_run(reused.manifest).ok());
}

TEST(Run, TruncatesToTopN) {
    // Everyone attends one event, so every gated candidate is connected.
    // Places and the event itself may occupy raw slots, so gated can be below raw_k.
    ScratchDir dir("run-trunc");
    std::ostringstream nt;
    for (int i = 0; i < 80; ++i) {
        const auto p = "<urn:p" + std::to_string(i) + ">";
        nt << p << " <" << rdf::vocab::kRdfType << "> <" << rdf::vocab::crm("E21_Person") << "> .\n";
        nt << p << " <" << rdf::vocab::crm("P11i_participated_in") << "> <urn:event> .\n";
        nt << p << " <" << rdf::vocab::crm("P74_has_current_or_former_residence") << "> <urn:place" << i % 7
           << "> .\n";
    }
    write_file(dir / "g.nt", nt.str());
    PipelineConfig c;
    c.input_graph = dir / "g.nt";
    c.output_dir = dir / "out";
    c.targets = {"urn:p0"};
    c.raw_k = 50;
    c.top_n = 10;
    c.train.dim = 8;
    c.train.epochs = 2;
    c.finalize();
    const auto summary = run(c);
    ASSERT_EQ(summary.failed(), 0u);
    const auto& t = summary.targets[0];
    EXPECT_EQ(t.raw, 50u);
    EXPECT_EQ(t.connected, t.gated);
    EXPECT_GT(t.gated, c.top_n);
    EXPECT_EQ(t.emitted, 10u);
}

TEST(Run, SparseTargetGetsEmptyRecommendations) {
    ScratchDir dir("run-sparse");
    std::ostringstream nt;
    const auto type = "<" + std::string(rdf::vocab::kRdfType) + ">";
    const auto person = "<" + rdf::vocab::crm("E21_Person") + ">";
    for (int i = 0; i < 20; ++i) {
        const auto p = "<urn:p" + std::to_string(i) + ">";
        nt << p << " " << type << " " << person << " .\n";
        nt << p << " <" << rdf::vocab::crm("P11i_participated_in") << "> <urn:event" << i % 3 << "> .\n";
    }
    nt << "<urn:loner> " << type << " " << person << " .\n";
    nt << "<urn:loner> <" << rdf::vocab::crm("P74_has_current_or_former_residence") << "> <urn:nowhere> .\n";
    nt << "<urn:thing> <urn:rel> <urn:other> .\n";
    write_file(dir / "g.nt", nt.str());
    PipelineConfig c;
    c.input_graph = dir / "g.nt";
    c.output_dir = dir / "out";
    c.targets = {"urn:loner", "urn:thing"};
    c.raw_k = 10;
    c.train.dim = 4;
    c.train.epochs = 1;
    c.finalize();
    const auto summary = run(c);
    const auto records = read_jsonl(summary.recommendations);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_FALSE(records[0].contains("error"));
    EXPECT_TRUE(records[0]["recommendations"].empty());
    EXPECT_EQ(records[0]["diagnostics"]["raw_k"], 10);
    EXPECT_EQ(records[0]["diagnostics"]["connected"], 0);
    EXPECT_TRUE(records[0]["target_label"].is_null());
    EXPECT_EQ(records[1]["error"], "target is not typed with an allowed actor class");
}

TEST(Run, StageFailuresNameTheStage) {
    ScratchDir dir("run-fail");
    write_file(dir / "bad.nt", "<urn:a> <urn:p> .\n");
    PipelineConfig c;
    c.input_graph = dir / "bad.nt";
    c.output_dir = dir / "out";
    c.targets = {"urn:a"};
    c.finalize();
    try {
        run(c);
        FAIL() << "expected a parse failure";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("parse stage"), std::string::npos) << e.what();
    }
    PipelineConfig unset;
    unset.finalize();
    EXPECT_THROW(run(unset), ConfigError);
}

TEST(Verify, DetectsTamperedGraphAndWitnesses) {
    ScratchDir dir("verify");
    auto c = small_run(dir, 25);
    const auto summary = run(c);
    ASSERT_TRUE(verify_run(summary.manifest).ok());

    // Tamper with a witness: point it at a triple the graph lacks.
    const auto original = read_file(summary.recommendations);
    auto records = read_jsonl(summary.recommendations);
    bool tampered = false;
    for (auto& r : records) {
        if (r["recommendations"].empty()) continue;
        r["recommendations"][0]["evidence"][0]["witnesses"][0][2] = "<urn:not-there>";
        tampered = true;
        break;
    }
    ASSERT_TRUE(tampered);
    {
        std::ofstream out(summary.recommendations, std::ios::binary);
        for (const auto& r : records) out << r.dump() << '\n';
    }
    auto report = verify_run(summary.manifest);
    EXPECT_FALSE(report.ok());
    bool named_checksum = false, named_witness = false;
    for (const auto& p : report.problems) {
        named_checksum |= p.find("recommendations: checksum mismatch") != std::string::npos;
        named_witness |= p.find("witness not in graph") != std::string::npos;
    }
    EXPECT_TRUE(named_checksum);
    EXPECT_TRUE(named_witness);
    write_file(summary.recommendations, original);

    // Modify the graph.
    std::ofstream(c.input_graph, std::ios::app) << "<urn:x> <urn:y> <urn:z> .\n";
    report = verify_run(summary.manifest);
    ASSERT_FALSE(report.ok());
    EXPECT_NE(report.problems.front().find("input_graph: checksum mismatch"), std::string::npos);
}
