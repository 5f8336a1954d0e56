#include "kgrec/pipeline/experiments.hpp"

#include <chrono>
#include <iomanip>
#include <ostream>

#include <spdlog/spdlog.h>

#include "kgrec/kge/dataset.hpp"

namespace kgrec::pipeline {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_metrics(std::ostream& out, const EvaluationResult& r) {
    out << r.report.mrr << ',' << r.report.hits1 << ',' << r.report.hits3 << ',' << r.report.hits10 << ','
        << r.train_time_s + r.eval_time_s << '\n';
}

}  // namespace

EvaluationData prepare_evaluation(const rdf::TripleStore& store, const PipelineConfig& config) {
    const auto relational = kge::relational_triples(store);
    EvaluationData data;
    data.split = rdf::split_triples(relational, config.split, config.seed + kSplitSeedOffset);
    auto vocab = kge::collect_vocabulary(data.split.train);
    data.entities = std::move(vocab.entities);
    data.relations = std::move(vocab.relations);
    spdlog::info("split: {} train, {} valid, {} test ({} reassigned)", data.split.train.size(),
                 data.split.valid.size(), data.split.test.size(), data.split.reassigned);
    return data;
}

EvaluationResult train_and_evaluate(const EvaluationData& data, const kge::TrainConfig& train,
                                    kge::RankingMode mode) {
    EvaluationResult result;
    result.train = train;
    auto model = kge::init_model(train, data.entities, data.relations);
    const auto train_rows = kge::index_triples(model, data.split.train);
    const auto test_rows = kge::index_triples(model, data.split.test);
    auto known = train_rows;
    const auto valid_rows = kge::index_triples(model, data.split.valid);
    known.insert(known.end(), valid_rows.begin(), valid_rows.end());
    known.insert(known.end(), test_rows.begin(), test_rows.end());

    auto start = std::chrono::steady_clock::now();
    result.loss = kge::train(model, train_rows, train, [&](const kge::EpochRecord& e) {
        spdlog::debug("{} epoch {}: loss {:.6f}", kge::to_string(train.model), e.epoch, e.mean_loss);
    });
    result.train_time_s = seconds_since(start);

    start = std::chrono::steady_clock::now();
    result.report = kge::evaluate_ranking(model, test_rows, known, mode, train.threads);
    result.eval_time_s = seconds_since(start);
    result.random_baseline_mrr = kge::random_baseline_mrr(model.n_entities(), test_rows, known, mode);
    spdlog::info("{} lr={} dim={}: MRR {:.4f} (random {:.6f}), Hits@10 {:.4f}", kge::to_string(train.model), train.lr,
                 train.dim, result.report.mrr, result.random_baseline_mrr, result.report.hits10);
    return result;
}

std::vector<EvaluationResult> compare_models(const rdf::TripleStore& store, const PipelineConfig& config) {
    const auto data = prepare_evaluation(store, config);
    std::vector<EvaluationResult> rows;
    for (auto kind : config.compare_models) {
        auto train = config.train;
        train.model = kind;
        rows.push_back(train_and_evaluate(data, train, config.ranking_mode));
    }
    return rows;
}

std::vector<EvaluationResult> sweep_hyperparams(const rdf::TripleStore& store, const PipelineConfig& config) {
    const auto data = prepare_evaluation(store, config);
    std::vector<EvaluationResult> rows;
    for (double lr : config.sweep_lrs) {
        for (std::size_t dim : config.sweep_dims) {
            auto train = config.train;
            train.lr = lr;
            train.dim = dim;
            train.validate();
            rows.push_back(train_and_evaluate(data, train, config.ranking_mode));
        }
    }
    return rows;
}

void write_compare_csv(std::ostream& out, const std::vector<EvaluationResult>& rows) {
    const auto old = out.precision(17);
    out << "model,mrr,hits1,hits3,hits10,time_s\n";
    for (const auto& r : rows) {
        out << kge::to_string(r.train.model) << ',';
        write_metrics(out, r);
    }
    out.precision(old);
}

void write_sweep_csv(std::ostream& out, const std::vector<EvaluationResult>& rows) {
    const auto old = out.precision(17);
    out << "lr,dim,mrr,hits1,hits3,hits10,time_s\n";
    for (const auto& r : rows) {
        out << r.train.lr << ',' << r.train.dim << ',';
        write_metrics(out, r);
    }
    out.precision(old);
}

}  // namespace kgrec::pipeline
