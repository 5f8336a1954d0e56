#pragma once

#include <iosfwd>
#include <vector>

#include "kgrec/kge/evaluation.hpp"
#include "kgrec/kge/trainer.hpp"
#include "kgrec/pipeline/config.hpp"
#include "kgrec/rdf/split.hpp"
#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::pipeline {

/// Relational triples split, indexed against a model whose vocabulary is
/// the training split.
struct EvaluationData {
    rdf::TripleSplit split;
    std::vector<rdf::TermId> entities;
    std::vector<rdf::TermId> relations;
};

EvaluationData prepare_evaluation(const rdf::TripleStore& store, const PipelineConfig& config);

struct EvaluationResult {
    kge::TrainConfig train;
    kge::RankingReport report;
    double random_baseline_mrr = 0.0;
    kge::LossTrace loss;
    double train_time_s = 0.0;
    double eval_time_s = 0.0;
};

/// Trains `train` on the training split and ranks the test split; filtered
/// ranking removes every known train/valid/test triple.
EvaluationResult train_and_evaluate(const EvaluationData& data, const kge::TrainConfig& train, kge::RankingMode mode);

/// One row per config.compare_models, all other hyperparameters shared.
std::vector<EvaluationResult> compare_models(const rdf::TripleStore& store, const PipelineConfig& config);

/// Cross product of config.sweep_lrs and config.sweep_dims, lr-major.
std::vector<EvaluationResult> sweep_hyperparams(const rdf::TripleStore& store, const PipelineConfig& config);

/// `model,mrr,hits1,hits3,hits10,time_s`; time_s is training plus evaluation.
void write_compare_csv(std::ostream& out, const std::vector<EvaluationResult>& rows);
/// `lr,dim,mrr,hits1,hits3,hits10,time_s`.
void write_sweep_csv(std::ostream& out, const std::vector<EvaluationResult>& rows);

}  // namespace kgrec::pipeline
