#include "kgrec/kge/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "kgrec/common/error.hpp"
#include "kgrec/common/random.hpp"

namespace kgrec::kge {

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::ComplEx ? "ComplEx" : "TransE";
}

std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Adagrad: return "Adagrad";
        case OptimizerKind::Adam: return "Adam";
        case OptimizerKind::Sgd: break;
    }
    return "SGD";
}

namespace {
std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}
}  // namespace

ModelKind parse_model_kind(std::string_view name) {
    auto n = lower(name);
    if (n == "complex") return ModelKind::ComplEx;
    if (n == "transe") return ModelKind::TransE;
    throw ConfigError("unknown model '" + std::string(name) + "' (expected ComplEx or TransE)");
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
    auto n = lower(name);
    if (n == "adagrad") return OptimizerKind::Adagrad;
    if (n == "sgd") return OptimizerKind::Sgd;
    if (n == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected Adagrad, Adam or SGD)");
}

void TrainConfig::validate() const {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!(lr > 0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (negatives_per_positive < 1) throw ConfigError("negatives_per_positive must be >= 1");
    if (!(margin >= 0)) throw ConfigError("margin must be >= 0");
    if (!(l2 >= 0)) throw ConfigError("l2 must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

double score_complex(std::span<const double> h, std::span<const double> r, std::span<const double> t) {
    const std::size_t d = h.size() / 2;
    const double* hr = h.data();
    const double* hi = h.data() + d;
    const double* rr = r.data();
    const double* ri = r.data() + d;
    const double* tr = t.data();
    const double* ti = t.data() + d;
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        s += hr[k] * rr[k] * tr[k] + hi[k] * rr[k] * ti[k] + hr[k] * ri[k] * ti[k] - hi[k] * ri[k] * tr[k];
    }
    return s;
}

double score_transe(std::span<const double> h, std::span<const double> r, std::span<const double> t) {
    double s = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) s += std::abs(h[k] + r[k] - t[k]);
    return -s;
}

EmbeddingModel::EmbeddingModel(TrainConfig config, std::vector<TermId> entity_ids,
                               std::vector<TermId> relation_ids)
    : config_(config),
      width_(config.row_width()),
      entity_ids_(std::move(entity_ids)),
      relation_ids_(std::move(relation_ids)) {
    if (config_.dim < 1) throw ConfigError("dim must be >= 1");
    for (std::uint32_t i = 0; i < entity_ids_.size(); ++i) {
        if (!entity_rows_.emplace(entity_ids_[i], i).second) throw DataError("duplicate entity id");
    }
    for (std::uint32_t i = 0; i < relation_ids_.size(); ++i) {
        if (!relation_rows_.emplace(relation_ids_[i], i).second) throw DataError("duplicate relation id");
    }
    entity_params_.assign(entity_ids_.size() * width_, 0.0);
    relation_params_.assign(relation_ids_.size() * width_, 0.0);
}

void EmbeddingModel::set_hyperparameters(const TrainConfig& config) {
    if (config.model != config_.model || config.dim != config_.dim) {
        throw ConfigError("model kind and dim cannot change after initialization");
    }
    config.validate();
    config_ = config;
}

std::optional<std::uint32_t> EmbeddingModel::entity_row_of(TermId id) const {
    if (auto it = entity_rows_.find(id); it != entity_rows_.end()) return it->second;
    return std::nullopt;
}

std::optional<std::uint32_t> EmbeddingModel::relation_row_of(TermId id) const {
    if (auto it = relation_rows_.find(id); it != relation_rows_.end()) return it->second;
    return std::nullopt;
}

std::vector<double> EmbeddingModel::entity_vector(TermId entity) const {
    auto row = entity_row_of(entity);
    if (!row) throw DataError("entity " + std::to_string(entity) + " is not in the model");
    auto r = entity_row(*row);
    return {r.begin(), r.end()};
}

double EmbeddingModel::score(const IndexedTriple& t) const {
    auto h = entity_row(t.head);
    auto r = relation_row(t.relation);
    auto e = entity_row(t.tail);
    return config_.model == ModelKind::ComplEx ? score_complex(h, r, e) : score_transe(h, r, e);
}

std::optional<IndexedTriple> EmbeddingModel::index(const rdf::Triple& t) const {
    auto h = entity_row_of(t.s);
    auto r = relation_row_of(t.p);
    auto o = entity_row_of(t.o);
    if (!h || !r || !o) return std::nullopt;
    return IndexedTriple{*h, *r, *o};
}

bool EmbeddingModel::all_finite() const noexcept {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return finite(entity_params_) && finite(relation_params_);
}

EmbeddingModel init_model(const TrainConfig& config, std::vector<TermId> entity_ids,
                          std::vector<TermId> relation_ids) {
    config.validate();
    EmbeddingModel model(config, std::move(entity_ids), std::move(relation_ids));
    const double bound = 6.0 / std::sqrt(static_cast<double>(config.dim));
    Rng rng(config.seed);
    for (double& x : model.entity_params()) x = rng.uniform(-bound, bound);
    for (double& x : model.relation_params()) x = rng.uniform(-bound, bound);
    return model;
}

EmbeddingModel init_model(const TrainConfig& config, std::size_t n_entities, std::size_t n_relations) {
    if (n_entities == 0 || n_relations == 0) throw ConfigError("entity and relation counts must be positive");
    std::vector<TermId> e(n_entities), r(n_relations);
    for (std::size_t i = 0; i < n_entities; ++i) e[i] = static_cast<TermId>(i);
    for (std::size_t i = 0; i < n_relations; ++i) r[i] = static_cast<TermId>(i);
    return init_model(config, std::move(e), std::move(r));
}

}  // namespace kgrec::kge
