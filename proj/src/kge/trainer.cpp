#include "kgrec/kge/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "kgrec/common/parallel.hpp"
#include "kgrec/kge/loss.hpp"

namespace kgrec::kge {

void write_loss_csv(std::ostream& out, const LossTrace& trace) {
    out << "epoch,mean_loss,wall_time_s\n";
    auto old = out.precision(17);
    for (const auto& r : trace) out << r.epoch << ',' << r.mean_loss << ',' << r.wall_time_s << '\n';
    out.precision(old);
}

NegativeSampler::NegativeSampler(std::size_t n_entities, std::span<const IndexedTriple> positives)
    : n_entities_(n_entities), positives_(positives.begin(), positives.end()) {}

IndexedTriple NegativeSampler::corrupt(const IndexedTriple& positive, Rng& rng) const {
    IndexedTriple neg = positive;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        neg = positive;
        const auto replacement = static_cast<std::uint32_t>(rng.index(n_entities_));
        if (rng.coin()) {
            neg.head = replacement;
        } else {
            neg.tail = replacement;
        }
        if (!positives_.contains(neg)) break;
    }
    return neg;
}

namespace {

class Optimizer {
public:
    Optimizer(const EmbeddingModel& model, const TrainConfig& cfg) : cfg_(cfg) {
        if (cfg.optimizer != OptimizerKind::Sgd) {
            entity_acc_.assign(model.entity_params().size(), 0.0);
            relation_acc_.assign(model.relation_params().size(), 0.0);
        }
        if (cfg.optimizer == OptimizerKind::Adam) {
            entity_mom_.assign(model.entity_params().size(), 0.0);
            relation_mom_.assign(model.relation_params().size(), 0.0);
        }
    }

    // Returns false if an updated parameter is not finite.
    bool apply(EmbeddingModel& model, const GradientBuffer& grad) {
        bool ok = true;
        const std::size_t w = model.width();
        ++t_;
        for (auto row : grad.touched_entities()) {
            ok &= step(model.entity_row(row), grad.entity_view(row), entity_acc_, entity_mom_, row * w);
        }
        for (auto row : grad.touched_relations()) {
            ok &= step(model.relation_row(row), grad.relation_view(row), relation_acc_, relation_mom_, row * w);
        }
        return ok;
    }

private:
    bool step(std::span<double> x, std::span<const double> g, std::vector<double>& acc, std::vector<double>& mom,
              std::size_t offset) {
        bool finite = true;
        if (cfg_.optimizer == OptimizerKind::Sgd) {
            for (std::size_t k = 0; k < x.size(); ++k) {
                x[k] -= cfg_.lr * g[k];
                finite &= std::isfinite(x[k]);
            }
        } else if (cfg_.optimizer == OptimizerKind::Adam) {
            // Lazy variant: only rows with a gradient move; bias correction
            // uses the global step count.
            constexpr double kBeta1 = 0.9;
            constexpr double kBeta2 = 0.999;
            constexpr double kEps = 1e-8;
            const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
            const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
            double* m = mom.data() + offset;
            double* v = acc.data() + offset;
            for (std::size_t k = 0; k < x.size(); ++k) {
                m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * g[k];
                v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * g[k] * g[k];
                x[k] -= cfg_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + kEps);
                finite &= std::isfinite(x[k]);
            }
        } else {
            constexpr double kEps = 1e-10;
            double* a = acc.data() + offset;
            for (std::size_t k = 0; k < x.size(); ++k) {
                a[k] += g[k] * g[k];
                x[k] -= cfg_.lr * g[k] / (std::sqrt(a[k]) + kEps);
                finite &= std::isfinite(x[k]);
            }
        }
        return finite;
    }

    const TrainConfig& cfg_;
    std::vector<double> entity_acc_;
    std::vector<double> relation_acc_;
    std::vector<double> entity_mom_;
    std::vector<double> relation_mom_;
    std::uint64_t t_ = 0;
};

}  // namespace

LossTrace train(EmbeddingModel& model, std::span<const IndexedTriple> triples, const TrainConfig& config,
                const EpochCallback& on_epoch) {
    config.validate();
    if (config.model != model.kind() || config.dim != model.config().dim) {
        throw ConfigError("train config does not match the model's kind/dim");
    }
    model.set_hyperparameters(config);

    LossTrace trace;
    if (config.epochs == 0 || triples.empty()) return trace;
    for (const auto& t : triples) {
        if (t.head >= model.n_entities() || t.tail >= model.n_entities() || t.relation >= model.n_relations()) {
            throw DataError("training triple references an unknown row");
        }
    }

    NegativeSampler sampler(model.n_entities(), triples);
    Optimizer optimizer(model, config);
    Rng rng(config.seed ^ 0x7f4a7c159e3779b9ULL);

    const std::size_t threads = config.deterministic ? 1 : std::max<std::size_t>(1, config.threads);
    std::vector<GradientBuffer> buffers;
    for (std::size_t i = 0; i < threads; ++i) buffers.emplace_back(model);
    GradientBuffer& grad = buffers.front();
    std::vector<double> chunk_loss(threads, 0.0);

    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Sample> batch;

    using Clock = std::chrono::steady_clock;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto started = Clock::now();
        rng.shuffle(order.begin(), order.end());
        double epoch_loss = 0.0;
        std::size_t batch_no = 0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.resize(end - start);
            for (std::size_t i = start; i < end; ++i) {
                Sample& s = batch[i - start];
                s.positive = triples[order[i]];
                s.negatives.resize(config.negatives_per_positive);
                for (auto& neg : s.negatives) neg = sampler.corrupt(s.positive, rng);
            }

            const double scale = 1.0 / static_cast<double>(batch.size());
            double batch_loss = 0.0;
            if (threads == 1) {
                grad.clear();
                for (const auto& s : batch) batch_loss += accumulate_gradient(model, s, scale, grad);
            } else {
                for (auto& b : buffers) b.clear();
                std::fill(chunk_loss.begin(), chunk_loss.end(), 0.0);
                const std::size_t chunk = (batch.size() + threads - 1) / threads;
                parallel_for(threads, threads, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t w = lo; w < hi; ++w) {
                        const std::size_t b0 = w * chunk;
                        const std::size_t b1 = std::min(batch.size(), b0 + chunk);
                        for (std::size_t i = b0; i < b1; ++i) {
                            chunk_loss[w] += accumulate_gradient(model, batch[i], scale, buffers[w]);
                        }
                    }
                });
                for (std::size_t w = 1; w < threads; ++w) grad.add(buffers[w]);
                for (double l : chunk_loss) batch_loss += l;
            }

            if (!std::isfinite(batch_loss)) throw TrainingError(epoch, batch_no, "loss is not finite");
            if (!optimizer.apply(model, grad)) throw TrainingError(epoch, batch_no, "parameter is not finite");
            epoch_loss += batch_loss;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.mean_loss = epoch_loss / static_cast<double>(order.size());
        record.wall_time_s = std::chrono::duration<double>(Clock::now() - started).count();
        trace.push_back(record);
        if (on_epoch) on_epoch(record);
    }
    return trace;
}

}  // namespace kgrec::kge
