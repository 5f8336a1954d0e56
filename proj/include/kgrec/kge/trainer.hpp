#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <unordered_set>
#include <vector>

#include "kgrec/common/error.hpp"
#include "kgrec/common/random.hpp"
#include "kgrec/kge/model.hpp"

namespace kgrec::kge {

/// Raised when the loss or a parameter stops being finite.
class TrainingError : public Error {
public:
    TrainingError(std::size_t epoch, std::size_t batch, const std::string& what)
        : Error("training diverged at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " +
                what),
          epoch_(epoch),
          batch_(batch) {}

    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }
    [[nodiscard]] std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double wall_time_s = 0.0;
};

using LossTrace = std::vector<EpochRecord>;

/// CSV with header `epoch,mean_loss,wall_time_s`.
void write_loss_csv(std::ostream& out, const LossTrace& trace);

/// Corrupts head or tail (fair coin) with a uniformly drawn entity and
/// redraws while the corruption is a known positive. After `kMaxAttempts`
/// redraws the last draw is kept so saturated (h, r) pairs cannot stall.
class NegativeSampler {
public:
    static constexpr int kMaxAttempts = 64;

    NegativeSampler(std::size_t n_entities, std::span<const IndexedTriple> positives);

    IndexedTriple corrupt(const IndexedTriple& positive, Rng& rng) const;
    [[nodiscard]] bool is_positive(const IndexedTriple& t) const { return positives_.contains(t); }

private:
    std::size_t n_entities_;
    std::unordered_set<IndexedTriple, IndexedTripleHash> positives_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training. Each positive gets `negatives_per_positive`
/// corruptions; the batch gradient is the mean over its positives. With
/// config.deterministic the run is bit-reproducible under config.seed;
/// otherwise gradient computation is spread over config.threads workers.
/// The model's loss hyperparameters are replaced by those in `config`.
LossTrace train(EmbeddingModel& model, std::span<const IndexedTriple> triples, const TrainConfig& config,
                const EpochCallback& on_epoch = {});

}  // namespace kgrec::kge
