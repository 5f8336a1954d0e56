#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace kgrec::kge {

enum class ModelKind : std::uint8_t { ComplEx = 0, TransE = 1 };
enum class OptimizerKind : std::uint8_t { Sgd = 0, Adagrad = 1, Adam = 2 };

std::string_view to_string(ModelKind kind);
std::string_view to_string(OptimizerKind kind);
/// Case-insensitive; throws ConfigError on unknown names.
ModelKind parse_model_kind(std::string_view name);
OptimizerKind parse_optimizer_kind(std::string_view name);

/// Training hyperparameters. ComplEx is trained with the logistic
/// (softplus) loss, TransE with the margin ranking loss.
struct TrainConfig {
    ModelKind model = ModelKind::ComplEx;
    /// Embedding dimensionality. ComplEx rows hold 2*dim reals.
    std::size_t dim = 200;
    double lr = 0.01;
    std::size_t batch_size = 128;
    std::size_t epochs = 10;
    std::size_t negatives_per_positive = 16;
    /// Margin of the TransE ranking loss.
    double margin = 1.0;
    /// Optional L2 penalty on the rows of each positive triple.
    double l2 = 0.0;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    /// Sequential batch application; bit-reproducible under `seed`.
    bool deterministic = true;
    /// Worker cap for the parallel mode and for evaluation.
    std::size_t threads = 1;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    [[nodiscard]] std::size_t row_width() const noexcept {
        return model == ModelKind::ComplEx ? 2 * dim : dim;
    }
};

}  // namespace kgrec::kge
