#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kgrec/kge/model.hpp"

namespace kgrec::kge {

/// One positive triple and the corruptions it is contrasted with.
struct Sample {
    IndexedTriple positive;
    std::vector<IndexedTriple> negatives;
};

/// Dense gradient storage shaped like the model, with a record of touched
/// rows so clearing costs O(touched) rather than O(parameters).
class GradientBuffer {
public:
    explicit GradientBuffer(const EmbeddingModel& model);

    std::span<double> entity(std::uint32_t row);
    std::span<double> relation(std::uint32_t row);
    [[nodiscard]] std::span<const double> entity_view(std::uint32_t row) const;
    [[nodiscard]] std::span<const double> relation_view(std::uint32_t row) const;

    /// Touched rows in first-touch order.
    [[nodiscard]] const std::vector<std::uint32_t>& touched_entities() const noexcept { return touched_entities_; }
    [[nodiscard]] const std::vector<std::uint32_t>& touched_relations() const noexcept { return touched_relations_; }

    void add(const GradientBuffer& other);
    void clear();

private:
    std::size_t width_;
    std::vector<double> entity_;
    std::vector<double> relation_;
    std::vector<std::uint8_t> entity_mark_;
    std::vector<std::uint8_t> relation_mark_;
    std::vector<std::uint32_t> touched_entities_;
    std::vector<std::uint32_t> touched_relations_;
};

/// ComplEx: softplus(-s_pos) + mean_j softplus(s_neg_j).
/// TransE:  mean_j max(0, margin + s_neg_j - s_pos).
/// Both add l2 * (|h|^2 + |r|^2 + |t|^2) of the positive when l2 > 0.
double sample_loss(const EmbeddingModel& model, const Sample& sample);

/// Adds `scale` * d(loss)/d(params) into `grad` and returns the loss.
double accumulate_gradient(const EmbeddingModel& model, const Sample& sample, double scale, GradientBuffer& grad);

/// Adds coeff * d(score)/d(h, r, t) into the given gradient rows.
void add_score_gradient(ModelKind kind, std::span<const double> h, std::span<const double> r,
                        std::span<const double> t, double coeff, std::span<double> gh, std::span<double> gr,
                        std::span<double> gt);

double softplus(double x);
double sigmoid(double x);

}  // namespace kgrec::kge
