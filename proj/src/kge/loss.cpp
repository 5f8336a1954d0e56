#include "kgrec/kge/loss.hpp"

#include <algorithm>
#include <cmath>

namespace kgrec::kge {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

GradientBuffer::GradientBuffer(const EmbeddingModel& model)
    : width_(model.width()),
      entity_(model.n_entities() * model.width(), 0.0),
      relation_(model.n_relations() * model.width(), 0.0),
      entity_mark_(model.n_entities(), 0),
      relation_mark_(model.n_relations(), 0) {}

std::span<double> GradientBuffer::entity(std::uint32_t row) {
    if (!entity_mark_[row]) {
        entity_mark_[row] = 1;
        touched_entities_.push_back(row);
    }
    return {entity_.data() + row * width_, width_};
}

std::span<double> GradientBuffer::relation(std::uint32_t row) {
    if (!relation_mark_[row]) {
        relation_mark_[row] = 1;
        touched_relations_.push_back(row);
    }
    return {relation_.data() + row * width_, width_};
}

std::span<const double> GradientBuffer::entity_view(std::uint32_t row) const {
    return {entity_.data() + row * width_, width_};
}

std::span<const double> GradientBuffer::relation_view(std::uint32_t row) const {
    return {relation_.data() + row * width_, width_};
}

void GradientBuffer::add(const GradientBuffer& other) {
    for (auto row : other.touched_entities_) {
        auto dst = entity(row);
        auto src = other.entity_view(row);
        for (std::size_t k = 0; k < width_; ++k) dst[k] += src[k];
    }
    for (auto row : other.touched_relations_) {
        auto dst = relation(row);
        auto src = other.relation_view(row);
        for (std::size_t k = 0; k < width_; ++k) dst[k] += src[k];
    }
}

void GradientBuffer::clear() {
    for (auto row : touched_entities_) {
        std::fill_n(entity_.data() + row * width_, width_, 0.0);
        entity_mark_[row] = 0;
    }
    for (auto row : touched_relations_) {
        std::fill_n(relation_.data() + row * width_, width_, 0.0);
        relation_mark_[row] = 0;
    }
    touched_entities_.clear();
    touched_relations_.clear();
}

void add_score_gradient(ModelKind kind, std::span<const double> h, std::span<const double> r,
                        std::span<const double> t, double coeff, std::span<double> gh, std::span<double> gr,
                        std::span<double> gt) {
    if (kind == ModelKind::ComplEx) {
        const std::size_t d = h.size() / 2;
        for (std::size_t k = 0; k < d; ++k) {
            const double hr = h[k], hi = h[d + k];
            const double rr = r[k], ri = r[d + k];
            const double tr = t[k], ti = t[d + k];
            gh[k] += coeff * (rr * tr + ri * ti);
            gh[d + k] += coeff * (rr * ti - ri * tr);
            gr[k] += coeff * (hr * tr + hi * ti);
            gr[d + k] += coeff * (hr * ti - hi * tr);
            gt[k] += coeff * (hr * rr - hi * ri);
            gt[d + k] += coeff * (hi * rr + hr * ri);
        }
        return;
    }
    // TransE: score = -sum |h + r - t|; the subgradient at 0 is taken as 0.
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double diff = h[k] + r[k] - t[k];
        const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
        gh[k] -= coeff * sign;
        gr[k] -= coeff * sign;
        gt[k] += coeff * sign;
    }
}

namespace {

double l2_term(const EmbeddingModel& model, const IndexedTriple& t) {
    auto sq = [](std::span<const double> v) {
        double s = 0;
        for (double x : v) s += x * x;
        return s;
    };
    return sq(model.entity_row(t.head)) + sq(model.relation_row(t.relation)) + sq(model.entity_row(t.tail));
}

}  // namespace

double sample_loss(const EmbeddingModel& model, const Sample& sample) {
    const auto& cfg = model.config();
    const double pos = model.score(sample.positive);
    const double n = static_cast<double>(sample.negatives.size());
    double loss = 0.0;
    if (cfg.model == ModelKind::ComplEx) {
        loss = softplus(-pos);
        for (const auto& neg : sample.negatives) loss += softplus(model.score(neg)) / n;
    } else {
        for (const auto& neg : sample.negatives) loss += std::max(0.0, cfg.margin + model.score(neg) - pos) / n;
    }
    if (cfg.l2 > 0) loss += cfg.l2 * l2_term(model, sample.positive);
    return loss;
}

double accumulate_gradient(const EmbeddingModel& model, const Sample& sample, double scale, GradientBuffer& grad) {
    const auto& cfg = model.config();
    const auto kind = cfg.model;
    const double n = static_cast<double>(sample.negatives.size());

    auto push = [&](const IndexedTriple& t, double coeff) {
        add_score_gradient(kind, model.entity_row(t.head), model.relation_row(t.relation), model.entity_row(t.tail),
                           coeff, grad.entity(t.head), grad.relation(t.relation), grad.entity(t.tail));
    };

    const double pos = model.score(sample.positive);
    double loss = 0.0;
    if (kind == ModelKind::ComplEx) {
        loss = softplus(-pos);
        push(sample.positive, -scale * sigmoid(-pos));
        for (const auto& neg : sample.negatives) {
            const double s = model.score(neg);
            loss += softplus(s) / n;
            push(neg, scale * sigmoid(s) / n);
        }
    } else {
        double active = 0.0;
        for (const auto& neg : sample.negatives) {
            const double violation = cfg.margin + model.score(neg) - pos;
            if (violation > 0) {
                loss += violation / n;
                push(neg, scale / n);
                active += 1.0;
            }
        }
        if (active > 0) push(sample.positive, -scale * active / n);
    }

    if (cfg.l2 > 0) {
        loss += cfg.l2 * l2_term(model, sample.positive);
        const auto& t = sample.positive;
        const double c = 2.0 * cfg.l2 * scale;
        auto decay = [c](std::span<const double> x, std::span<double> g) {
            for (std::size_t k = 0; k < x.size(); ++k) g[k] += c * x[k];
        };
        decay(model.entity_row(t.head), grad.entity(t.head));
        decay(model.relation_row(t.relation), grad.relation(t.relation));
        decay(model.entity_row(t.tail), grad.entity(t.tail));
    }
    return loss;
}

}  // namespace kgrec::kge
