#include "pvtune/objective.hpp"

#include <algorithm>
#include <cmath>

namespace pvtune {

double Objective::separable_term(std::size_t, double) const {
    throw Error("Objective: separable_term not supported");
}

std::vector<double> Objective::exact_p_step(const Partition&) const {
    throw Error("Objective: exact_p_step not supported");
}

std::optional<double> Objective::smoothness_bound(std::span<const std::size_t>) const {
    return std::nullopt;
}

WeightedQuadratic::WeightedQuadratic(std::vector<double> weights, std::vector<double> target)
    : weights_(std::move(weights)), target_(std::move(target)) {
    if (weights_.empty() || weights_.size() != target_.size())
        throw DimensionMismatch("WeightedQuadratic: weights/target size mismatch");
    for (double a : weights_)
        if (!(a > 0.0) || !std::isfinite(a))
            throw Error("WeightedQuadratic: weights must be positive and finite");
    for (double t : target_)
        if (!std::isfinite(t)) throw Error("WeightedQuadratic: non-finite target");
}

std::vector<double> WeightedQuadratic::linear_weights(std::size_t d) {
    std::vector<double> a(d);
    for (std::size_t i = 0; i < d; ++i)
        a[i] = static_cast<double>(i + 1) / static_cast<double>(d);
    return a;
}

double WeightedQuadratic::value(std::span<const double> x) const {
    if (x.size() != weights_.size())
        throw DimensionMismatch("WeightedQuadratic::value: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - target_[i];
        s += weights_[i] * d * d;
    }
    return s;
}

std::vector<double> WeightedQuadratic::gradient(std::span<const double> x) const {
    if (x.size() != weights_.size())
        throw DimensionMismatch("WeightedQuadratic::gradient: dimension mismatch");
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = 2.0 * weights_[i] * (x[i] - target_[i]);
    return g;
}

double WeightedQuadratic::separable_term(std::size_t i, double v) const {
    if (i >= weights_.size())
        throw IndexOutOfRange("WeightedQuadratic::separable_term: index out of range");
    const double d = v - target_[i];
    return weights_[i] * d * d;
}

std::vector<double> WeightedQuadratic::exact_p_step(const Partition& partition) const {
    if (partition.dim() != weights_.size())
        throw DimensionMismatch("WeightedQuadratic::exact_p_step: dimension mismatch");
    std::vector<double> out(weights_.size());
    for (const auto& group : partition.groups()) {
        double num = 0.0, den = 0.0;
        for (std::size_t i : group) {
            num += weights_[i] * target_[i];
            den += weights_[i];
        }
        const double v = num / den;
        for (std::size_t i : group) out[i] = v;
    }
    return out;
}

std::optional<double> WeightedQuadratic::smoothness_bound() const {
    return 2.0 * *std::max_element(weights_.begin(), weights_.end());
}

std::optional<double> WeightedQuadratic::smoothness_bound(
    std::span<const std::size_t> indices) const {
    if (indices.empty()) throw Error("WeightedQuadratic::smoothness_bound: empty index set");
    double m = 0.0;
    for (std::size_t i : indices) {
        if (i >= weights_.size())
            throw IndexOutOfRange("WeightedQuadratic::smoothness_bound: index out of range");
        m = std::max(m, weights_[i]);
    }
    return 2.0 * m;
}

DenseQuadratic::DenseQuadratic(std::size_t dim, std::vector<double> matrix,
                               std::vector<double> target)
    : dim_(dim), matrix_(std::move(matrix)), target_(std::move(target)) {
    if (dim_ == 0 || matrix_.size() != dim_ * dim_ || target_.size() != dim_)
        throw DimensionMismatch("DenseQuadratic: inconsistent sizes");
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = i + 1; j < dim_; ++j)
            if (matrix_[i * dim_ + j] != matrix_[j * dim_ + i])
                throw Error("DenseQuadratic: matrix must be symmetric");
}

double DenseQuadratic::value(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionMismatch("DenseQuadratic::value: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < dim_; ++j)
            row += matrix_[i * dim_ + j] * (x[j] - target_[j]);
        s += (x[i] - target_[i]) * row;
    }
    return s;
}

std::vector<double> DenseQuadratic::gradient(std::span<const double> x) const {
    if (x.size() != dim_)
        throw DimensionMismatch("DenseQuadratic::gradient: dimension mismatch");
    std::vector<double> g(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < dim_; ++j)
            row += matrix_[i * dim_ + j] * (x[j] - target_[j]);
        g[i] = 2.0 * row;
    }
    return g;
}

BlackBoxObjective::BlackBoxObjective(std::size_t dim, ValueFn value_fn, GradFn grad_fn)
    : dim_(dim), value_fn_(std::move(value_fn)), grad_fn_(std::move(grad_fn)) {
    if (dim_ == 0) throw Error("BlackBoxObjective: dim must be positive");
    if (!value_fn_ || !grad_fn_) throw Error("BlackBoxObjective: missing callbacks");
}

double BlackBoxObjective::value(std::span<const double> x) const {
    if (x.size() != dim_)
        throw DimensionMismatch("BlackBoxObjective::value: dimension mismatch");
    return value_fn_(x);
}

std::vector<double> BlackBoxObjective::gradient(std::span<const double> x) const {
    if (x.size() != dim_)
        throw DimensionMismatch("BlackBoxObjective::gradient: dimension mismatch");
    auto g = grad_fn_(x);
    if (g.size() != dim_)
        throw DimensionMismatch("BlackBoxObjective::gradient: callback returned wrong size");
    return g;
}

double quadratic_value(const WeightedQuadratic& obj, std::span<const double> x) {
    return obj.value(x);
}

std::vector<double> quadratic_gradient(const WeightedQuadratic& obj, std::span<const double> x) {
    return obj.gradient(x);
}

double quadratic_separable_term(const WeightedQuadratic& obj, std::size_t i, double v) {
    return obj.separable_term(i, v);
}

QuantizedVector exact_p_step_quadratic(const WeightedQuadratic& obj, const Partition& partition) {
    return QuantizedVector::from_dense(obj.exact_p_step(partition), partition.group_count());
}

}  // namespace pvtune
