#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pvtune/core.hpp"

namespace pvtune {

// Differentiable objective bounded from below. Evaluation is pure and
// thread-safe; all implementations are immutable after construction.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::size_t dim() const = 0;
    virtual double value(std::span<const double> x) const = 0;
    virtual std::vector<double> gradient(std::span<const double> x) const = 0;

    virtual bool is_separable() const { return false; }
    // Per-coordinate term phi_i(v); only when is_separable().
    virtual double separable_term(std::size_t i, double v) const;

    virtual bool has_exact_p_step() const { return false; }
    // Dense minimizer over {y : P(y) contains the given partition}.
    virtual std::vector<double> exact_p_step(const Partition& partition) const;

    // Known global smoothness constant, when available.
    virtual std::optional<double> smoothness_bound() const { return std::nullopt; }
    // Known smoothness constant restricted to an index subset, when available.
    virtual std::optional<double> smoothness_bound(std::span<const std::size_t> indices) const;
};

// phi(x) = sum_i a_i (x_i - target_i)^2 with a_i > 0. Separable, exact P step,
// Hessian 2*diag(a).
class WeightedQuadratic : public Objective {
public:
    WeightedQuadratic(std::vector<double> weights, std::vector<double> target);

    // a_i = (i+1)/d, the canonical experiment weighting.
    static std::vector<double> linear_weights(std::size_t d);

    std::size_t dim() const override { return weights_.size(); }
    double value(std::span<const double> x) const override;
    std::vector<double> gradient(std::span<const double> x) const override;

    bool is_separable() const override { return true; }
    double separable_term(std::size_t i, double v) const override;

    bool has_exact_p_step() const override { return true; }
    std::vector<double> exact_p_step(const Partition& partition) const override;

    std::optional<double> smoothness_bound() const override;
    std::optional<double> smoothness_bound(std::span<const std::size_t> indices) const override;

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& target() const { return target_; }

private:
    std::vector<double> weights_;
    std::vector<double> target_;
};

// phi(x) = (x - target)^T A (x - target) with symmetric A (row-major).
// Non-separable; exercises the gradient-descent P step and the power-iteration
// smoothness estimator.
class DenseQuadratic : public Objective {
public:
    DenseQuadratic(std::size_t dim, std::vector<double> matrix, std::vector<double> target);

    std::size_t dim() const override { return dim_; }
    double value(std::span<const double> x) const override;
    std::vector<double> gradient(std::span<const double> x) const override;

    const std::vector<double>& matrix() const { return matrix_; }
    const std::vector<double>& target() const { return target_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> matrix_;
    std::vector<double> target_;
};

// Adapter for arbitrary value/gradient callbacks. Reports no separability and
// no exact P step.
class BlackBoxObjective : public Objective {
public:
    using ValueFn = std::function<double(std::span<const double>)>;
    using GradFn = std::function<std::vector<double>(std::span<const double>)>;

    BlackBoxObjective(std::size_t dim, ValueFn value_fn, GradFn grad_fn);

    std::size_t dim() const override { return dim_; }
    double value(std::span<const double> x) const override;
    std::vector<double> gradient(std::span<const double> x) const override;

private:
    std::size_t dim_ = 0;
    ValueFn value_fn_;
    GradFn grad_fn_;
};

double quadratic_value(const WeightedQuadratic& obj, std::span<const double> x);
std::vector<double> quadratic_gradient(const WeightedQuadratic& obj, std::span<const double> x);
double quadratic_separable_term(const WeightedQuadratic& obj, std::size_t i, double v);

// Closed-form P step: group value = weighted mean of targets over the group.
// Groups whose optimal values coincide are merged, so |V| may shrink.
QuantizedVector exact_p_step_quadratic(const WeightedQuadratic& obj, const Partition& partition);

}  // namespace pvtune
