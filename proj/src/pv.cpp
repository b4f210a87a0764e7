#include "pvtune/pv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pvtune {

namespace {

constexpr int kMaxInnerSteps = 10000;
constexpr double kGradTol = 1e-10;
constexpr double kBruteForceGuard = 1e7;

double checked_value(const Objective& obj, std::span<const double> x) {
    const double v = obj.value(x);
    if (!std::isfinite(v)) throw NonFiniteObjective("objective returned non-finite value");
    return v;
}

std::vector<double> checked_gradient(const Objective& obj, std::span<const double> x) {
    auto g = obj.gradient(x);
    for (double gi : g)
        if (!std::isfinite(gi)) throw NonFiniteObjective("gradient returned non-finite entry");
    return g;
}

// Minimize phi over the value vector with assignments fixed, via backtracking
// gradient descent on the reduced u-dimensional problem.
std::vector<double> p_step_gradient_descent(const Objective& obj, const QuantizedVector& x) {
    const std::size_t d = x.dim();
    const std::size_t u = x.num_unique();
    const auto& assign = x.assignments();
    std::vector<double> vals = x.values();
    std::vector<double> dense(d), trial_dense(d), trial_vals(u), reduced(u);

    auto expand = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < d; ++i) out[i] = v[assign[i]];
    };

    expand(vals, dense);
    double fv = checked_value(obj, dense);
    double step = 1.0;
    for (int it = 0; it < kMaxInnerSteps; ++it) {
        const auto g = checked_gradient(obj, dense);
        std::fill(reduced.begin(), reduced.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) reduced[assign[i]] += g[i];
        double gn2 = 0.0;
        for (double r : reduced) gn2 += r * r;
        if (std::sqrt(gn2) < kGradTol) break;

        double f_try = fv;
        while (true) {
            for (std::size_t k = 0; k < u; ++k) trial_vals[k] = vals[k] - step * reduced[k];
            expand(trial_vals, trial_dense);
            f_try = checked_value(obj, trial_dense);
            if (f_try <= fv - 1e-4 * step * gn2) break;
            step *= 0.5;
            if (step < 1e-18) break;
        }
        if (f_try > fv) break;  // no progress possible at float resolution
        vals = trial_vals;
        dense = trial_dense;
        fv = f_try;
        step = std::min(step * 2.0, 1e8);
    }
    return dense;
}

}  // namespace

QuantizedVector p_step(const Objective& obj, const QuantizedVector& x) {
    if (x.dim() != obj.dim()) throw DimensionMismatch("p_step: dimension mismatch");
    std::vector<double> dense;
    if (obj.has_exact_p_step()) {
        dense = obj.exact_p_step(partition_of(x));
        checked_value(obj, dense);
    } else {
        dense = p_step_gradient_descent(obj, x);
    }
    return QuantizedVector::from_dense(dense, x.max_unique());
}

QuantizedVector v_step_brute_force_over(const Objective& obj, std::span<const double> values,
                                        std::size_t dim, std::size_t max_unique) {
    const std::size_t u = values.size();
    if (u == 0) throw Error("v_step_brute_force: empty value set");
    double states = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
        states *= static_cast<double>(u);
        if (states > kBruteForceGuard)
            throw SearchSpaceTooLarge("v_step_brute_force: |V|^d exceeds 1e7 states");
    }

    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> cand(dim, values[0]);
    std::vector<std::size_t> best_idx = idx;
    double best = checked_value(obj, cand);
    while (true) {
        // odometer increment, last coordinate fastest
        std::size_t pos = dim;
        while (pos > 0) {
            --pos;
            if (++idx[pos] < u) {
                cand[pos] = values[idx[pos]];
                break;
            }
            idx[pos] = 0;
            cand[pos] = values[0];
            if (pos == 0) {
                std::vector<double> best_dense(dim);
                for (std::size_t i = 0; i < dim; ++i) best_dense[i] = values[best_idx[i]];
                return QuantizedVector::from_dense(best_dense, max_unique);
            }
        }
        const double f = checked_value(obj, cand);
        if (f < best) {
            best = f;
            best_idx = idx;
        }
    }
}

QuantizedVector v_step_brute_force(const Objective& obj, const QuantizedVector& y) {
    if (y.dim() != obj.dim()) throw DimensionMismatch("v_step_brute_force: dimension mismatch");
    return v_step_brute_force_over(obj, y.values(), y.dim(), y.max_unique());
}

QuantizedVector v_step_separable_over(const Objective& obj, std::span<const double> values,
                                      std::size_t dim, std::size_t max_unique) {
    if (!obj.is_separable()) throw Error("v_step_separable: objective is not separable");
    if (values.empty()) throw Error("v_step_separable: empty value set");
    std::vector<double> dense(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double best = obj.separable_term(i, values[0]);
        std::size_t best_k = 0;
        for (std::size_t k = 1; k < values.size(); ++k) {
            const double f = obj.separable_term(i, values[k]);
            if (f < best) {
                best = f;
                best_k = k;
            }
        }
        dense[i] = values[best_k];
    }
    return QuantizedVector::from_dense(dense, max_unique);
}

QuantizedVector v_step_separable(const Objective& obj, const QuantizedVector& y) {
    if (y.dim() != obj.dim()) throw DimensionMismatch("v_step_separable: dimension mismatch");
    return v_step_separable_over(obj, y.values(), y.dim(), y.max_unique());
}

RunResult run_pv(const Objective& obj, const QuantizedVector& x0, const PVConfig& cfg) {
    if (cfg.max_iterations < 1) throw Error("run_pv: max_iterations must be >= 1");
    if (cfg.convergence_tol < 0.0) throw Error("run_pv: convergence_tol must be >= 0");

    QuantizedVector x = x0;
    std::vector<double> x_dense = x.dense();
    double loss = checked_value(obj, x_dense);

    std::vector<TraceRecord> trace;
    trace.push_back({0, 0, Phase::Init, loss, static_cast<int>(x.num_unique()), 0.0, {}, {}});

    double prev_full = loss;
    int calm = 0;
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        QuantizedVector y = p_step(obj, x);
        auto y_dense = y.dense();
        const double loss_y = checked_value(obj, y_dense);
        trace.push_back({0, k, Phase::P, loss_y, static_cast<int>(y.num_unique()),
                         relative_step_norm(x_dense, y_dense), {}, {}});

        QuantizedVector x_new = (cfg.v_step_mode == VStepMode::BruteForce)
                                    ? v_step_brute_force(obj, y)
                                    : v_step_separable(obj, y);
        auto new_dense = x_new.dense();
        const double loss_x = checked_value(obj, new_dense);
        trace.push_back({0, k, Phase::V, loss_x, static_cast<int>(x_new.num_unique()),
                         relative_step_norm(y_dense, new_dense), {}, {}});

        x = std::move(x_new);
        x_dense = std::move(new_dense);

        const double denom = std::max(std::abs(prev_full), std::numeric_limits<double>::min());
        const double rel_decrease = (prev_full - loss_x) / denom;
        calm = (rel_decrease < cfg.convergence_tol) ? calm + 1 : 0;
        prev_full = loss_x;
        if (calm >= cfg.converged_window) break;
    }
    return {std::move(x), std::move(trace)};
}

}  // namespace pvtune
