#include "pvtune/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pvtune {

namespace {

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

double halpern_alpha(const LinearizedConfig& cfg, int t) {
    if (cfg.halpern_alphas.empty()) return 1.0 / static_cast<double>(t + 1);
    return cfg.halpern_alphas[static_cast<std::size_t>(t)];
}

void validate_lin_config(const LinearizedConfig& cfg) {
    if (!(cfg.smoothness_l > 0.0)) throw Error("LinearizedConfig: smoothness_l must be positive");
    if (cfg.inner_steps_t < 1) throw Error("LinearizedConfig: inner_steps_t must be >= 1");
    if (cfg.halpern && !cfg.halpern_alphas.empty()) {
        if (cfg.halpern_alphas.front() != 1.0)
            throw Error("LinearizedConfig: Halpern schedule must start at 1");
        for (std::size_t t = 1; t < cfg.halpern_alphas.size(); ++t)
            if (!(cfg.halpern_alphas[t] < cfg.halpern_alphas[t - 1]))
                throw Error("LinearizedConfig: Halpern schedule must be strictly decreasing");
        if (cfg.halpern_alphas.size() < static_cast<std::size_t>(cfg.inner_steps_t))
            throw Error("LinearizedConfig: Halpern schedule shorter than inner_steps_t");
    }
}

// Weighted sampling without replacement, probability proportional to weight.
// All-zero weights fall back to uniform.
std::vector<std::size_t> sample_proportional(std::span<const double> weights, std::size_t count,
                                             Rng& rng) {
    std::vector<std::size_t> pool(weights.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<double> w(weights.begin(), weights.end());
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        double total = 0.0;
        for (std::size_t p : pool) total += w[p];
        std::size_t chosen_pos = 0;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t pos = 0; pos < pool.size(); ++pos) {
                acc += w[pool[pos]];
                if (r < acc || pos + 1 == pool.size()) {
                    chosen_pos = pos;
                    break;
                }
            }
        } else {
            chosen_pos = static_cast<std::size_t>(rng.uniform_int(pool.size()));
        }
        picked.push_back(pool[chosen_pos]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen_pos));
    }
    return picked;
}

}  // namespace

std::vector<double> gd_target(const Objective& obj, const QuantizedVector& y, double l) {
    if (!(l > 0.0)) throw Error("gd_target: l must be positive");
    auto dense = y.dense();
    const auto g = checked_gradient(obj, dense);
    for (std::size_t i = 0; i < dense.size(); ++i) dense[i] -= g[i] / l;
    return dense;
}

QuantizedVector linearized_v_step(const Objective& obj, const QuantizedVector& y, double l) {
    const auto target = gd_target(obj, y, l);
    const auto& vals = y.values();
    std::vector<double> dense(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) dense[i] = nearest_value(vals, target[i]);
    return QuantizedVector::from_dense(dense, y.max_unique());
}

QuantizedVector approx_v_multi(const Objective& obj, const QuantizedVector& y,
                               const LinearizedConfig& cfg) {
    validate_lin_config(cfg);
    const auto& grid = y.values();
    const std::size_t d = y.dim();
    std::vector<double> z = y.dense();

    if (!cfg.halpern) {
        // variant 1: repeated rounding, always constrained to V(y)
        std::vector<double> rounded(d);
        for (int t = 0; t < cfg.inner_steps_t; ++t) {
            const auto g = checked_gradient(obj, z);
            for (std::size_t i = 0; i < d; ++i)
                rounded[i] = nearest_value(grid, z[i] - g[i] / cfg.smoothness_l);
            z = rounded;
        }
        return QuantizedVector::from_dense(z, y.max_unique());
    }

    // variant 2: Halpern mixing keeps a continuous iterate; only the final
    // output is projected back onto the grid.
    const std::vector<double> z0 = z;
    for (int t = 0; t < cfg.inner_steps_t; ++t) {
        const auto g = checked_gradient(obj, z);
        const double alpha = halpern_alpha(cfg, t);
        for (std::size_t i = 0; i < d; ++i) {
            const double m = nearest_value(grid, z[i] - g[i] / cfg.smoothness_l);
            z[i] = (1.0 - alpha) * m + alpha * z0[i];
        }
    }
    for (std::size_t i = 0; i < d; ++i) z[i] = nearest_value(grid, z[i]);
    return QuantizedVector::from_dense(z, y.max_unique());
}

Subspace select_subspace(std::span<const double> direction, const SubspaceConfig& cfg,
                         const QuantizedVector& y, Rng& rng) {
    const std::size_t d = y.dim();
    if (direction.size() != d) throw DimensionMismatch("select_subspace: dimension mismatch");
    if (!(cfg.trust_ratio_rho > 0.0))
        throw Error("select_subspace: trust_ratio_rho must be positive");

    const std::size_t want = cfg.use_trust_ratio ? d : std::min(cfg.tau, d);
    if (!cfg.use_trust_ratio && cfg.tau < 1)
        throw Error("select_subspace: tau must be >= 1");

    std::vector<std::size_t> order;
    switch (cfg.selection) {
        case SubspaceSelection::GreedyTopK: {
            order.resize(d);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(direction[a]) > std::abs(direction[b]);
            });
            order.resize(want);
            break;
        }
        case SubspaceSelection::UniformRandom: {
            std::vector<std::size_t> perm(d);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            for (std::size_t i = d; i > 1; --i)
                std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
            order.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(want));
            break;
        }
        case SubspaceSelection::GradientProportional: {
            std::vector<double> w(d);
            for (std::size_t i = 0; i < d; ++i) w[i] = std::abs(direction[i]);
            order = sample_proportional(w, want, rng);
            break;
        }
    }

    std::vector<std::size_t> chosen;
    if (!cfg.use_trust_ratio) {
        chosen = order;
    } else {
        // Admit candidates in chunks of 1% of d; once the rounded update would
        // exceed rho * ||x||, roll back inside the last chunk. At least one
        // index is always allowed.
        const auto dense = y.dense();
        const auto& vals = y.values();
        const double budget = cfg.trust_ratio_rho * l2_norm(dense);
        const std::size_t chunk = std::max<std::size_t>(1, d / 100);
        double acc = 0.0;  // sum of squared admitted deltas
        bool over = false;
        for (std::size_t start = 0; start < order.size() && !over; start += chunk) {
            const std::size_t end = std::min(order.size(), start + chunk);
            double chunk_acc = acc;
            for (std::size_t p = start; p < end; ++p) {
                const std::size_t i = order[p];
                const double delta = nearest_value(vals, dense[i] + direction[i]) - dense[i];
                chunk_acc += delta * delta;
            }
            if (std::sqrt(chunk_acc) <= budget) {
                for (std::size_t p = start; p < end; ++p) chosen.push_back(order[p]);
                acc = chunk_acc;
                continue;
            }
            for (std::size_t p = start; p < end; ++p) {
                const std::size_t i = order[p];
                const double delta = nearest_value(vals, dense[i] + direction[i]) - dense[i];
                if (std::sqrt(acc + delta * delta) > budget) {
                    over = true;
                    break;
                }
                acc += delta * delta;
                chosen.push_back(i);
            }
        }
        if (chosen.empty() && !order.empty()) chosen.push_back(order.front());
    }

    std::sort(chosen.begin(), chosen.end());
    return Subspace{std::move(chosen), 0.0};
}

double subspace_smoothness(const Objective& obj, std::span<const std::size_t> indices,
                           std::span<const double> at, const PowerIterConfig& cfg) {
    if (indices.empty()) throw Error("subspace_smoothness: empty index set");
    if (auto exact = obj.smoothness_bound(indices)) return *exact;
    std::vector<double> x(at.begin(), at.end());
    if (x.empty()) x.assign(obj.dim(), 0.0);
    return schema_estimate_subspace(obj, x, indices, SmoothnessSchema::PowerIteration, cfg);
}

QuantizedVector round_on_subspace(const QuantizedVector& y, std::span<const double> target,
                                  std::span<const std::size_t> indices) {
    if (target.size() != y.dim())
        throw DimensionMismatch("round_on_subspace: dimension mismatch");
    auto dense = y.dense();
    const auto& vals = y.values();
    for (std::size_t i : indices) {
        if (i >= dense.size()) throw IndexOutOfRange("round_on_subspace: index out of range");
        dense[i] = nearest_value(vals, target[i]);
    }
    return QuantizedVector::from_dense(dense, y.max_unique());
}

QuantizedVector subspace_linearized_v_step(const Objective& obj, const QuantizedVector& y,
                                           const Subspace& s) {
    if (s.indices.empty()) throw Error("subspace_linearized_v_step: empty subspace");
    if (!(s.l_sub > 0.0)) throw Error("subspace_linearized_v_step: l_sub must be positive");
    auto target = y.dense();
    const auto g = checked_gradient(obj, target);
    for (std::size_t i : s.indices) {
        if (i >= target.size())
            throw IndexOutOfRange("subspace_linearized_v_step: index out of range");
        target[i] -= g[i] / s.l_sub;
    }
    return round_on_subspace(y, target, s.indices);
}

std::vector<double> adam_direction(AdamState& state, std::span<const double> grad) {
    const std::size_t d = grad.size();
    if (state.first_moment.empty()) state.first_moment.assign(d, 0.0);
    if (state.second_moment.empty()) state.second_moment.assign(d, 0.0);
    if (state.first_moment.size() != d || state.second_moment.size() != d)
        throw DimensionMismatch("adam_direction: moment size mismatch");

    ++state.step_count;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    std::vector<double> disp(d);
    for (std::size_t i = 0; i < d; ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * grad[i];
        v = state.beta2 * v + (1.0 - state.beta2) * grad[i] * grad[i];
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        disp[i] = -state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
    return disp;
}

namespace {

struct LoopState {
    QuantizedVector x;
    std::vector<double> x_dense;
    double prev_full;
    int calm = 0;
};

bool update_convergence(LoopState& st, double loss, const PVConfig& cfg) {
    const double denom = std::max(std::abs(st.prev_full), std::numeric_limits<double>::min());
    const double rel = (st.prev_full - loss) / denom;
    st.calm = (rel < cfg.convergence_tol) ? st.calm + 1 : 0;
    st.prev_full = loss;
    return st.calm >= cfg.converged_window;
}

}  // namespace

RunResult run_linearized_pv(const Objective& obj, const QuantizedVector& x0,
                            const PVConfig& pv_cfg, const LinearizedConfig& lin_cfg) {
    validate_lin_config(lin_cfg);
    LoopState st{x0, x0.dense(), 0.0};
    st.prev_full = checked_value(obj, st.x_dense);

    std::vector<TraceRecord> trace;
    trace.push_back(
        {0, 0, Phase::Init, st.prev_full, static_cast<int>(st.x.num_unique()), 0.0, {}, {}});

    for (int k = 1; k <= pv_cfg.max_iterations; ++k) {
        QuantizedVector y = p_step(obj, st.x);
        auto y_dense = y.dense();
        trace.push_back({0, k, Phase::P, checked_value(obj, y_dense),
                         static_cast<int>(y.num_unique()),
                         relative_step_norm(st.x_dense, y_dense), {}, {}});

        QuantizedVector x_new = approx_v_multi(obj, y, lin_cfg);
        auto new_dense = x_new.dense();
        const double loss = checked_value(obj, new_dense);
        trace.push_back({0, k, Phase::V, loss, static_cast<int>(x_new.num_unique()),
                         relative_step_norm(y_dense, new_dense), {}, {}});

        st.x = std::move(x_new);
        st.x_dense = std::move(new_dense);
        if (update_convergence(st, loss, pv_cfg)) break;
    }
    return {std::move(st.x), std::move(trace)};
}

RunResult run_pv_tuning(const Objective& obj, const QuantizedVector& x0,
                        const PVConfig& pv_cfg, const LinearizedConfig& lin_cfg,
                        const SubspaceConfig& sub_cfg, const PVTuningOptions& opts,
                        Rng& rng) {
    validate_lin_config(lin_cfg);
    LoopState st{x0, x0.dense(), 0.0};
    st.prev_full = checked_value(obj, st.x_dense);

    AdamState adam;
    adam.learning_rate = opts.adam_lr;
    std::vector<double> ste_buffer;
    if (opts.combine_ste) ste_buffer = st.x_dense;

    std::vector<TraceRecord> trace;
    trace.push_back(
        {0, 0, Phase::Init, st.prev_full, static_cast<int>(st.x.num_unique()), 0.0, {}, {}});

    for (int k = 1; k <= pv_cfg.max_iterations; ++k) {
        QuantizedVector y = p_step(obj, st.x);
        auto y_dense = y.dense();
        trace.push_back({0, k, Phase::P, checked_value(obj, y_dense),
                         static_cast<int>(y.num_unique()),
                         relative_step_norm(st.x_dense, y_dense), {}, {}});

        const auto grad = checked_gradient(obj, y_dense);
        std::vector<double> direction(y.dim());
        if (opts.use_adam) {
            direction = adam_direction(adam, grad);
        } else {
            for (std::size_t i = 0; i < direction.size(); ++i)
                direction[i] = -grad[i] / lin_cfg.smoothness_l;
        }

        Subspace s = select_subspace(direction, sub_cfg, y, rng);
        std::optional<double> l_sub_rec;
        QuantizedVector x_new = [&] {
            if (opts.use_adam) {
                // target is the Adam-updated dense weight
                std::vector<double> target(y_dense);
                for (std::size_t i = 0; i < target.size(); ++i) target[i] += direction[i];
                if (auto exact = obj.smoothness_bound(s.indices)) l_sub_rec = *exact;
                return round_on_subspace(y, target, s.indices);
            }
            s.l_sub = subspace_smoothness(obj, s.indices, y_dense);
            l_sub_rec = s.l_sub;
            return subspace_linearized_v_step(obj, y, s);
        }();

        if (opts.combine_ste) {
            // Off-subspace coordinates keep accumulating; their rounding is
            // applied under the same trust-ratio budget. Buffer entries reset
            // whenever the quantized value changes.
            auto new_dense = x_new.dense();
            for (std::size_t i = 0; i < ste_buffer.size(); ++i) ste_buffer[i] += direction[i];
            std::vector<bool> in_s(y.dim(), false);
            for (std::size_t i : s.indices) {
                in_s[i] = true;
                if (new_dense[i] != y_dense[i]) ste_buffer[i] = new_dense[i];
            }
            double acc = 0.0;
            for (std::size_t i = 0; i < new_dense.size(); ++i) {
                const double dlt = new_dense[i] - y_dense[i];
                acc += dlt * dlt;
            }
            const double budget = sub_cfg.trust_ratio_rho * l2_norm(y_dense);
            std::vector<std::size_t> cand;
            for (std::size_t i = 0; i < new_dense.size(); ++i)
                if (!in_s[i]) cand.push_back(i);
            std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(ste_buffer[a] - y_dense[a]) >
                       std::abs(ste_buffer[b] - y_dense[b]);
            });
            const auto& vals = y.values();
            for (std::size_t i : cand) {
                const double rounded = nearest_value(vals, ste_buffer[i]);
                const double dlt = rounded - new_dense[i];
                if (dlt == 0.0) continue;
                if (std::sqrt(acc + dlt * dlt) > budget) break;
                acc += dlt * dlt;
                new_dense[i] = rounded;
                ste_buffer[i] = rounded;
            }
            x_new = QuantizedVector::from_dense(new_dense, y.max_unique());
        }

        auto new_dense = x_new.dense();
        const double loss = checked_value(obj, new_dense);
        trace.push_back({0, k, Phase::V, loss, static_cast<int>(x_new.num_unique()),
                         relative_step_norm(y_dense, new_dense), l_sub_rec,
                         static_cast<int>(s.tau())});

        st.x = std::move(x_new);
        st.x_dense = std::move(new_dense);
        if (update_convergence(st, loss, pv_cfg)) break;
    }
    return {std::move(st.x), std::move(trace)};
}

}  // namespace pvtune
