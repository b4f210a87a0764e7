#include "pvtune/smoothness.hpp"

#include <algorithm>
#include <cmath>

#include "pvtune/rng.hpp"

namespace pvtune {

namespace {

std::vector<double> checked_gradient(const Objective& obj, std::span<const double> x) {
    auto g = obj.gradient(x);
    for (double gi : g)
        if (!std::isfinite(gi)) throw NonFiniteObjective("gradient returned non-finite entry");
    return g;
}

void mask_to(std::vector<double>& v, std::span<const std::size_t> indices) {
    std::vector<double> kept(v.size(), 0.0);
    for (std::size_t i : indices) kept[i] = v[i];
    v = std::move(kept);
}

double masked_power_iteration(const Objective& obj, std::span<const double> x,
                              std::span<const std::size_t> indices,
                              const PowerIterConfig& cfg) {
    if (cfg.num_iters < 1) throw Error("schema2: num_iters must be >= 1");
    if (!(cfg.gamma_scale > 0.0)) throw Error("schema2: gamma_scale must be positive");
    const std::size_t d = obj.dim();
    if (x.size() != d) throw DimensionMismatch("schema2: dimension mismatch");

    const double gamma = std::max(cfg.gamma_scale * l2_norm(x), 1e-8);
    Rng rng(mix_seed(cfg.seed, 0x50BEull));
    std::vector<double> r(d, 0.0);
    for (std::size_t i : indices) r[i] = rng.uniform(-1.0, 1.0);

    const auto g0 = checked_gradient(obj, x);
    std::vector<double> probe(x.begin(), x.end());
    for (int k = 0; k <= cfg.num_iters; ++k) {
        const double nr = l2_norm(r);
        if (!(nr > 0.0)) return 0.0;  // zero curvature along the subspace
        for (std::size_t i = 0; i < d; ++i) probe[i] = x[i] + gamma * (r[i] / nr);
        const auto g1 = checked_gradient(obj, probe);
        std::fill(r.begin(), r.end(), 0.0);
        for (std::size_t i : indices) r[i] = (g1[i] - g0[i]) / gamma;
    }
    return l2_norm(r);
}

double masked_pairwise_estimate(const Objective& obj,
                                std::span<const std::vector<double>> trajectory,
                                std::span<const std::size_t> indices) {
    if (trajectory.size() < 2) throw DegenerateTrajectory("schema1: need at least two points");
    const std::size_t d = obj.dim();
    std::vector<std::vector<double>> grads;
    grads.reserve(trajectory.size());
    for (const auto& p : trajectory) {
        if (p.size() != d) throw DimensionMismatch("schema1: point dimension mismatch");
        auto g = checked_gradient(obj, p);
        mask_to(g, indices);
        grads.push_back(std::move(g));
    }
    double best = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        for (std::size_t j = i + 1; j < trajectory.size(); ++j) {
            const double dx = l2_dist(trajectory[i], trajectory[j]);
            if (dx < 1e-12) continue;
            any = true;
            best = std::max(best, l2_dist(grads[i], grads[j]) / dx);
        }
    }
    if (!any) throw DegenerateTrajectory("schema1: all trajectory points coincide");
    return best;
}

}  // namespace

double schema1_estimate(const Objective& obj,
                        std::span<const std::vector<double>> trajectory) {
    std::vector<std::size_t> all(obj.dim());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return masked_pairwise_estimate(obj, trajectory, all);
}

double schema2_hessian_norm(const Objective& obj, std::span<const double> x,
                            const PowerIterConfig& cfg) {
    std::vector<std::size_t> all(obj.dim());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return masked_power_iteration(obj, x, all, cfg);
}

std::vector<std::vector<double>> gd_trajectory(const Objective& obj,
                                               std::span<const double> x0,
                                               std::span<const std::size_t> indices,
                                               int iters, double step) {
    if (x0.size() != obj.dim()) throw DimensionMismatch("gd_trajectory: dimension mismatch");
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(iters));
    std::vector<double> x(x0.begin(), x0.end());
    for (int t = 0; t < iters; ++t) {
        const auto g = checked_gradient(obj, x);
        for (std::size_t i : indices) x[i] -= step * g[i];
        out.push_back(x);
    }
    return out;
}

double schema_estimate_subspace(const Objective& obj, std::span<const double> x,
                                std::span<const std::size_t> indices,
                                SmoothnessSchema schema, const PowerIterConfig& cfg) {
    if (indices.empty()) throw Error("schema_estimate_subspace: empty index set");
    for (std::size_t i : indices)
        if (i >= obj.dim())
            throw IndexOutOfRange("schema_estimate_subspace: index out of range");
    if (schema == SmoothnessSchema::PowerIteration)
        return masked_power_iteration(obj, x, indices, cfg);
    const auto traj = gd_trajectory(obj, x, indices);
    return masked_pairwise_estimate(obj, traj, indices);
}

}  // namespace pvtune
