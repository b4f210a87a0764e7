#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pvtune/objective.hpp"

namespace pvtune {

struct PowerIterConfig {
    int num_iters = 10;         // K; the loop runs K+1 Hessian-vector products
    double gamma_scale = 1e-5;  // gamma = max(gamma_scale * ||x||, 1e-8)
    std::uint64_t seed = 0;
};

enum class SmoothnessSchema { TrajectoryPairwise, PowerIteration };

// Schema I: max pairwise ||grad f(x_i) - grad f(x_j)|| / ||x_i - x_j|| over a
// trajectory. Pairs closer than 1e-12 are skipped.
double schema1_estimate(const Objective& obj,
                        std::span<const std::vector<double>> trajectory);

// Schema II: normalized power iteration on forward-difference Hessian-vector
// products; returns ||r^{K+1}|| as the estimate of max |lambda(hess f(x))|.
double schema2_hessian_norm(const Objective& obj, std::span<const double> x,
                            const PowerIterConfig& cfg);

// Gradient-descent trajectory restricted to an index set (updates masked to
// the set); returns the post-step iterates x_1..x_iters.
std::vector<std::vector<double>> gd_trajectory(const Objective& obj,
                                               std::span<const double> x0,
                                               std::span<const std::size_t> indices,
                                               int iters = 10, double step = 1e-4);

// Either schema with all perturbations/displacements masked to the index set.
double schema_estimate_subspace(const Objective& obj, std::span<const double> x,
                                std::span<const std::size_t> indices,
                                SmoothnessSchema schema, const PowerIterConfig& cfg);

}  // namespace pvtune
