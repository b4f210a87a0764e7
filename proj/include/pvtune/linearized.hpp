#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pvtune/core.hpp"
#include "pvtune/objective.hpp"
#include "pvtune/pv.hpp"
#include "pvtune/rng.hpp"
#include "pvtune/smoothness.hpp"

namespace pvtune {

struct LinearizedConfig {
    double smoothness_l = 1.0;  // the L of the quadratic upper model
    int inner_steps_t = 1;      // T inner rounding steps per V step
    bool halpern = false;
    // Custom Halpern schedule; empty means alpha_t = 1/(t+1). Must start at 1
    // and be strictly decreasing when provided.
    std::vector<double> halpern_alphas;
};

struct Subspace {
    std::vector<std::size_t> indices;  // sorted ascending, distinct
    double l_sub = 0.0;                // smoothness constant along the subspace
    std::size_t tau() const { return indices.size(); }
};

enum class SubspaceSelection { GreedyTopK, UniformRandom, GradientProportional };

struct SubspaceConfig {
    SubspaceSelection selection = SubspaceSelection::GreedyTopK;
    bool use_trust_ratio = false;  // false: fixed tau; true: trust-ratio sizing
    std::size_t tau = 1;
    double trust_ratio_rho = 0.01;
};

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double epsilon = 1e-8;
    double learning_rate = 3e-3;
};

// Single gradient-descent target y+ = deq(y) - (1/l) grad phi(y).
std::vector<double> gd_target(const Objective& obj, const QuantizedVector& y, double l);

// Nearest-value rounding of y+ over V(y); the minimizer of the quadratic
// upper model subject to V(x) within V(y).
QuantizedVector linearized_v_step(const Objective& obj, const QuantizedVector& y, double l);

// Multi-step approximate V step: T repeated roundings constrained to V(y),
// optionally with Halpern mixing of a continuous iterate.
QuantizedVector approx_v_multi(const Objective& obj, const QuantizedVector& y,
                               const LinearizedConfig& cfg);

// Chooses tau coordinates from a proposed per-coordinate displacement.
// Greedy takes the largest magnitudes; random modes sample without
// replacement. The trust-ratio rule admits candidates in chunks until the
// rounded update would exceed rho * ||y||, always keeping at least one index.
// l_sub is left unset.
Subspace select_subspace(std::span<const double> direction, const SubspaceConfig& cfg,
                         const QuantizedVector& y, Rng& rng);

// Smoothness constant restricted to the index set: exact when the objective
// provides one, otherwise a restricted power-iteration estimate at `at`
// (zeros when omitted).
double subspace_smoothness(const Objective& obj, std::span<const std::size_t> indices,
                           std::span<const double> at = {},
                           const PowerIterConfig& cfg = {30, 1e-5, 0});

// Linearized V step restricted to s.indices using step 1/s.l_sub; coordinates
// outside the subspace are untouched.
QuantizedVector subspace_linearized_v_step(const Objective& obj, const QuantizedVector& y,
                                           const Subspace& s);

// Rounds target onto V(y) at the given coordinates only.
QuantizedVector round_on_subspace(const QuantizedVector& y, std::span<const double> target,
                                  std::span<const std::size_t> indices);

// One bias-corrected Adam update; returns the displacement to add to the
// iterate (already negated and scaled by the learning rate).
std::vector<double> adam_direction(AdamState& state, std::span<const double> grad);

// Plain linearized PV: exact P steps alternated with approx_v_multi.
RunResult run_linearized_pv(const Objective& obj, const QuantizedVector& x0,
                            const PVConfig& pv_cfg, const LinearizedConfig& lin_cfg);

struct PVTuningOptions {
    bool use_adam = false;    // V-step direction from Adam instead of grad/L
    bool combine_ste = false; // accumulate off-subspace updates in an STE buffer
    double adam_lr = 3e-3;
};

// Full PV-Tuning loop: P step, subspace selection, subspace linearized V step,
// optional Adam direction and optional STE buffering outside the subspace.
RunResult run_pv_tuning(const Objective& obj, const QuantizedVector& x0,
                        const PVConfig& pv_cfg, const LinearizedConfig& lin_cfg,
                        const SubspaceConfig& sub_cfg, const PVTuningOptions& opts,
                        Rng& rng);

}  // namespace pvtune
