#pragma once

#include <span>
#include <vector>

#include "pvtune/core.hpp"
#include "pvtune/objective.hpp"

namespace pvtune {

enum class VStepMode { BruteForce, SeparableOptimized };

struct PVConfig {
    int max_iterations = 200;
    // Stop once the relative loss decrease over a full PV iteration stays
    // below this for `converged_window` consecutive iterations.
    double convergence_tol = 1e-12;
    int converged_window = 3;
    VStepMode v_step_mode = VStepMode::SeparableOptimized;
};

struct RunResult {
    QuantizedVector x;
    std::vector<TraceRecord> trace;
};

// arg min over {y : P(y) contains P(x)}. Uses the objective's exact P step
// when available, otherwise gradient descent on the value vector.
QuantizedVector p_step(const Objective& obj, const QuantizedVector& x);

// Exact V step by exhausting all |V(y)|^d assignments. Guarded to 1e7 states.
QuantizedVector v_step_brute_force(const Objective& obj, const QuantizedVector& y);

// Exact V step for separable objectives: per-coordinate arg min over V(y),
// ties to the smaller value. O(c*d).
QuantizedVector v_step_separable(const Objective& obj, const QuantizedVector& y);

// Same steps over an explicit sorted value set (used by the PV+ extended
// search space).
QuantizedVector v_step_brute_force_over(const Objective& obj, std::span<const double> values,
                                        std::size_t dim, std::size_t max_unique);
QuantizedVector v_step_separable_over(const Objective& obj, std::span<const double> values,
                                      std::size_t dim, std::size_t max_unique);

RunResult run_pv(const Objective& obj, const QuantizedVector& x0, const PVConfig& cfg);

}  // namespace pvtune
