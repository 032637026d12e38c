#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qoc/types.hpp"

namespace qoc {

/// Objective returning f(x) and writing the gradient into `grad`.
using Objective = std::function<double(const RVector& x, RVector& grad)>;

struct LbfgsbOptions {
  int memory = 10;
  int max_iterations = 500;
  double pgtol = 1e-8;   // projected-gradient infinity norm
  double ftol = 1e-10;   // relative objective change between iterations
  std::optional<double> target;  // stop once f <= target
};

enum class StopReason { kGradient, kObjectiveChange, kTarget, kMaxIterations, kLineSearch };

std::string to_string(StopReason reason);

struct IterationRecord {
  int iteration;
  double objective;
  double grad_norm;  // projected gradient, infinity norm
};

struct OptResult {
  RVector x;            // best seen
  double value = 0.0;   // objective at x
  double initial_value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;  // gradient, objective-change or target criterion met
  double grad_norm = 0.0;
  StopReason reason = StopReason::kMaxIterations;
  std::vector<IterationRecord> trace;
};

/// Limited-memory BFGS with box constraints (generalized Cauchy point,
/// subspace minimization on the free variables, backtracking line search).
OptResult minimize_lbfgsb(const Objective& objective, const RVector& x0, const RVector& lo, const RVector& hi,
                          const LbfgsbOptions& options = {});

/// Infinity norm of the projected gradient P(x - g) - x.
double projected_gradient_norm(const RVector& x, const RVector& g, const RVector& lo, const RVector& hi);

}  // namespace qoc
