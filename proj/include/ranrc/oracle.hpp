#pragma once

#include <functional>
#include <vector>

#include "ranrc/costs.hpp"

namespace ranrc {

struct OracleResult {
  Vector x_star;
  double f_star = 0.0;
  double newton_decrement_final = 0.0;  // lambda^2 at termination
  int iterations = 0;
};

struct NewtonOptions {
  double tol = 1e-9;  // terminate when lambda^2 = g^T H^-1 g < tol
  int max_iterations = 200;
  double armijo_slope = 0.25;
  double backtrack_shrink = 0.5;
  double initial_step = 1.0;
  std::function<void(const Vector& x, double f, double lambda2)> on_iterate;
};

/// Thrown when the iteration cap is exceeded; carries the last iterate.
struct NewtonBudgetError : std::runtime_error {
  Vector last_iterate;
  explicit NewtonBudgetError(Vector x)
      : std::runtime_error("newton_minimize: iteration cap exceeded"),
        last_iterate(std::move(x)) {}
};

/// Minimizes sum_i costs[i](x) by damped Newton steps with Armijo
/// backtracking, terminating on the Newton decrement.
OracleResult newton_minimize(const std::vector<const CostFunction*>& costs, const Vector& x0,
                             const NewtonOptions& opts = {});

struct GradientDescentOptions {
  double grad_tol = 1e-9;  // terminate when ||sum grad||_2 <= grad_tol
  long max_iterations = 50'000'000;
  double initial_step = 0.0;  // 0: pick 1 / (max spot-checked curvature)
  int spot_checks = 100;      // Hessian eigenvalue probes around x0
  double probe_scale = 1.0;   // radius of the probe cloud
  // Fixed diagonal (Jacobi) preconditioner from the Hessian diagonal at x0.
  // First-order otherwise; badly scaled regressors need it to finish.
  bool jacobi_precondition = true;
};

/// Independent cross-check: gradient descent, algorithmically disjoint from
/// the Newton path (no linear solves on the iterates). The step starts at
/// 1 / (max spot-checked preconditioned curvature) and halves whenever a
/// step fails to decrease the total cost.
Vector gradient_descent_minimize(const std::vector<const CostFunction*>& costs,
                                 const Vector& x0,
                                 const GradientDescentOptions& opts = {});

class DirectedGraph;
struct RanrcParams;

struct PerturbationResult {
  Vector x_bar;     // converged network estimate (node average)
  double distance;  // ||x_bar - x_star||
};

struct PerturbationRunOptions {
  long events = 200'000;
  std::uint64_t seed = 1;
  long settle_window = 2'000;       // trailing events over which x must be still
  double settle_tol = 1e-9;         // max node movement across the window
};

/// Runs the consensus protocol with the y/z initialization shifted by the
/// given per-node (dy, dz) and reports how far the converged estimate lands
/// from x_star. Throws on non-convergence within the budget.
PerturbationResult fixed_point_perturbation(
    const std::vector<const CostFunction*>& costs, const DirectedGraph& graph,
    const RanrcParams& params, const Vector& x0, const Vector& x_star,
    const std::vector<std::pair<Vector, Matrix>>& perturbations,
    const PerturbationRunOptions& opts = {});

}  // namespace ranrc
