#include "ranrc/oracle.hpp"

#include <cmath>

#include "ranrc/engine.hpp"

namespace ranrc {

namespace {

void check_costs(const std::vector<const CostFunction*>& costs, const Vector& x0) {
  if (costs.empty()) throw std::invalid_argument("oracle: empty cost list");
  const int n = costs.front()->dimension();
  for (const auto* c : costs)
    if (c->dimension() != n) throw DimensionError("oracle: mixed cost dimensions");
  if (x0.size() != n) throw DimensionError("oracle: x0 dimension mismatch");
}

double total_value(const std::vector<const CostFunction*>& costs, const Vector& x) {
  double f = 0.0;
  for (const auto* c : costs) f += c->value(x);
  return f;
}

Vector total_gradient(const std::vector<const CostFunction*>& costs, const Vector& x) {
  Vector g = Vector::Zero(x.size());
  for (const auto* c : costs) g += c->gradient(x);
  return g;
}

Matrix total_hessian(const std::vector<const CostFunction*>& costs, const Vector& x) {
  Matrix h = Matrix::Zero(x.size(), x.size());
  for (const auto* c : costs) h += c->hessian(x);
  return h;
}

}  // namespace

OracleResult newton_minimize(const std::vector<const CostFunction*>& costs, const Vector& x0,
                             const NewtonOptions& opts) {
  check_costs(costs, x0);
  if (!(opts.tol > 0.0)) throw std::invalid_argument("oracle: tol must be > 0");

  Vector x = x0;
  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    const double f = total_value(costs, x);
    const Vector g = total_gradient(costs, x);
    const Matrix h = total_hessian(costs, x);
    const Vector d = Eigen::LDLT<Matrix>(h).solve(-g);
    const double lambda2 = -g.dot(d);  // Newton decrement g^T H^-1 g
    if (opts.on_iterate) opts.on_iterate(x, f, lambda2);
    if (lambda2 < opts.tol)
      return OracleResult{x, f, lambda2, iter};

    double step = opts.initial_step;
    const double slope = g.dot(d);  // negative
    while (total_value(costs, x + step * d) > f + opts.armijo_slope * step * slope) {
      step *= opts.backtrack_shrink;
      if (step < 1e-20) throw NewtonBudgetError(x);
    }
    x += step * d;
  }
  throw NewtonBudgetError(x);
}

Vector gradient_descent_minimize(const std::vector<const CostFunction*>& costs,
                                 const Vector& x0, const GradientDescentOptions& opts) {
  check_costs(costs, x0);
  const int n = static_cast<int>(x0.size());

  // Fixed diagonal scaling d_i = 1 / H_ii(x0). No solves involved; it only
  // rescales coordinates so one step length fits every direction.
  Vector scale = Vector::Ones(n);
  if (opts.jacobi_precondition) {
    const Vector diag = total_hessian(costs, x0).diagonal();
    for (int i = 0; i < n; ++i) scale(i) = 1.0 / std::max(diag(i), 1e-12);
  }

  double step = opts.initial_step;
  if (step <= 0.0) {
    // Conservative step from curvature probes around x0, measured in the
    // scaled metric: largest eigenvalue of D^1/2 H D^1/2.
    Rng rng(0x6f7261636c65ULL);  // fixed probe stream
    const Vector root = scale.cwiseSqrt();
    double max_eig = 0.0;
    for (int k = 0; k < opts.spot_checks; ++k) {
      Vector p = x0;
      if (k > 0)
        for (int i = 0; i < n; ++i) p(i) += opts.probe_scale * rng.normal();
      const Matrix h =
          root.asDiagonal() * total_hessian(costs, p) * root.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
      max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
    }
    if (!(max_eig > 0.0)) throw std::runtime_error("gradient descent: bad curvature probe");
    step = 1.0 / max_eig;
  }

  Vector x = x0;
  double f = total_value(costs, x);
  for (long iter = 0; iter < opts.max_iterations; ++iter) {
    const Vector g = total_gradient(costs, x);
    if (g.norm() <= opts.grad_tol) return x;
    const Vector xn = x - step * (scale.asDiagonal() * g);
    const double fn = total_value(costs, xn);
    // Ulp-scale slack: near the floor the true decrease per step drops below
    // the resolution of f and a strict check would halve the step forever.
    const double slack = 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(f));
    if (fn > f + slack) {
      // Probed curvature was optimistic for this region; back off and retry.
      step *= 0.5;
      if (step < 1e-300) throw std::runtime_error("gradient descent: step underflow");
      continue;
    }
    x = xn;
    f = fn;
  }
  throw std::runtime_error("gradient descent: iteration cap exceeded");
}

PerturbationResult fixed_point_perturbation(
    const std::vector<const CostFunction*>& costs, const DirectedGraph& graph,
    const RanrcParams& params, const Vector& x0, const Vector& x_star,
    const std::vector<std::pair<Vector, Matrix>>& perturbations,
    const PerturbationRunOptions& opts) {
  check_costs(costs, x0);
  if (static_cast<int>(perturbations.size()) != graph.size())
    throw std::invalid_argument("one (dy, dz) perturbation per node required");
  if (opts.events < 1) throw std::invalid_argument("perturbation run needs events >= 1");

  RanrcSimulation sim(graph, costs, params,
                      Scheduler::uniform_random(child_seed(opts.seed, "sched")),
                      LossModel::none(), x0);
  for (int i = 0; i < graph.size(); ++i) {
    const auto& [dy, dz] = perturbations[i];
    sim.nodes()[i].y += dy;
    sim.nodes()[i].z += ((dz + dz.transpose()) * 0.5).eval();
  }

  const long mark = std::max<long>(0, opts.events - opts.settle_window);
  std::vector<Vector> at_mark;
  for (long t = 1; t <= opts.events; ++t) {
    if (t == mark + 1) {
      at_mark.clear();
      for (const auto& s : sim.nodes()) at_mark.push_back(s.x);
    }
    sim.step();
  }

  double movement = 0.0;
  for (int i = 0; i < graph.size(); ++i)
    movement = std::max(movement, (sim.nodes()[i].x - at_mark[i]).norm());
  if (!(movement <= opts.settle_tol))
    throw std::runtime_error("perturbation run did not settle within the event budget");

  Vector x_bar = Vector::Zero(x0.size());
  for (const auto& s : sim.nodes()) x_bar += s.x;
  x_bar /= graph.size();
  return PerturbationResult{x_bar, (x_bar - x_star).norm()};
}

}  // namespace ranrc
