#include <doctest.h>

#include "helpers.hpp"
#include "ranrc/engine.hpp"
#include "ranrc/oracle.hpp"

using namespace ranrc;
using namespace ranrc::testutil;

TEST_SUITE("oracle") {

TEST_CASE("quadratic family is solved in one full Newton step") {
  Rng rng(41);
  std::vector<std::unique_ptr<CostFunction>> owned;
  std::vector<const CostFunction*> costs;
  Matrix wsum = Matrix::Zero(3, 3);
  Vector wasum = Vector::Zero(3);
  for (int i = 0; i < 6; ++i) {
    owned.push_back(random_quadratic(3, rng));
    costs.push_back(owned.back().get());
    const auto* q = static_cast<const QuadraticCost*>(owned.back().get());
    wsum += q->w();
    wasum += q->w() * q->center();
  }
  const Vector closed_form = wsum.ldlt().solve(wasum);
  const auto res = newton_minimize(costs, Vector::Zero(3));
  CHECK(res.iterations == 1);
  CHECK(rel_err(res.x_star, closed_form) < 1e-12);
  CHECK(res.newton_decrement_final < 1e-9);
}

TEST_CASE("starting at the minimizer takes zero iterations") {
  Rng rng(42);
  auto q = random_quadratic(2, rng);
  const auto res = newton_minimize({q.get()}, q->center());
  CHECK(res.iterations == 0);
  CHECK(rel_err(res.x_star, q->center()) < 1e-14);
}

TEST_CASE("backtracking never increases the total cost") {
  Rng rng(43);
  SmoothHuberRegressionCost c(synthetic_regression(80, 3, rng), 0.5, 0.2);
  std::vector<double> values;
  NewtonOptions opts;
  opts.on_iterate = [&](const Vector&, double f, double) { values.push_back(f); };
  Vector x0 = Vector::Constant(4, 5.0);  // far start to force damped steps
  (void)newton_minimize({&c}, x0, opts);
  REQUIRE(values.size() >= 2);
  for (size_t k = 1; k < values.size(); ++k) CHECK(values[k] <= values[k - 1] + 1e-12);
}

TEST_CASE("gradient norm at the reported optimum is tiny") {
  Rng rng(44);
  std::vector<std::unique_ptr<CostFunction>> owned;
  std::vector<const CostFunction*> costs;
  for (int i = 0; i < 4; ++i) {
    owned.push_back(std::make_unique<SmoothHuberRegressionCost>(
        synthetic_regression(50, 2, rng), 1.0, 1.0));
    costs.push_back(owned.back().get());
  }
  NewtonOptions tight;
  tight.tol = 1e-18;  // loose decrements leave gradients well above 1e-7
  const auto res = newton_minimize(costs, Vector::Zero(3), tight);
  Vector g = Vector::Zero(3);
  for (const auto* c : costs) g += c->gradient(res.x_star);
  CHECK(g.norm() <= 1e-7);
}

TEST_CASE("iteration cap raises an error carrying the last iterate") {
  Rng rng(45);
  SmoothHuberRegressionCost c(synthetic_regression(60, 3, rng), 1.0, 1.0);
  NewtonOptions opts;
  opts.max_iterations = 0;
  try {
    (void)newton_minimize({&c}, Vector::Constant(4, 3.0), opts);
    FAIL("expected NewtonBudgetError");
  } catch (const NewtonBudgetError& e) {
    CHECK(e.last_iterate.size() == 4);
  }
}

TEST_CASE("gradient descent cross-check agrees with Newton per coordinate") {
  Rng rng(46);
  std::vector<std::unique_ptr<CostFunction>> owned;
  std::vector<const CostFunction*> costs;
  for (int i = 0; i < 3; ++i) {
    owned.push_back(std::make_unique<SmoothHuberRegressionCost>(
        synthetic_regression(40, 2, rng), 1.0, 1.0));
    costs.push_back(owned.back().get());
  }
  NewtonOptions tight;
  tight.tol = 1e-18;
  const auto newton = newton_minimize(costs, Vector::Zero(3), tight);
  const Vector gd = gradient_descent_minimize(costs, Vector::Zero(3));
  CHECK((newton.x_star - gd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("perturbation diagnostic: zero perturbation lands on the optimum") {
  Rng rng(47);
  auto graph = connected_geometric_digraph(8, 0.55, 2);
  std::vector<std::unique_ptr<CostFunction>> owned;
  std::vector<const CostFunction*> costs;
  for (int i = 0; i < graph.size(); ++i) {
    owned.push_back(random_quadratic(1, rng));
    costs.push_back(owned.back().get());
  }
  const auto res = newton_minimize(costs, Vector::Zero(1));

  std::vector<std::pair<Vector, Matrix>> zero(graph.size(),
                                              {Vector::Zero(1), Matrix::Zero(1, 1)});
  PerturbationRunOptions opts;
  opts.events = 40'000;
  const auto probe =
      fixed_point_perturbation(costs, graph, RanrcParams{5e-2, 1e-6}, Vector::Zero(1),
                               res.x_star, zero, opts);
  CHECK(probe.distance <= 1e-7);
}

TEST_CASE("perturbation distance shrinks with the perturbation scale") {
  Rng rng(48);
  auto graph = connected_geometric_digraph(8, 0.55, 2);
  std::vector<std::unique_ptr<CostFunction>> owned;
  std::vector<const CostFunction*> costs;
  for (int i = 0; i < graph.size(); ++i) {
    owned.push_back(random_quadratic(1, rng));
    costs.push_back(owned.back().get());
  }
  const auto res = newton_minimize(costs, Vector::Zero(1));

  auto probe_at = [&](double scale, double sign) {
    Rng prng(99);  // same direction pattern at every scale
    std::vector<std::pair<Vector, Matrix>> perts;
    for (int i = 0; i < graph.size(); ++i) {
      Vector dy = Vector::Constant(1, sign * scale * prng.uniform(0.5, 1.0));
      Matrix dz = Matrix::Constant(1, 1, sign * scale * prng.uniform(0.0, 0.5));
      perts.emplace_back(dy, dz);
    }
    PerturbationRunOptions opts;
    opts.events = 40'000;
    return fixed_point_perturbation(costs, graph, RanrcParams{5e-2, 1e-6}, Vector::Zero(1),
                                    res.x_star, perts, opts);
  };

  const double d3 = probe_at(1e-3, +1.0).distance;
  const double d6 = probe_at(1e-6, +1.0).distance;
  CHECK(d6 < d3);
  CHECK(d3 < 1e-1);  // continuity: small perturbations stay near the optimum

  // Sign-flipped perturbations land within an order of magnitude.
  const double dplus = probe_at(1e-3, +1.0).distance;
  const double dminus = probe_at(1e-3, -1.0).distance;
  CHECK(dplus <= 10.0 * dminus);
  CHECK(dminus <= 10.0 * dplus);
}

}  // TEST_SUITE
