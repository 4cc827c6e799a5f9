#include <doctest.h>

#include "helpers.hpp"
#include "ranrc/engine.hpp"
#include "ranrc/subgradient.hpp"

using namespace ranrc;
using namespace ranrc::testutil;

namespace {

QuadraticCost scalar_quadratic(double w, double a) {
  return QuadraticCost(Matrix::Constant(1, 1, w), Vector::Constant(1, a));
}

}  // namespace

TEST_SUITE("subgradient") {

TEST_CASE("initialize sets the estimate and counter") {
  auto s = SubgradientNodeState::initialize(Vector::Zero(3));
  CHECK(s.x.isZero(0.0));
  CHECK(s.t == 1);
  auto s2 = SubgradientNodeState::initialize(Vector::Constant(2, 4.5));
  CHECK(s2.t == 1);
  CHECK(bitwise_equal(s.x, SubgradientNodeState::initialize(Vector::Zero(3)).x));
}

TEST_CASE("broadcast carries estimate, gradient and value") {
  QuadraticCost c(Matrix::Identity(2, 2), Vector::Zero(2));
  Vector x(2);
  x << 1.0, 0.0;
  auto s = SubgradientNodeState::initialize(x);
  auto msg = s.broadcast(c);
  CHECK(bitwise_equal(msg.x, x));
  CHECK(msg.grad(0) == 1.0);
  CHECK(msg.grad(1) == 0.0);
  CHECK(msg.value == 0.5);
  CHECK(msg.x.size() + msg.grad.size() + 1 == 5);  // 2n + 1 payload numbers

  auto at_min = SubgradientNodeState::initialize(Vector::Zero(2));
  CHECK(at_min.broadcast(c).grad.isZero(0.0));
}

TEST_CASE("receive with zero gradients is the pairwise midpoint") {
  QuadraticCost c(Matrix::Identity(1, 1), Vector::Zero(1));
  SubgradientParams p{1.0, false};
  auto s = SubgradientNodeState::initialize(Vector::Zero(1));
  SubgradientMessage msg{0, Vector::Constant(1, 0.0), Vector::Zero(1), 0.0};
  s.receive(c, p, msg);
  CHECK(s.x(0) == 0.0);
  CHECK(s.t == 2);
}

TEST_CASE("alpha zero reduces to pure averaging") {
  auto c = scalar_quadratic(1.0, 5.0);
  SubgradientParams p{1e-300, false};  // alpha must be positive; use negligible
  auto s = SubgradientNodeState::initialize(Vector::Constant(1, 2.0));
  SubgradientMessage msg{0, Vector::Constant(1, 4.0), Vector::Constant(1, 0.0), 0.0};
  s.receive(c, p, msg);
  CHECK(s.x(0) == doctest::Approx(3.0 + 1e-300 * 3.0).epsilon(1e-12));
}

TEST_CASE("worked scalar example with unit parameters") {
  // identical quadratics w = 1, a = 0; x_i = x_j = 1, alpha = 1, t_j = 1:
  // midpoint 1, gradients 1 + 1, so x_j becomes 1 - 2 = -1.
  auto c = scalar_quadratic(1.0, 0.0);
  SubgradientParams p{1.0, false};
  auto s = SubgradientNodeState::initialize(Vector::Constant(1, 1.0));
  SubgradientMessage msg{0, Vector::Constant(1, 1.0), Vector::Constant(1, 1.0), 0.5};
  s.receive(c, p, msg);
  CHECK(s.x(0) == -1.0);
  CHECK(s.t == 2);
}

TEST_CASE("literal update adds cost values uniformly") {
  auto c = scalar_quadratic(1.0, 0.0);
  SubgradientParams p{0.5, true};
  auto s = SubgradientNodeState::initialize(Vector::Constant(1, 1.0));
  // f_j(1) = 0.5; message value f_i = 2.0; step alpha/t = 0.5
  SubgradientMessage msg{0, Vector::Constant(1, 3.0), Vector::Constant(1, 3.0), 2.0};
  s.receive(c, p, msg);
  CHECK(s.x(0) == doctest::Approx(0.5 * (3.0 + 1.0) + 0.5 * (2.0 + 0.5)).epsilon(1e-15));
}

TEST_CASE("pairwise averaging over a lossless complete graph contracts the spread") {
  Rng rng(7);
  auto graph = complete_digraph(5);
  std::vector<std::unique_ptr<CostFunction>> costs;
  std::vector<const CostFunction*> ptrs;
  for (int i = 0; i < 5; ++i) {
    costs.push_back(random_quadratic(1, rng));
    ptrs.push_back(costs.back().get());
  }
  SubgradientParams p{1e-12, false};  // gradient influence negligible
  SubgradientSimulation sim(graph, ptrs, p, Scheduler::uniform_random(11),
                            LossModel::none(), Vector::Zero(1));
  for (int i = 0; i < 5; ++i) sim.nodes()[i].x(0) = rng.uniform(-10.0, 10.0);

  auto spread = [&] {
    double lo = 1e300, hi = -1e300;
    for (const auto& s : sim.nodes()) {
      lo = std::min(lo, s.x(0));
      hi = std::max(hi, s.x(0));
    }
    return hi - lo;
  };
  double prev = spread();
  for (int ev = 0; ev < 200; ++ev) {
    sim.step();
    const double now = spread();
    CHECK(now <= prev + 1e-9);  // non-expansive in max - min
    prev = now;
  }
  CHECK(prev < 1.0);
}

TEST_CASE("counter equals successful receives plus one") {
  Rng rng(8);
  auto graph = random_strongly_connected(6, 0.4, rng);
  std::vector<std::unique_ptr<CostFunction>> costs;
  std::vector<const CostFunction*> ptrs;
  for (int i = 0; i < 6; ++i) {
    costs.push_back(random_quadratic(1, rng));
    ptrs.push_back(costs.back().get());
  }
  SubgradientParams p{0.05, false};

  // Mirror the engine's (scheduler, loss) streams to count deliveries.
  Scheduler sched = Scheduler::uniform_random(21);
  Scheduler sched_mirror = Scheduler::uniform_random(21);
  LossModel loss = LossModel::bernoulli(0.4, 33);
  LossModel loss_mirror = LossModel::bernoulli(0.4, 33);

  SubgradientSimulation sim(graph, ptrs, p, sched, loss, Vector::Zero(1));
  std::vector<long> received(6, 0);
  for (long ev = 1; ev <= 500; ++ev) {
    sim.step();
    const int i = sched_mirror.pick(ev, 6);
    for (int j : graph.out_neighbors(i))
      if (loss_mirror.delivered(i, j, 6)) ++received[j];
  }
  for (int i = 0; i < 6; ++i) CHECK(sim.nodes()[i].t == received[i] + 1);
}

TEST_CASE("round-robin pair with small alpha eventually shrinks the error") {
  auto c0 = scalar_quadratic(1.0, 2.0);
  auto c1 = scalar_quadratic(1.0, 2.0);
  std::vector<const CostFunction*> ptrs{&c0, &c1};
  auto graph = complete_digraph(2);
  SubgradientParams p{0.05, false};
  SubgradientSimulation sim(graph, ptrs, p, Scheduler::round_robin(), LossModel::none(),
                            Vector::Zero(1));
  auto err = [&] {
    return std::abs(sim.nodes()[0].x(0) - 2.0) + std::abs(sim.nodes()[1].x(0) - 2.0);
  };
  const double initial = err();
  for (int ev = 0; ev < 2000; ++ev) sim.step();
  CHECK(err() < initial);
}

}  // TEST_SUITE
