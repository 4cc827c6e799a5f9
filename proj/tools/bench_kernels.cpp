// Timing comparison of the row-by-row reference kernels against the blocked
// OpenMP kernels, plus serial vs parallel sweep execution.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "ranrc/costs.hpp"
#include "ranrc/engine.hpp"
#include "ranrc/oracle.hpp"
#include "ranrc/rng.hpp"

using namespace ranrc;

namespace {

double seconds_per_call(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

Dataset synthetic_rows(long m, int nf, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.features.resize(m, nf);
  d.targets.resize(m);
  for (long r = 0; r < m; ++r) {
    for (int c = 0; c < nf; ++c) d.features(r, c) = rng.uniform(-3.0, 3.0);
    d.targets(r) = rng.uniform(-10.0, 10.0);
  }
  d.provenance = "synthetic";
  return d;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", omp_get_max_threads());

  std::printf("%-10s %-12s %-12s %-12s %-8s\n", "rows", "op", "reference", "blocked",
              "speedup");
  for (long m : {1'000L, 20'000L, 200'000L}) {
    SmoothHuberRegressionCost cost(synthetic_rows(m, 9, 7), 1.0, 1.0);
    Vector x = Vector::Constant(10, 0.3);
    const int reps = m <= 1'000 ? 400 : (m <= 20'000 ? 50 : 10);

    Vector g;
    Matrix h;
    const double t_val_ref = seconds_per_call([&] { (void)cost.value_reference(x); }, reps);
    const double t_val_blk = seconds_per_call([&] { (void)cost.value(x); }, reps);
    std::printf("%-10ld %-12s %-12.3g %-12.3g %-8.2f\n", m, "value", t_val_ref, t_val_blk,
                t_val_ref / t_val_blk);

    const double t_gh_ref = seconds_per_call(
        [&] {
          g = cost.gradient_reference(x);
          h = cost.hessian_reference(x);
        },
        reps);
    const double t_gh_blk =
        seconds_per_call([&] { cost.gradient_and_hessian(x, g, h); }, reps);
    std::printf("%-10ld %-12s %-12.3g %-12.3g %-8.2f\n", m, "grad+hess", t_gh_ref, t_gh_blk,
                t_gh_ref / t_gh_blk);
  }

  // Sweep-level parallelism: independent runs executed concurrently.
  ExperimentConfig cfg;
  cfg.graph.kind = GraphKind::geometric;
  cfg.graph.n = 15;
  cfg.graph.radius = 0.35;
  cfg.cost.kind = CostKind::quadratic_random;
  cfg.cost.dim = 1;
  cfg.loss.kind = LossKind::bernoulli;
  cfg.loss.p = 0.1;
  cfg.run.events = 40'000;
  cfg.run.master_seed = 1;

  const std::vector<double> eps{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2};
  const Vector x_star = [&] {
    auto costs = build_costs(cfg, cfg.graph.n);
    std::vector<const CostFunction*> ptrs;
    for (const auto& c : costs) ptrs.push_back(c.get());
    return newton_minimize(ptrs, Vector::Zero(1)).x_star;
  }();

  const double t_serial = seconds_per_call(
      [&] { (void)sweep(cfg, SweepParameter::epsilon, eps, x_star, false); }, 3);
  const double t_parallel = seconds_per_call(
      [&] { (void)sweep(cfg, SweepParameter::epsilon, eps, x_star, true); }, 3);
  std::printf("\n%zu-run epsilon sweep: serial %.3gs, parallel %.3gs, speedup %.2f\n",
              eps.size(), t_serial, t_parallel, t_serial / t_parallel);
  return 0;
}
