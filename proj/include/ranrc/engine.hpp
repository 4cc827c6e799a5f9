#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ranrc/costs.hpp"
#include "ranrc/graph.hpp"
#include "ranrc/ranrc.hpp"
#include "ranrc/rng.hpp"
#include "ranrc/subgradient.hpp"

namespace ranrc {

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SchedulerKind { uniform_random, round_robin };

/// Node activation process. round_robin triggers node t mod N at event t;
/// uniform_random draws each event's node independently.
class Scheduler {
 public:
  static Scheduler uniform_random(std::uint64_t seed) {
    return Scheduler(SchedulerKind::uniform_random, seed);
  }
  static Scheduler round_robin() { return Scheduler(SchedulerKind::round_robin, 0); }

  SchedulerKind kind() const { return kind_; }

  /// event_index is 1-based.
  int pick(long event_index, int n_nodes) {
    if (kind_ == SchedulerKind::round_robin)
      return static_cast<int>(event_index % n_nodes);
    return static_cast<int>(rng_.below(static_cast<std::uint64_t>(n_nodes)));
  }

 private:
  Scheduler(SchedulerKind k, std::uint64_t seed) : kind_(k), rng_(seed) {}
  SchedulerKind kind_;
  Rng rng_;
};

enum class LossKind { none, bernoulli, bounded };
enum class BoundedPattern { cycle, hashed };

/// Packet-loss process for (broadcast, receiver) deliveries.
///   none        every delivery succeeds.
///   bernoulli   each delivery fails independently with probability p.
///   bounded     deterministic per-edge pattern with at most L consecutive
///               failures: `cycle` drops L deliveries then passes one;
///               `hashed` drops pseudo-randomly at `rate` but forces success
///               after L consecutive drops.
class LossModel {
 public:
  static LossModel none() { return LossModel(); }
  static LossModel bernoulli(double p, std::uint64_t seed);
  static LossModel bounded(int max_consecutive, BoundedPattern pattern, double rate = 0.5);

  LossKind kind() const { return kind_; }
  int bound() const { return bound_; }

  bool delivered(int from, int to, int n_nodes);

  /// Longest failure streak observed on any edge so far.
  int max_consecutive_failures() const { return observed_max_; }

 private:
  LossModel() = default;
  LossKind kind_ = LossKind::none;
  double p_ = 0.0;
  int bound_ = -1;
  BoundedPattern pattern_ = BoundedPattern::cycle;
  double rate_ = 0.5;
  Rng rng_{0};
  std::vector<long> attempts_;    // per directed edge, lazily sized
  std::vector<int> consecutive_;  // current failure streak per edge
  int observed_max_ = 0;
  void track(long edge, bool ok);
};

/// Per-event error metrics against the oracle optimum. Row 0 is the state
/// after initialization; row t reflects state strictly after event t.
struct TrajectoryRecord {
  struct Row {
    long t = 0;
    int sigma = -1;  // triggering node, -1 for the initial row
    double mean_err = 0.0;
    double max_err = 0.0;
  };
  std::vector<Row> rows;
  std::vector<std::vector<double>> per_node_err;      // parallel to rows when recorded
  std::vector<std::pair<long, Matrix>> snapshots;     // (t, N x n estimates)
  std::string algorithm;
  std::string swept_param;  // empty for plain runs
  double swept_value = 0.0;
  long threshold_hits = 0;  // curvature-floor activations over the whole run

  double final_mean_err() const { return rows.back().mean_err; }
  double final_max_err() const { return rows.back().max_err; }

  /// First event index with mean_err <= threshold, or -1 if never reached.
  long events_to_reach(double threshold) const;
};

/// CSV export: header t,sigma,mean_err,max_err[,err_0..err_{N-1}], numbers
/// at 17 significant digits, written to a temp file then renamed.
void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path);

enum class GraphKind { geometric, edgelist, ring, complete };

struct GraphConfig {
  GraphKind kind = GraphKind::geometric;
  int n = 15;
  double radius = 0.35;
  std::optional<std::uint64_t> seed;  // geometric only; default derived from master
  std::string path;                   // edgelist only
};

enum class CostKind { quadratic_random, huber };

struct CostConfig {
  CostKind kind = CostKind::huber;
  // quadratic_random: per-node spd quadratics drawn from the master seed
  int dim = 1;
  double w_min = 0.5, w_max = 2.0;
  double a_min = -5.0, a_max = 5.0;
  // huber: csv-backed regression split across the agents
  std::string csv;
  std::vector<int> feature_columns{0, 1, 2, 3, 4, 5, 6, 7, 8};
  int target_column = 13;
  long rows_limit = 500;  // first rows kept; 0 = all
  double beta = 1.0, gamma = 1.0;
  bool ridge_intercept = false;
};

enum class AlgorithmKind { ranrc, subgradient };

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::ranrc;
  double epsilon = 1e-2;
  double c = 1e-6;
  double alpha = 0.1;
  bool literal_update = false;
};

struct LossConfig {
  LossKind kind = LossKind::none;
  double p = 0.1;
  int L = 3;
  BoundedPattern pattern = BoundedPattern::cycle;
  double rate = 0.5;
};

struct SchedulerConfig {
  SchedulerKind kind = SchedulerKind::uniform_random;
};

struct RunConfig {
  long events = 10'000;
  std::uint64_t master_seed = 1;
  std::vector<double> x0;  // empty = zeros; one value = every coordinate
  bool record_per_node = false;
  long snapshot_stride = 0;  // 0 = off
};

struct SweepConfig {
  std::vector<double> eps_values{1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> loss_values{0.0, 0.2, 0.4, 0.6};
  std::vector<double> alpha_values;  // empty = 13-point log grid 1e-4..1
  bool parallel = true;
};

struct ExperimentConfig {
  GraphConfig graph;
  CostConfig cost;
  AlgorithmConfig algorithm;
  LossConfig loss;
  SchedulerConfig scheduler;
  RunConfig run;
  SweepConfig sweep;
};

/// Seed roles: "graph" (geometric sampling), "costs" (quadratic family),
/// "partition" (dataset split), "sched", "loss". See child_seed in rng.hpp.
DirectedGraph build_graph(const ExperimentConfig& cfg);
std::vector<std::unique_ptr<CostFunction>> build_costs(const ExperimentConfig& cfg,
                                                       int n_agents);
Vector initial_estimate(const ExperimentConfig& cfg, int dimension);

/// One run's state machine, exposed stepwise for tests and diagnostics.
class RanrcSimulation {
 public:
  RanrcSimulation(const DirectedGraph& graph, std::vector<const CostFunction*> costs,
                  RanrcParams params, Scheduler scheduler, LossModel loss,
                  const Vector& x0);

  void step();  // one atomic broadcast event
  long events_done() const { return t_; }
  int last_sigma() const { return last_sigma_; }

  const DirectedGraph& graph() const { return *graph_; }
  std::vector<NodeState>& nodes() { return nodes_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const LossModel& loss() const { return loss_; }

  /// Normalized mass-conservation residuals (y, z) over the current state.
  std::pair<double, double> mass_audit() const;
  long total_threshold_hits() const;

 private:
  const DirectedGraph* graph_;
  std::vector<const CostFunction*> costs_;
  RanrcParams params_;
  Scheduler scheduler_;
  LossModel loss_;
  std::vector<NodeState> nodes_;
  long t_ = 0;
  int last_sigma_ = -1;
};

class SubgradientSimulation {
 public:
  SubgradientSimulation(const DirectedGraph& graph, std::vector<const CostFunction*> costs,
                        SubgradientParams params, Scheduler scheduler, LossModel loss,
                        const Vector& x0);

  void step();
  long events_done() const { return t_; }
  int last_sigma() const { return last_sigma_; }
  std::vector<SubgradientNodeState>& nodes() { return nodes_; }
  const std::vector<SubgradientNodeState>& nodes() const { return nodes_; }

 private:
  const DirectedGraph* graph_;
  std::vector<const CostFunction*> costs_;
  SubgradientParams params_;
  Scheduler scheduler_;
  LossModel loss_;
  std::vector<SubgradientNodeState> nodes_;
  long t_ = 0;
  int last_sigma_ = -1;
};

/// Mass conservation residuals over arbitrary node states:
///   max-abs component of (sum_i y_i + sum_edges in-flight - sum_i g_old_i),
/// normalized by max(1, |sum_i g_old_i|_inf); same for the z side.
std::pair<double, double> mass_audit(const std::vector<NodeState>& nodes,
                                     const DirectedGraph& graph);

/// Executes cfg.run.events atomic events and records metrics against
/// x_star after each. Pure function of cfg. Refuses graphs that are not
/// strongly connected.
TrajectoryRecord run(const ExperimentConfig& cfg, const Vector& x_star);

enum class SweepParameter { epsilon, loss_p, alpha };

/// One run per value; every other setting and all seed derivations shared.
/// Runs may execute concurrently; output order matches `values`.
std::vector<TrajectoryRecord> sweep(const ExperimentConfig& cfg, SweepParameter param,
                                    const std::vector<double>& values, const Vector& x_star,
                                    bool parallel = true);

ExperimentConfig with_sweep_value(ExperimentConfig cfg, SweepParameter param, double value);

}  // namespace ranrc
