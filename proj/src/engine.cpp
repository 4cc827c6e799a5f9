#include "ranrc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>

namespace ranrc {

LossModel LossModel::bernoulli(double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw EngineError("bernoulli p must be in [0, 1)");
  LossModel m;
  m.kind_ = LossKind::bernoulli;
  m.p_ = p;
  m.rng_ = Rng(seed);
  return m;
}

LossModel LossModel::bounded(int max_consecutive, BoundedPattern pattern, double rate) {
  if (max_consecutive < 0) throw EngineError("bounded loss: L must be >= 0");
  if (!(rate >= 0.0 && rate <= 1.0)) throw EngineError("bounded loss: rate in [0, 1]");
  LossModel m;
  m.kind_ = LossKind::bounded;
  m.bound_ = max_consecutive;
  m.pattern_ = pattern;
  m.rate_ = rate;
  return m;
}

void LossModel::track(long edge, bool ok) {
  if (ok) {
    consecutive_[edge] = 0;
  } else {
    ++consecutive_[edge];
    observed_max_ = std::max(observed_max_, consecutive_[edge]);
  }
  if (bound_ >= 0 && consecutive_[edge] > bound_)
    throw std::logic_error("loss model exceeded its consecutive-failure bound");
}

bool LossModel::delivered(int from, int to, int n_nodes) {
  if (kind_ == LossKind::none) return true;
  const long edge = static_cast<long>(from) * n_nodes + to;
  if (attempts_.empty()) {
    attempts_.assign(static_cast<size_t>(n_nodes) * n_nodes, 0);
    consecutive_.assign(static_cast<size_t>(n_nodes) * n_nodes, 0);
  }
  const long attempt = attempts_[edge]++;

  bool ok = true;
  if (kind_ == LossKind::bernoulli) {
    ok = rng_.uniform01() >= p_;
    // No hard bound; still track the streak for diagnostics.
    if (ok)
      consecutive_[edge] = 0;
    else
      observed_max_ = std::max(observed_max_, ++consecutive_[edge]);
    return ok;
  }

  // bounded
  if (pattern_ == BoundedPattern::cycle) {
    ok = attempt % (bound_ + 1) == bound_;  // L drops, then one delivery
  } else {
    if (consecutive_[edge] >= bound_) {
      ok = true;  // forced delivery keeps the streak below L + 1
    } else {
      const std::uint64_t h = splitmix64(0x5851f42d4c957f2dULL ^ (static_cast<std::uint64_t>(edge) << 20) ^
                                         static_cast<std::uint64_t>(attempt));
      ok = (static_cast<double>(h >> 11) * 0x1.0p-53) >= rate_;
    }
  }
  track(edge, ok);
  return ok;
}

long TrajectoryRecord::events_to_reach(double threshold) const {
  for (const auto& r : rows)
    if (r.mean_err <= threshold) return r.t;
  return -1;
}

namespace {

void append_g17(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path) {
  std::string body;
  body.reserve(rec.rows.size() * 64);
  body += "t,sigma,mean_err,max_err";
  const bool per_node = !rec.per_node_err.empty();
  if (per_node)
    for (size_t i = 0; i < rec.per_node_err.front().size(); ++i)
      body += ",err_" + std::to_string(i);
  body += "\n";
  for (size_t k = 0; k < rec.rows.size(); ++k) {
    const auto& r = rec.rows[k];
    body += std::to_string(r.t);
    body += ",";
    body += std::to_string(r.sigma);
    body += ",";
    append_g17(body, r.mean_err);
    body += ",";
    append_g17(body, r.max_err);
    if (per_node)
      for (double e : rec.per_node_err[k]) {
        body += ",";
        append_g17(body, e);
      }
    body += "\n";
  }

  const std::string tmp = path + ".tmp";
  {
    FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw EngineError("cannot open " + tmp + " for writing");
    std::fwrite(body.data(), 1, body.size(), f);
    std::fclose(f);
  }
  std::filesystem::rename(tmp, path);
}

DirectedGraph build_graph(const ExperimentConfig& cfg) {
  const auto& g = cfg.graph;
  switch (g.kind) {
    case GraphKind::geometric: {
      const std::uint64_t seed =
          g.seed ? *g.seed : child_seed(cfg.run.master_seed, "graph");
      return connected_geometric_digraph(g.n, g.radius, seed);
    }
    case GraphKind::edgelist:
      return load_edge_list(g.path);
    case GraphKind::ring:
      return ring_digraph(g.n);
    case GraphKind::complete:
      return complete_digraph(g.n);
  }
  throw EngineError("unknown graph kind");
}

namespace {

Matrix random_spd(int dim, double lo, double hi, Rng& rng) {
  if (dim == 1) {
    Matrix w(1, 1);
    w(0, 0) = rng.uniform(lo, hi);
    return w;
  }
  Vector lam(dim);
  for (int i = 0; i < dim; ++i) lam(i) = rng.uniform(lo, hi);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
  const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
  Matrix w = q * lam.asDiagonal() * q.transpose();
  return ((w + w.transpose()) * 0.5).eval();
}

}  // namespace

std::vector<std::unique_ptr<CostFunction>> build_costs(const ExperimentConfig& cfg,
                                                       int n_agents) {
  const auto& c = cfg.cost;
  std::vector<std::unique_ptr<CostFunction>> costs;
  costs.reserve(n_agents);
  if (c.kind == CostKind::quadratic_random) {
    Rng rng(child_seed(cfg.run.master_seed, "costs"));
    for (int i = 0; i < n_agents; ++i) {
      Matrix w = random_spd(c.dim, c.w_min, c.w_max, rng);
      Vector a(c.dim);
      for (int k = 0; k < c.dim; ++k) a(k) = rng.uniform(c.a_min, c.a_max);
      costs.push_back(std::make_unique<QuadraticCost>(std::move(w), std::move(a)));
    }
    return costs;
  }

  // huber
  Dataset full = load_csv_dataset(c.csv, c.feature_columns, c.target_column);
  if (c.rows_limit > 0 && c.rows_limit < full.rows()) {
    Dataset cut;
    cut.features = full.features.topRows(c.rows_limit);
    cut.targets = full.targets.head(c.rows_limit);
    cut.provenance = full.provenance;
    full = std::move(cut);
  }
  Rng rng(child_seed(cfg.run.master_seed, "partition"));
  auto parts = partition_dataset(full, n_agents, rng);
  for (auto& part : parts)
    costs.push_back(std::make_unique<SmoothHuberRegressionCost>(
        std::move(part), c.beta, c.gamma, c.ridge_intercept));
  return costs;
}

Vector initial_estimate(const ExperimentConfig& cfg, int dimension) {
  const auto& x0 = cfg.run.x0;
  if (x0.empty()) return Vector::Zero(dimension);
  if (x0.size() == 1) return Vector::Constant(dimension, x0.front());
  if (static_cast<int>(x0.size()) != dimension)
    throw EngineError("x0 has " + std::to_string(x0.size()) + " entries, expected " +
                      std::to_string(dimension));
  return Eigen::Map<const Vector>(x0.data(), dimension);
}

RanrcSimulation::RanrcSimulation(const DirectedGraph& graph,
                                 std::vector<const CostFunction*> costs, RanrcParams params,
                                 Scheduler scheduler, LossModel loss, const Vector& x0)
    : graph_(&graph),
      costs_(std::move(costs)),
      params_(params),
      scheduler_(scheduler),
      loss_(loss) {
  params_.validate();
  const int n = graph.size();
  if (n < 2) throw EngineError("simulation needs at least 2 nodes");
  if (static_cast<int>(costs_.size()) != n)
    throw EngineError("one cost per node required");
  nodes_.reserve(n);
  for (int i = 0; i < n; ++i)
    nodes_.push_back(NodeState::initialize(*costs_[i], x0, graph.in_neighbors(i)));
}

void RanrcSimulation::step() {
  ++t_;
  const int n = graph_->size();
  const int i = scheduler_.pick(t_, n);
  BroadcastMessage msg = nodes_[i].wake_up(*costs_[i], params_, graph_->out_degree(i));
  msg.sender = i;
  for (int j : graph_->out_neighbors(i))  // ascending id order
    if (loss_.delivered(i, j, n)) nodes_[j].receive(*costs_[j], params_, msg);
  last_sigma_ = i;
}

std::pair<double, double> RanrcSimulation::mass_audit() const {
  return ranrc::mass_audit(nodes_, *graph_);
}

long RanrcSimulation::total_threshold_hits() const {
  long hits = 0;
  for (const auto& s : nodes_) hits += s.threshold_hits;
  return hits;
}

SubgradientSimulation::SubgradientSimulation(const DirectedGraph& graph,
                                             std::vector<const CostFunction*> costs,
                                             SubgradientParams params, Scheduler scheduler,
                                             LossModel loss, const Vector& x0)
    : graph_(&graph),
      costs_(std::move(costs)),
      params_(params),
      scheduler_(scheduler),
      loss_(loss) {
  params_.validate();
  const int n = graph.size();
  if (n < 2) throw EngineError("simulation needs at least 2 nodes");
  if (static_cast<int>(costs_.size()) != n)
    throw EngineError("one cost per node required");
  nodes_.reserve(n);
  for (int i = 0; i < n; ++i) nodes_.push_back(SubgradientNodeState::initialize(x0));
}

void SubgradientSimulation::step() {
  ++t_;
  const int n = graph_->size();
  const int i = scheduler_.pick(t_, n);
  SubgradientMessage msg = nodes_[i].broadcast(*costs_[i]);
  msg.sender = i;
  for (int j : graph_->out_neighbors(i))
    if (loss_.delivered(i, j, n)) nodes_[j].receive(*costs_[j], params_, msg);
  last_sigma_ = i;
}

std::pair<double, double> mass_audit(const std::vector<NodeState>& nodes,
                                     const DirectedGraph& graph) {
  if (nodes.empty()) return {0.0, 0.0};
  const long n = nodes.front().y.size();
  Vector y_bal = Vector::Zero(n);
  Matrix z_bal = Matrix::Zero(n, n);
  Vector g_sum = Vector::Zero(n);
  Matrix h_sum = Matrix::Zero(n, n);
  for (const auto& s : nodes) {
    y_bal += s.y;
    z_bal += s.z;
    g_sum += s.g_old;
    h_sum += s.h_old;
  }
  for (const auto& [i, j] : graph.edges()) {
    y_bal += nodes[i].b_y - nodes[j].received_y(i);
    z_bal += nodes[i].b_z - nodes[j].received_z(i);
  }
  y_bal -= g_sum;
  z_bal -= h_sum;
  const double y_scale = std::max(1.0, g_sum.cwiseAbs().maxCoeff());
  const double z_scale = std::max(1.0, h_sum.cwiseAbs().maxCoeff());
  return {y_bal.cwiseAbs().maxCoeff() / y_scale, z_bal.cwiseAbs().maxCoeff() / z_scale};
}

namespace {

struct MetricsRecorder {
  const Vector* x_star;
  TrajectoryRecord* rec;
  bool per_node;
  long snapshot_stride;

  template <typename Nodes>
  void record(long t, int sigma, const Nodes& nodes) {
    const int n = static_cast<int>(nodes.size());
    double sum = 0.0, worst = 0.0;
    std::vector<double> errs;
    if (per_node) errs.reserve(n);
    for (const auto& s : nodes) {
      const double e = (s.x - *x_star).norm();
      sum += e;
      worst = std::max(worst, e);
      if (per_node) errs.push_back(e);
    }
    rec->rows.push_back({t, sigma, sum / n, worst});
    if (per_node) rec->per_node_err.push_back(std::move(errs));
    if (snapshot_stride > 0 && t % snapshot_stride == 0) {
      Matrix snap(n, x_star->size());
      for (int i = 0; i < n; ++i) snap.row(i) = nodes[i].x.transpose();
      rec->snapshots.emplace_back(t, std::move(snap));
    }
  }
};

}  // namespace

TrajectoryRecord run(const ExperimentConfig& cfg, const Vector& x_star) {
  DirectedGraph graph = build_graph(cfg);
  if (!is_strongly_connected(graph))
    throw EngineError("graph is not strongly connected; refusing to run");
  auto costs = build_costs(cfg, graph.size());
  std::vector<const CostFunction*> cost_ptrs;
  for (const auto& c : costs) cost_ptrs.push_back(c.get());
  const Vector x0 = initial_estimate(cfg, cost_ptrs.front()->dimension());
  if (x_star.size() != x0.size()) throw EngineError("x_star dimension mismatch");

  Scheduler sched = cfg.scheduler.kind == SchedulerKind::round_robin
                        ? Scheduler::round_robin()
                        : Scheduler::uniform_random(child_seed(cfg.run.master_seed, "sched"));
  LossModel loss = LossModel::none();
  switch (cfg.loss.kind) {
    case LossKind::none:
      break;
    case LossKind::bernoulli:
      loss = LossModel::bernoulli(cfg.loss.p, child_seed(cfg.run.master_seed, "loss"));
      break;
    case LossKind::bounded:
      loss = LossModel::bounded(cfg.loss.L, cfg.loss.pattern, cfg.loss.rate);
      break;
  }

  TrajectoryRecord rec;
  MetricsRecorder recorder{&x_star, &rec, cfg.run.record_per_node, cfg.run.snapshot_stride};
  rec.rows.reserve(cfg.run.events + 1);

  if (cfg.algorithm.kind == AlgorithmKind::ranrc) {
    rec.algorithm = "ranrc";
    RanrcParams p{cfg.algorithm.epsilon, cfg.algorithm.c};
    RanrcSimulation sim(graph, cost_ptrs, p, sched, loss, x0);
    recorder.record(0, -1, sim.nodes());
    for (long t = 1; t <= cfg.run.events; ++t) {
      sim.step();
      recorder.record(t, sim.last_sigma(), sim.nodes());
    }
    rec.threshold_hits = sim.total_threshold_hits();
  } else {
    rec.algorithm = "subgradient";
    SubgradientParams p{cfg.algorithm.alpha, cfg.algorithm.literal_update};
    SubgradientSimulation sim(graph, cost_ptrs, p, sched, loss, x0);
    recorder.record(0, -1, sim.nodes());
    for (long t = 1; t <= cfg.run.events; ++t) {
      sim.step();
      recorder.record(t, sim.last_sigma(), sim.nodes());
    }
  }
  return rec;
}

ExperimentConfig with_sweep_value(ExperimentConfig cfg, SweepParameter param, double value) {
  switch (param) {
    case SweepParameter::epsilon:
      cfg.algorithm.epsilon = value;
      break;
    case SweepParameter::loss_p:
      cfg.loss.kind = LossKind::bernoulli;
      cfg.loss.p = value;
      break;
    case SweepParameter::alpha:
      cfg.algorithm.alpha = value;
      break;
  }
  return cfg;
}

std::vector<TrajectoryRecord> sweep(const ExperimentConfig& cfg, SweepParameter param,
                                    const std::vector<double>& values, const Vector& x_star,
                                    bool parallel) {
  if (values.empty()) throw EngineError("sweep: empty value list");
  const char* names[] = {"epsilon", "loss_p", "alpha"};
  std::vector<TrajectoryRecord> out(values.size());
  std::vector<std::exception_ptr> errors(values.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long k = 0; k < static_cast<long>(values.size()); ++k) {
    try {
      out[k] = run(with_sweep_value(cfg, param, values[k]), x_star);
      out[k].swept_param = names[static_cast<int>(param)];
      out[k].swept_value = values[k];
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace ranrc
