#include "ranrc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>

namespace ranrc::cli {

namespace fs = std::filesystem;

std::string default_out_dir() {
  if (const char* env = std::getenv("RANRC_OUT_DIR")) return env;
  return "out";
}

PreparedExperiment prepare_experiment(ExperimentConfig cfg) {
  PreparedExperiment exp;
  exp.graph = build_graph(cfg);
  if (!is_strongly_connected(exp.graph))
    throw EngineError("graph is not strongly connected; refusing to run");
  exp.costs = build_costs(cfg, exp.graph.size());
  for (const auto& c : exp.costs) exp.cost_ptrs.push_back(c.get());
  exp.x0 = initial_estimate(cfg, exp.cost_ptrs.front()->dimension());
  exp.oracle = newton_minimize(exp.cost_ptrs, exp.x0);
  exp.cfg = std::move(cfg);
  return exp;
}

std::vector<double> densify_grid(const std::vector<double>& values) {
  std::vector<double> out;
  for (size_t i = 0; i < values.size(); ++i) {
    out.push_back(values[i]);
    if (i + 1 < values.size() && values[i] > 0 && values[i + 1] > 0)
      out.push_back(std::sqrt(values[i] * values[i + 1]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> out;
  for (int k = 0; k <= 12; ++k) out.push_back(std::pow(10.0, -4.0 + k / 3.0));
  return out;
}

size_t best_by_final_error(const std::vector<TrajectoryRecord>& records) {
  size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < records.size(); ++i) {
    double e = records[i].final_mean_err();
    if (!std::isfinite(e)) continue;
    if (e < best_err) {
      best_err = e;
      best = i;
    }
  }
  return best;
}

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw EngineError("cannot open " + tmp + " for writing");
    std::fwrite(body.data(), 1, body.size(), f);
    std::fclose(f);
  }
  fs::rename(tmp, path);
}

void write_oracle_record(const OracleResult& o, const std::string& path) {
  std::string s;
  s += "dimension=" + std::to_string(o.x_star.size()) + "\n";
  s += "iterations=" + std::to_string(o.iterations) + "\n";
  s += "newton_decrement=" + g17(o.newton_decrement_final) + "\n";
  s += "f_star=" + g17(o.f_star) + "\n";
  s += "x_star=";
  for (long i = 0; i < o.x_star.size(); ++i) {
    if (i) s += ",";
    s += g17(o.x_star(i));
  }
  s += "\n";
  write_text_atomic(path, s);
}

struct ManifestWriter {
  std::string body = "file,algorithm,param,value,events,master_seed,final_mean_err,final_max_err\n";
  void add(const std::string& file, const TrajectoryRecord& rec, long events,
           std::uint64_t seed) {
    body += file + "," + rec.algorithm + "," +
            (rec.swept_param.empty() ? "-" : rec.swept_param) + "," +
            (rec.swept_param.empty() ? "-" : g17(rec.swept_value)) + "," +
            std::to_string(events) + "," + std::to_string(seed) + "," +
            g17(rec.final_mean_err()) + "," + g17(rec.final_max_err()) + "\n";
  }
  void write(const std::string& dir) { write_text_atomic(dir + "/manifest.csv", body); }
};

ExperimentConfig load(const CommandOptions& opts) {
  ExperimentConfig cfg = parse_config_file(opts.config_path);
  if (opts.seed_override) cfg.run.master_seed = *opts.seed_override;
  return cfg;
}

int guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

std::string trajectory_file(const std::string& dir, const ExperimentConfig& effective) {
  return dir + "/run_" + config_hash(effective) + ".csv";
}

}  // namespace

int cmd_run(const CommandOptions& opts) {
  return guarded([&] {
    auto exp = prepare_experiment(load(opts));
    fs::create_directories(opts.out_dir);
    TrajectoryRecord rec = run(exp.cfg, exp.oracle.x_star);
    const std::string file = trajectory_file(opts.out_dir, exp.cfg);
    write_trajectory_csv(rec, file);
    write_oracle_record(exp.oracle, opts.out_dir + "/oracle.txt");
    ManifestWriter manifest;
    manifest.add(fs::path(file).filename(), rec, exp.cfg.run.events, exp.cfg.run.master_seed);
    manifest.write(opts.out_dir);
    std::cout << "run " << config_hash(exp.cfg) << ": events=" << exp.cfg.run.events
              << " final_mean_err=" << g17(rec.final_mean_err()) << "\n";
  });
}

namespace {

int sweep_command(const CommandOptions& opts, SweepParameter param) {
  return guarded([&] {
    auto exp = prepare_experiment(load(opts));
    fs::create_directories(opts.out_dir);
    const auto& values = param == SweepParameter::epsilon ? exp.cfg.sweep.eps_values
                                                          : exp.cfg.sweep.loss_values;
    auto records = sweep(exp.cfg, param, values, exp.oracle.x_star, exp.cfg.sweep.parallel);
    write_oracle_record(exp.oracle, opts.out_dir + "/oracle.txt");
    ManifestWriter manifest;
    for (size_t k = 0; k < values.size(); ++k) {
      const auto effective = with_sweep_value(exp.cfg, param, values[k]);
      const std::string file = trajectory_file(opts.out_dir, effective);
      write_trajectory_csv(records[k], file);
      manifest.add(fs::path(file).filename(), records[k], exp.cfg.run.events,
                   exp.cfg.run.master_seed);
      std::cout << records[k].swept_param << "=" << g17(values[k])
                << " final_mean_err=" << g17(records[k].final_mean_err()) << "\n";
    }
    manifest.write(opts.out_dir);
  });
}

}  // namespace

int cmd_sweep_eps(const CommandOptions& opts) {
  return sweep_command(opts, SweepParameter::epsilon);
}

int cmd_sweep_loss(const CommandOptions& opts) {
  return sweep_command(opts, SweepParameter::loss_p);
}

int cmd_compare(const CommandOptions& opts) {
  return guarded([&] {
    auto exp = prepare_experiment(load(opts));
    fs::create_directories(opts.out_dir);

    ExperimentConfig ranrc_cfg = exp.cfg;
    ranrc_cfg.algorithm.kind = AlgorithmKind::ranrc;
    ExperimentConfig sub_cfg = exp.cfg;
    sub_cfg.algorithm.kind = AlgorithmKind::subgradient;

    const auto eps_grid = densify_grid(exp.cfg.sweep.eps_values);
    const auto alpha_grid = exp.cfg.sweep.alpha_values.empty()
                                ? default_alpha_grid()
                                : exp.cfg.sweep.alpha_values;

    auto ranrc_runs =
        sweep(ranrc_cfg, SweepParameter::epsilon, eps_grid, exp.oracle.x_star,
              exp.cfg.sweep.parallel);
    auto sub_runs = sweep(sub_cfg, SweepParameter::alpha, alpha_grid, exp.oracle.x_star,
                          exp.cfg.sweep.parallel);

    const size_t bi = best_by_final_error(ranrc_runs);
    const size_t bj = best_by_final_error(sub_runs);

    ManifestWriter manifest;
    const auto ranrc_eff = with_sweep_value(ranrc_cfg, SweepParameter::epsilon, eps_grid[bi]);
    const auto sub_eff = with_sweep_value(sub_cfg, SweepParameter::alpha, alpha_grid[bj]);
    const std::string f1 = trajectory_file(opts.out_dir, ranrc_eff);
    const std::string f2 = trajectory_file(opts.out_dir, sub_eff);
    write_trajectory_csv(ranrc_runs[bi], f1);
    write_trajectory_csv(sub_runs[bj], f2);
    manifest.add(fs::path(f1).filename(), ranrc_runs[bi], exp.cfg.run.events,
                 exp.cfg.run.master_seed);
    manifest.add(fs::path(f2).filename(), sub_runs[bj], exp.cfg.run.events,
                 exp.cfg.run.master_seed);
    manifest.write(opts.out_dir);
    write_oracle_record(exp.oracle, opts.out_dir + "/oracle.txt");

    const double e1 = ranrc_runs[bi].final_mean_err();
    const double e2 = sub_runs[bj].final_mean_err();
    std::string summary;
    summary += "ranrc best epsilon=" + g17(eps_grid[bi]) + " final_mean_err=" + g17(e1) + "\n";
    summary += "subgradient best alpha=" + g17(alpha_grid[bj]) + " final_mean_err=" + g17(e2) + "\n";
    summary += std::string("winner=") + (e1 <= e2 ? "ranrc" : "subgradient") +
               " ratio=" + g17(e2 / e1) + "\n";
    write_text_atomic(opts.out_dir + "/summary.txt", summary);
    std::cout << summary;
  });
}

int cmd_oracle(const CommandOptions& opts) {
  return guarded([&] {
    auto exp = prepare_experiment(load(opts));
    fs::create_directories(opts.out_dir);
    write_oracle_record(exp.oracle, opts.out_dir + "/oracle.txt");
    std::cout << "oracle: iterations=" << exp.oracle.iterations
              << " newton_decrement=" << g17(exp.oracle.newton_decrement_final)
              << " f_star=" << g17(exp.oracle.f_star) << "\n";
  });
}

int cmd_audit(const CommandOptions& opts) {
  return guarded([&] {
    auto exp = prepare_experiment(load(opts));
    if (exp.cfg.algorithm.kind != AlgorithmKind::ranrc)
      throw EngineError("audit applies to the ranrc algorithm");
    fs::create_directories(opts.out_dir);

    Scheduler sched =
        exp.cfg.scheduler.kind == SchedulerKind::round_robin
            ? Scheduler::round_robin()
            : Scheduler::uniform_random(child_seed(exp.cfg.run.master_seed, "sched"));
    LossModel loss = LossModel::none();
    if (exp.cfg.loss.kind == LossKind::bernoulli)
      loss = LossModel::bernoulli(exp.cfg.loss.p, child_seed(exp.cfg.run.master_seed, "loss"));
    else if (exp.cfg.loss.kind == LossKind::bounded)
      loss = LossModel::bounded(exp.cfg.loss.L, exp.cfg.loss.pattern, exp.cfg.loss.rate);

    RanrcParams p{exp.cfg.algorithm.epsilon, exp.cfg.algorithm.c};
    RanrcSimulation sim(exp.graph, exp.cost_ptrs, p, sched, loss, exp.x0);

    std::string body = "t,y_residual,z_residual\n";
    double worst_y = 0.0, worst_z = 0.0;
    auto row = [&](long t) {
      const auto [ry, rz] = sim.mass_audit();
      worst_y = std::max(worst_y, ry);
      worst_z = std::max(worst_z, rz);
      body += std::to_string(t) + "," + g17(ry) + "," + g17(rz) + "\n";
    };
    row(0);
    for (long t = 1; t <= exp.cfg.run.events; ++t) {
      sim.step();
      row(t);
    }
    write_text_atomic(opts.out_dir + "/audit.csv", body);
    std::cout << "mass audit over " << exp.cfg.run.events
              << " events: max y_residual=" << g17(worst_y)
              << " max z_residual=" << g17(worst_z) << "\n";
    if (worst_y > 1e-9 || worst_z > 1e-9)
      throw EngineError("mass conservation residual exceeded 1e-9");
  });
}

}  // namespace ranrc::cli
