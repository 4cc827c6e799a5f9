#pragma once

#include <optional>
#include <string>

#include "ranrc/config.hpp"
#include "ranrc/engine.hpp"
#include "ranrc/oracle.hpp"

namespace ranrc::cli {

/// Everything a command needs: the effective config, topology, per-agent
/// costs and the centralized optimum the error metrics reference.
struct PreparedExperiment {
  ExperimentConfig cfg;
  DirectedGraph graph;
  std::vector<std::unique_ptr<CostFunction>> costs;
  std::vector<const CostFunction*> cost_ptrs;
  Vector x0;
  OracleResult oracle;
};

PreparedExperiment prepare_experiment(ExperimentConfig cfg);

/// Geometric midpoints inserted between consecutive grid values (the
/// half-decade densification used by `compare`).
std::vector<double> densify_grid(const std::vector<double>& values);

/// 13-point logarithmic grid over [1e-4, 1].
std::vector<double> default_alpha_grid();

/// Index of the trajectory with the lowest final mean error; non-finite
/// finals rank last.
size_t best_by_final_error(const std::vector<TrajectoryRecord>& records);

struct CommandOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
};

// Exit codes: 0 success, 1 runtime failure, 2 invalid config/usage.
int cmd_run(const CommandOptions& opts);
int cmd_sweep_eps(const CommandOptions& opts);
int cmd_sweep_loss(const CommandOptions& opts);
int cmd_compare(const CommandOptions& opts);
int cmd_oracle(const CommandOptions& opts);
int cmd_audit(const CommandOptions& opts);

/// Default output directory: $RANRC_OUT_DIR if set, else "out".
std::string default_out_dir();

}  // namespace ranrc::cli
