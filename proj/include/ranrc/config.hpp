#pragma once

#include <string>

#include "ranrc/engine.hpp"

namespace ranrc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat sectioned key=value text. Sections: graph, cost, algorithm, loss,
/// scheduler, run, sweep. Full-line comments start with '#'. Unknown
/// sections or keys are rejected, naming the offender.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical form: every key in a fixed order, numbers at 17 significant
/// digits. parse(serialize(cfg)) reproduces cfg exactly.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a of the canonical form, as 16 hex digits. Names run artifacts.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ranrc
