#include "ranrc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ranrc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("key '" + key + "': not an unsigned integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(to_double(key, tok));
  }
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (double d : to_double_list(key, v)) out.push_back(static_cast<int>(d));
  return out;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += g17(v[i]);
  }
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section != "graph" && section != "cost" && section != "algorithm" &&
          section != "loss" && section != "scheduler" && section != "run" &&
          section != "sweep")
        throw ConfigError("unknown section '" + section + "' (line " +
                          std::to_string(lineno) + ")");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value on line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("key '" + key + "' outside any section (line " +
                        std::to_string(lineno) + ")");
    const std::string qkey = section + "." + key;

    if (section == "graph") {
      if (key == "kind") {
        if (val == "geometric") cfg.graph.kind = GraphKind::geometric;
        else if (val == "edgelist") cfg.graph.kind = GraphKind::edgelist;
        else if (val == "ring") cfg.graph.kind = GraphKind::ring;
        else if (val == "complete") cfg.graph.kind = GraphKind::complete;
        else throw ConfigError("key 'graph.kind': unknown value '" + val + "'");
      } else if (key == "n") cfg.graph.n = static_cast<int>(to_long(qkey, val));
      else if (key == "radius") cfg.graph.radius = to_double(qkey, val);
      else if (key == "seed") cfg.graph.seed = to_u64(qkey, val);
      else if (key == "path") cfg.graph.path = val;
      else throw ConfigError("unknown key '" + qkey + "'");
    } else if (section == "cost") {
      if (key == "kind") {
        if (val == "huber") cfg.cost.kind = CostKind::huber;
        else if (val == "quadratic_random") cfg.cost.kind = CostKind::quadratic_random;
        else throw ConfigError("key 'cost.kind': unknown value '" + val + "'");
      } else if (key == "dim") cfg.cost.dim = static_cast<int>(to_long(qkey, val));
      else if (key == "w_min") cfg.cost.w_min = to_double(qkey, val);
      else if (key == "w_max") cfg.cost.w_max = to_double(qkey, val);
      else if (key == "a_min") cfg.cost.a_min = to_double(qkey, val);
      else if (key == "a_max") cfg.cost.a_max = to_double(qkey, val);
      else if (key == "csv") cfg.cost.csv = val;
      else if (key == "feature_columns") cfg.cost.feature_columns = to_int_list(qkey, val);
      else if (key == "target_column") cfg.cost.target_column = static_cast<int>(to_long(qkey, val));
      else if (key == "rows_limit") cfg.cost.rows_limit = to_long(qkey, val);
      else if (key == "beta") cfg.cost.beta = to_double(qkey, val);
      else if (key == "gamma") cfg.cost.gamma = to_double(qkey, val);
      else if (key == "ridge_intercept") cfg.cost.ridge_intercept = to_bool(qkey, val);
      else throw ConfigError("unknown key '" + qkey + "'");
    } else if (section == "algorithm") {
      if (key == "kind") {
        if (val == "ranrc") cfg.algorithm.kind = AlgorithmKind::ranrc;
        else if (val == "subgradient") cfg.algorithm.kind = AlgorithmKind::subgradient;
        else throw ConfigError("key 'algorithm.kind': unknown value '" + val + "'");
      } else if (key == "epsilon") cfg.algorithm.epsilon = to_double(qkey, val);
      else if (key == "c") cfg.algorithm.c = to_double(qkey, val);
      else if (key == "alpha") cfg.algorithm.alpha = to_double(qkey, val);
      else if (key == "literal_update") cfg.algorithm.literal_update = to_bool(qkey, val);
      else throw ConfigError("unknown key '" + qkey + "'");
    } else if (section == "loss") {
      if (key == "kind") {
        if (val == "none") cfg.loss.kind = LossKind::none;
        else if (val == "bernoulli") cfg.loss.kind = LossKind::bernoulli;
        else if (val == "bounded") cfg.loss.kind = LossKind::bounded;
        else throw ConfigError("key 'loss.kind': unknown value '" + val + "'");
      } else if (key == "p") cfg.loss.p = to_double(qkey, val);
      else if (key == "L") cfg.loss.L = static_cast<int>(to_long(qkey, val));
      else if (key == "pattern") {
        if (val == "cycle") cfg.loss.pattern = BoundedPattern::cycle;
        else if (val == "hashed") cfg.loss.pattern = BoundedPattern::hashed;
        else throw ConfigError("key 'loss.pattern': unknown value '" + val + "'");
      } else if (key == "rate") cfg.loss.rate = to_double(qkey, val);
      else throw ConfigError("unknown key '" + qkey + "'");
    } else if (section == "scheduler") {
      if (key == "kind") {
        if (val == "uniform_random") cfg.scheduler.kind = SchedulerKind::uniform_random;
        else if (val == "round_robin") cfg.scheduler.kind = SchedulerKind::round_robin;
        else throw ConfigError("key 'scheduler.kind': unknown value '" + val + "'");
      } else throw ConfigError("unknown key '" + qkey + "'");
    } else if (section == "run") {
      if (key == "events") cfg.run.events = to_long(qkey, val);
      else if (key == "master_seed") cfg.run.master_seed = to_u64(qkey, val);
      else if (key == "x0") cfg.run.x0 = to_double_list(qkey, val);
      else if (key == "record_per_node") cfg.run.record_per_node = to_bool(qkey, val);
      else if (key == "snapshot_stride") cfg.run.snapshot_stride = to_long(qkey, val);
      else throw ConfigError("unknown key '" + qkey + "'");
    } else {  // sweep
      if (key == "eps_values") cfg.sweep.eps_values = to_double_list(qkey, val);
      else if (key == "loss_values") cfg.sweep.loss_values = to_double_list(qkey, val);
      else if (key == "alpha_values") cfg.sweep.alpha_values = to_double_list(qkey, val);
      else if (key == "parallel") cfg.sweep.parallel = to_bool(qkey, val);
      else throw ConfigError("unknown key '" + qkey + "'");
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string s;
  s += "[graph]\n";
  s += "kind = ";
  switch (cfg.graph.kind) {
    case GraphKind::geometric: s += "geometric"; break;
    case GraphKind::edgelist: s += "edgelist"; break;
    case GraphKind::ring: s += "ring"; break;
    case GraphKind::complete: s += "complete"; break;
  }
  s += "\n";
  s += "n = " + std::to_string(cfg.graph.n) + "\n";
  s += "radius = " + g17(cfg.graph.radius) + "\n";
  if (cfg.graph.seed) s += "seed = " + std::to_string(*cfg.graph.seed) + "\n";
  if (!cfg.graph.path.empty()) s += "path = " + cfg.graph.path + "\n";

  s += "[cost]\n";
  s += "kind = ";
  s += (cfg.cost.kind == CostKind::huber ? "huber" : "quadratic_random");
  s += "\n";
  s += "dim = " + std::to_string(cfg.cost.dim) + "\n";
  s += "w_min = " + g17(cfg.cost.w_min) + "\n";
  s += "w_max = " + g17(cfg.cost.w_max) + "\n";
  s += "a_min = " + g17(cfg.cost.a_min) + "\n";
  s += "a_max = " + g17(cfg.cost.a_max) + "\n";
  if (!cfg.cost.csv.empty()) s += "csv = " + cfg.cost.csv + "\n";
  s += "feature_columns = " + join(cfg.cost.feature_columns) + "\n";
  s += "target_column = " + std::to_string(cfg.cost.target_column) + "\n";
  s += "rows_limit = " + std::to_string(cfg.cost.rows_limit) + "\n";
  s += "beta = " + g17(cfg.cost.beta) + "\n";
  s += "gamma = " + g17(cfg.cost.gamma) + "\n";
  s += std::string("ridge_intercept = ") + (cfg.cost.ridge_intercept ? "true" : "false") + "\n";

  s += "[algorithm]\n";
  s += "kind = ";
  s += (cfg.algorithm.kind == AlgorithmKind::ranrc ? "ranrc" : "subgradient");
  s += "\n";
  s += "epsilon = " + g17(cfg.algorithm.epsilon) + "\n";
  s += "c = " + g17(cfg.algorithm.c) + "\n";
  s += "alpha = " + g17(cfg.algorithm.alpha) + "\n";
  s += std::string("literal_update = ") + (cfg.algorithm.literal_update ? "true" : "false") + "\n";

  s += "[loss]\n";
  s += "kind = ";
  switch (cfg.loss.kind) {
    case LossKind::none: s += "none"; break;
    case LossKind::bernoulli: s += "bernoulli"; break;
    case LossKind::bounded: s += "bounded"; break;
  }
  s += "\n";
  s += "p = " + g17(cfg.loss.p) + "\n";
  s += "L = " + std::to_string(cfg.loss.L) + "\n";
  s += std::string("pattern = ") +
       (cfg.loss.pattern == BoundedPattern::cycle ? "cycle" : "hashed") + "\n";
  s += "rate = " + g17(cfg.loss.rate) + "\n";

  s += "[scheduler]\n";
  s += std::string("kind = ") +
       (cfg.scheduler.kind == SchedulerKind::round_robin ? "round_robin"
                                                         : "uniform_random") +
       "\n";

  s += "[run]\n";
  s += "events = " + std::to_string(cfg.run.events) + "\n";
  s += "master_seed = " + std::to_string(cfg.run.master_seed) + "\n";
  s += "x0 = " + join(cfg.run.x0) + "\n";
  s += std::string("record_per_node = ") + (cfg.run.record_per_node ? "true" : "false") + "\n";
  s += "snapshot_stride = " + std::to_string(cfg.run.snapshot_stride) + "\n";

  s += "[sweep]\n";
  s += "eps_values = " + join(cfg.sweep.eps_values) + "\n";
  s += "loss_values = " + join(cfg.sweep.loss_values) + "\n";
  s += "alpha_values = " + join(cfg.sweep.alpha_values) + "\n";
  s += std::string("parallel = ") + (cfg.sweep.parallel ? "true" : "false") + "\n";
  return s;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::uint64_t h = fnv1a64(serialize_config(cfg));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ranrc
