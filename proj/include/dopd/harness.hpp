#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dopd/algorithm.hpp"

namespace dopd {

// Fully validated run description. Produced by parse_config from layered
// key-value assignments: defaults, then preset, then config file, then CLI
// overrides (later layers win). Unknown keys are rejected.
struct RunConfig {
  int n = 0;
  int p = 0;
  int T = 0;
  int q = 0;  // residual rows per agent
  int m = 0;  // constraints per agent
  std::uint64_t seed = 1;
  Mode mode = Mode::bandit;
  InitRule init = InitRule::zero;
  std::string out = "out";

  FeasibleSet::Kind set_kind = FeasibleSet::Kind::box;
  double set_size = 5.0;  // half-width or radius

  std::string problem_family = "regression";

  std::string schedule_family;  // "theorem1" | "theorem2" | "paper-sec4"
  double kappa = 0.5;
  double alpha0 = 1.0;
  double theta1 = 0.5;
  double theta2 = 0.5;
  double theta3 = 1.0;
  double tau0 = 0.0;
  std::string trigger_kind;  // "power" | "geometric" | "scaled-power" | "none" | "" (family default)
  double trigger_theta = 1.0;
  double trigger_c = 2.0;

  GraphSource::Kind graph_kind = GraphSource::Kind::paper4quarters;
  double p_edge = 0.1;
  int b_window = 4;

  bool comparator_static = false;
  bool comparator_dynamic = false;
  bool debug_invariants = false;
};

using KeyValue = std::pair<std::string, std::string>;

// Layered parse + validation. `preset` is one of preset_names(); `file` is a
// flat key-value text file (one `key = value` per line, `#` comments).
RunConfig parse_config(const std::optional<std::string>& preset,
                       const std::optional<std::filesystem::path>& file,
                       const std::vector<KeyValue>& overrides);

std::vector<std::string> preset_names();

// Canonical `key = value` serialization (stable order) and its hash; both are
// echoed into summary.json and the hash lands in the metrics log.
std::string canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Materialize simulator inputs from a config.
SimOptions build_sim_options(const RunConfig& config);

// Run one experiment and write <out>/metrics.csv and <out>/summary.json.
// Returns the log (comparator columns filled when the flags ask for them).
MetricsLog run_experiment(const RunConfig& config);

struct SweepSpec {
  std::string param;  // "tau0" | "theta" | "c" | "kappa"
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
};

// One run per (value, seed) under <out>/<param>_<value>/seed_<seed>/, plus
// <out>/aggregate.csv with per-value means of the final per-round averages and
// trigger totals. Worker count is capped by BANDIT_DOPD_THREADS.
void sweep(const RunConfig& base, const SweepSpec& spec);

}  // namespace dopd
