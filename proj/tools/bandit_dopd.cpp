// Command-line front end: `run` executes one experiment, `sweep` a grid of
// them. Exit codes: 0 ok, 2 config error, 3 assumption-check abort, 4 I/O.
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dopd/errors.hpp"
#include "dopd/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_file;
  std::string preset;
  std::string mode;
  std::string out;
  std::uint64_t seed = 0;
  double tau0 = 0.0;
  bool debug_invariants = false;
  bool no_trigger = false;
  std::vector<std::string> sets;  // raw key=value overrides
};

void add_common(CLI::App& cmd, CommonFlags& f) {
  cmd.add_option("--config", f.config_file, "flat key=value config file");
  cmd.add_option("--preset", f.preset, "named preset (desk, paper-sec4)");
  cmd.add_option("--seed", f.seed, "master seed");
  cmd.add_option("--mode", f.mode, "bandit|full-info");
  cmd.add_option("--tau0", f.tau0, "trigger threshold scale");
  cmd.add_option("--out", f.out, "output directory");
  cmd.add_flag("--debug-invariants", f.debug_invariants, "per-round invariant checks");
  cmd.add_flag("--no-trigger", f.no_trigger, "broadcast every round");
  cmd.add_option("--set", f.sets, "extra key=value override (repeatable)")
      ->type_name("KEY=VALUE");
}

dopd::RunConfig make_config(const CLI::App& cmd, const CommonFlags& f) {
  std::vector<dopd::KeyValue> ov;
  char buf[40];
  if (cmd.count("--seed")) ov.emplace_back("seed", std::to_string(f.seed));
  if (cmd.count("--mode")) ov.emplace_back("mode", f.mode);
  if (cmd.count("--tau0")) {
    std::snprintf(buf, sizeof buf, "%.17g", f.tau0);
    ov.emplace_back("tau0", buf);
  }
  if (cmd.count("--out")) ov.emplace_back("out", f.out);
  if (f.debug_invariants) ov.emplace_back("debug_invariants", "true");
  if (f.no_trigger) ov.emplace_back("trigger_kind", "none");
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
      throw dopd::ConfigError("--set expects KEY=VALUE, got: " + kv);
    ov.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  std::optional<std::string> preset;
  if (cmd.count("--preset")) preset = f.preset;
  std::optional<std::filesystem::path> file;
  if (cmd.count("--config")) file = f.config_file;
  return dopd::parse_config(preset, file, ov);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at <= s.size()) {
    const auto comma = s.find(',', at);
    if (comma == std::string::npos) {
      out.push_back(s.substr(at));
      break;
    }
    out.push_back(s.substr(at, comma - at));
    at = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-triggered distributed bandit online optimization simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  add_common(*run_cmd, run_flags);

  CommonFlags sweep_flags;
  std::string sweep_param, sweep_values, sweep_seeds;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid");
  add_common(*sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--param", sweep_param, "tau0|theta|c|kappa")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--seeds", sweep_seeds, "comma-separated seeds")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  }

  try {
    if (run_cmd->parsed()) {
      const dopd::RunConfig config = make_config(*run_cmd, run_flags);
      dopd::run_experiment(config);
      std::printf("ok: wrote %s/metrics.csv and %s/summary.json\n", config.out.c_str(),
                  config.out.c_str());
    } else {
      const dopd::RunConfig base = make_config(*sweep_cmd, sweep_flags);
      dopd::SweepSpec spec;
      spec.param = sweep_param;
      for (const std::string& v : split_csv(sweep_values))
        spec.values.push_back(std::stod(v));
      for (const std::string& s : split_csv(sweep_seeds))
        spec.seeds.push_back(std::stoull(s));
      dopd::sweep(base, spec);
      std::printf("ok: %zu runs, wrote %s/aggregate.csv\n",
                  spec.values.size() * spec.seeds.size(), base.out.c_str());
    }
  } catch (const dopd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dopd::AssumptionError& e) {
    std::fprintf(stderr, "assumption violated: %s\n", e.what());
    return 3;
  } catch (const dopd::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
