#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "dopd/errors.hpp"
#include "dopd/harness.hpp"
#include "helpers.hpp"

using namespace dopd;
using testutil::close;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::vector<KeyValue>& extra = {}) {
  std::vector<KeyValue> ov = {
      {"n", "4"}, {"p", "2"}, {"T", "30"},   {"q", "1"},
      {"m", "1"}, {"seed", "5"}, {"tau0", "1"}, {"graph_kind", "ring"},
      {"schedule_family", "paper-sec4"},
  };
  ov.insert(ov.end(), extra.begin(), extra.end());
  return parse_config(std::nullopt, std::nullopt, ov);
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path capture = scratch / "cli_output.txt";
  const std::string cmd =
      std::string(DOPD_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.output = testutil::slurp(capture);
  return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("presets carry the published scenarios") {
  CHECK(preset_names() == std::vector<std::string>{"desk", "paper-sec4"});

  const RunConfig desk = parse_config(std::string("desk"), std::nullopt, {});
  CHECK(desk.n == 10);
  CHECK(desk.p == 4);
  CHECK(desk.T == 2000);
  CHECK(desk.q == 2);
  CHECK(desk.m == 2);
  CHECK(desk.set_kind == FeasibleSet::Kind::box);
  CHECK(desk.set_size == 5.0);
  CHECK(desk.schedule_family == "paper-sec4");
  CHECK(desk.tau0 == 4.0);
  CHECK(desk.graph_kind == GraphSource::Kind::paper4quarters);
  CHECK(desk.p_edge == 0.35);
  CHECK(desk.b_window == 4);
  CHECK(desk.mode == Mode::bandit);

  const RunConfig paper = parse_config(std::string("paper-sec4"), std::nullopt, {});
  CHECK(paper.n == 100);
  CHECK(paper.p == 10);
  CHECK(paper.T == 1000);
  CHECK(paper.q == 4);
  CHECK(paper.tau0 == 400.0);
  CHECK(paper.p_edge == 0.1);

  CHECK_THROWS_AS(parse_config(std::string("bogus"), std::nullopt, {}), ConfigError);
}

TEST_CASE("layering: preset, then file, then overrides") {
  const auto dir = testutil::scratch_dir("harness_layers");
  {
    std::ofstream f(dir / "cfg.txt");
    f << "# slow part trimmed for the desk\n"
      << "T = 200   # trailing comment\n"
      << "p_edge=0.5\n";
  }
  const RunConfig from_file = parse_config(std::string("desk"), dir / "cfg.txt", {});
  CHECK(from_file.T == 200);
  CHECK(from_file.p_edge == 0.5);
  CHECK(from_file.n == 10);  // untouched preset value

  const RunConfig overridden =
      parse_config(std::string("desk"), dir / "cfg.txt", {{"T", "50"}, {"seed", "9"}});
  CHECK(overridden.T == 50);
  CHECK(overridden.seed == 9);
}

TEST_CASE("config file diagnostics carry line numbers") {
  const auto dir = testutil::scratch_dir("harness_file_errors");
  {
    std::ofstream f(dir / "broken.txt");
    f << "# header comment\n"
      << "n = 4\n"
      << "this line has no assignment\n";
  }
  CHECK_THROWS_WITH_AS(parse_config(std::nullopt, dir / "broken.txt", {}),
                       "config file line 3: expected 'key = value'", ConfigError);
  {
    std::ofstream f(dir / "empty_value.txt");
    f << "T = \n";
  }
  CHECK_THROWS_WITH_AS(parse_config(std::nullopt, dir / "empty_value.txt", {}),
                       "config file line 1: empty key or value", ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, dir / "no_such_file.txt", {}), IoError);
}

TEST_CASE("validation rejects missing and out-of-range keys") {
  CHECK_THROWS_WITH_AS(parse_config(std::nullopt, std::nullopt, {}),
                       "missing required key: n", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(std::nullopt, std::nullopt, {{"n", "4"}, {"p", "2"}, {"q", "1"}}),
      "missing required key: T", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(std::string("desk"), std::nullopt, {{"bogus", "1"}}),
                       "unknown key: bogus", ConfigError);
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt, {{"n", "-3"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt, {{"n", "2.5"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt, {{"seed", "-1"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt, {{"mode", "oracle"}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt, {{"p_edge", "1.5"}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt, {{"kappa", "1"}}), ConfigError);
  CHECK_THROWS_AS(
      parse_config(std::string("desk"), std::nullopt, {{"comparator_static", "yes"}}),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(std::string("desk"), std::nullopt, {{"schedule_family", "theorem3"}}),
      ConfigError);
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt, {{"trigger_kind", "warp"}}),
                  ConfigError);
  // single agent cannot form the four-quarter topology
  CHECK_THROWS_AS(parse_config(std::string("desk"), std::nullopt,
                               {{"n", "1"}, {"graph_kind", "paper4quarters"}}),
                  ConfigError);
}

TEST_CASE("trigger defaults follow the schedule family") {
  const RunConfig paper = parse_config(std::string("paper-sec4"), std::nullopt, {});
  const SimOptions scaled = build_sim_options(paper);
  CHECK(scaled.schedule.params_at(100).tau == 4.0);  // 400 / 100
  CHECK(scaled.T == 1000);
  CHECK(scaled.mode == Mode::bandit);
  CHECK(scaled.set.inner_radius() == 5.0);

  const RunConfig t1 = small_config({{"schedule_family", "theorem1"}, {"kappa", "0.5"}});
  CHECK(build_sim_options(t1).schedule.params_at(4).tau == 0.25);  // power decay

  const RunConfig geo = small_config({{"trigger_kind", "geometric"}, {"trigger_c", "2"}});
  CHECK(build_sim_options(geo).schedule.params_at(3).tau == 0.125);

  const RunConfig off = small_config({{"trigger_kind", "none"}});
  const SimOptions none = build_sim_options(off);
  CHECK(none.schedule.params_at(1).tau == 1.0);
  CHECK(none.schedule.params_at(2).tau == 0.0);
}

TEST_CASE("canonical form and hash are stable and sensitive") {
  const RunConfig a = small_config();
  const RunConfig b = small_config();
  const std::string canon = canonical_config(a);
  CHECK(canon == canonical_config(b));
  CHECK(canon.find("n = 4\n") != std::string::npos);
  CHECK(canon.find("schedule_family = paper-sec4\n") != std::string::npos);
  CHECK(canon.find("tau0 = 1\n") != std::string::npos);
  CHECK(std::count(canon.begin(), canon.end(), '\n') == 28);

  const std::string h = config_hash(a);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(h == config_hash(b));
  CHECK(h != config_hash(small_config({{"T", "31"}})));
  CHECK(h != config_hash(small_config({{"seed", "6"}})));
}

TEST_CASE("run_experiment writes deterministic artifacts") {
  const auto dir = testutil::scratch_dir("harness_run");
  RunConfig cfg = small_config({{"comparator_static", "true"},
                                {"comparator_dynamic", "true"},
                                {"out", (dir / "a").string()}});
  const MetricsLog log = run_experiment(cfg);
  CHECK(log.config_hash == config_hash(cfg));
  CHECK(static_cast<int>(log.comparator_cum_loss_static.size()) == cfg.T);
  CHECK(static_cast<int>(log.comparator_cum_loss_dynamic.size()) == cfg.T);
  REQUIRE(fs::exists(dir / "a" / "metrics.csv"));
  REQUIRE(fs::exists(dir / "a" / "summary.json"));

  const auto j = read_json(dir / "a" / "summary.json");
  CHECK(j["seed"] == 5);
  CHECK(j["config_hash"] == config_hash(cfg));
  CHECK(close(j["final"]["avg_cum_loss"].get<double>(), log.avg_cum_loss.back(), 1e-15));
  CHECK(close(j["final"]["avg_cum_ccv"].get<double>(), log.avg_cum_ccv.back(), 1e-15));
  CHECK(j["final"]["total_triggers"].get<long long>() == log.cum_triggers.back());
  CHECK(close(j["final"]["regret_static"].get<double>(),
              log.avg_cum_loss.back() - log.comparator_cum_loss_static.back(), 1e-15));
  CHECK(j["config"]["n"] == "4");
  CHECK(j["config"].size() == 28);

  // same config into a different directory: identical series, byte for byte
  RunConfig cfg2 = cfg;
  cfg2.out = (dir / "b").string();
  run_experiment(cfg2);
  CHECK(testutil::slurp(dir / "a" / "metrics.csv") ==
        testutil::slurp(dir / "b" / "metrics.csv"));

  // dynamic comparator is at least as good as any static point per round,
  // up to the per-round solver tolerance
  CHECK(log.comparator_cum_loss_dynamic.back() <=
        log.comparator_cum_loss_static.back() + 0.01 * cfg.T);
}

TEST_CASE("experiment runs honor debug invariants end to end") {
  const auto dir = testutil::scratch_dir("harness_debug");
  const RunConfig cfg = small_config(
      {{"debug_invariants", "true"}, {"T", "40"}, {"out", (dir / "run").string()}});
  const MetricsLog log = run_experiment(cfg);
  CHECK(log.T == 40);
}

TEST_CASE("sweep lays out per-run directories and aggregates finals") {
  const auto dir = testutil::scratch_dir("harness_sweep");
  RunConfig base = small_config({{"T", "12"}, {"out", (dir / "sw").string()}});
  SweepSpec spec;
  spec.param = "tau0";
  spec.values = {0.0, 2.0};
  spec.seeds = {1, 2};
  sweep(base, spec);

  const fs::path root = dir / "sw";
  REQUIRE(fs::exists(root / "aggregate.csv"));
  double mean_loss[2], mean_ccv[2], mean_trig[2];
  for (int vi = 0; vi < 2; ++vi) {
    const std::string vname = vi == 0 ? "tau0_0" : "tau0_2";
    double loss = 0, ccv = 0, trig = 0;
    for (int seed = 1; seed <= 2; ++seed) {
      const fs::path leaf = root / vname / ("seed_" + std::to_string(seed));
      REQUIRE(fs::exists(leaf / "metrics.csv"));
      const auto j = read_json(leaf / "summary.json");
      loss += j["final"]["avg_cum_loss"].get<double>();
      ccv += j["final"]["avg_cum_ccv"].get<double>();
      trig += j["final"]["total_triggers"].get<double>();
      if (vi == 0)  // tau0 = 0 broadcasts unconditionally: n triggers per round
        CHECK(j["final"]["total_triggers"].get<long long>() == 4 * 12);
    }
    mean_loss[vi] = loss / 2;
    mean_ccv[vi] = ccv / 2;
    mean_trig[vi] = trig / 2;
  }
  CHECK(mean_trig[0] > mean_trig[1]);  // tighter threshold, fewer broadcasts

  std::ifstream agg(root / "aggregate.csv");
  std::string line;
  std::getline(agg, line);
  CHECK(line ==
        "param,value,runs,mean_final_avg_cum_loss,mean_final_avg_cum_ccv,"
        "mean_total_triggers");
  for (int vi = 0; vi < 2; ++vi) {
    REQUIRE(std::getline(agg, line));
    std::istringstream row(line);
    std::string param, value, runs, loss, ccv, trig;
    std::getline(row, param, ',');
    std::getline(row, value, ',');
    std::getline(row, runs, ',');
    std::getline(row, loss, ',');
    std::getline(row, ccv, ',');
    std::getline(row, trig, ',');
    CHECK(param == "tau0");
    CHECK(value == (vi == 0 ? "0" : "2"));
    CHECK(runs == "2");
    CHECK(close(std::stod(loss), mean_loss[vi], 1e-12));
    CHECK(close(std::stod(ccv), mean_ccv[vi], 1e-12));
    CHECK(close(std::stod(trig), mean_trig[vi], 1e-12));
  }
  CHECK_FALSE(std::getline(agg, line));

  SweepSpec bad = spec;
  bad.param = "delta";
  CHECK_THROWS_AS(sweep(base, bad), ConfigError);
  SweepSpec no_values = spec;
  no_values.values.clear();
  CHECK_THROWS_AS(sweep(base, no_values), ConfigError);
  SweepSpec no_seeds = spec;
  no_seeds.seeds.clear();
  CHECK_THROWS_AS(sweep(base, no_seeds), ConfigError);
}

TEST_CASE("worker cap comes from the environment") {
  const auto dir = testutil::scratch_dir("harness_threads");
  RunConfig base = small_config({{"T", "8"}, {"out", (dir / "sw").string()}});
  SweepSpec spec;
  spec.param = "tau0";
  spec.values = {1.0};
  spec.seeds = {1, 2};

  setenv("BANDIT_DOPD_THREADS", "abc", 1);
  CHECK_THROWS_AS(sweep(base, spec), ConfigError);
  setenv("BANDIT_DOPD_THREADS", "0", 1);
  CHECK_THROWS_WITH_AS(sweep(base, spec), "BANDIT_DOPD_THREADS must be a positive integer",
                       ConfigError);
  setenv("BANDIT_DOPD_THREADS", "2", 1);
  sweep(base, spec);
  CHECK(fs::exists(dir / "sw" / "aggregate.csv"));
  unsetenv("BANDIT_DOPD_THREADS");
}

TEST_CASE("command line front end maps failures to exit codes") {
  const auto dir = testutil::scratch_dir("harness_cli");

  CHECK(run_cli("--help", dir).code == 0);
  CHECK(run_cli("", dir).code == 2);  // a subcommand is required

  const std::string okdir = (dir / "ok").string();
  const CliResult ok = run_cli(
      "run --preset desk --set n=6 --set p=2 --set q=1 --set m=1 --set T=40 "
      "--set graph_kind=ring --seed 3 --out " + okdir, dir);
  CHECK(ok.code == 0);
  CHECK(ok.output.find("ok: wrote") != std::string::npos);
  CHECK(fs::exists(fs::path(okdir) / "metrics.csv"));
  CHECK(fs::exists(fs::path(okdir) / "summary.json"));

  const CliResult bad_key = run_cli("run --preset desk --set bogus=1", dir);
  CHECK(bad_key.code == 2);
  CHECK(bad_key.output.find("unknown key: bogus") != std::string::npos);

  const CliResult bad_set = run_cli("run --preset desk --set nonsense", dir);
  CHECK(bad_set.code == 2);

  // quarters never connect without cross edges: assumption abort
  const CliResult isolated = run_cli(
      "run --preset desk --set T=10 --set p_edge=0 --out " + (dir / "iso").string(), dir);
  CHECK(isolated.code == 3);
  CHECK(isolated.output.find("not strongly connected") != std::string::npos);

  // output path blocked by a regular file: I/O failure
  { std::ofstream blocker(dir / "blocker"); blocker << "x"; }
  const CliResult io = run_cli(
      "run --preset desk --set n=6 --set p=2 --set q=1 --set m=1 --set T=5 "
      "--set graph_kind=ring --out " + (dir / "blocker" / "sub").string(), dir);
  CHECK(io.code == 4);

  const std::string swdir = (dir / "sw").string();
  const CliResult sw = run_cli(
      "sweep --preset desk --set n=4 --set p=2 --set q=1 --set m=1 --set T=12 "
      "--set graph_kind=ring --param tau0 --values 0,2 --seeds 1,2 --out " + swdir, dir);
  CHECK(sw.code == 0);
  CHECK(fs::exists(fs::path(swdir) / "aggregate.csv"));
  CHECK(fs::exists(fs::path(swdir) / "tau0_2" / "seed_2" / "summary.json"));
}

}  // TEST_SUITE
