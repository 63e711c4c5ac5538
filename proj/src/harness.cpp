#include "dopd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "dopd/errors.hpp"
#include "dopd/metrics.hpp"

namespace dopd {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expect) {
  throw ConfigError("invalid value for key " + key + ": '" + value + "' (" + expect + ")");
}

long long parse_ll(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, value, "expected an integer");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_ll(key, value);
  if (v < INT_MIN || v > INT_MAX) bad_value(key, value, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, value, "expected a non-negative integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value, "expected a number");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value, "expected a number");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "expected true|false");
}

Mode parse_mode(const std::string& key, const std::string& value) {
  if (value == "bandit") return Mode::bandit;
  if (value == "full-info") return Mode::full_info;
  bad_value(key, value, "expected bandit|full-info");
}

InitRule parse_init(const std::string& key, const std::string& value) {
  if (value == "zero") return InitRule::zero;
  if (value == "uniform") return InitRule::uniform;
  bad_value(key, value, "expected zero|uniform");
}

FeasibleSet::Kind parse_set_kind(const std::string& key, const std::string& value) {
  if (value == "box") return FeasibleSet::Kind::box;
  if (value == "ball") return FeasibleSet::Kind::ball;
  bad_value(key, value, "expected box|ball");
}

GraphSource::Kind parse_graph_kind(const std::string& key, const std::string& value) {
  if (value == "paper4quarters") return GraphSource::Kind::paper4quarters;
  if (value == "ring") return GraphSource::Kind::ring;
  if (value == "complete") return GraphSource::Kind::complete;
  bad_value(key, value, "expected paper4quarters|ring|complete");
}

const char* mode_str(Mode m) { return m == Mode::bandit ? "bandit" : "full-info"; }
const char* init_str(InitRule r) { return r == InitRule::zero ? "zero" : "uniform"; }
const char* set_kind_str(FeasibleSet::Kind k) {
  return k == FeasibleSet::Kind::box ? "box" : "ball";
}
const char* graph_kind_str(GraphSource::Kind k) {
  switch (k) {
    case GraphSource::Kind::paper4quarters: return "paper4quarters";
    case GraphSource::Kind::ring: return "ring";
    default: return "complete";
  }
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") c.n = parse_int(key, value);
  else if (key == "p") c.p = parse_int(key, value);
  else if (key == "T") c.T = parse_int(key, value);
  else if (key == "q") c.q = parse_int(key, value);
  else if (key == "m") c.m = parse_int(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "mode") c.mode = parse_mode(key, value);
  else if (key == "init") c.init = parse_init(key, value);
  else if (key == "out") c.out = value;
  else if (key == "set_kind") c.set_kind = parse_set_kind(key, value);
  else if (key == "set_size") c.set_size = parse_double(key, value);
  else if (key == "problem_family") c.problem_family = value;
  else if (key == "schedule_family") c.schedule_family = value;
  else if (key == "kappa") c.kappa = parse_double(key, value);
  else if (key == "alpha0") c.alpha0 = parse_double(key, value);
  else if (key == "theta1") c.theta1 = parse_double(key, value);
  else if (key == "theta2") c.theta2 = parse_double(key, value);
  else if (key == "theta3") c.theta3 = parse_double(key, value);
  else if (key == "tau0") c.tau0 = parse_double(key, value);
  else if (key == "trigger_kind") c.trigger_kind = value;
  else if (key == "trigger_theta") c.trigger_theta = parse_double(key, value);
  else if (key == "trigger_c") c.trigger_c = parse_double(key, value);
  else if (key == "graph_kind") c.graph_kind = parse_graph_kind(key, value);
  else if (key == "p_edge") c.p_edge = parse_double(key, value);
  else if (key == "b_window") c.b_window = parse_int(key, value);
  else if (key == "comparator_static") c.comparator_static = parse_bool(key, value);
  else if (key == "comparator_dynamic") c.comparator_dynamic = parse_bool(key, value);
  else if (key == "debug_invariants") c.debug_invariants = parse_bool(key, value);
  else throw ConfigError("unknown key: " + key);
}

const std::vector<KeyValue>* find_preset(const std::string& name) {
  static const std::vector<KeyValue> desk = {
      {"n", "10"},          {"p", "4"},
      {"T", "2000"},        {"q", "2"},
      {"m", "2"},           {"seed", "1"},
      {"set_kind", "box"},  {"set_size", "5"},
      {"problem_family", "regression"},
      {"schedule_family", "paper-sec4"},
      {"tau0", "4"},        {"graph_kind", "paper4quarters"},
      {"p_edge", "0.35"},   {"b_window", "4"},
  };
  static const std::vector<KeyValue> paper = {
      {"n", "100"},         {"p", "10"},
      {"T", "1000"},        {"q", "4"},
      {"m", "2"},           {"seed", "1"},
      {"set_kind", "box"},  {"set_size", "5"},
      {"problem_family", "regression"},
      {"schedule_family", "paper-sec4"},
      {"tau0", "400"},      {"graph_kind", "paper4quarters"},
      {"p_edge", "0.1"},    {"b_window", "4"},
  };
  if (name == "desk") return &desk;
  if (name == "paper-sec4") return &paper;
  return nullptr;
}

std::vector<KeyValue> parse_file_keys(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  std::vector<KeyValue> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config file line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config file line " + std::to_string(lineno) +
                        ": empty key or value");
    out.emplace_back(key, value);
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void validate(const RunConfig& c) {
  require(c.n != 0, "missing required key: n");
  require(c.n >= 1, "invalid value for key n: must be >= 1");
  require(c.p != 0, "missing required key: p");
  require(c.p >= 1, "invalid value for key p: must be >= 1");
  require(c.T != 0, "missing required key: T");
  require(c.T >= 1, "invalid value for key T: must be >= 1");
  require(c.problem_family == "regression" || c.problem_family == "zero",
          "invalid value for key problem_family: expected regression|zero");
  if (c.problem_family == "regression") {
    require(c.q != 0, "missing required key: q");
    require(c.q >= 1, "invalid value for key q: must be >= 1");
    require(c.m >= 0, "invalid value for key m: must be >= 0");
  }
  require(!c.schedule_family.empty(), "missing required key: schedule_family");
  require(c.schedule_family == "theorem1" || c.schedule_family == "theorem2" ||
              c.schedule_family == "paper-sec4",
          "invalid value for key schedule_family: expected theorem1|theorem2|paper-sec4");
  require(c.set_size > 0.0, "invalid value for key set_size: must be > 0");
  require(c.kappa > 0.0 && c.kappa < 1.0, "invalid value for key kappa: must be in (0,1)");
  require(c.alpha0 > 0.0, "invalid value for key alpha0: must be > 0");
  require(c.theta1 > 0.0 && c.theta1 < 1.0,
          "invalid value for key theta1: must be in (0,1)");
  require(c.theta2 > 0.0 && c.theta2 < 1.0,
          "invalid value for key theta2: must be in (0,1)");
  require(c.theta3 > 0.0, "invalid value for key theta3: must be > 0");
  require(c.tau0 >= 0.0, "invalid value for key tau0: must be >= 0");
  require(c.trigger_kind.empty() || c.trigger_kind == "power" ||
              c.trigger_kind == "geometric" || c.trigger_kind == "scaled-power" ||
              c.trigger_kind == "none",
          "invalid value for key trigger_kind: expected power|geometric|scaled-power|none");
  require(c.trigger_theta > 0.0, "invalid value for key trigger_theta: must be > 0");
  require(c.trigger_c > 1.0, "invalid value for key trigger_c: must be > 1");
  require(c.p_edge >= 0.0 && c.p_edge <= 1.0,
          "invalid value for key p_edge: must be in [0,1]");
  require(c.b_window >= 0, "invalid value for key b_window: must be >= 0");
  require(!c.out.empty(), "invalid value for key out: must be non-empty");
  if (c.graph_kind == GraphSource::Kind::paper4quarters)
    require(c.n >= 2, "graph_kind paper4quarters requires n >= 2");
}

std::vector<KeyValue> canonical_items(const RunConfig& c) {
  return {
      {"n", std::to_string(c.n)},
      {"p", std::to_string(c.p)},
      {"T", std::to_string(c.T)},
      {"q", std::to_string(c.q)},
      {"m", std::to_string(c.m)},
      {"seed", std::to_string(c.seed)},
      {"mode", mode_str(c.mode)},
      {"init", init_str(c.init)},
      {"out", c.out},
      {"set_kind", set_kind_str(c.set_kind)},
      {"set_size", fmt17(c.set_size)},
      {"problem_family", c.problem_family},
      {"schedule_family", c.schedule_family},
      {"kappa", fmt17(c.kappa)},
      {"alpha0", fmt17(c.alpha0)},
      {"theta1", fmt17(c.theta1)},
      {"theta2", fmt17(c.theta2)},
      {"theta3", fmt17(c.theta3)},
      {"tau0", fmt17(c.tau0)},
      {"trigger_kind", c.trigger_kind},
      {"trigger_theta", fmt17(c.trigger_theta)},
      {"trigger_c", fmt17(c.trigger_c)},
      {"graph_kind", graph_kind_str(c.graph_kind)},
      {"p_edge", fmt17(c.p_edge)},
      {"b_window", std::to_string(c.b_window)},
      {"comparator_static", c.comparator_static ? "true" : "false"},
      {"comparator_dynamic", c.comparator_dynamic ? "true" : "false"},
      {"debug_invariants", c.debug_invariants ? "true" : "false"},
  };
}

TriggerSchedule build_trigger(const RunConfig& c) {
  std::string kind = c.trigger_kind;
  if (kind.empty()) kind = (c.schedule_family == "theorem1") ? "power" : "scaled-power";
  if (kind == "power") return TriggerSchedule::power(c.trigger_theta);
  if (kind == "geometric") return TriggerSchedule::geometric(c.trigger_c);
  if (kind == "scaled-power") return TriggerSchedule::scaled_power(c.tau0, c.theta3);
  return TriggerSchedule::none();
}

std::shared_ptr<const ProblemSource> build_problems(const RunConfig& c) {
  if (c.problem_family == "zero") return std::make_shared<ZeroSource>(c.n, c.p);
  ProblemDims dims;
  dims.n = c.n;
  dims.p = c.p;
  dims.q.assign(c.n, c.q);
  dims.m.assign(c.n, c.m);
  return std::make_shared<RegressionSource>(std::move(dims), c.seed);
}

void write_summary(const MetricsLog& log, const RunConfig& config,
                   const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["seed"] = log.seed;
  j["config_hash"] = log.config_hash;
  auto& fin = j["final"];
  fin["avg_cum_loss"] = log.avg_cum_loss.back();
  fin["avg_cum_ccv"] = log.avg_cum_ccv.back();
  fin["total_triggers"] = log.cum_triggers.back();
  if (!log.comparator_cum_loss_static.empty())
    fin["regret_static"] = log.avg_cum_loss.back() - log.comparator_cum_loss_static.back();
  if (!log.comparator_cum_loss_dynamic.empty())
    fin["regret_dynamic"] = log.avg_cum_loss.back() - log.comparator_cum_loss_dynamic.back();
  auto& echo = j["config"];
  for (const auto& [key, value] : canonical_items(config)) echo[key] = value;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

RunConfig parse_config(const std::optional<std::string>& preset,
                       const std::optional<std::filesystem::path>& file,
                       const std::vector<KeyValue>& overrides) {
  RunConfig config;
  std::vector<KeyValue> layers;
  if (preset) {
    const auto* kv = find_preset(*preset);
    if (!kv) throw ConfigError("unknown preset: " + *preset + " (available: desk, paper-sec4)");
    layers.insert(layers.end(), kv->begin(), kv->end());
  }
  if (file) {
    const auto kv = parse_file_keys(*file);
    layers.insert(layers.end(), kv.begin(), kv.end());
  }
  layers.insert(layers.end(), overrides.begin(), overrides.end());
  for (const auto& [key, value] : layers) apply_key(config, key, value);
  validate(config);
  return config;
}

std::vector<std::string> preset_names() { return {"desk", "paper-sec4"}; }

std::string canonical_config(const RunConfig& config) {
  std::ostringstream os;
  for (const auto& [key, value] : canonical_items(config)) os << key << " = " << value << '\n';
  return os.str();
}

std::string config_hash(const RunConfig& config) {
  const std::string text = canonical_config(config);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SimOptions build_sim_options(const RunConfig& config) {
  auto problems = build_problems(config);
  FeasibleSet set = config.set_kind == FeasibleSet::Kind::box
                        ? FeasibleSet::box(config.set_size, config.p)
                        : FeasibleSet::ball(config.set_size, config.p);
  const TriggerSchedule trig = build_trigger(config);
  Schedule schedule = config.schedule_family == "theorem1"
                          ? Schedule::family1(config.kappa, trig, set.inner_radius())
                          : Schedule::family2(config.alpha0, config.theta1, config.theta2,
                                              trig, set.inner_radius());
  ProblemBounds bounds;
  if (config.debug_invariants)
    bounds = estimate_bounds(*problems, set, 10000, config.seed, config.T);
  return SimOptions{
      .problems = std::move(problems),
      .set = std::move(set),
      .schedule = std::move(schedule),
      .graphs = GraphSource(config.graph_kind, config.n, config.p_edge, config.seed),
      .mode = config.mode,
      .init = config.init,
      .seed = config.seed,
      .T = config.T,
      .b_window = config.b_window,
      .debug_invariants = config.debug_invariants,
      .bounds = bounds,
  };
}

MetricsLog run_experiment(const RunConfig& config) {
  SimOptions options = build_sim_options(config);
  MetricsLog log = run_horizon(options);
  log.config_hash = config_hash(config);
  if (config.comparator_static || config.comparator_dynamic) {
    SolverParams sp;
    // Both shipped families are feasible at the origin (regression has b >= 0).
    sp.feasible_anchor = Vector::Zero(config.p);
    if (config.comparator_static)
      fill_comparator_losses(
          log, solve_static_comparator(*options.problems, config.T, options.set, sp));
    if (config.comparator_dynamic)
      fill_comparator_losses(
          log, solve_dynamic_comparator(*options.problems, config.T, options.set, sp));
  }
  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec) throw IoError("cannot create output directory " + config.out + ": " + ec.message());
  const std::filesystem::path dir(config.out);
  emit_csv(log, dir / "metrics.csv");
  write_summary(log, config, dir / "summary.json");
  return log;
}

void sweep(const RunConfig& base, const SweepSpec& spec) {
  const bool known = spec.param == "tau0" || spec.param == "theta" || spec.param == "c" ||
                     spec.param == "kappa";
  if (!known)
    throw ConfigError("sweep param must be one of tau0|theta|c|kappa, got: " + spec.param);
  if (spec.values.empty()) throw ConfigError("sweep: empty value list");
  if (spec.seeds.empty()) throw ConfigError("sweep: empty seed list");

  struct Job {
    RunConfig cfg;
    std::size_t value_idx;
  };
  std::vector<Job> jobs;
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    const double v = spec.values[vi];
    for (const std::uint64_t seed : spec.seeds) {
      RunConfig cfg = base;
      // The swept knob implies its trigger family so the value actually bites.
      if (spec.param == "tau0") {
        cfg.tau0 = v;
        if (cfg.trigger_kind != "none") cfg.trigger_kind = "scaled-power";
      } else if (spec.param == "theta") {
        cfg.trigger_theta = v;
        cfg.trigger_kind = "power";
      } else if (spec.param == "c") {
        cfg.trigger_c = v;
        cfg.trigger_kind = "geometric";
      } else {
        cfg.kappa = v;
      }
      cfg.seed = seed;
      cfg.out = base.out + "/" + spec.param + "_" + fmt_short(v) + "/seed_" +
                std::to_string(seed);
      validate(cfg);
      jobs.push_back({std::move(cfg), vi});
    }
  }

  int workers = 1;
  if (const unsigned hc = std::thread::hardware_concurrency(); hc > 0)
    workers = static_cast<int>(std::min<std::size_t>(hc, jobs.size()));
  if (const char* env = std::getenv("BANDIT_DOPD_THREADS")) {
    const int cap = parse_int("BANDIT_DOPD_THREADS", env);
    if (cap < 1) throw ConfigError("BANDIT_DOPD_THREADS must be a positive integer");
    workers = std::min(workers, cap);
  }

  struct Final {
    double loss = 0.0, ccv = 0.0, triggers = 0.0;
  };
  std::vector<Final> finals(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  const auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      try {
        const MetricsLog log = run_experiment(jobs[k].cfg);
        finals[k] = {log.avg_cum_loss.back(), log.avg_cum_ccv.back(),
                     static_cast<double>(log.cum_triggers.back())};
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(jobs.size());
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::error_code ec;
  std::filesystem::create_directories(base.out, ec);
  if (ec) throw IoError("cannot create output directory " + base.out + ": " + ec.message());
  const std::filesystem::path agg_path = std::filesystem::path(base.out) / "aggregate.csv";
  std::ofstream out(agg_path, std::ios::binary);
  if (!out) throw IoError("cannot open " + agg_path.string());
  out << "param,value,runs,mean_final_avg_cum_loss,mean_final_avg_cum_ccv,"
         "mean_total_triggers\n";
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    Final acc;
    int runs = 0;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (jobs[k].value_idx != vi) continue;
      acc.loss += finals[k].loss;
      acc.ccv += finals[k].ccv;
      acc.triggers += finals[k].triggers;
      ++runs;
    }
    out << spec.param << ',' << fmt_short(spec.values[vi]) << ',' << runs << ','
        << fmt17(acc.loss / runs) << ',' << fmt17(acc.ccv / runs) << ','
        << fmt17(acc.triggers / runs) << '\n';
  }
  if (!out) throw IoError("write failed for " + agg_path.string());
}

}  // namespace dopd
