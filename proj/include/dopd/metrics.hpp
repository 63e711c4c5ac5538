#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dopd/geometry.hpp"
#include "dopd/problem.hpp"

namespace dopd {

// Offline comparator sequence y_1..y_T, each feasible to tolerance.
struct ComparatorSequence {
  enum class Kind { static_point, dynamic };
  Kind kind = Kind::static_point;
  std::vector<Vector> y;
  bool converged = true;      // feasibility tolerance met on every round
  double max_residual = 0.0;  // max componentwise constraint value over rounds
};

// Per-round cumulative series of one run, plus provenance. Index t-1 holds the
// cumulative value through round t. Losses charge each agent the network
// average f_t = (1/n) sum_j f_{j,t}, evaluated at that agent's decision.
struct MetricsLog {
  std::uint64_t seed = 0;
  std::string config_hash;
  int n = 0;
  int T = 0;
  std::vector<double> avg_cum_loss;
  std::vector<double> avg_cum_ccv;
  std::vector<long long> cum_triggers;
  Matrix per_agent_cum_loss;  // T x n
  Matrix per_agent_cum_ccv;   // T x n
  // Comparator cumulative losses sum_{s<=t} f_s(y_s); empty unless computed.
  std::vector<double> comparator_cum_loss_static;
  std::vector<double> comparator_cum_loss_dynamic;
  std::shared_ptr<const ProblemSource> problems;  // for comparator evaluation
};

// (1/n) sum_j f_{j,t}(x): the network loss agents are charged in the regret.
double global_loss(const ProblemSource& problems, int t, const Vector& x);

// (1/n) sum_i sum_{t<=T} f_t(x_{i,t}) - sum_{t<=T} f_t(y_t).
double network_regret(const MetricsLog& log, const ComparatorSequence& comparator, int T);

// (1/n) sum_i sum_{t<=T} || [stacked g_t(x_{i,t})]_+ ||.
double network_ccv(const MetricsLog& log, int T);

// sum_t ||y_{t+1} - y_t||; zero for static comparators.
double path_length(const ComparatorSequence& comparator);

struct SolverParams {
  std::vector<double> penalties = {10.0, 100.0, 1000.0, 10000.0};
  int iters_per_stage = 500;
  // Per-stage normalized subgradient steps decay geometrically from the stage
  // scale; the scale adapts to the movement observed in the previous stage.
  double step_decay = 0.985;
  double feas_tol = 1e-6;
  // A point with g_t(anchor) <= 0 for every round, if the caller knows one
  // (the regression benchmark has the origin). Used to restore feasibility
  // when the penalty stages end slightly outside.
  std::optional<Vector> feasible_anchor;
};

// Per-round constrained minimizer of the network loss (penalty method).
ComparatorSequence solve_dynamic_comparator(const ProblemSource& problems, int T,
                                            const FeasibleSet& set,
                                            const SolverParams& params = {});

// One fixed point minimizing the horizon-average network loss subject to every
// round's constraints, replicated T times.
ComparatorSequence solve_static_comparator(const ProblemSource& problems, int T,
                                           const FeasibleSet& set,
                                           const SolverParams& params = {});

// Fills the matching comparator_cum_loss_* column of the log.
void fill_comparator_losses(MetricsLog& log, const ComparatorSequence& comparator);

// Header: t,avg_cum_loss,avg_cum_loss_per_t,avg_cum_ccv,avg_cum_ccv_per_t,
// cum_triggers,regret_static,regret_dynamic. Values with 17 significant digits
// (round-trip exact), comparator cells empty when not computed.
void emit_csv(const MetricsLog& log, const std::filesystem::path& path);

}  // namespace dopd
