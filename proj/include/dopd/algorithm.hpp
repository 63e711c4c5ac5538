#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dopd/estimator.hpp"
#include "dopd/geometry.hpp"
#include "dopd/metrics.hpp"
#include "dopd/network.hpp"
#include "dopd/problem.hpp"
#include "dopd/schedules.hpp"

namespace dopd {

enum class Mode { bandit, full_info };
enum class InitRule { zero, uniform };

// One agent's state at round t. x is private; x_hat is the last broadcast
// (globally visible to the simulator, used by neighbors through W). Random
// streams are derived per (seed, concern, agent, round), so agents carry no
// engine state.
struct AgentState {
  Vector x;      // decision, in (1-xi_t)X
  Vector x_hat;  // last broadcast; ||x_hat - x|| <= tau_t after every round
  Vector z;      // consensus estimate
  Vector q;      // dual, >= 0 componentwise
};

// x by init rule, x_hat = x, q = 0. The initial broadcast is unconditional
// (counted as n triggers for round 1 by the horizon loop).
std::vector<AgentState> init_agents(const ProblemDims& dims, const FeasibleSet& set,
                                    const Schedule& schedule, InitRule rule,
                                    std::uint64_t seed);

// z_i = sum_j W_ij x_hat_j — always the stored broadcasts, never private x.
Vector consensus_step(const std::vector<AgentState>& states, const MixingMatrix& W, int i);

// The primal-dual update consuming round-t observations and round-(t+1)
// parameters. state.z must already hold the fresh consensus value.
//   omega = est_f + est_g q
//   x+    = project(set, 1-xi, z - alpha*omega)
//   q+    = [ (1-beta*gamma) q + gamma*(gplus_at_x + est_g^T (x+ - x)) ]_+
void primal_dual_step(AgentState& state, const StepParams& next, const Vector& est_f,
                      const Matrix& est_g, const Vector& gplus_at_x,
                      const FeasibleSet& set);

// Broadcast check: if ||x_new - x_hat|| >= tau_next (inclusive), set
// x_hat = x_new and report a broadcast; otherwise leave x_hat unchanged.
bool event_trigger(AgentState& state, const Vector& x_new, double tau_next);

// Everything one loop iteration produces beyond the new states.
struct RoundOutput {
  std::vector<AgentState> next;     // states at round t+1
  std::vector<Vector> directions;   // u_{i,t} (empty vectors in full-info mode)
  std::vector<char> broadcast;      // per-agent trigger flag for round t+1
  int triggers = 0;
};

// One iteration of the main loop at round t: sample directions, observe, mix,
// update, trigger. Reads only round-t state and broadcasts; per-agent streams
// are derived from (seed, agent, t), so the result is independent of
// processing order (an explicit order can be passed to exercise that).
RoundOutput run_round(int t, const std::vector<AgentState>& states,
                      const RoundProblem& problem, const MixingMatrix& W,
                      const Schedule& schedule, Mode mode, const FeasibleSet& set,
                      std::uint64_t seed, std::span<const int> order = {});

// Snapshot handed to observers once per round, after that round's loop body.
struct RoundView {
  int t;
  StepParams params;                      // schedule at t
  const std::vector<AgentState>& states;  // states at round t
  const std::vector<Vector>& directions;  // probes used at t; empty at t = T
  int triggers;                           // broadcasts attributed to round t
};
using RoundObserver = std::function<void(const RoundView&)>;

struct SimOptions {
  std::shared_ptr<const ProblemSource> problems;
  FeasibleSet set;
  Schedule schedule;
  GraphSource graphs;
  Mode mode = Mode::bandit;
  InitRule init = InitRule::zero;
  std::uint64_t seed = 1;
  int T = 1;
  // Every sliding window of b_window consecutive graphs must be strongly
  // connected; violation aborts the run. 0 disables the check.
  int b_window = 4;
  // Enables per-round invariant checks (trigger distance, dual sign/cap,
  // membership of decisions and probes). dual-cap and estimator-norm checks
  // need `bounds`.
  bool debug_invariants = false;
  ProblemBounds bounds;
};

// Sequential rounds t = 1..T (the update loop body runs for t < T; metrics
// cover all T rounds). Deterministic for a fixed (options, seed).
MetricsLog run_horizon(const SimOptions& options, const RoundObserver& observer = {});

}  // namespace dopd
