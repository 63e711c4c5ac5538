#include "dopd/algorithm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dopd/errors.hpp"
#include "dopd/rng.hpp"

namespace dopd {

std::vector<AgentState> init_agents(const ProblemDims& dims, const FeasibleSet& set,
                                    const Schedule& schedule, InitRule rule,
                                    std::uint64_t seed) {
  if (set.dim() != dims.p) throw std::invalid_argument("init_agents: set/problem dim mismatch");
  const double shrink = 1.0 - schedule.params_at(1).xi;
  std::vector<AgentState> states(dims.n);
  for (int i = 0; i < dims.n; ++i) {
    AgentState& s = states[i];
    if (rule == InitRule::zero) {
      s.x = Vector::Zero(dims.p);
    } else {
      auto rng = make_engine(seed, Stream::init, static_cast<std::uint64_t>(i), 0);
      s.x = set.sample(shrink, rng);
    }
    s.x_hat = s.x;  // unconditional round-1 broadcast
    s.z = Vector::Zero(dims.p);
    s.q = Vector::Zero(dims.m[i]);
  }
  return states;
}

Vector consensus_step(const std::vector<AgentState>& states, const MixingMatrix& W, int i) {
  const int n = static_cast<int>(states.size());
  if (W.W.rows() != n || W.W.cols() != n)
    throw std::invalid_argument("consensus_step: mixing matrix size mismatch");
  Vector z = Vector::Zero(states[i].x_hat.size());
  for (int j = 0; j < n; ++j) {
    const double w = W.W(i, j);
    if (w != 0.0) z += w * states[j].x_hat;
  }
  return z;
}

void primal_dual_step(AgentState& state, const StepParams& next, const Vector& est_f,
                      const Matrix& est_g, const Vector& gplus_at_x,
                      const FeasibleSet& set) {
  const auto m = state.q.size();
  if (est_g.cols() != m || gplus_at_x.size() != m)
    throw std::invalid_argument("primal_dual_step: constraint dimension mismatch");
  Vector omega = est_f;
  if (m > 0) omega += est_g * state.q;
  const Vector x_new = set.project(1.0 - next.xi, state.z - next.alpha * omega);
  if (m > 0) {
    const Vector bhat = gplus_at_x + est_g.transpose() * (x_new - state.x);
    state.q = ((1.0 - next.beta * next.gamma) * state.q + next.gamma * bhat).cwiseMax(0.0);
  }
  state.x = x_new;
}

bool event_trigger(AgentState& state, const Vector& x_new, double tau_next) {
  if (tau_next < 0.0) throw std::invalid_argument("event_trigger: threshold must be >= 0");
  if ((x_new - state.x_hat).norm() >= tau_next) {
    state.x_hat = x_new;
    return true;
  }
  return false;
}

RoundOutput run_round(int t, const std::vector<AgentState>& states,
                      const RoundProblem& problem, const MixingMatrix& W,
                      const Schedule& schedule, Mode mode, const FeasibleSet& set,
                      std::uint64_t seed, std::span<const int> order) {
  const int n = static_cast<int>(states.size());
  const int p = set.dim();
  if (static_cast<int>(problem.agents.size()) != n)
    throw std::invalid_argument("run_round: problem/state agent count mismatch");
  const StepParams cur = schedule.params_at(t);
  const StepParams next = schedule.params_at(t + 1);

  RoundOutput out;
  out.next = states;
  out.directions.assign(n, Vector());
  out.broadcast.assign(n, 0);

  for (int idx = 0; idx < n; ++idx) {
    const int i = order.empty() ? idx : order[idx];
    const auto& a = problem.agents[i];
    AgentState& st = out.next[i];

    Vector est_f, gplus;
    Matrix est_g;
    if (mode == Mode::bandit) {
      auto rng = make_engine(seed, Stream::direction, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(t));
      BanditSample s;
      s.u = sample_unit_sphere(p, rng);
      s.delta = cur.delta;
      const Vector& x = states[i].x;
      const Vector xplus = x + s.delta * s.u;
      s.f_at_x = a.loss(x);
      s.f_at_xplus = a.loss(xplus);
      if (a.m > 0) {
        s.gplus_at_x = a.constraint(x).cwiseMax(0.0);
        s.gplus_at_xplus = a.constraint(xplus).cwiseMax(0.0);
      } else {
        s.gplus_at_x = Vector(0);
        s.gplus_at_xplus = Vector(0);
      }
      est_f = est_loss_subgrad(s, p);
      est_g = est_constraint_plus_subgrad(s, p);
      gplus = std::move(s.gplus_at_x);
      out.directions[i] = std::move(s.u);
    } else {
      if (!a.loss_subgrad || (a.m > 0 && !a.constraint_plus_subgrad))
        throw std::invalid_argument(
            "full-information mode needs analytic subgradient oracles");
      const Vector& x = states[i].x;
      est_f = a.loss_subgrad(x);
      est_g = a.m > 0 ? a.constraint_plus_subgrad(x) : Matrix(p, 0);
      gplus = a.m > 0 ? a.constraint(x).cwiseMax(0.0).eval() : Vector(0);
    }

    st.z = consensus_step(states, W, i);
    primal_dual_step(st, next, est_f, est_g, gplus, set);
    if (event_trigger(st, st.x, next.tau)) {
      out.broadcast[i] = 1;
      ++out.triggers;
    }
  }
  return out;
}

namespace {

void check_invariants(const RoundView& view, const FeasibleSet& set,
                      const ProblemBounds& bounds) {
  const auto fail = [&](int agent, const std::string& what) {
    std::ostringstream os;
    os << "invariant violation at round " << view.t << ", agent " << agent << ": " << what;
    throw AssumptionError(os.str());
  };
  const double shrink = 1.0 - view.params.xi;
  for (int i = 0; i < static_cast<int>(view.states.size()); ++i) {
    const AgentState& s = view.states[i];
    if ((s.x_hat - s.x).norm() > view.params.tau)
      fail(i, "broadcast gap exceeds trigger threshold");
    if (s.q.size() > 0 && s.q.minCoeff() < 0.0) fail(i, "negative dual component");
    if (bounds.dual_cap > 0.0 && view.params.beta * s.q.norm() > bounds.dual_cap)
      fail(i, "scaled dual norm exceeds cap");
    if (!set.contains(s.x, shrink, 1e-12)) fail(i, "decision outside shrunken set");
    if (i < static_cast<int>(view.directions.size()) && view.directions[i].size() > 0 &&
        !set.contains(s.x + view.params.delta * view.directions[i], 1.0, 1e-12))
      fail(i, "probe outside feasible set");
  }
}

}  // namespace

MetricsLog run_horizon(const SimOptions& options, const RoundObserver& observer) {
  if (!options.problems) throw std::invalid_argument("run_horizon: problem source required");
  const ProblemDims& dims = options.problems->dims();
  const int n = dims.n;
  const int T = options.T;
  if (T < 1) throw std::invalid_argument("run_horizon: T must be >= 1");
  if (options.graphs.n() != n) throw std::invalid_argument("run_horizon: graph agent count mismatch");
  if (options.set.dim() != dims.p) throw std::invalid_argument("run_horizon: set dimension mismatch");

  std::vector<AgentState> states = init_agents(dims, options.set, options.schedule,
                                               options.init, options.seed);

  MetricsLog log;
  log.seed = options.seed;
  log.n = n;
  log.T = T;
  log.avg_cum_loss.resize(T);
  log.avg_cum_ccv.resize(T);
  log.cum_triggers.resize(T);
  log.per_agent_cum_loss = Matrix::Zero(T, n);
  log.per_agent_cum_ccv = Matrix::Zero(T, n);
  log.problems = options.problems;

  Vector cum_loss = Vector::Zero(n);
  Vector cum_ccv = Vector::Zero(n);
  long long cum_triggers = 0;
  int triggers_this_round = n;  // unconditional initial broadcast
  std::vector<RoundGraph> window;
  const std::vector<Vector> no_directions;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (int t = 1; t <= T; ++t) {
    const RoundProblem prob = options.problems->round(t);

    // Metrics charge every agent the network loss f_t = (1/n) sum_j f_{j,t}
    // and the norm of the full stacked clipped constraint (n^2 evaluations;
    // the agents themselves never see this information).
    for (int i = 0; i < n; ++i) {
      double loss_sum = 0.0;
      double viol_sq = 0.0;
      for (int j = 0; j < n; ++j) {
        const auto& a = prob.agents[j];
        loss_sum += a.loss(states[i].x);
        if (a.m > 0) viol_sq += a.constraint(states[i].x).cwiseMax(0.0).squaredNorm();
      }
      cum_loss[i] += inv_n * loss_sum;
      cum_ccv[i] += std::sqrt(viol_sq);
    }
    cum_triggers += triggers_this_round;
    log.per_agent_cum_loss.row(t - 1) = cum_loss.transpose();
    log.per_agent_cum_ccv.row(t - 1) = cum_ccv.transpose();
    log.avg_cum_loss[t - 1] = inv_n * cum_loss.sum();
    log.avg_cum_ccv[t - 1] = inv_n * cum_ccv.sum();
    log.cum_triggers[t - 1] = cum_triggers;

    RoundOutput out;
    bool updated = false;
    if (t < T) {
      RoundGraph graph = options.graphs.round(t);
      if (options.b_window > 0) {
        window.push_back(graph);
        if (static_cast<int>(window.size()) == options.b_window) {
          if (!check_b_connectivity(std::span<const RoundGraph>(window.data(), window.size()))) {
            std::ostringstream os;
            os << "communication graph window [rounds " << (t - options.b_window + 1) << ".."
               << t << "] is not strongly connected; raise p_edge or b_window";
            throw AssumptionError(os.str());
          }
          window.erase(window.begin());
        }
      }
      const MixingMatrix W = mixing_from_graph(graph);
      out = run_round(t, states, prob, W, options.schedule, options.mode, options.set,
                      options.seed);
      updated = true;
    }

    if (observer || options.debug_invariants) {
      const RoundView view{t, options.schedule.params_at(t), states,
                           updated ? out.directions : no_directions, triggers_this_round};
      if (options.debug_invariants) check_invariants(view, options.set, options.bounds);
      if (observer) observer(view);
    }

    if (updated) {
      states = std::move(out.next);
      triggers_this_round = out.triggers;
    }
  }
  return log;
}

}  // namespace dopd
