#include "dopd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

#include "dopd/errors.hpp"

namespace dopd {

double global_loss(const ProblemSource& problems, int t, const Vector& x) {
  const RoundProblem pr = problems.round(t);
  if (pr.agents.empty()) throw std::invalid_argument("global_loss: empty round");
  double s = 0.0;
  for (const auto& a : pr.agents) s += a.loss(x);
  return s / static_cast<double>(pr.agents.size());
}

double network_regret(const MetricsLog& log, const ComparatorSequence& comparator, int T) {
  if (T < 1 || T > log.T) throw std::invalid_argument("network_regret: T out of range");
  if (static_cast<int>(comparator.y.size()) < T)
    throw std::invalid_argument("network_regret: comparator shorter than T");
  if (!log.problems) throw std::invalid_argument("network_regret: log carries no problem source");
  const double learner = log.per_agent_cum_loss.row(T - 1).mean();
  double comp = 0.0;
  for (int t = 1; t <= T; ++t) comp += global_loss(*log.problems, t, comparator.y[t - 1]);
  return learner - comp;
}

double network_ccv(const MetricsLog& log, int T) {
  if (T < 1 || T > log.T) throw std::invalid_argument("network_ccv: T out of range");
  return log.per_agent_cum_ccv.row(T - 1).mean();
}

double path_length(const ComparatorSequence& comparator) {
  double s = 0.0;
  for (std::size_t t = 1; t < comparator.y.size(); ++t)
    s += (comparator.y[t] - comparator.y[t - 1]).norm();
  return s;
}

namespace {

struct ConstraintEval {
  double sum_pos = 0.0;  // sum_k [g_k]_+
  double max_comp = -std::numeric_limits<double>::infinity();
};

// Penalty-solver view of one optimization problem: network-average objective
// plus the pooled constraint components of every covered round.
class ComparatorObjective {
 public:
  virtual ~ComparatorObjective() = default;
  virtual double value(const Vector& x) const = 0;
  virtual ConstraintEval constraints(const Vector& x) const = 0;
  virtual Vector penalty_grad(const Vector& x, double rho) const = 0;
};

// f(x) = 0.5 x'Hx - c'x + f0 with rows Bx <= b. Exact closed forms for the
// regression benchmark; dominates solver cost, so kept free of oracle calls.
class QuadObjective final : public ComparatorObjective {
 public:
  Matrix H, B;
  Vector c, b;
  double f0 = 0.0;

  double value(const Vector& x) const override {
    return 0.5 * x.dot(H * x) - c.dot(x) + f0;
  }
  ConstraintEval constraints(const Vector& x) const override {
    ConstraintEval e;
    if (B.rows() == 0) return e;
    const Vector r = B * x - b;
    e.sum_pos = r.cwiseMax(0.0).sum();
    e.max_comp = r.maxCoeff();
    return e;
  }
  Vector penalty_grad(const Vector& x, double rho) const override {
    Vector g = H * x - c;
    if (B.rows() > 0) {
      const Vector r = B * x - b;
      const Vector active = (r.array() > 0.0).cast<double>();
      g.noalias() += rho * (B.transpose() * active);
    }
    return g;
  }
};

// Fallback driven by the agent oracles; requires subgradient callbacks.
class OracleObjective final : public ComparatorObjective {
 public:
  std::vector<RoundProblem> rounds;
  int n = 0;

  double value(const Vector& x) const override {
    double s = 0.0;
    for (const auto& pr : rounds)
      for (const auto& a : pr.agents) s += a.loss(x);
    return s / (static_cast<double>(rounds.size()) * n);
  }
  ConstraintEval constraints(const Vector& x) const override {
    ConstraintEval e;
    for (const auto& pr : rounds)
      for (const auto& a : pr.agents) {
        if (a.m == 0) continue;
        const Vector g = a.constraint(x);
        e.sum_pos += g.cwiseMax(0.0).sum();
        e.max_comp = std::max(e.max_comp, g.maxCoeff());
      }
    return e;
  }
  Vector penalty_grad(const Vector& x, double rho) const override {
    Vector g = Vector::Zero(x.size());
    for (const auto& pr : rounds)
      for (const auto& a : pr.agents) {
        if (!a.loss_subgrad)
          throw std::invalid_argument("comparator solver needs loss subgradient oracles");
        g += a.loss_subgrad(x);
      }
    g /= static_cast<double>(rounds.size()) * n;
    for (const auto& pr : rounds)
      for (const auto& a : pr.agents) {
        if (a.m == 0) continue;
        if (!a.constraint_plus_subgrad)
          throw std::invalid_argument("comparator solver needs constraint subgradient oracles");
        g.noalias() += rho * (a.constraint_plus_subgrad(x) * Vector::Ones(a.m));
      }
    return g;
  }
};

bool all_regression(const RoundProblem& pr) {
  for (const auto& a : pr.agents)
    if (!a.regression) return false;
  return true;
}

// Accumulates one round's regression payloads into quad form (network average
// of the objectives, raw stacked constraint rows).
void accumulate_quad(QuadObjective& q, const RoundProblem& pr, std::vector<Matrix>& b_blocks,
                     std::vector<Vector>& b_rhs) {
  for (const auto& a : pr.agents) {
    const RegressionRound& r = *a.regression;
    q.H.noalias() += r.A.transpose() * r.A;
    q.c.noalias() += r.A.transpose() * r.theta;
    q.f0 += 0.5 * r.theta.squaredNorm();
    if (r.B.rows() > 0) {
      b_blocks.push_back(r.B);
      b_rhs.push_back(r.b);
    }
  }
}

void finish_quad(QuadObjective& q, int p, double denom, std::vector<Matrix>& b_blocks,
                 std::vector<Vector>& b_rhs) {
  q.H /= denom;
  q.c /= denom;
  q.f0 /= denom;
  Eigen::Index rows = 0;
  for (const auto& blk : b_blocks) rows += blk.rows();
  q.B.resize(rows, p);
  q.b.resize(rows);
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < b_blocks.size(); ++k) {
    q.B.middleRows(at, b_blocks[k].rows()) = b_blocks[k];
    q.b.segment(at, b_rhs[k].size()) = b_rhs[k];
    at += b_blocks[k].rows();
  }
}

std::unique_ptr<ComparatorObjective> make_objective(const ProblemSource& problems, int t_begin,
                                                    int t_end) {
  const int n = problems.dims().n;
  const int p = problems.dims().p;
  std::vector<RoundProblem> rounds;
  rounds.reserve(t_end - t_begin + 1);
  bool quad_ok = true;
  for (int t = t_begin; t <= t_end; ++t) {
    rounds.push_back(problems.round(t));
    quad_ok = quad_ok && all_regression(rounds.back());
  }
  if (quad_ok) {
    auto q = std::make_unique<QuadObjective>();
    q->H = Matrix::Zero(p, p);
    q->c = Vector::Zero(p);
    std::vector<Matrix> b_blocks;
    std::vector<Vector> b_rhs;
    for (const auto& pr : rounds) accumulate_quad(*q, pr, b_blocks, b_rhs);
    finish_quad(*q, p, static_cast<double>(n) * rounds.size(), b_blocks, b_rhs);
    return q;
  }
  auto o = std::make_unique<OracleObjective>();
  o->rounds = std::move(rounds);
  o->n = n;
  return o;
}

struct SolveOutcome {
  Vector y;
  double residual = 0.0;  // [max_k g_k]_+ at y
  bool feasible = false;
};

// Penalty ladder with normalized subgradient steps decaying geometrically
// inside each stage; the stage scale adapts to the movement just observed.
// Tracks the best feasible iterate, and when the ladder ends outside the
// feasible region pulls the point toward the anchor by bisection.
SolveOutcome minimize_penalized(const ComparatorObjective& obj, const FeasibleSet& set,
                                const SolverParams& sp) {
  if (sp.iters_per_stage < 1 || sp.penalties.empty())
    throw std::invalid_argument("comparator solver: empty schedule");
  if (!(sp.step_decay > 0.0 && sp.step_decay < 1.0))
    throw std::invalid_argument("comparator solver: step_decay must be in (0,1)");
  Vector x = sp.feasible_anchor ? *sp.feasible_anchor
                                : set.project(1.0, Vector::Zero(set.dim()));
  double scale = set.outer_radius();
  Vector best_feas;
  double best_feas_val = std::numeric_limits<double>::infinity();
  bool have_feas = false;
  const auto consider_feasible = [&](const Vector& pt, double val, double max_comp) {
    if (max_comp <= sp.feas_tol && val < best_feas_val) {
      best_feas = pt;
      best_feas_val = val;
      have_feas = true;
    }
  };
  consider_feasible(x, obj.value(x), obj.constraints(x).max_comp);

  for (const double rho : sp.penalties) {
    const Vector stage_start = x;
    Vector best_x = x;
    double best_phi = obj.value(x) + rho * obj.constraints(x).sum_pos;
    double step = scale;
    for (int k = 0; k < sp.iters_per_stage; ++k) {
      const Vector d = obj.penalty_grad(x, rho);
      const double dn = d.norm();
      if (dn > 0.0) x = set.project(1.0, x - (step / dn) * d);
      step *= sp.step_decay;
      const double v = obj.value(x);
      const ConstraintEval e = obj.constraints(x);
      const double phi = v + rho * e.sum_pos;
      if (phi < best_phi) {
        best_phi = phi;
        best_x = x;
      }
      consider_feasible(x, v, e.max_comp);
    }
    x = best_x;
    const double moved = (x - stage_start).norm();
    const double final_step = scale * std::pow(sp.step_decay, sp.iters_per_stage);
    scale = std::max({0.5 * moved, 50.0 * final_step, set.outer_radius() * 1e-12});
  }

  if (sp.feasible_anchor && obj.constraints(x).max_comp > 0.0) {
    const Vector base = x;
    const Vector& a = *sp.feasible_anchor;
    const auto resid_at = [&](double lam) {
      return obj.constraints(base + lam * (a - base)).max_comp;
    };
    if (resid_at(1.0) <= 0.0) {  // smallest feasible pullback of a convex residual
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (resid_at(mid) <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      const Vector pulled = base + hi * (a - base);
      consider_feasible(pulled, obj.value(pulled), obj.constraints(pulled).max_comp);
    }
  }

  SolveOutcome out;
  if (have_feas) {
    out.y = best_feas;
    out.residual = std::max(0.0, obj.constraints(best_feas).max_comp);
    out.feasible = true;
  } else {
    out.y = x;
    out.residual = std::max(0.0, obj.constraints(x).max_comp);
    out.feasible = out.residual <= sp.feas_tol;
  }
  return out;
}

void check_anchor(const SolverParams& params, const FeasibleSet& set) {
  if (params.feasible_anchor && !set.contains(*params.feasible_anchor, 1.0, 1e-9))
    throw std::invalid_argument("comparator solver: anchor outside the feasible set");
}

}  // namespace

ComparatorSequence solve_dynamic_comparator(const ProblemSource& problems, int T,
                                            const FeasibleSet& set,
                                            const SolverParams& params) {
  if (T < 1) throw std::invalid_argument("solve_dynamic_comparator: T must be >= 1");
  check_anchor(params, set);
  ComparatorSequence seq;
  seq.kind = ComparatorSequence::Kind::dynamic;
  seq.y.reserve(T);
  for (int t = 1; t <= T; ++t) {
    const auto obj = make_objective(problems, t, t);
    const SolveOutcome out = minimize_penalized(*obj, set, params);
    seq.converged = seq.converged && out.feasible;
    seq.max_residual = std::max(seq.max_residual, out.residual);
    seq.y.push_back(out.y);
  }
  return seq;
}

ComparatorSequence solve_static_comparator(const ProblemSource& problems, int T,
                                           const FeasibleSet& set,
                                           const SolverParams& params) {
  if (T < 1) throw std::invalid_argument("solve_static_comparator: T must be >= 1");
  check_anchor(params, set);
  const auto obj = make_objective(problems, 1, T);
  const SolveOutcome out = minimize_penalized(*obj, set, params);
  ComparatorSequence seq;
  seq.kind = ComparatorSequence::Kind::static_point;
  seq.y.assign(T, out.y);
  seq.converged = out.feasible;
  seq.max_residual = out.residual;
  return seq;
}

void fill_comparator_losses(MetricsLog& log, const ComparatorSequence& comparator) {
  if (!log.problems)
    throw std::invalid_argument("fill_comparator_losses: log carries no problem source");
  if (static_cast<int>(comparator.y.size()) < log.T)
    throw std::invalid_argument("fill_comparator_losses: comparator shorter than horizon");
  std::vector<double> cum(log.T);
  double acc = 0.0;
  for (int t = 1; t <= log.T; ++t) {
    acc += global_loss(*log.problems, t, comparator.y[t - 1]);
    cum[t - 1] = acc;
  }
  if (comparator.kind == ComparatorSequence::Kind::static_point)
    log.comparator_cum_loss_static = std::move(cum);
  else
    log.comparator_cum_loss_dynamic = std::move(cum);
}

void emit_csv(const MetricsLog& log, const std::filesystem::path& path) {
  const int T = log.T;
  if (static_cast<int>(log.avg_cum_loss.size()) != T ||
      static_cast<int>(log.avg_cum_ccv.size()) != T ||
      static_cast<int>(log.cum_triggers.size()) != T)
    throw std::invalid_argument("emit_csv: log series do not match horizon");
  const bool has_static = static_cast<int>(log.comparator_cum_loss_static.size()) == T;
  const bool has_dynamic = static_cast<int>(log.comparator_cum_loss_dynamic.size()) == T;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_csv: cannot open " + path.string());
  char buf[40];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "t,avg_cum_loss,avg_cum_loss_per_t,avg_cum_ccv,avg_cum_ccv_per_t,"
         "cum_triggers,regret_static,regret_dynamic\n";
  for (int t = 1; t <= T; ++t) {
    const double inv_t = 1.0 / static_cast<double>(t);
    const double loss = log.avg_cum_loss[t - 1];
    const double ccv = log.avg_cum_ccv[t - 1];
    out << t << ',' << fmt(loss) << ',' << fmt(loss * inv_t) << ',' << fmt(ccv) << ','
        << fmt(ccv * inv_t) << ',' << log.cum_triggers[t - 1] << ',';
    if (has_static) out << fmt(loss - log.comparator_cum_loss_static[t - 1]);
    out << ',';
    if (has_dynamic) out << fmt(loss - log.comparator_cum_loss_dynamic[t - 1]);
    out << '\n';
  }
  if (!out) throw IoError("emit_csv: write failed for " + path.string());
}

}  // namespace dopd
