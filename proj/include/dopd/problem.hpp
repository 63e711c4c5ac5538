#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "dopd/geometry.hpp"

namespace dopd {

// One agent's materialized round data for the linear-regression benchmark:
//   f(x) = 0.5 * ||A x - theta||^2,  g(x) = B x - b
// A ~ U[-1,1] entrywise, theta = A*1 + zeta (zeta standard normal, fresh per
// round), B ~ U[0,2], b ~ U[0,1]. b >= 0 makes x = 0 feasible every round.
struct RegressionRound {
  Matrix A;      // q x p
  Vector theta;  // q
  Matrix B;      // m x p
  Vector b;      // m
};

RegressionRound gen_regression_round(std::mt19937_64& rng, int p, int q, int m);

double eval_loss(const RegressionRound& r, const Vector& x);
Vector eval_constraint(const RegressionRound& r, const Vector& x);
// Analytic derivatives for the full-information baseline.
Vector loss_subgrad(const RegressionRound& r, const Vector& x);
// p x m; column k = B_k^T when g_k(x) > 0, else zero (zero is the chosen
// subgradient of [.]_+ at the boundary).
Matrix constraint_plus_subgrad(const RegressionRound& r, const Vector& x);

// Oracle bundle for one agent in one round. The value oracles are mandatory;
// analytic subgradients are optional (needed only by full-information mode).
// `regression` is set by the benchmark source and lets solvers/metrics take a
// closed-form fast path; generic callers must not rely on it.
struct AgentOracles {
  int m = 0;
  std::function<double(const Vector&)> loss;
  std::function<Vector(const Vector&)> constraint;
  std::function<Vector(const Vector&)> loss_subgrad;
  std::function<Matrix(const Vector&)> constraint_plus_subgrad;
  std::shared_ptr<const RegressionRound> regression;
};

struct RoundProblem {
  std::vector<AgentOracles> agents;
};

struct ProblemDims {
  int n = 0;
  int p = 0;
  std::vector<int> q;  // residual dims per agent
  std::vector<int> m;  // constraint dims per agent
  int total_m() const;
};

// Deterministic per-round problem generator. round(t) must be pure: same t,
// same data. Rounds are built on demand so long horizons never hold all
// matrices at once.
class ProblemSource {
 public:
  virtual ~ProblemSource() = default;
  virtual const ProblemDims& dims() const = 0;
  virtual RoundProblem round(int t) const = 0;
};

// The distributed online linear-regression benchmark family.
class RegressionSource final : public ProblemSource {
 public:
  RegressionSource(ProblemDims dims, std::uint64_t seed);
  const ProblemDims& dims() const override { return dims_; }
  RoundProblem round(int t) const override;

 private:
  ProblemDims dims_;
  std::uint64_t seed_;
};

// f = 0, g = 0 (m = 0): reduces the algorithm to pure consensus averaging.
class ZeroSource final : public ProblemSource {
 public:
  ZeroSource(int n, int p);
  const ProblemDims& dims() const override { return dims_; }
  RoundProblem round(int t) const override;

 private:
  ProblemDims dims_;
};

// User-supplied family: builder must be pure in t.
class CallbackSource final : public ProblemSource {
 public:
  CallbackSource(ProblemDims dims, std::function<RoundProblem(int)> builder);
  const ProblemDims& dims() const override { return dims_; }
  RoundProblem round(int t) const override;

 private:
  ProblemDims dims_;
  std::function<RoundProblem(int)> builder_;
};

// Empirical oracle bounds, used by test assertions and debug checks only.
//   F1 >= |f(x)-f(y)| and ||g(x)|| over X, F2 >= subgradient norms over X,
//   dual_cap = F1 + 2*p*F2*R(X)  (cap on ||beta_t q_t|| along any run)
struct ProblemBounds {
  double F1 = 0.0;
  double F2 = 0.0;
  double dual_cap = 0.0;
};

// Empirical maxima over `samples` (round, x, y) draws, inflated by 1.1.
// Uses analytic subgradients when the family provides them, difference
// quotients otherwise.
ProblemBounds estimate_bounds(const ProblemSource& source, const FeasibleSet& set,
                              int samples, std::uint64_t seed, int round_span = 256);

}  // namespace dopd
