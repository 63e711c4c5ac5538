#include "dopd/problem.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dopd/rng.hpp"

namespace dopd {

int ProblemDims::total_m() const { return std::accumulate(m.begin(), m.end(), 0); }

RegressionRound gen_regression_round(std::mt19937_64& rng, int p, int q, int m) {
  if (p < 1 || q < 1 || m < 0) throw std::invalid_argument("regression dims must be positive");
  std::uniform_real_distribution<double> u11(-1.0, 1.0);
  std::uniform_real_distribution<double> u02(0.0, 2.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  RegressionRound r;
  r.A.resize(q, p);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < p; ++j) r.A(i, j) = u11(rng);
  r.theta = r.A.rowwise().sum();  // A * ones(p)
  for (int i = 0; i < q; ++i) r.theta[i] += gauss(rng);
  r.B.resize(m, p);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) r.B(i, j) = u02(rng);
  r.b.resize(m);
  for (int i = 0; i < m; ++i) r.b[i] = u01(rng);
  return r;
}

double eval_loss(const RegressionRound& r, const Vector& x) {
  if (x.size() != r.A.cols()) throw std::invalid_argument("eval_loss: dimension mismatch");
  return 0.5 * (r.A * x - r.theta).squaredNorm();
}

Vector eval_constraint(const RegressionRound& r, const Vector& x) {
  if (x.size() != r.B.cols()) throw std::invalid_argument("eval_constraint: dimension mismatch");
  return r.B * x - r.b;
}

Vector loss_subgrad(const RegressionRound& r, const Vector& x) {
  if (x.size() != r.A.cols()) throw std::invalid_argument("loss_subgrad: dimension mismatch");
  return r.A.transpose() * (r.A * x - r.theta);
}

Matrix constraint_plus_subgrad(const RegressionRound& r, const Vector& x) {
  if (x.size() != r.B.cols())
    throw std::invalid_argument("constraint_plus_subgrad: dimension mismatch");
  const Vector g = r.B * x - r.b;
  Matrix out = Matrix::Zero(r.B.cols(), r.B.rows());
  for (int k = 0; k < g.size(); ++k)
    if (g[k] > 0.0) out.col(k) = r.B.row(k).transpose();
  return out;
}

namespace {

AgentOracles make_regression_oracles(std::shared_ptr<const RegressionRound> r) {
  AgentOracles a;
  a.m = static_cast<int>(r->b.size());
  a.loss = [r](const Vector& x) { return eval_loss(*r, x); };
  a.constraint = [r](const Vector& x) { return eval_constraint(*r, x); };
  a.loss_subgrad = [r](const Vector& x) { return loss_subgrad(*r, x); };
  a.constraint_plus_subgrad = [r](const Vector& x) { return constraint_plus_subgrad(*r, x); };
  a.regression = std::move(r);
  return a;
}

void validate_dims(const ProblemDims& d) {
  if (d.n < 1 || d.p < 1) throw std::invalid_argument("problem dims must be positive");
  if (static_cast<int>(d.q.size()) != d.n || static_cast<int>(d.m.size()) != d.n)
    throw std::invalid_argument("per-agent dims must have length n");
}

}  // namespace

RegressionSource::RegressionSource(ProblemDims dims, std::uint64_t seed)
    : dims_(std::move(dims)), seed_(seed) {
  validate_dims(dims_);
}

RoundProblem RegressionSource::round(int t) const {
  if (t < 1) throw std::invalid_argument("round index must be >= 1");
  RoundProblem prob;
  prob.agents.reserve(dims_.n);
  for (int i = 0; i < dims_.n; ++i) {
    auto rng = make_engine(seed_, Stream::problem, static_cast<std::uint64_t>(i),
                           static_cast<std::uint64_t>(t));
    auto r = std::make_shared<RegressionRound>(
        gen_regression_round(rng, dims_.p, dims_.q[i], dims_.m[i]));
    prob.agents.push_back(make_regression_oracles(std::move(r)));
  }
  return prob;
}

ZeroSource::ZeroSource(int n, int p) {
  dims_.n = n;
  dims_.p = p;
  dims_.q.assign(n, 1);
  dims_.m.assign(n, 0);
  validate_dims(dims_);
}

RoundProblem ZeroSource::round(int) const {
  RoundProblem prob;
  AgentOracles a;
  a.m = 0;
  a.loss = [](const Vector&) { return 0.0; };
  a.constraint = [](const Vector&) { return Vector(0); };
  a.loss_subgrad = [p = dims_.p](const Vector&) { return Vector::Zero(p).eval(); };
  a.constraint_plus_subgrad = [p = dims_.p](const Vector&) { return Matrix::Zero(p, 0).eval(); };
  prob.agents.assign(dims_.n, a);
  return prob;
}

CallbackSource::CallbackSource(ProblemDims dims, std::function<RoundProblem(int)> builder)
    : dims_(std::move(dims)), builder_(std::move(builder)) {
  validate_dims(dims_);
  if (!builder_) throw std::invalid_argument("callback source needs a builder");
}

RoundProblem CallbackSource::round(int t) const {
  if (t < 1) throw std::invalid_argument("round index must be >= 1");
  return builder_(t);
}

ProblemBounds estimate_bounds(const ProblemSource& source, const FeasibleSet& set,
                              int samples, std::uint64_t seed, int round_span) {
  if (samples < 1) throw std::invalid_argument("estimate_bounds: samples must be >= 1");
  if (round_span < 1) throw std::invalid_argument("estimate_bounds: round_span must be >= 1");
  const auto& dims = source.dims();
  auto rng = make_engine(seed, Stream::bounds, 0, 0);

  double f_range = 0.0;   // max |f(x) - f(y)|
  double g_norm = 0.0;    // max ||g(x)||
  double grad_norm = 0.0; // max subgradient / Jacobian norm

  // Spread the sample budget over rounds so time variation is covered.
  const int rounds = std::min(samples, round_span);
  const int per_round = (samples + rounds - 1) / rounds;
  for (int rdx = 0; rdx < rounds; ++rdx) {
    const RoundProblem prob = source.round(rdx + 1);
    // Constraint Jacobian norms are x-independent for the linear benchmark;
    // take them once per round.
    for (int i = 0; i < dims.n; ++i) {
      const auto& a = prob.agents[i];
      if (a.m > 0 && a.regression)
        grad_norm = std::max(grad_norm, a.regression->B.jacobiSvd().singularValues().coeff(0));
    }
    for (int s = 0; s < per_round; ++s) {
      const Vector x = set.sample(1.0, rng);
      const Vector y = set.sample(1.0, rng);
      for (int i = 0; i < dims.n; ++i) {
        const auto& a = prob.agents[i];
        const double fx = a.loss(x);
        const double fy = a.loss(y);
        f_range = std::max(f_range, std::abs(fx - fy));
        if (a.m > 0) g_norm = std::max(g_norm, a.constraint(x).norm());
        if (a.loss_subgrad) {
          grad_norm = std::max(grad_norm, a.loss_subgrad(x).norm());
        } else {
          // difference quotient fallback for value-only oracles
          const double d = (x - y).norm();
          if (d > 1e-9) grad_norm = std::max(grad_norm, std::abs(fx - fy) / d);
        }
        if (a.m > 0 && !a.regression) {
          if (a.constraint_plus_subgrad) {
            Matrix j = a.constraint_plus_subgrad(x);
            grad_norm = std::max(grad_norm, j.jacobiSvd().singularValues().coeff(0));
          } else {
            const double d = (x - y).norm();
            if (d > 1e-9)
              grad_norm = std::max(grad_norm, (a.constraint(x) - a.constraint(y)).norm() / d);
          }
        }
      }
    }
  }

  ProblemBounds b;
  b.F1 = 1.1 * std::max(f_range, g_norm);
  b.F2 = 1.1 * grad_norm;
  b.dual_cap = b.F1 + 2.0 * dims.p * b.F2 * set.outer_radius();
  return b;
}

}  // namespace dopd
