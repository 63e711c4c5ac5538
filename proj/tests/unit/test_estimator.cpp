#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dopd/estimator.hpp"
#include "helpers.hpp"

using namespace dopd;
using testutil::close;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

BanditSample sample_e1(int p, double delta) {
  BanditSample s;
  s.u = Vector::Zero(p);
  s.u[0] = 1.0;
  s.delta = delta;
  return s;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("loss estimator: frozen direct evaluations") {
  BanditSample s = sample_e1(3, 0.1);
  s.f_at_x = 1.0;
  s.f_at_xplus = 1.21;
  const Vector e = est_loss_subgrad(s, 3);
  CHECK(close(e[0], 6.299999999999999, 1e-15));
  CHECK(e[1] == 0.0);
  CHECK(e[2] == 0.0);

  // f(x) = x_1, p = 2, x = 0, u = e1, delta = 0.1: (2/0.1) * 0.1 * e1
  BanditSample lin = sample_e1(2, 0.1);
  lin.f_at_x = 0.0;
  lin.f_at_xplus = 0.1;
  const Vector el = est_loss_subgrad(lin, 2);
  CHECK(close(el[0], 2.0, 1e-15));
  CHECK(el[1] == 0.0);

  // direction orthogonal to a linear function's gradient: exact zero
  BanditSample orth = sample_e1(2, 0.1);
  orth.u = Vector::Zero(2);
  orth.u[1] = 1.0;
  orth.f_at_x = 0.7;
  orth.f_at_xplus = 0.7;
  CHECK(est_loss_subgrad(orth, 2) == Vector::Zero(2));
}

TEST_CASE("constraint estimator: frozen direct evaluations") {
  BanditSample s = sample_e1(3, 0.1);
  s.gplus_at_x = Vector(2);
  s.gplus_at_x << 0.5, 0.0;
  s.gplus_at_xplus = Vector(2);
  s.gplus_at_xplus << 0.8, 0.1;
  const Matrix e = est_constraint_plus_subgrad(s, 3);
  REQUIRE(e.rows() == 3);
  REQUIRE(e.cols() == 2);
  CHECK(close(e(0, 0), 9.000000000000002, 1e-15));
  CHECK(close(e(0, 1), 3.0, 1e-15));
  CHECK(e.row(1).isZero(0.0));
  CHECK(e.row(2).isZero(0.0));

  // strictly feasible at both query points: zero matrix
  BanditSample feas = sample_e1(2, 0.1);
  feas.gplus_at_x = Vector::Zero(1);
  feas.gplus_at_xplus = Vector::Zero(1);
  CHECK(est_constraint_plus_subgrad(feas, 2) == Matrix::Zero(2, 1));

  // g(x) = x_1 at x = (0.5, 0), u = e1, delta = 0.1: one column (2, 0)
  BanditSample g1 = sample_e1(2, 0.1);
  g1.gplus_at_x = Vector::Constant(1, 0.5);
  g1.gplus_at_xplus = Vector::Constant(1, 0.6);
  const Matrix eg = est_constraint_plus_subgrad(g1, 2);
  CHECK(close(eg(0, 0), 2.0, 1e-14));
  CHECK(eg(1, 0) == 0.0);
}

TEST_CASE("delta must be positive") {
  BanditSample s = sample_e1(2, 0.0);
  s.gplus_at_x = Vector::Zero(1);
  s.gplus_at_xplus = Vector::Zero(1);
  CHECK_THROWS_AS(est_loss_subgrad(s, 2), std::invalid_argument);
  CHECK_THROWS_AS(est_constraint_plus_subgrad(s, 2), std::invalid_argument);
  s.delta = -0.1;
  CHECK_THROWS_AS(est_loss_subgrad(s, 2), std::invalid_argument);
}

TEST_CASE("estimator means recover linear gradients") {
  const int p = 3;
  const double delta = 0.05;
  std::mt19937_64 rng(31);
  const Vector x = vec3(0.2, -0.1, 0.4);
  Vector f_mean = Vector::Zero(p);
  Vector g_mean = Vector::Zero(p);
  const int n = 100000;
  for (int rep = 0; rep < n; ++rep) {
    BanditSample s;
    s.u = sample_unit_sphere(p, rng);
    s.delta = delta;
    const Vector xp = x + delta * s.u;
    s.f_at_x = x[0];  // f(x) = x_1
    s.f_at_xplus = xp[0];
    // g(x) = x_1 - 0.2 + 0.5, clipped; stays positive near x
    s.gplus_at_x = Vector::Constant(1, std::max(x[0] + 0.3, 0.0));
    s.gplus_at_xplus = Vector::Constant(1, std::max(xp[0] + 0.3, 0.0));
    f_mean += est_loss_subgrad(s, p);
    g_mean += est_constraint_plus_subgrad(s, p).col(0);
  }
  f_mean /= n;
  g_mean /= n;
  CHECK(std::fabs(f_mean[0] - 1.0) < 0.02);
  CHECK(std::fabs(f_mean[1]) < 0.02);
  CHECK(std::fabs(f_mean[2]) < 0.02);
  CHECK(std::fabs(g_mean[0] - 1.0) < 0.02);
  CHECK(std::fabs(g_mean[1]) < 0.02);
  CHECK(std::fabs(g_mean[2]) < 0.02);
}

TEST_CASE("norm bound p*F2 for a Lipschitz oracle") {
  // f(x) = ||x|| has F2 = 1, so every estimate obeys ||e|| <= p
  const int p = 4;
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::uniform_real_distribution<double> dpick(0.01, 0.5);
  for (int rep = 0; rep < 5000; ++rep) {
    Vector x(p);
    for (int k = 0; k < p; ++k) x[k] = unif(rng);
    BanditSample s;
    s.u = sample_unit_sphere(p, rng);
    s.delta = dpick(rng);
    s.f_at_x = x.norm();
    s.f_at_xplus = (x + s.delta * s.u).norm();
    CHECK(est_loss_subgrad(s, p).norm() <= p + 1e-9);
  }
}

TEST_CASE("smoothed value: symmetry, moments, constants") {
  std::mt19937_64 rng(41);
  // linear functions are invariant under ball smoothing
  const auto lin = [](const Vector& v) { return 3.0 * v[0] - v[1]; };
  Vector x(2);
  x << 0.3, -0.2;
  const double sv = smoothed_value(lin, x, 0.5, 200000, rng);
  CHECK(close(sv, lin(x), 0.01));

  // E ||v||^2 over the unit ball = p/(p+2)
  const auto sq = [](const Vector& v) { return v.squaredNorm(); };
  const double mv = smoothed_value(sq, Vector::Zero(2), 1.0, 100000, rng);
  CHECK(close(mv, 0.5, 0.01));

  const auto konst = [](const Vector&) { return 3.7; };
  CHECK(close(smoothed_value(konst, Vector::Zero(3), 0.2, 1000, rng), 3.7, 1e-12));
}

TEST_CASE("smoothed value sandwich for a convex oracle") {
  std::mt19937_64 rng(43);
  const auto f = [](const Vector& v) { return v.squaredNorm(); };  // F2 <= 2*(|x|+delta)
  Vector x(3);
  x << 0.5, -0.3, 0.2;
  const double delta = 0.25;
  const double f2 = 2.0 * (x.norm() + delta);
  const double sv = smoothed_value(f, x, delta, 200000, rng);
  CHECK(sv >= f(x) - 0.005);
  CHECK(sv <= f(x) + f2 * delta + 0.005);
}

}  // TEST_SUITE
