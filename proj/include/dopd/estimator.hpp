#pragma once

#include <functional>
#include <random>

#include "dopd/geometry.hpp"

namespace dopd {

// The four observations of one bandit round: values of f and of the clipped
// constraint at the decision x and at the probe x + delta*u.
struct BanditSample {
  Vector u;              // unit direction
  double delta = 0.0;    // exploration radius, in (0, r(X)*xi_t]
  double f_at_x = 0.0;
  double f_at_xplus = 0.0;
  Vector gplus_at_x;     // componentwise-clipped, >= 0
  Vector gplus_at_xplus;
};

// (p/delta) * (f(x+delta*u) - f(x)) * u. Unbiased for the gradient of the
// ball-smoothed loss; norm bounded by p*F2 when f is F2-Lipschitz.
Vector est_loss_subgrad(const BanditSample& s, int p);

// p x m; column k = (p/delta) * ([g_k(x+delta*u)]_+ - [g_k(x)]_+) * u.
Matrix est_constraint_plus_subgrad(const BanditSample& s, int p);

// Monte Carlo value of the ball-smoothed function E_{v in unit ball} f(x+delta*v).
// Test utility; the algorithm itself never evaluates it.
double smoothed_value(const std::function<double(const Vector&)>& f, const Vector& x,
                      double delta, int n_samples, std::mt19937_64& rng);

}  // namespace dopd
