#include "dopd/estimator.hpp"

#include <stdexcept>

namespace dopd {

namespace {
void validate(const BanditSample& s, int p) {
  if (s.delta <= 0.0) throw std::invalid_argument("estimator: delta must be positive");
  if (s.u.size() != p) throw std::invalid_argument("estimator: direction dimension mismatch");
}
}  // namespace

Vector est_loss_subgrad(const BanditSample& s, int p) {
  validate(s, p);
  const double scale = static_cast<double>(p) / s.delta;
  return scale * (s.f_at_xplus - s.f_at_x) * s.u;
}

Matrix est_constraint_plus_subgrad(const BanditSample& s, int p) {
  validate(s, p);
  if (s.gplus_at_x.size() != s.gplus_at_xplus.size())
    throw std::invalid_argument("estimator: clipped constraint dimension mismatch");
  const double scale = static_cast<double>(p) / s.delta;
  // outer product u * diff^T, one column per constraint
  return (scale * s.u) * (s.gplus_at_xplus - s.gplus_at_x).transpose();
}

double smoothed_value(const std::function<double(const Vector&)>& f, const Vector& x,
                      double delta, int n_samples, std::mt19937_64& rng) {
  if (delta < 0.0) throw std::invalid_argument("smoothed_value: delta must be >= 0");
  if (n_samples < 1) throw std::invalid_argument("smoothed_value: need >= 1 sample");
  double acc = 0.0;
  const int p = static_cast<int>(x.size());
  for (int s = 0; s < n_samples; ++s)
    acc += f(x + delta * sample_unit_ball(p, rng));
  return acc / static_cast<double>(n_samples);
}

}  // namespace dopd
