#include "dopd/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace dopd {

FeasibleSet::FeasibleSet(Kind kind, double size, int dim)
    : kind_(kind), size_(size), dim_(dim) {
  if (size <= 0.0) throw std::invalid_argument("feasible set size must be positive");
  if (dim < 1) throw std::invalid_argument("feasible set dimension must be >= 1");
}

FeasibleSet FeasibleSet::box(double half_width, int dim) {
  return FeasibleSet(Kind::box, half_width, dim);
}

FeasibleSet FeasibleSet::ball(double radius, int dim) {
  return FeasibleSet(Kind::ball, radius, dim);
}

double FeasibleSet::inner_radius() const { return size_; }

double FeasibleSet::outer_radius() const {
  return kind_ == Kind::box ? size_ * std::sqrt(static_cast<double>(dim_)) : size_;
}

Vector FeasibleSet::project(double shrink, const Vector& x) const {
  if (!(shrink > 0.0 && shrink <= 1.0))
    throw std::invalid_argument("projection shrink factor must lie in (0, 1]");
  if (x.size() != dim_) throw std::invalid_argument("projection: dimension mismatch");
  const double s = shrink * size_;
  if (kind_ == Kind::box) {
    return x.cwiseMax(-s).cwiseMin(s);
  }
  const double norm = x.norm();
  if (norm <= s) return x;
  Vector y = x * (s / norm);
  // rounding can leave the rescaled norm an ulp outside; nudge until the
  // result is its own fixed point
  for (double ny = y.norm(); ny > s; ny = y.norm()) y *= s / ny;
  return y;
}

bool FeasibleSet::contains(const Vector& x, double shrink, double tol) const {
  if (x.size() != dim_) return false;
  const double s = shrink * size_;
  if (kind_ == Kind::box) return (x.cwiseAbs().array() <= s + tol).all();
  return x.norm() <= s + tol;
}

Vector FeasibleSet::sample(double shrink, std::mt19937_64& rng) const {
  const double s = shrink * size_;
  if (kind_ == Kind::box) {
    std::uniform_real_distribution<double> unif(-s, s);
    Vector x(dim_);
    for (int k = 0; k < dim_; ++k) x[k] = unif(rng);
    return x;
  }
  return s * sample_unit_ball(dim_, rng);
}

Vector sample_unit_sphere(int p, std::mt19937_64& rng) {
  if (p < 1) throw std::invalid_argument("sphere dimension must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(p);
  double norm = 0.0;
  do {
    for (int k = 0; k < p; ++k) u[k] = gauss(rng);
    norm = u.norm();
  } while (norm < 1e-12);  // astronomically rare; guards the normalization
  return u / norm;
}

Vector sample_unit_ball(int p, std::mt19937_64& rng) {
  Vector u = sample_unit_sphere(p, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // radius ~ U^{1/p} makes the point uniform in volume
  return u * std::pow(unif(rng), 1.0 / static_cast<double>(p));
}

}  // namespace dopd
