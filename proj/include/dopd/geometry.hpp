#pragma once

#include <Eigen/Core>
#include <random>

namespace dopd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Compact convex feasible set containing the origin in its interior.
// Two families with closed-form projections:
//   box(h, p):  [-h, h]^p, inner radius h, outer radius h*sqrt(p)
//   ball(r, p): {||x|| <= r}, inner radius = outer radius = r
// project(shrink, x) projects onto the scaled set shrink * X, shrink in (0, 1].
class FeasibleSet {
 public:
  enum class Kind { box, ball };

  static FeasibleSet box(double half_width, int dim);
  static FeasibleSet ball(double radius, int dim);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double size() const { return size_; }  // half-width or radius

  double inner_radius() const;  // largest r with r*B subset of X
  double outer_radius() const;  // smallest R with X subset of R*B

  Vector project(double shrink, const Vector& x) const;
  bool contains(const Vector& x, double shrink = 1.0, double tol = 0.0) const;

  // Uniform sample from shrink * X.
  Vector sample(double shrink, std::mt19937_64& rng) const;

 private:
  FeasibleSet(Kind kind, double size, int dim);
  Kind kind_;
  double size_;
  int dim_;
};

// Uniform direction on the unit sphere S^{p-1} (normalized Gaussian; p = 1 gives
// +/-1 with equal probability). Exactly unit norm up to rounding.
Vector sample_unit_sphere(int p, std::mt19937_64& rng);

// Uniform point in the closed unit ball (sphere direction scaled by U^{1/p}).
Vector sample_unit_ball(int p, std::mt19937_64& rng);

}  // namespace dopd
