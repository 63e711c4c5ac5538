#include "dopd/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace dopd {

TriggerSchedule TriggerSchedule::power(double theta) {
  if (theta <= 0.0) throw std::invalid_argument("power trigger needs theta > 0");
  return TriggerSchedule(Kind::power, theta, 0.0);
}

TriggerSchedule TriggerSchedule::geometric(double c) {
  if (c <= 1.0) throw std::invalid_argument("geometric trigger needs c > 1");
  return TriggerSchedule(Kind::geometric, c, 0.0);
}

TriggerSchedule TriggerSchedule::scaled_power(double tau0, double theta3) {
  if (tau0 < 0.0) throw std::invalid_argument("scaled-power trigger needs tau0 >= 0");
  if (theta3 <= 0.0) throw std::invalid_argument("scaled-power trigger needs theta3 > 0");
  return TriggerSchedule(Kind::scaled_power, tau0, theta3);
}

TriggerSchedule TriggerSchedule::none() { return TriggerSchedule(Kind::none, 0.0, 0.0); }

double TriggerSchedule::tau(int t) const {
  if (t < 1) throw std::invalid_argument("trigger threshold index must be >= 1");
  const double td = static_cast<double>(t);
  switch (kind_) {
    case Kind::power:
      return std::pow(td, -a_);
    case Kind::geometric:
      return std::pow(a_, -td);
    case Kind::scaled_power:
      return a_ / std::pow(td, b_);
    case Kind::none:
      return t == 1 ? 1.0 : 0.0;
  }
  return 0.0;
}

Schedule::Schedule(Family f, TriggerSchedule trigger, double inner_radius)
    : family_(f), trigger_(trigger), inner_radius_(inner_radius) {
  if (inner_radius <= 0.0) throw std::invalid_argument("schedule needs inner radius > 0");
}

Schedule Schedule::family1(double kappa, TriggerSchedule trigger, double inner_radius) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("family1 needs kappa in (0,1)");
  Schedule s(Family::one, trigger, inner_radius);
  s.kappa_ = kappa;
  return s;
}

Schedule Schedule::family2(double alpha0, double theta1, double theta2,
                           TriggerSchedule trigger, double inner_radius) {
  if (alpha0 <= 0.0) throw std::invalid_argument("family2 needs alpha0 > 0");
  if (!(theta1 > 0.0 && theta1 < 1.0)) throw std::invalid_argument("family2 needs theta1 in (0,1)");
  if (!(theta2 > 0.0 && theta2 < 1.0)) throw std::invalid_argument("family2 needs theta2 in (0,1)");
  Schedule s(Family::two, trigger, inner_radius);
  s.alpha0_ = alpha0;
  s.theta1_ = theta1;
  s.theta2_ = theta2;
  return s;
}

double Schedule::psi(int t) const {
  // grow-only prefix sums of tau; single-writer use
  while (static_cast<int>(psi_.size()) < t) {
    const int k = static_cast<int>(psi_.size()) + 1;
    const double prev = psi_.empty() ? 0.0 : psi_.back();
    psi_.push_back(prev + trigger_.tau(k));
  }
  return psi_[t - 1];
}

StepParams Schedule::params_at(int t) const {
  if (t < 1) throw std::invalid_argument("schedule index must be >= 1");
  const double td = static_cast<double>(t);
  StepParams p{};
  p.xi = 1.0 / (td + 1.0);
  p.delta = inner_radius_ / (td + 1.0);
  p.tau = trigger_.tau(t);
  p.psi = psi(t);
  if (family_ == Family::one) {
    p.alpha = std::sqrt(p.psi / td);
    p.beta = std::pow(td, -kappa_);
    p.gamma = std::pow(td, kappa_ - 1.0);
  } else {
    p.alpha = alpha0_ * std::pow(td, -theta1_);
    p.beta = std::pow(td, -theta2_);
    p.gamma = std::pow(td, theta2_ - 1.0);
  }
  return p;
}

}  // namespace dopd
