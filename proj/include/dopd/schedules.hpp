#pragma once

#include <memory>
#include <vector>

namespace dopd {

// Non-increasing threshold sequence {tau_t} for the communication trigger.
//   power(theta):              tau_t = 1 / t^theta,   theta > 0
//   geometric(c):              tau_t = 1 / c^t,       c > 1
//   scaled_power(tau0, th3):   tau_t = tau0 / t^th3,  tau0 >= 0, th3 > 0
//   none():                    tau_1 = 1, tau_t = 0 for t >= 2 (broadcast every round)
class TriggerSchedule {
 public:
  enum class Kind { power, geometric, scaled_power, none };

  static TriggerSchedule power(double theta);
  static TriggerSchedule geometric(double c);
  static TriggerSchedule scaled_power(double tau0, double theta3);
  static TriggerSchedule none();

  double tau(int t) const;  // t >= 1
  Kind kind() const { return kind_; }

 private:
  TriggerSchedule(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_ = 0.0;  // theta / c / tau0
  double b_ = 0.0;  // theta3
};

// All step sizes the update at round t consumes.
struct StepParams {
  double alpha;  // primal step
  double beta;   // dual regularization
  double gamma;  // dual step; beta*gamma = 1/t for both families
  double xi;     // set shrinkage, xi_t = 1/(t+1)
  double delta;  // exploration radius, delta_t = r(X)/(t+1) = r(X)*xi_t
  double tau;    // trigger threshold
  double psi;    // running sum psi_t = sum_{k<=t} tau_k (drives family-1 alpha)
};

// Two step-size families sharing xi_t = 1/(t+1), delta_t = r(X)/(t+1):
//   family 1 (kappa in (0,1)):  alpha_t = sqrt(psi_t/t), beta_t = 1/t^kappa,
//                               gamma_t = 1/t^(1-kappa)
//   family 2 (alpha0 > 0, theta1, theta2 in (0,1)):
//                               alpha_t = alpha0/t^theta1, beta_t = 1/t^theta2,
//                               gamma_t = 1/t^(1-theta2)
// The psi prefix sums are memoized (grow-only); a Schedule instance is meant to
// be driven from a single thread.
class Schedule {
 public:
  static Schedule family1(double kappa, TriggerSchedule trigger, double inner_radius);
  static Schedule family2(double alpha0, double theta1, double theta2,
                          TriggerSchedule trigger, double inner_radius);

  StepParams params_at(int t) const;  // t >= 1
  const TriggerSchedule& trigger() const { return trigger_; }

 private:
  enum class Family { one, two };
  Schedule(Family f, TriggerSchedule trigger, double inner_radius);

  double psi(int t) const;

  Family family_;
  TriggerSchedule trigger_;
  double inner_radius_;
  double kappa_ = 0.0;
  double alpha0_ = 0.0, theta1_ = 0.0, theta2_ = 0.0;
  mutable std::vector<double> psi_;  // psi_[k] = sum of tau over 1..k+1
};

}  // namespace dopd
