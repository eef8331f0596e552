#pragma once

#include <Eigen/Dense>
#include <vector>

#include "jetflow/polyvec.hpp"

namespace jetflow {

enum class EndpointKind { Regular, Critical };

/// Closed interval where ||F(x)||^2 <= 1 with equality exactly at the
/// boundary. Unbounded only for constant F with ||F|| <= 1. Endpoints are
/// Critical when they are multiple roots of 1 - ||F||^2, i.e. equilibria
/// of the x-dynamics.
class HillInterval {
 public:
  HillInterval() = default;  // unbounded
  static HillInterval bounded(double x0, double x1, EndpointKind end0, EndpointKind end1);
  static HillInterval unbounded();

  bool is_bounded() const noexcept { return bounded_; }
  double x0() const;
  double x1() const;
  EndpointKind end0() const;
  EndpointKind end1() const;
  bool both_regular() const;
  bool contains(double x, double tol = 0.0) const;
  double width() const { return x1() - x0(); }
  double midpoint() const { return 0.5 * (x0() + x1()); }

 private:
  bool bounded_ = false;
  double x0_ = 0.0, x1_ = 0.0;
  EndpointKind end_[2] = {EndpointKind::Regular, EndpointKind::Regular};
};

/// All Hill intervals of F, in increasing order. Constant F with
/// ||F|| <= 1 yields the single unbounded interval. Throws
/// ConstantAboveOneError / NoHillIntervalError when none exists.
std::vector<HillInterval> hill_intervals(const PolyVec& F);

/// The deflated factor q with 1 - ||F(x)||^2 = (x - x0)(x1 - x) q(x),
/// q > 0 on I. Requires both endpoints Regular (CriticalEndpointError).
Poly deflate(const PolyVec& F, const HillInterval& I);

/// Quadrature context for integrals of polynomials against the weight
/// 1/sqrt(1 - ||F||^2) over a regular bounded interval. Deflates once; the
/// substitution x = m + r cos(phi) makes every integrand a smooth even
/// periodic function of phi, so the trapezoid rule converges geometrically.
class WeightedQuadrature {
 public:
  WeightedQuadrature(const PolyVec& F, const HillInterval& I);  // throws like deflate
  /// One trapezoid pass with `panels` subintervals of [0, pi].
  double integrate(const Poly& P, int panels) const;
  /// Same, for ((x - m)/r)^y_power * P(x). The scaled variable is cos(phi)
  /// exactly at the nodes, so high powers evaluate without cancellation.
  double integrate_scaled(const Poly& P, int y_power, int panels) const;
  double midpoint() const noexcept { return mid_; }
  double half_width() const noexcept { return halfw_; }
  const Poly& deflated() const noexcept { return q_; }

 private:
  Poly q_;
  double mid_, halfw_;
};

/// Integral of P against the weight 1/sqrt(1 - ||F||^2) over I. Trapezoid
/// at `nodes` and 2*nodes panels; returns the finer value, |difference|
/// goes to *richardson if non-null.
double weighted_moment(const Poly& P, const PolyVec& F, const HillInterval& I,
                       int nodes = 64, double* richardson = nullptr);

/// x-period L = 2 * integral of dx / sqrt(1 - ||F||^2) over I.
double period_L(const PolyVec& F, const HillInterval& I, int nodes = 64);

/// <P1, P2>_F = integral of P1 P2 / sqrt(1 - ||F||^2) over I.
double inner_product(const Poly& P1, const Poly& P2, const PolyVec& F,
                     const HillInterval& I, int nodes = 64);

struct PeriodData {
  double L = 0.0;
  Eigen::MatrixXd delta_theta;  // (k+1) x n holonomy increments per x-period
};

/// delta_theta(i,j) = (2/i!) <x^i, F^j>_F, plus the period L.
PeriodData delta_theta(const PolyVec& F, const HillInterval& I, int nodes = 64);

struct GramMatrix {
  Eigen::MatrixXd G;        // (k+1)x(k+1), G(i,m) = <x^i, x^m>_F
  double lambda_min = 0.0;  // smallest-eigenvalue estimate (positive)
};

/// Gram matrix of the monomial basis. Positive-definiteness is certified in
/// the interval-centered scaled basis (a congruence of G), which stays well
/// conditioned when the raw monomial Hankel matrix does not.
GramMatrix gram(const PolyVec& F, const HillInterval& I, int nodes = 64);

/// Diagnostics-only alternative route: tanh-sinh quadrature of the period
/// integral. Not the acceptance path.
double period_L_tanh_sinh(const PolyVec& F, const HillInterval& I, double tol = 1e-12);

}  // namespace jetflow
