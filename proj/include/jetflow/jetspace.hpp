#pragma once

#include <Eigen/Dense>
#include <vector>

namespace jetflow {

// Matrix layout for theta/u/p grids: row i = derivative slot 0..k,
// column j = component 0..n-1. JSON encodings transpose to rows-per-component.

/// Point of the jet space in exponential coordinates (x, theta_i^j).
struct JetPoint {
  double x = 0.0;
  Eigen::MatrixXd theta;  // (k+1) x n
};

/// Point in derivative coordinates (x, u_i^j); u_i is the i-th derivative.
struct JetPointU {
  double x = 0.0;
  Eigen::MatrixXd u;  // (k+1) x n
};

/// Cotangent-bundle state in the traditional chart.
struct CotangentState {
  JetPoint point;
  double p_x = 0.0;
  Eigen::MatrixXd p_theta;  // congruent to point.theta
};

/// theta_i^j = sum_{m=0}^{i} (-1)^m x^{i-m}/(i-m)! u_{k-m}^j.
JetPoint theta_from_u(const JetPointU& q);

/// Exact inverse of theta_from_u (triangular back-substitution in m).
JetPointU u_from_theta(const JetPoint& q);

struct TangentVector {
  double dx = 0.0;
  Eigen::MatrixXd dtheta;  // (k+1) x n
};

/// The global frame at q: index 0 is X_0 = d/dx, index j (1..n) is
/// X_0^j = sum_i (x^i/i!) d/dtheta_i^j.
std::vector<TangentVector> frame(const JetPoint& q);

struct MomentumFunctions {
  double P0 = 0.0;        // momentum of X_0
  Eigen::MatrixXd P;      // P(i,j): momentum of the bracket-generated X_i^j
};

/// P0 = p_x; P(i,j) = sum_{m=i}^{k} x^{m-i}/(m-i)! p_{theta_m^j}. Row 0 is
/// the momentum of the frame field X_0^j; higher rows reduce to p_{theta_i^j}
/// at x = 0 and satisfy d/dt P(i,j) = P0 * P(i+1,j) along the flow.
MomentumFunctions momentum_functions(const CotangentState& s);

struct TimedJetPointU {
  double t = 0.0;
  JetPointU q;
};

/// Max deviation from the contact relations du_i = u_{i+1} dx (i < k) over
/// the sampled curve, with second-order difference quotients. Needs at
/// least 3 samples with strictly increasing timestamps.
double horizontality_residual(const std::vector<TimedJetPointU>& samples);

/// Length of the horizontal vector v_x * X_0 + sum_j v_theta0[j] * X_0^j.
double sr_speed(const JetPoint& q, double v_x, const Eigen::VectorXd& v_theta0);

}  // namespace jetflow
