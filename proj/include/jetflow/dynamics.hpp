#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "jetflow/jetspace.hpp"
#include "jetflow/periods.hpp"
#include "jetflow/polyvec.hpp"

namespace jetflow {

/// State of the one-degree-of-freedom reduced flow, at arclength time t.
struct ReducedState {
  double t = 0.0;
  double x = 0.0;
  double p_x = 0.0;
};

struct IntegrateOptions {
  double tol = 1e-10;  // local error tolerance (absolute and relative)
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-12;   // floor guard: steps are never shrunk below this
  long max_steps = 5000000;  // MaxStepsExceededError past this
  std::vector<double> forced_times;  // strictly increasing; accepted steps land on these exactly
};

// Energy deficit applied when deriving |p_x| from the H = 1/2 level: keeps
// long runs on the confined side of separatrices. Well inside the 1e-9
// level-set gate of integrate_reduced.
inline constexpr double kEnergyMargin = 5e-10;

/// H_F(x, p_x) = p_x^2/2 + ||F(x)||^2/2.
double reduced_energy(const PolyVec& F, double x, double p_x);

/// Momentum derived from the arclength level H_F = 1/2 (minus kEnergyMargin),
/// with the requested sign. Zero at Hill-interval endpoints.
double initial_momentum(const PolyVec& F, double x0, int sign);

/// Adaptive 5(4) integration of xdot = p_x, p_xdot = -(dF/dx, F). The
/// initial condition must sit on the H_F = 1/2 level within 1e-9
/// (BadEnergyLevelError otherwise). Samples are the accepted steps plus
/// every forced time.
std::vector<ReducedState> integrate_reduced(const PolyVec& F, double x0, double px0, double T,
                                            const IntegrateOptions& opts = {});

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double p_x = 0.0;
  Eigen::MatrixXd theta;  // (k+1) x n
};

/// A lifted geodesic: the reduced x-dynamics plus the theta-coordinates
/// integrated through thetadot_i^j = (x^i/i!) F^j(x).
struct Trajectory {
  PolyVec F;
  HillInterval interval;
  Eigen::MatrixXd theta_init;
  std::vector<TrajectorySample> samples;
  double max_energy_drift = 0.0;      // sup |H_F(t) - H_F(0)|
  double max_arclength_defect = 0.0;  // see arclength_defect
};

/// Horizontal lift of a reduced run. Each reduced step is re-taken once on
/// the augmented state, so the theta-quadrature has the same order as the
/// integrator and stays synchronized with the reduced samples.
Trajectory lift(const PolyVec& F, const std::vector<ReducedState>& reduced,
                const Eigen::MatrixXd& theta0);
Trajectory lift(const PolyVec& F, const std::vector<ReducedState>& reduced);  // theta0 = 0

struct FullFlowSample {
  double t = 0.0;
  CotangentState state;
};

struct FullFlowResult {
  std::vector<FullFlowSample> samples;
  double max_h_drift = 0.0;        // sup |H(t) - H(0)|
  Eigen::MatrixXd p_theta_drift;   // sup |p_theta(t) - p_theta(0)| per (i,j)
};

/// Canonical flow of H = (P0^2 + sum_j P_{X_0^j}^2)/2 in the traditional
/// chart: xdot = P0, thetadot_i^j = (x^i/i!) P_{X_0^j},
/// p_xdot = -sum_j P_{X_0^j} P_{X_1^j}, p_thetadot = 0.
FullFlowResult integrate_full(const CotangentState& s0, double T,
                              const IntegrateOptions& opts = {});

/// Max over interior samples of |xdot^2 + sum_j (theta_0^j dot)^2 - 1| with
/// second-order difference quotients. Needs >= 3 samples.
double arclength_defect(const Trajectory& traj);

/// Cubic-Hermite interpolation of a trajectory at time t (derivatives are
/// known exactly at the samples). Throws SpanTooShortError outside the span.
TrajectorySample sample_at(const Trajectory& traj, double t);

/// Time for the x-dynamics to cross I once (x0 to x1), event-detected from
/// the reduced flow started at rest on the left endpoint. Equals half the
/// x-period for regular pairs.
double reduced_crossing_time(const PolyVec& F, const HillInterval& I, double tol = 1e-12);

}  // namespace jetflow
