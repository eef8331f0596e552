#pragma once

#include <random>

#include "jetflow/dynamics.hpp"
#include "jetflow/periods.hpp"
#include "jetflow/polyvec.hpp"

namespace jetflow {

enum class GeodesicKind { Line, XPeriodic, Critical, Equilibrium };

struct GeodesicClass {
  GeodesicKind kind = GeodesicKind::Line;
  double L = 0.0;              // XPeriodic only
  bool end0_critical = false;  // Critical only
  bool end1_critical = false;
};

/// Constant F -> Line; bounded interval with both endpoints Regular ->
/// XPeriodic with its period; otherwise Critical with endpoint flags.
GeodesicClass classify(const PolyVec& F, const HillInterval& I, int nodes = 64);

/// classify(), except that a start sitting on a critical endpoint is the
/// stationary x-dynamics and reports Equilibrium.
GeodesicClass classify_with_start(const PolyVec& F, const HillInterval& I, double x_init,
                                  int nodes = 64);

enum class Verdict { NotPeriodic, NumericallyInconclusive };

struct Certificate {
  double gram_lambda_min = 0.0;
  double delta_inf_norm = 0.0;      // max |delta_theta_i^j|
  PolyVec reconstructed;            // coefficients recovered from G c = v
  double reconstruction_error = 0.0;
  Verdict verdict = Verdict::NumericallyInconclusive;
  int quadrature_nodes = 0;         // node count the certificate converged at
};

struct CertifyOptions {
  int nodes = 64;
  int max_nodes = 32768;          // escalation cap for near-critical pairs
  double richardson_tol = 1e-12;  // node-doubling convergence target
  double delta_threshold = 1e-10;
  double reconstruction_tol = 1e-6;
};

/// The non-periodicity certificate for a regular pair: the holonomy data
/// determines F through the polynomial inner product, so it cannot vanish.
/// Solves the moment system in the interval-centered scaled basis and
/// reports how well the solution reproduces F's coefficients.
Certificate certify_not_periodic(const PolyVec& F, const HillInterval& I,
                                 const CertifyOptions& opts = {});

struct PeriodicityResidual {
  double theta_part = 0.0;  // max over theta coordinates of |gamma(t0+L) - gamma(t0)|
  double x_part = 0.0;      // |x(t0+L) - x(t0)|, ~0 for x-periodic geodesics
};

PeriodicityResidual periodicity_residual(const Trajectory& traj, double L);
PeriodicityResidual periodicity_residual(const Trajectory& traj, double L, double t0);

struct RandomPair {
  PolyVec F;
  HillInterval I;
};

/// Random non-constant pair: coefficients uniform in [-1,1], rescaled when
/// needed so a Hill interval exists, constant-like draws rejected; returns
/// the widest interval with both endpoints regular.
RandomPair sample_random_pair(std::mt19937_64& rng, int kmax, int nmax);

}  // namespace jetflow
