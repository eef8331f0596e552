#include "jetflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jetflow/errors.hpp"

namespace jetflow {

namespace {

// Dormand-Prince 5(4) pair, FSAL.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA2[1] = {1.0 / 5};
constexpr double kA3[2] = {3.0 / 40, 9.0 / 40};
constexpr double kA4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double kA5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
constexpr double kA6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                           -5103.0 / 18656};
constexpr double kB[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84,
                          0.0};
constexpr double kBStar[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                              -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct Dopri5Workspace {
  Eigen::VectorXd k[7];
  Eigen::VectorXd ytmp, ynew, yerr;
  void resize(Eigen::Index dim) {
    for (auto& v : k) v.resize(dim);
    ytmp.resize(dim);
    ynew.resize(dim);
    yerr.resize(dim);
  }
};

// One explicit step of size h from (t, y); fills ws.ynew and ws.yerr.
// ws.k[0] must hold rhs(t, y) on entry (FSAL); on exit ws.k[6] holds
// rhs(t + h, ynew).
template <typename RHS>
void dopri5_step(RHS&& rhs, double t, const Eigen::VectorXd& y, double h, Dopri5Workspace& ws) {
  ws.ytmp = y + h * kA2[0] * ws.k[0];
  rhs(t + kC[1] * h, ws.ytmp, ws.k[1]);
  ws.ytmp = y + h * (kA3[0] * ws.k[0] + kA3[1] * ws.k[1]);
  rhs(t + kC[2] * h, ws.ytmp, ws.k[2]);
  ws.ytmp = y + h * (kA4[0] * ws.k[0] + kA4[1] * ws.k[1] + kA4[2] * ws.k[2]);
  rhs(t + kC[3] * h, ws.ytmp, ws.k[3]);
  ws.ytmp = y + h * (kA5[0] * ws.k[0] + kA5[1] * ws.k[1] + kA5[2] * ws.k[2] + kA5[3] * ws.k[3]);
  rhs(t + kC[4] * h, ws.ytmp, ws.k[4]);
  ws.ytmp = y + h * (kA6[0] * ws.k[0] + kA6[1] * ws.k[1] + kA6[2] * ws.k[2] + kA6[3] * ws.k[3] +
                     kA6[4] * ws.k[4]);
  rhs(t + kC[5] * h, ws.ytmp, ws.k[5]);
  ws.ynew = y + h * (kB[0] * ws.k[0] + kB[2] * ws.k[2] + kB[3] * ws.k[3] + kB[4] * ws.k[4] +
                     kB[5] * ws.k[5]);
  rhs(t + h, ws.ynew, ws.k[6]);
  ws.yerr = h * ((kB[0] - kBStar[0]) * ws.k[0] + (kB[2] - kBStar[2]) * ws.k[2] +
                 (kB[3] - kBStar[3]) * ws.k[3] + (kB[4] - kBStar[4]) * ws.k[4] +
                 (kB[5] - kBStar[5]) * ws.k[5] - kBStar[6] * ws.k[6]);
}

template <typename RHS>
double error_norm(const Dopri5Workspace& ws, const Eigen::VectorXd& y, double tol, RHS&&) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ws.ynew[i]));
    const double e = ws.yerr[i] / sc;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(y.size()));
}

// Adaptive driver. emit(t, y) is called for the initial state and every
// accepted step; returning false stops the integration early. Accepted
// steps land exactly on each forced time.
template <typename RHS, typename Emit>
void dopri5_adaptive(RHS&& rhs, double t0, Eigen::VectorXd y, double T,
                     const IntegrateOptions& opts, Emit&& emit) {
  if (!(T > 0.0)) throw std::invalid_argument("integrate: T must be positive");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("integrate: tol must be positive");

  Dopri5Workspace ws;
  ws.resize(y.size());
  const double t_end = t0 + T;
  double t = t0;
  if (!emit(t, y)) return;
  rhs(t, y, ws.k[0]);

  std::vector<double> forced;
  forced.reserve(opts.forced_times.size());
  for (double ft : opts.forced_times) {
    if (ft > t0 + 1e-14 * std::max(1.0, std::abs(t0)) && ft <= t_end) forced.push_back(ft);
  }
  std::sort(forced.begin(), forced.end());
  size_t forced_idx = 0;

  double h_ctrl = std::min({1e-3, opts.max_step, T});
  long steps = 0;
  while (t < t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
    if (++steps > opts.max_steps)
      throw MaxStepsExceededError("integrate: exceeded max step count");

    while (forced_idx < forced.size() && forced[forced_idx] <= t + 1e-14 * std::max(1.0, std::abs(t)))
      ++forced_idx;
    double stop_at = t_end;
    if (forced_idx < forced.size()) stop_at = std::min(stop_at, forced[forced_idx]);

    double h = std::min(h_ctrl, opts.max_step);
    bool landing = false;
    // stretch by up to 1% to land instead of leaving a micro-remainder step
    if (t + 1.01 * h >= stop_at) {
      h = stop_at - t;
      landing = true;
    }
    h = std::max(h, 1e-300);

    dopri5_step(rhs, t, y, h, ws);
    const double err = error_norm(ws, y, opts.tol, rhs);
    double factor = 0.9 * std::pow(std::max(err, 1e-300), -0.2);
    factor = std::clamp(factor, 0.2, 5.0);

    const bool floored = h <= opts.min_step;
    if ((std::isfinite(err) && err <= 1.0) || floored) {
      t = landing ? stop_at : t + h;
      y = ws.ynew;
      ws.k[0] = ws.k[6];  // FSAL
      if (landing) {
        if (forced_idx < forced.size() && stop_at == forced[forced_idx]) ++forced_idx;
        h_ctrl = std::max(h_ctrl, h * factor);  // do not let tiny landings shrink the cruise step
      } else {
        h_ctrl = h * factor;
      }
      h_ctrl = std::max(h_ctrl, opts.min_step);
      if (!emit(t, y)) return;
    } else {
      h_ctrl = std::max(h * std::min(factor, 0.9), opts.min_step);
      if (!std::isfinite(err) && h <= opts.min_step)
        throw MaxStepsExceededError("integrate: non-finite error at the step floor");
    }
  }
}

// Reduced flow right-hand side; the force is the single precomputed
// polynomial -(dF/dx, F) = -(||F||^2)'/2, so stages do not allocate.
struct ReducedRhs {
  Poly force;  // -(dF/dx, F)
  void operator()(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    dy[0] = y[1];
    dy[1] = force(y[0]);
  }
};

ReducedRhs make_reduced_rhs(const PolyVec& F) {
  return {(-0.5) * F.sq_norm_poly().derivative()};
}

// Augmented (x, p_x, theta) right-hand side for the horizontal lift.
struct LiftRhs {
  Poly force;
  std::vector<Poly> components;  // F^j
  int k, n;
  mutable std::vector<double> fx, pw;
  void operator()(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    const double x = y[0];
    dy[0] = y[1];
    dy[1] = force(x);
    for (int j = 0; j < n; ++j) fx[static_cast<size_t>(j)] = components[static_cast<size_t>(j)](x);
    pw[0] = 1.0;
    for (int i = 1; i <= k; ++i) pw[static_cast<size_t>(i)] = pw[static_cast<size_t>(i - 1)] * x / i;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j < n; ++j) dy[2 + i * n + j] = pw[static_cast<size_t>(i)] * fx[static_cast<size_t>(j)];
  }
};

// Canonical flow in the traditional chart. Layout:
// y = [x, p_x, theta (i-major), p_theta (i-major)].
struct FullRhs {
  int k, n;
  mutable std::vector<double> pw, P0, P1;
  void operator()(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    const double x = y[0];
    const int block = (k + 1) * n;
    pw[0] = 1.0;
    for (int i = 1; i <= k; ++i) pw[static_cast<size_t>(i)] = pw[static_cast<size_t>(i - 1)] * x / i;
    for (int j = 0; j < n; ++j) {
      double p0 = 0.0, p1 = 0.0;
      for (int i = 0; i <= k; ++i) {
        const double pt = y[2 + block + i * n + j];
        p0 += pw[static_cast<size_t>(i)] * pt;
        if (i >= 1) p1 += pw[static_cast<size_t>(i - 1)] * pt;
      }
      P0[static_cast<size_t>(j)] = p0;
      P1[static_cast<size_t>(j)] = p1;
    }
    dy[0] = y[1];
    double fsum = 0.0;
    for (int j = 0; j < n; ++j) fsum += P0[static_cast<size_t>(j)] * P1[static_cast<size_t>(j)];
    dy[1] = -fsum;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j < n; ++j) dy[2 + i * n + j] = pw[static_cast<size_t>(i)] * P0[static_cast<size_t>(j)];
    for (int idx = 0; idx < block; ++idx) dy[2 + block + idx] = 0.0;
  }
  double energy(const Eigen::VectorXd& y) const {
    const double x = y[0];
    const int block = (k + 1) * n;
    pw[0] = 1.0;
    for (int i = 1; i <= k; ++i) pw[static_cast<size_t>(i)] = pw[static_cast<size_t>(i - 1)] * x / i;
    double acc = y[1] * y[1];
    for (int j = 0; j < n; ++j) {
      double p0 = 0.0;
      for (int i = 0; i <= k; ++i) p0 += pw[static_cast<size_t>(i)] * y[2 + block + i * n + j];
      acc += p0 * p0;
    }
    return 0.5 * acc;
  }
};

HillInterval interval_containing(const PolyVec& F, double x) {
  if (F.is_constant()) return HillInterval::unbounded();
  const auto intervals = hill_intervals(F);
  const double tol = 1e-9 * std::max(1.0, std::abs(x));
  for (const auto& I : intervals) {
    if (I.contains(x, tol)) return I;
  }
  throw InvalidHillIntervalError("lift: initial x lies in no Hill interval");
}

double cubic_hermite(double f0, double d0, double f1, double d1, double h, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * f1 +
         (s3 - s2) * h * d1;
}

}  // namespace

double reduced_energy(const PolyVec& F, double x, double p_x) {
  return 0.5 * p_x * p_x + 0.5 * F.sq_norm_poly()(x);
}

double initial_momentum(const PolyVec& F, double x0, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("initial_momentum: sign must be +1 or -1");
  const double s = F.sq_norm_poly()(x0);
  const double v = 1.0 - s - kEnergyMargin;
  return v > 0.0 ? sign * std::sqrt(v) : 0.0;
}

std::vector<ReducedState> integrate_reduced(const PolyVec& F, double x0, double px0, double T,
                                            const IntegrateOptions& opts) {
  const double h0 = reduced_energy(F, x0, px0);
  if (std::abs(h0 - 0.5) > 1e-9)
    throw BadEnergyLevelError("integrate_reduced: initial condition off the H = 1/2 level");

  std::vector<ReducedState> out;
  Eigen::VectorXd y(2);
  y << x0, px0;
  dopri5_adaptive(make_reduced_rhs(F), 0.0, std::move(y), T, opts,
                  [&](double t, const Eigen::VectorXd& s) {
                    out.push_back({t, s[0], s[1]});
                    return true;
                  });
  return out;
}

Trajectory lift(const PolyVec& F, const std::vector<ReducedState>& reduced,
                const Eigen::MatrixXd& theta0) {
  if (reduced.empty()) throw std::invalid_argument("lift: empty reduced trajectory");
  const int k = F.degree_bound();
  const int n = F.components();
  if (theta0.rows() != k + 1 || theta0.cols() != n)
    throw std::invalid_argument("lift: theta0 must be (k+1) x n");

  LiftRhs rhs;
  rhs.force = make_reduced_rhs(F).force;
  for (int j = 0; j < n; ++j) rhs.components.push_back(F.component(j));
  rhs.k = k;
  rhs.n = n;
  rhs.fx.assign(static_cast<size_t>(n), 0.0);
  rhs.pw.assign(static_cast<size_t>(k) + 1, 0.0);

  Trajectory traj{F, interval_containing(F, reduced.front().x), theta0, {}, 0.0, 0.0};
  traj.samples.reserve(reduced.size());

  const Eigen::Index dim = 2 + static_cast<Eigen::Index>((k + 1) * n);
  Dopri5Workspace ws;
  ws.resize(dim);
  Eigen::VectorXd y(dim);
  y[0] = reduced.front().x;
  y[1] = reduced.front().p_x;
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < n; ++j) y[2 + i * n + j] = theta0(i, j);

  auto push_sample = [&](double t, const Eigen::VectorXd& s) {
    TrajectorySample smp;
    smp.t = t;
    smp.x = s[0];
    smp.p_x = s[1];
    smp.theta.resize(k + 1, n);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j < n; ++j) smp.theta(i, j) = s[2 + i * n + j];
    traj.samples.push_back(std::move(smp));
  };

  push_sample(reduced.front().t, y);
  rhs(reduced.front().t, y, ws.k[0]);
  for (size_t s = 1; s < reduced.size(); ++s) {
    const double h = reduced[s].t - reduced[s - 1].t;
    // re-take the accepted reduced step once on the augmented state
    dopri5_step(rhs, reduced[s - 1].t, y, h, ws);
    y = ws.ynew;
    ws.k[0] = ws.k[6];
    push_sample(reduced[s].t, y);
  }

  const Poly sq = F.sq_norm_poly();
  const double h_init = 0.5 * (reduced.front().p_x * reduced.front().p_x + sq(reduced.front().x));
  for (const auto& smp : traj.samples) {
    const double h_t = 0.5 * (smp.p_x * smp.p_x + sq(smp.x));
    traj.max_energy_drift = std::max(traj.max_energy_drift, std::abs(h_t - h_init));
  }
  if (traj.samples.size() >= 3) traj.max_arclength_defect = arclength_defect(traj);
  return traj;
}

Trajectory lift(const PolyVec& F, const std::vector<ReducedState>& reduced) {
  return lift(F, reduced, Eigen::MatrixXd::Zero(F.degree_bound() + 1, F.components()));
}

FullFlowResult integrate_full(const CotangentState& s0, double T, const IntegrateOptions& opts) {
  const int k = static_cast<int>(s0.p_theta.rows()) - 1;
  const int n = static_cast<int>(s0.p_theta.cols());
  if (s0.point.theta.rows() != k + 1 || s0.point.theta.cols() != n)
    throw std::invalid_argument("integrate_full: theta and p_theta must be congruent");

  FullRhs rhs;
  rhs.k = k;
  rhs.n = n;
  rhs.pw.assign(static_cast<size_t>(k) + 1, 0.0);
  rhs.P0.assign(static_cast<size_t>(n), 0.0);
  rhs.P1.assign(static_cast<size_t>(n), 0.0);

  const int block = (k + 1) * n;
  Eigen::VectorXd y(2 + 2 * block);
  y[0] = s0.point.x;
  y[1] = s0.p_x;
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < n; ++j) {
      y[2 + i * n + j] = s0.point.theta(i, j);
      y[2 + block + i * n + j] = s0.p_theta(i, j);
    }

  FullFlowResult out;
  out.p_theta_drift = Eigen::MatrixXd::Zero(k + 1, n);
  const double h_init = rhs.energy(y);

  dopri5_adaptive(rhs, 0.0, y, T, opts, [&](double t, const Eigen::VectorXd& s) {
    FullFlowSample smp;
    smp.t = t;
    smp.state.point.x = s[0];
    smp.state.p_x = s[1];
    smp.state.point.theta.resize(k + 1, n);
    smp.state.p_theta.resize(k + 1, n);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j < n; ++j) {
        smp.state.point.theta(i, j) = s[2 + i * n + j];
        smp.state.p_theta(i, j) = s[2 + block + i * n + j];
        out.p_theta_drift(i, j) = std::max(out.p_theta_drift(i, j),
                                           std::abs(s[2 + block + i * n + j] - s0.p_theta(i, j)));
      }
    out.max_h_drift = std::max(out.max_h_drift, std::abs(rhs.energy(s) - h_init));
    out.samples.push_back(std::move(smp));
    return true;
  });
  return out;
}

double arclength_defect(const Trajectory& traj) {
  const auto& smp = traj.samples;
  if (smp.size() < 3) throw TooFewSamplesError("arclength_defect: need at least 3 samples");
  const int n = static_cast<int>(smp[0].theta.cols());
  double defect = 0.0;
  for (size_t s = 1; s + 1 < smp.size(); ++s) {
    const double h0 = smp[s].t - smp[s - 1].t;
    const double h1 = smp[s + 1].t - smp[s].t;
    const double denom = h0 * h1 * (h0 + h1);
    auto d3 = [&](double f0, double f1, double f2) {
      return (h0 * h0 * f2 - h1 * h1 * f0 - (h0 * h0 - h1 * h1) * f1) / denom;
    };
    double speed_sq = 0.0;
    const double xdot = d3(smp[s - 1].x, smp[s].x, smp[s + 1].x);
    speed_sq += xdot * xdot;
    for (int j = 0; j < n; ++j) {
      const double td = d3(smp[s - 1].theta(0, j), smp[s].theta(0, j), smp[s + 1].theta(0, j));
      speed_sq += td * td;
    }
    defect = std::max(defect, std::abs(speed_sq - 1.0));
  }
  return defect;
}

TrajectorySample sample_at(const Trajectory& traj, double t) {
  const auto& smp = traj.samples;
  if (smp.empty()) throw SpanTooShortError("sample_at: empty trajectory");
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  if (t < smp.front().t - slack || t > smp.back().t + slack)
    throw SpanTooShortError("sample_at: time outside the trajectory span");
  if (smp.size() == 1) return smp.front();

  auto it = std::upper_bound(smp.begin(), smp.end(), t,
                             [](double v, const TrajectorySample& s) { return v < s.t; });
  size_t hi = static_cast<size_t>(std::distance(smp.begin(), it));
  hi = std::clamp<size_t>(hi, 1, smp.size() - 1);
  const auto& a = smp[hi - 1];
  const auto& b = smp[hi];

  const int k = traj.F.degree_bound();
  const int n = traj.F.components();
  const Poly force = (-0.5) * traj.F.sq_norm_poly().derivative();
  const double h = b.t - a.t;
  const double s = std::clamp((t - a.t) / h, 0.0, 1.0);

  TrajectorySample out;
  out.t = t;
  out.x = cubic_hermite(a.x, a.p_x, b.x, b.p_x, h, s);
  out.p_x = cubic_hermite(a.p_x, force(a.x), b.p_x, force(b.x), h, s);
  out.theta.resize(k + 1, n);
  auto scaled_pow = [&](double x, int i) {
    double v = 1.0;
    for (int d = 1; d <= i; ++d) v *= x / d;
    return v;
  };
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < n; ++j) {
      const Poly Fj = traj.F.component(j);
      const double da = scaled_pow(a.x, i) * Fj(a.x);
      const double db = scaled_pow(b.x, i) * Fj(b.x);
      out.theta(i, j) = cubic_hermite(a.theta(i, j), da, b.theta(i, j), db, h, s);
    }
  return out;
}

double reduced_crossing_time(const PolyVec& F, const HillInterval& I, double tol) {
  if (!I.is_bounded()) throw UnboundedIntervalError("crossing time: unbounded interval");
  if (!I.both_regular())
    throw CriticalEndpointError("crossing time: critical endpoint, the crossing never completes");

  const ReducedRhs rhs = make_reduced_rhs(F);
  IntegrateOptions opts;
  opts.tol = tol;
  opts.max_step = 1e-2;  // keeps the Hermite event solve well under 1e-6

  double prev_t = 0.0, prev_px = 0.0, prev_x = I.x0();
  bool armed = false;
  double crossing = -1.0;
  Eigen::VectorXd y0(2);
  y0 << I.x0(), 0.0;
  dopri5_adaptive(rhs, 0.0, y0, 1e5, opts, [&](double t, const Eigen::VectorXd& s) {
    const double px = s[1];
    if (armed && px <= 0.0) {
      // root of p_x on [prev_t, t] via the cubic Hermite interpolant
      const double h = t - prev_t;
      const double d0 = rhs.force(prev_x);
      const double d1 = rhs.force(s[0]);
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = cubic_hermite(prev_px, d0, px, d1, h, mid);
        (v > 0.0 ? lo : hi) = mid;
      }
      crossing = prev_t + 0.5 * (lo + hi) * h;
      return false;
    }
    if (!armed && px > 1e-6) armed = true;
    prev_t = t;
    prev_px = px;
    prev_x = s[0];
    return true;
  });
  if (crossing < 0.0) throw MaxStepsExceededError("crossing time: event not detected");
  return crossing;
}

}  // namespace jetflow
