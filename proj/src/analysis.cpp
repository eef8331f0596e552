#include "jetflow/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "jetflow/errors.hpp"

namespace jetflow {

namespace {

constexpr double kEquilibriumTol = 1e-9;
constexpr double kSmallCoeffFloor = 1e-9;  // coefficients below this skip the relative error

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const int v = lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
  return std::min(v, hi);
}

}  // namespace

GeodesicClass classify(const PolyVec& F, const HillInterval& I, int nodes) {
  if (F.is_constant()) {
    if (I.is_bounded())
      throw InvalidHillIntervalError("classify: constant F has an unbounded interval");
    return {GeodesicKind::Line, 0.0, false, false};
  }
  if (!I.is_bounded())
    throw InvalidHillIntervalError("classify: non-constant F needs a bounded interval");
  if (I.both_regular())
    return {GeodesicKind::XPeriodic, period_L(F, I, nodes), false, false};
  return {GeodesicKind::Critical, 0.0, I.end0() == EndpointKind::Critical,
          I.end1() == EndpointKind::Critical};
}

GeodesicClass classify_with_start(const PolyVec& F, const HillInterval& I, double x_init,
                                  int nodes) {
  if (I.is_bounded()) {
    const double tol0 = kEquilibriumTol * std::max(1.0, std::abs(I.x0()));
    const double tol1 = kEquilibriumTol * std::max(1.0, std::abs(I.x1()));
    const bool at0 = I.end0() == EndpointKind::Critical && std::abs(x_init - I.x0()) <= tol0;
    const bool at1 = I.end1() == EndpointKind::Critical && std::abs(x_init - I.x1()) <= tol1;
    if (at0 || at1) return {GeodesicKind::Equilibrium, 0.0, at0, at1};
  }
  return classify(F, I, nodes);
}

Certificate certify_not_periodic(const PolyVec& F, const HillInterval& I,
                                 const CertifyOptions& opts) {
  if (F.is_constant())
    throw InvalidHillIntervalError("certify: constant F corresponds to line geodesics");
  if (!I.is_bounded()) throw UnboundedIntervalError("certify: unbounded interval");
  if (!I.both_regular())
    throw CriticalEndpointError("certify: critical pair, the period integral diverges");

  const int k = F.degree_bound();
  const int n = F.components();
  const WeightedQuadrature quad(F, I);
  const double mid = quad.midpoint();
  const double halfw = quad.half_width();

  // The scaled variable y = (x - mid)/halfw hosts the moment solve (the
  // monomial Hankel system premultiplied by an exact congruence); the raw
  // x^i F^j integrals feed the holonomy side. The node count escalates
  // until both the quadrature and the recovered coefficients settle.
  const Poly ypoly({-mid / halfw, 1.0 / halfw});
  const Poly one = Poly::constant(1.0);
  std::vector<Poly> comps;
  for (int j = 0; j < n; ++j) comps.push_back(F.component(j));

  Certificate cert;
  bool converged = false;
  for (int nodes = std::max(opts.nodes, 8);; nodes *= 2) {
    double worst = 0.0;
    auto refine = [&](auto&& eval) {
      const double coarse = eval(nodes);
      const double fine = eval(2 * nodes);
      worst = std::max(worst, std::abs(coarse - fine) / std::max(1.0, std::abs(fine)));
      return fine;
    };

    std::vector<double> nu(static_cast<size_t>(2 * k) + 1, 0.0);  // <y^s, 1>
    for (int s = 0; s <= 2 * k; ++s)
      nu[static_cast<size_t>(s)] = refine([&](int p) { return quad.integrate_scaled(one, s, p); });
    Eigen::MatrixXd d_scaled(k + 1, n);  // <y^i, F^j>
    Eigen::MatrixXd d_raw(k + 1, n);     // <x^i, F^j>
    for (int i = 0; i <= k; ++i) {
      for (int j = 0; j < n; ++j) {
        const Poly& Fj = comps[static_cast<size_t>(j)];
        d_scaled(i, j) = refine([&](int p) { return quad.integrate_scaled(Fj, i, p); });
        d_raw(i, j) = refine([&](int p) { return quad.integrate(Poly::monomial(i) * Fj, p); });
      }
    }

    cert.quadrature_nodes = nodes;
    cert.delta_inf_norm = 0.0;
    double factorial = 1.0;
    for (int i = 0; i <= k; ++i) {
      if (i > 0) factorial *= i;
      for (int j = 0; j < n; ++j)
        cert.delta_inf_norm = std::max(cert.delta_inf_norm, (2.0 / factorial) * std::abs(d_raw(i, j)));
    }

    Eigen::MatrixXd Gy(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
      for (int m = 0; m <= k; ++m) Gy(i, m) = nu[static_cast<size_t>(i + m)];
    Eigen::LDLT<Eigen::MatrixXd> solver(Gy);
    if (solver.info() != Eigen::Success)
      throw NotPositiveDefiniteError("certify: scaled Gram factorization failed");

    std::vector<Poly> rec_comps;
    cert.reconstruction_error = 0.0;
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd cy = solver.solve(d_scaled.col(j));
      Poly rec = Poly::constant(cy[k]);
      for (int s = k - 1; s >= 0; --s) rec = rec * ypoly + Poly::constant(cy[s]);
      rec_comps.push_back(rec);
      for (int i = 0; i <= k; ++i) {
        const double a = F.coeff(j, i);
        if (std::abs(a) > kSmallCoeffFloor) {
          cert.reconstruction_error =
              std::max(cert.reconstruction_error, std::abs(rec.coeff(i) - a) / std::abs(a));
        }
      }
    }
    cert.reconstructed = PolyVec::from_components(rec_comps, k);

    if (worst <= opts.richardson_tol &&
        cert.reconstruction_error <= 0.5 * opts.reconstruction_tol) {
      converged = true;
      break;
    }
    if (2 * nodes > opts.max_nodes) break;
  }

  cert.gram_lambda_min = gram(F, I, cert.quadrature_nodes).lambda_min;

  const bool ok = converged && cert.gram_lambda_min > 0.0 &&
                  cert.delta_inf_norm > opts.delta_threshold &&
                  cert.reconstruction_error <= opts.reconstruction_tol;
  cert.verdict = ok ? Verdict::NotPeriodic : Verdict::NumericallyInconclusive;
  return cert;
}

PeriodicityResidual periodicity_residual(const Trajectory& traj, double L) {
  if (traj.samples.empty()) throw SpanTooShortError("periodicity_residual: empty trajectory");
  return periodicity_residual(traj, L, traj.samples.front().t);
}

PeriodicityResidual periodicity_residual(const Trajectory& traj, double L, double t0) {
  if (traj.samples.empty()) throw SpanTooShortError("periodicity_residual: empty trajectory");
  const double t_last = traj.samples.back().t;
  const double slack = 1e-9 * std::max(1.0, std::abs(t_last));
  if (t0 < traj.samples.front().t - slack || t0 + L > t_last + slack)
    throw SpanTooShortError("periodicity_residual: trajectory does not span t0 + L");
  const TrajectorySample a = sample_at(traj, t0);
  const TrajectorySample b = sample_at(traj, t0 + L);
  PeriodicityResidual out;
  out.theta_part = (b.theta - a.theta).cwiseAbs().maxCoeff();
  out.x_part = std::abs(b.x - a.x);
  return out;
}

RandomPair sample_random_pair(std::mt19937_64& rng, int kmax, int nmax) {
  if (kmax < 1 || nmax < 1)
    throw std::invalid_argument("sample_random_pair: kmax and nmax must be positive");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const int k = uniform_int(rng, 1, kmax);
    const int n = uniform_int(rng, 1, nmax);
    std::vector<std::vector<double>> rows(static_cast<size_t>(n));
    for (auto& row : rows) {
      row.resize(static_cast<size_t>(k) + 1);
      for (double& v : row) v = uniform(rng, -1.0, 1.0);
    }
    PolyVec F(rows);
    if (F.degree() == 0) continue;  // constant-like draw

    // rescale so that min ||F||^2 over a coarse grid sits below 1
    const Poly sq = F.sq_norm_poly();
    double min_sq = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= 200; ++g) min_sq = std::min(min_sq, sq(-4.0 + 0.04 * g));
    if (min_sq >= 0.98) {
      const double scale = 0.9 / std::sqrt(min_sq);
      for (auto& row : rows)
        for (double& v : row) v *= scale;
      F = PolyVec(rows);
    }

    std::vector<HillInterval> intervals;
    try {
      intervals = hill_intervals(F);
    } catch (const Error&) {
      continue;
    }
    const HillInterval* best = nullptr;
    for (const auto& I : intervals) {
      if (!I.both_regular()) continue;
      if (best == nullptr || I.width() > best->width()) best = &I;
    }
    if (best == nullptr) continue;
    return {F, *best};
  }
  throw std::runtime_error("sample_random_pair: rejection sampling exhausted");
}

}  // namespace jetflow
