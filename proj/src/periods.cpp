#include "jetflow/periods.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "jetflow/errors.hpp"

namespace jetflow {

namespace {

constexpr double kEndpointValueTol = 1e-9;   // |1-||F||^2| at computed endpoints
constexpr double kDeflationFloor = 1e-12;    // positivity floor for q on the grid

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return static_cast<int>(v);
}

// Basis-change matrix T with x^i = sum_s T(i,s) ((x-mid)/halfw)^s.
Eigen::MatrixXd monomial_to_scaled(int k, double mid, double halfw) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int i = 0; i <= k; ++i) {
    double mp = 1.0;  // mid^(i-s) built downward
    for (int s = i; s >= 0; --s) {
      T(i, s) = binomial(i, s) * mp * std::pow(halfw, s);
      mp *= mid;
    }
  }
  return T;
}

}  // namespace

HillInterval HillInterval::bounded(double x0, double x1, EndpointKind end0, EndpointKind end1) {
  if (!(x0 < x1)) throw InvalidHillIntervalError("HillInterval: requires x0 < x1");
  if (!std::isfinite(x0) || !std::isfinite(x1))
    throw InvalidHillIntervalError("HillInterval: non-finite endpoint");
  HillInterval I;
  I.bounded_ = true;
  I.x0_ = x0;
  I.x1_ = x1;
  I.end_[0] = end0;
  I.end_[1] = end1;
  return I;
}

HillInterval HillInterval::unbounded() {
  HillInterval I;
  I.bounded_ = false;
  return I;
}

double HillInterval::x0() const {
  if (!bounded_) throw UnboundedIntervalError("HillInterval: unbounded");
  return x0_;
}

double HillInterval::x1() const {
  if (!bounded_) throw UnboundedIntervalError("HillInterval: unbounded");
  return x1_;
}

EndpointKind HillInterval::end0() const {
  if (!bounded_) throw UnboundedIntervalError("HillInterval: unbounded");
  return end_[0];
}

EndpointKind HillInterval::end1() const {
  if (!bounded_) throw UnboundedIntervalError("HillInterval: unbounded");
  return end_[1];
}

bool HillInterval::both_regular() const {
  return bounded_ && end_[0] == EndpointKind::Regular && end_[1] == EndpointKind::Regular;
}

bool HillInterval::contains(double x, double tol) const {
  if (!bounded_) return true;
  return x >= x0_ - tol && x <= x1_ + tol;
}

std::vector<HillInterval> hill_intervals(const PolyVec& F) {
  if (F.is_constant()) {
    double norm_sq = 0.0;
    for (double v : F.eval(0.0)) norm_sq += v * v;
    if (norm_sq > 1.0 + kEndpointValueTol)
      throw ConstantAboveOneError("hill_intervals: constant F with ||F|| > 1");
    return {HillInterval::unbounded()};
  }

  const Poly w = Poly::constant(1.0) - F.sq_norm_poly();
  const auto roots = isolate_roots(w);
  std::vector<HillInterval> out;
  for (size_t r = 0; r + 1 < roots.size(); ++r) {
    const double a = roots[r].location;
    const double b = roots[r + 1].location;
    if (w(0.5 * (a + b)) > 0.0) {
      const auto kind = [](const RealRoot& root) {
        return root.multiplicity == 1 ? EndpointKind::Regular : EndpointKind::Critical;
      };
      out.push_back(HillInterval::bounded(a, b, kind(roots[r]), kind(roots[r + 1])));
    }
  }
  if (out.empty())
    throw NoHillIntervalError("hill_intervals: ||F||^2 >= 1 on every candidate interval");
  return out;
}

Poly deflate(const PolyVec& F, const HillInterval& I) {
  if (!I.is_bounded()) throw UnboundedIntervalError("deflate: unbounded interval");
  if (!I.both_regular())
    throw CriticalEndpointError("deflate: critical endpoint, simple-factor split fails");

  const Poly w = Poly::constant(1.0) - F.sq_norm_poly();
  const double scale = std::max(1.0, w.norm_inf());
  double r0 = 0.0, r1 = 0.0;
  const Poly q1 = w.deflate_linear(I.x0(), &r0);
  Poly q = q1.deflate_linear(I.x1(), &r1);
  if (std::abs(r0) > kEndpointValueTol * scale || std::abs(r1) > kEndpointValueTol * scale)
    throw InvalidHillIntervalError("deflate: endpoints are not roots of 1 - ||F||^2");
  q *= -1.0;  // (x - x0)(x1 - x) = -(x - x0)(x - x1)

  for (int i = 0; i < 1024; ++i) {
    const double x = I.x0() + I.width() * (i + 0.5) / 1024.0;
    if (!(q(x) > kDeflationFloor))
      throw InvalidHillIntervalError("deflate: deflated factor not positive on the interior");
  }
  return q;
}

WeightedQuadrature::WeightedQuadrature(const PolyVec& F, const HillInterval& I)
    : q_(deflate(F, I)), mid_(I.midpoint()), halfw_(0.5 * I.width()) {}

double WeightedQuadrature::integrate(const Poly& P, int panels) const {
  return integrate_scaled(P, 0, panels);
}

double WeightedQuadrature::integrate_scaled(const Poly& P, int y_power, int panels) const {
  if (panels < 4) throw std::invalid_argument("WeightedQuadrature: need at least 4 panels");
  if (y_power < 0) throw std::invalid_argument("WeightedQuadrature: negative power");
  const double h = std::numbers::pi / panels;
  auto g = [&](double phi) {
    const double y = std::cos(phi);
    const double x = mid_ + halfw_ * y;
    const double qx = q_(x);
    if (!(qx > 0.0))
      throw InvalidHillIntervalError("weighted integrand: deflated factor not positive");
    double yp = 1.0;
    for (int s = 0; s < y_power; ++s) yp *= y;
    return yp * P(x) / std::sqrt(qx);
  };
  double sum = 0.5 * (g(0.0) + g(std::numbers::pi));
  for (int i = 1; i < panels; ++i) sum += g(i * h);
  return sum * h;
}

double weighted_moment(const Poly& P, const PolyVec& F, const HillInterval& I, int nodes,
                       double* richardson) {
  const WeightedQuadrature quad(F, I);
  const double coarse = quad.integrate(P, nodes);
  const double fine = quad.integrate(P, 2 * nodes);
  if (richardson) *richardson = std::abs(coarse - fine);
  return fine;
}

double period_L(const PolyVec& F, const HillInterval& I, int nodes) {
  return 2.0 * weighted_moment(Poly::constant(1.0), F, I, nodes);
}

double inner_product(const Poly& P1, const Poly& P2, const PolyVec& F, const HillInterval& I,
                     int nodes) {
  return weighted_moment(P1 * P2, F, I, nodes);
}

PeriodData delta_theta(const PolyVec& F, const HillInterval& I, int nodes) {
  const int k = F.degree_bound();
  const int n = F.components();
  const WeightedQuadrature quad(F, I);

  PeriodData out;
  out.L = 2.0 * quad.integrate(Poly::constant(1.0), 2 * nodes);
  out.delta_theta.resize(k + 1, n);
  double factorial = 1.0;
  for (int i = 0; i <= k; ++i) {
    if (i > 0) factorial *= i;
    const Poly xi = Poly::monomial(i);
    for (int j = 0; j < n; ++j) {
      const Poly integrand = xi * F.component(j);
      out.delta_theta(i, j) = (2.0 / factorial) * quad.integrate(integrand, 2 * nodes);
    }
  }
  return out;
}

GramMatrix gram(const PolyVec& F, const HillInterval& I, int nodes) {
  const int k = F.degree_bound();
  const WeightedQuadrature quad(F, I);

  // Moments share the node set; the Hankel fill keeps G exactly symmetric.
  std::vector<double> mu(static_cast<size_t>(2 * k) + 1);
  for (int s = 0; s <= 2 * k; ++s) mu[s] = quad.integrate(Poly::monomial(s), 2 * nodes);

  GramMatrix out;
  out.G.resize(k + 1, k + 1);
  for (int i = 0; i <= k; ++i)
    for (int m = 0; m <= k; ++m) out.G(i, m) = mu[static_cast<size_t>(i + m)];

  // Certify positive-definiteness in the interval-centered scaled basis:
  // G = T Gy T^T with T exact, so definiteness transfers by congruence even
  // when the raw monomial Hankel matrix is too ill-conditioned to factor.
  std::vector<double> nu(static_cast<size_t>(2 * k) + 1);
  const Poly one = Poly::constant(1.0);
  for (int s = 0; s <= 2 * k; ++s) nu[s] = quad.integrate_scaled(one, s, 2 * nodes);
  Eigen::MatrixXd Gy(k + 1, k + 1);
  for (int i = 0; i <= k; ++i)
    for (int m = 0; m <= k; ++m) Gy(i, m) = nu[static_cast<size_t>(i + m)];

  Eigen::LLT<Eigen::MatrixXd> llt(Gy);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefiniteError("gram: Cholesky failed in the scaled basis");

  const double eig_raw = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out.G).eigenvalues().minCoeff();
  const double eig_scaled = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Gy).eigenvalues().minCoeff();
  const Eigen::MatrixXd T = monomial_to_scaled(k, quad.midpoint(), quad.half_width());
  const double sigma_min = Eigen::JacobiSVD<Eigen::MatrixXd>(T).singularValues().minCoeff();
  const double congruence_bound = eig_scaled * sigma_min * sigma_min;
  out.lambda_min = std::max(eig_raw, congruence_bound);
  if (!(out.lambda_min > 0.0))
    throw NotPositiveDefiniteError("gram: smallest-eigenvalue estimate not positive");
  return out;
}

double period_L_tanh_sinh(const PolyVec& F, const HillInterval& I, double tol) {
  const WeightedQuadrature quad(F, I);
  constexpr double u_max = 4.5;
  auto level_sum = [&](double h) {
    double sum = 0.0;
    for (double u = -u_max; u <= u_max + 1e-12; u += h) {
      const double s = std::sinh(u);
      const double wexp = 0.5 * std::numbers::pi * s;
      const double x = quad.midpoint() + quad.half_width() * std::tanh(wexp);
      const double qx = quad.deflated()(x);
      if (!(qx > 0.0)) throw InvalidHillIntervalError("tanh-sinh: deflated factor not positive");
      sum += 0.5 * std::numbers::pi * std::cosh(u) / (std::cosh(wexp) * std::sqrt(qx));
    }
    return sum * h;
  };
  double h = 0.5;
  double prev = level_sum(h);
  for (int level = 0; level < 10; ++level) {
    h *= 0.5;
    const double cur = level_sum(h);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return 2.0 * cur;
    prev = cur;
  }
  return 2.0 * prev;
}

}  // namespace jetflow
