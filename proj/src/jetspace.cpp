#include "jetflow/jetspace.hpp"

#include <cmath>
#include <stdexcept>

#include "jetflow/errors.hpp"

namespace jetflow {

namespace {

// pw[d] = x^d / d!
Eigen::VectorXd scaled_powers(double x, int k) {
  Eigen::VectorXd pw(k + 1);
  pw[0] = 1.0;
  for (int d = 1; d <= k; ++d) pw[d] = pw[d - 1] * x / static_cast<double>(d);
  return pw;
}

void check_grid(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument(std::string(what) + ": empty grid");
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

}  // namespace

JetPoint theta_from_u(const JetPointU& q) {
  check_grid(q.u, "theta_from_u");
  const int k = static_cast<int>(q.u.rows()) - 1;
  const int n = static_cast<int>(q.u.cols());
  const Eigen::VectorXd pw = scaled_powers(q.x, k);
  JetPoint out;
  out.x = q.x;
  out.theta.setZero(k + 1, n);
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int m = 0; m <= i; ++m) {
        const double term = pw[i - m] * q.u(k - m, j);
        acc += (m % 2 == 0) ? term : -term;
      }
      out.theta(i, j) = acc;
    }
  }
  return out;
}

JetPointU u_from_theta(const JetPoint& q) {
  check_grid(q.theta, "u_from_theta");
  const int k = static_cast<int>(q.theta.rows()) - 1;
  const int n = static_cast<int>(q.theta.cols());
  const Eigen::VectorXd pw = scaled_powers(q.x, k);
  JetPointU out;
  out.x = q.x;
  out.u.setZero(k + 1, n);
  // theta_i involves u_k .. u_{k-i}; solve for u_{k-i} at row i
  for (int i = 0; i <= k; ++i) {
    const double sign_i = (i % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j < n; ++j) {
      double acc = q.theta(i, j);
      for (int m = 0; m < i; ++m) {
        const double term = pw[i - m] * out.u(k - m, j);
        acc -= (m % 2 == 0) ? term : -term;
      }
      out.u(k - i, j) = sign_i * acc;
    }
  }
  return out;
}

std::vector<TangentVector> frame(const JetPoint& q) {
  check_grid(q.theta, "frame");
  const int k = static_cast<int>(q.theta.rows()) - 1;
  const int n = static_cast<int>(q.theta.cols());
  const Eigen::VectorXd pw = scaled_powers(q.x, k);
  std::vector<TangentVector> out;
  out.reserve(static_cast<size_t>(n) + 1);
  TangentVector x0;
  x0.dx = 1.0;
  x0.dtheta.setZero(k + 1, n);
  out.push_back(std::move(x0));
  for (int j = 0; j < n; ++j) {
    TangentVector v;
    v.dx = 0.0;
    v.dtheta.setZero(k + 1, n);
    v.dtheta.col(j) = pw;
    out.push_back(std::move(v));
  }
  return out;
}

MomentumFunctions momentum_functions(const CotangentState& s) {
  check_grid(s.p_theta, "momentum_functions");
  const int k = static_cast<int>(s.p_theta.rows()) - 1;
  const int n = static_cast<int>(s.p_theta.cols());
  const Eigen::VectorXd pw = scaled_powers(s.point.x, k);
  MomentumFunctions out;
  out.P0 = s.p_x;
  out.P.setZero(k + 1, n);
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int m = i; m <= k; ++m) acc += pw[m - i] * s.p_theta(m, j);
      out.P(i, j) = acc;
    }
  }
  return out;
}

double horizontality_residual(const std::vector<TimedJetPointU>& samples) {
  if (samples.size() < 3) throw TooFewSamplesError("horizontality_residual: need at least 3 samples");
  for (size_t s = 1; s < samples.size(); ++s) {
    if (!(samples[s].t > samples[s - 1].t))
      throw std::invalid_argument("horizontality_residual: timestamps must strictly increase");
  }
  const int k = static_cast<int>(samples[0].q.u.rows()) - 1;
  const int n = static_cast<int>(samples[0].q.u.cols());
  if (k == 0) return 0.0;  // no contact relations to violate

  double residual = 0.0;
  for (size_t s = 1; s + 1 < samples.size(); ++s) {
    const auto& a = samples[s - 1];
    const auto& b = samples[s];
    const auto& c = samples[s + 1];
    const double h0 = b.t - a.t;
    const double h1 = c.t - b.t;
    const double denom = h0 * h1 * (h0 + h1);
    // second-order three-point derivative on a possibly nonuniform grid
    auto d3 = [&](double f0, double f1, double f2) {
      return (h0 * h0 * f2 - h1 * h1 * f0 - (h0 * h0 - h1 * h1) * f1) / denom;
    };
    const double xdot = d3(a.q.x, b.q.x, c.q.x);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < n; ++j) {
        const double udot = d3(a.q.u(i, j), b.q.u(i, j), c.q.u(i, j));
        residual = std::max(residual, std::abs(udot - b.q.u(i + 1, j) * xdot));
      }
    }
  }
  return residual;
}

double sr_speed(const JetPoint& q, double v_x, const Eigen::VectorXd& v_theta0) {
  (void)q;  // the frame is orthonormal at every point
  return std::sqrt(v_x * v_x + v_theta0.squaredNorm());
}

}  // namespace jetflow
