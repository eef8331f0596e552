#include "jetflow/polyvec.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "jetflow/errors.hpp"

namespace jetflow {

namespace {

// Relative threshold for the approximate-gcd machinery. Remainders whose
// coefficients all fall below this (inputs normalized to unit inf-norm)
// are treated as zero.
constexpr double kGcdZeroThreshold = 1e-9;

void check_finite(const std::vector<double>& c, const char* what) {
  for (double v : c) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite coefficient");
  }
}

std::vector<double> trim_leading(std::vector<double> c, double eps) {
  while (c.size() > 1 && std::abs(c.back()) <= eps) c.pop_back();
  return c;
}

double vec_norm_inf(const std::vector<double>& c) {
  double m = 0.0;
  for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

Poly normalized_inf(const Poly& p) {
  double m = p.norm_inf();
  if (m == 0.0) return p;
  return (1.0 / m) * p;
}

Poly make_monic(const Poly& p) {
  auto c = trim_leading(p.coeffs(), kCoeffZeroThreshold * std::max(1.0, p.norm_inf()));
  double lead = c.back();
  if (lead == 0.0) return Poly(std::move(c));
  for (double& v : c) v /= lead;
  c.back() = 1.0;
  return Poly(std::move(c));
}

// Remainder of a mod b; callers guarantee deg(b) >= 1 after eps-trim.
Poly poly_rem(const Poly& a, const Poly& b, double eps) {
  std::vector<double> r = trim_leading(a.coeffs(), eps);
  std::vector<double> d = trim_leading(b.coeffs(), eps);
  const size_t db = d.size() - 1;
  const double lead = d.back();
  if (lead == 0.0) throw std::invalid_argument("poly_rem: division by zero polynomial");
  while (r.size() > db && r.size() > 1) {
    const size_t dr = r.size() - 1;
    const double q = r.back() / lead;
    for (size_t i = 0; i < db; ++i) r[dr - db + i] -= q * d[i];
    r.pop_back();
  }
  return Poly(std::move(r));
}

// Exact-in-theory division a / b; the numeric remainder is discarded. Used by
// the square-free machinery where divisibility holds by construction.
Poly poly_div_exact(const Poly& a, const Poly& b) {
  std::vector<double> r = a.coeffs();
  std::vector<double> d = trim_leading(b.coeffs(), kCoeffZeroThreshold * std::max(1.0, b.norm_inf()));
  const size_t db = d.size() - 1;
  const double lead = d.back();
  if (lead == 0.0) throw std::invalid_argument("poly_div_exact: zero divisor");
  if (r.size() - 1 < db) return Poly();
  std::vector<double> q(r.size() - db, 0.0);
  for (size_t qi = q.size(); qi-- > 0;) {
    const double qc = r[qi + db] / lead;
    q[qi] = qc;
    for (size_t i = 0; i <= db; ++i) r[qi + i] -= qc * d[i];
  }
  return Poly(std::move(q));
}

Poly poly_gcd(Poly a, Poly b) {
  a = normalized_inf(a);
  b = normalized_inf(b);
  if (a.degree(kGcdZeroThreshold) < b.degree(kGcdZeroThreshold)) std::swap(a, b);
  while (!b.is_zero(kGcdZeroThreshold)) {
    if (b.degree(kGcdZeroThreshold) == 0) return Poly::constant(1.0);  // coprime
    Poly r = poly_rem(a, b, kGcdZeroThreshold);
    a = b;
    b = (r.norm_inf() <= kGcdZeroThreshold) ? Poly() : normalized_inf(r);
  }
  return make_monic(a);
}

// Upper bound on |root| for all real roots, with margin.
double cauchy_bound(const Poly& p) {
  auto c = trim_leading(p.coeffs(), kCoeffZeroThreshold * std::max(1.0, p.norm_inf()));
  const double lead = std::abs(c.back());
  double m = 0.0;
  for (size_t i = 0; i + 1 < c.size(); ++i) m = std::max(m, std::abs(c[i]));
  return 2.0 + m / lead;
}

std::vector<Poly> sturm_sequence(const Poly& square_free) {
  std::vector<Poly> seq;
  seq.push_back(normalized_inf(square_free));
  seq.push_back(normalized_inf(square_free.derivative()));
  while (seq.back().degree(kGcdZeroThreshold) > 0) {
    Poly r = -poly_rem(seq[seq.size() - 2], seq.back(), kGcdZeroThreshold);
    if (r.norm_inf() <= kGcdZeroThreshold) break;
    seq.push_back(normalized_inf(r));  // positive scaling preserves the sign structure
  }
  return seq;
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

int sign_variations(const std::vector<Poly>& seq, double x) {
  int count = 0;
  int prev = 0;
  for (const Poly& p : seq) {
    int s = sign_of(p(x));
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

struct Enclosure {
  double lo, hi;
};

void isolate_square_free(const std::vector<Poly>& seq, double a, double b, int va, int vb,
                         double width, std::vector<Enclosure>& out) {
  const int count = va - vb;
  if (count <= 0) return;
  if (b - a <= width) {
    out.push_back({a, b});  // count==1 in practice; coalesced otherwise
    return;
  }
  const double m = a + 0.5 * (b - a);
  const int vm = sign_variations(seq, m);
  isolate_square_free(seq, a, m, va, vm, width, out);
  isolate_square_free(seq, m, b, vm, vb, width, out);
}

double polish_root(const Poly& p, const Poly& dp, double lo, double hi) {
  double x = lo + 0.5 * (hi - lo);
  for (int it = 0; it < 3; ++it) {
    const double d = dp(x);
    if (d == 0.0) break;
    const double step = p(x) / d;
    const double nx = x - step;
    if (nx < lo || nx > hi) break;
    x = nx;
  }
  return x;
}

}  // namespace

Poly::Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.assign(1, 0.0);
  check_finite(c_, "Poly");
}

Poly Poly::monomial(int power, double a) {
  if (power < 0) throw std::invalid_argument("Poly::monomial: negative power");
  std::vector<double> c(static_cast<size_t>(power) + 1, 0.0);
  c.back() = a;
  return Poly(std::move(c));
}

int Poly::degree(double eps) const {
  for (int i = size() - 1; i > 0; --i) {
    if (std::abs(c_[static_cast<size_t>(i)]) > eps) return i;
  }
  return 0;
}

bool Poly::is_zero(double eps) const {
  for (double v : c_) {
    if (std::abs(v) > eps) return false;
  }
  return true;
}

double Poly::norm_inf() const { return vec_norm_inf(c_); }

double Poly::operator()(double x) const {
  double acc = 0.0;
  for (size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
  return acc;
}

Poly Poly::derivative() const {
  if (c_.size() == 1) return Poly();
  std::vector<double> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
  return Poly(std::move(d));
}

Poly Poly::operator-() const {
  std::vector<double> c = c_;
  for (double& v : c) v = -v;
  return Poly(std::move(c));
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Poly& Poly::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (size_t i = 0; i < a.c_.size(); ++i) {
    for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  }
  return Poly(std::move(c));
}

Poly Poly::deflate_linear(double root, double* remainder) const {
  if (c_.size() == 1) {
    if (remainder) *remainder = c_[0];
    return Poly();
  }
  std::vector<double> q(c_.size() - 1, 0.0);
  double carry = c_.back();
  for (size_t i = c_.size() - 1; i-- > 0;) {
    q[i] = carry;
    carry = c_[i] + carry * root;
  }
  if (remainder) *remainder = carry;
  return Poly(std::move(q));
}

std::string Poly::str() const {
  std::string s;
  char buf[64];
  for (size_t i = 0; i < c_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g*x^%zu", i ? " + " : "", c_[i], i);
    s += buf;
  }
  return s;
}

std::vector<SquareFreeFactor> square_free_decomposition(const Poly& p) {
  if (p.is_zero()) throw IdenticallyZeroError("square_free_decomposition: zero polynomial");
  const double scale = p.norm_inf();
  Poly f = (1.0 / scale) * p;
  if (f.degree() == 0) return {};

  Poly df = f.derivative();
  Poly a0 = poly_gcd(f, df);
  if (a0.degree(kGcdZeroThreshold) == 0) {
    return {{make_monic(f), 1}};
  }

  std::vector<SquareFreeFactor> out;
  Poly b = poly_div_exact(f, a0);
  Poly c = poly_div_exact(df, a0);
  Poly d = c - b.derivative();
  const int max_mult = f.degree() + 1;
  for (int mult = 1; b.degree(kGcdZeroThreshold) > 0 && mult <= max_mult; ++mult) {
    Poly s = d.is_zero(kGcdZeroThreshold) ? make_monic(b) : poly_gcd(b, d);
    if (s.degree(kGcdZeroThreshold) > 0) out.push_back({s, mult});
    b = poly_div_exact(b, s);
    Poly c2 = poly_div_exact(d, s);
    d = c2 - b.derivative();
  }
  return out;
}

int sturm_distinct_root_count(const Poly& square_free, double a, double b) {
  if (!(a < b)) return 0;
  auto seq = sturm_sequence(square_free);
  return sign_variations(seq, a) - sign_variations(seq, b);
}

std::vector<RealRoot> isolate_roots(const Poly& p, std::optional<RootWindow> window,
                                    double enclosure_width) {
  if (p.is_zero()) throw IdenticallyZeroError("isolate_roots: zero polynomial");
  if (enclosure_width <= 0.0) throw std::invalid_argument("isolate_roots: width must be positive");
  std::vector<RealRoot> roots;
  if (p.degree() == 0) return roots;

  for (const auto& [factor, mult] : square_free_decomposition(p)) {
    double lo, hi;
    if (window) {
      if (!(window->lo <= window->hi)) throw std::invalid_argument("isolate_roots: bad window");
      // widen by the enclosure width so boundary roots are kept
      lo = window->lo - enclosure_width;
      hi = window->hi + enclosure_width;
      const double bound = cauchy_bound(factor);
      lo = std::max(lo, -bound);
      hi = std::min(hi, bound);
      if (!(lo < hi)) continue;
    } else {
      const double bound = cauchy_bound(factor);
      lo = -bound;
      hi = bound;
    }
    auto seq = sturm_sequence(factor);
    std::vector<Enclosure> enc;
    isolate_square_free(seq, lo, hi, sign_variations(seq, lo), sign_variations(seq, hi),
                        enclosure_width, enc);
    const Poly dfactor = factor.derivative();
    for (const auto& e : enc) {
      roots.push_back({polish_root(factor, dfactor, e.lo, e.hi), mult, e.lo, e.hi});
    }
  }

  std::sort(roots.begin(), roots.end(),
            [](const RealRoot& a, const RealRoot& b) { return a.location < b.location; });
  // Coalesce overlapping enclosures from distinct factors (a numerically
  // collapsed cluster); exact coprime factors never trigger this.
  std::vector<RealRoot> merged;
  for (const auto& r : roots) {
    if (!merged.empty() && r.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, r.hi);
      merged.back().multiplicity += r.multiplicity;
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

PolyVec::PolyVec(std::vector<std::vector<double>> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("PolyVec: need at least one component");
  n_ = static_cast<int>(coeffs_.size());
  if (coeffs_[0].empty()) throw std::invalid_argument("PolyVec: empty coefficient row");
  k_ = static_cast<int>(coeffs_[0].size()) - 1;
  for (const auto& row : coeffs_) {
    if (static_cast<int>(row.size()) != k_ + 1)
      throw std::invalid_argument("PolyVec: ragged coefficient matrix");
    check_finite(row, "PolyVec");
  }
}

PolyVec PolyVec::from_components(const std::vector<Poly>& components, int k) {
  if (components.empty()) throw std::invalid_argument("PolyVec: need at least one component");
  int width = 0;
  for (const Poly& p : components) width = std::max(width, p.size());
  if (k >= 0) width = std::max(width, k + 1);
  std::vector<std::vector<double>> rows;
  rows.reserve(components.size());
  for (const Poly& p : components) {
    std::vector<double> row(static_cast<size_t>(width), 0.0);
    for (int i = 0; i < p.size(); ++i) row[static_cast<size_t>(i)] = p.coeff(i);
    rows.push_back(std::move(row));
  }
  return PolyVec(std::move(rows));
}

Poly PolyVec::component(int j) const {
  if (j < 0 || j >= n_) throw std::out_of_range("PolyVec::component");
  return Poly(coeffs_[static_cast<size_t>(j)]);
}

bool PolyVec::is_constant(double eps) const { return degree(eps) == 0; }

int PolyVec::degree(double eps) const {
  int d = 0;
  for (const auto& row : coeffs_) {
    for (int i = k_; i > 0; --i) {
      if (std::abs(row[static_cast<size_t>(i)]) > eps) {
        d = std::max(d, i);
        break;
      }
    }
  }
  return d;
}

std::vector<double> PolyVec::eval(double x) const {
  std::vector<double> out(static_cast<size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    const auto& row = coeffs_[static_cast<size_t>(j)];
    double acc = 0.0;
    for (size_t i = row.size(); i-- > 0;) acc = acc * x + row[i];
    out[static_cast<size_t>(j)] = acc;
  }
  return out;
}

PolyVec PolyVec::derivative(int order) const {
  if (order < 0) throw std::invalid_argument("PolyVec::derivative: negative order");
  std::vector<Poly> comps;
  comps.reserve(static_cast<size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    Poly p = component(j);
    for (int s = 0; s < order; ++s) p = p.derivative();
    comps.push_back(std::move(p));
  }
  const int k_out = std::max(k_ - order, 0);
  return from_components(comps, k_out);
}

Poly PolyVec::sq_norm_poly() const {
  Poly acc;
  for (int j = 0; j < n_; ++j) {
    const Poly p = component(j);
    acc += p * p;
  }
  return acc;
}

}  // namespace jetflow
