#pragma once

#include <optional>
#include <string>
#include <vector>

namespace jetflow {

// Coefficients at or below this magnitude count as zero when deciding
// degrees, constancy and root multiplicities. The theory works with exact
// polynomials; inputs here are floating point.
inline constexpr double kCoeffZeroThreshold = 1e-13;

/// Dense univariate real polynomial, coefficients in ascending powers.
/// Degree bookkeeping is exact: no coefficient is dropped except when a
/// caller asks a threshold-based question (degree, is_zero).
class Poly {
 public:
  Poly() : c_(1, 0.0) {}
  explicit Poly(std::vector<double> coeffs);
  static Poly constant(double a) { return Poly(std::vector<double>{a}); }
  static Poly monomial(int power, double a = 1.0);

  const std::vector<double>& coeffs() const noexcept { return c_; }
  double coeff(int i) const {
    return (i >= 0 && i < size()) ? c_[static_cast<size_t>(i)] : 0.0;
  }
  int size() const noexcept { return static_cast<int>(c_.size()); }

  /// Largest i with |c_i| > eps; 0 for (near-)constant polynomials.
  int degree(double eps = kCoeffZeroThreshold) const;
  bool is_zero(double eps = kCoeffZeroThreshold) const;
  double norm_inf() const;

  double operator()(double x) const;  // Horner evaluation

  Poly derivative() const;

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(double s);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(double s, Poly p) { return p *= s; }
  friend Poly operator*(const Poly& a, const Poly& b);

  /// Synthetic division by (x - root). Returns the quotient; the remainder
  /// (the value p(root)) goes to *remainder when non-null.
  Poly deflate_linear(double root, double* remainder = nullptr) const;

  std::string str() const;

 private:
  std::vector<double> c_;
};

/// Certified enclosure of one distinct real root.
struct RealRoot {
  double location;
  int multiplicity;
  double lo, hi;  // [lo, hi] contains exactly one distinct root
};

struct SquareFreeFactor {
  Poly factor;  // monic, square-free; factors are pairwise coprime
  int multiplicity;
};

/// Yun decomposition: p ~ prod factor_i ^ multiplicity_i up to a constant.
/// Constants decompose to an empty list. Throws IdenticallyZeroError.
std::vector<SquareFreeFactor> square_free_decomposition(const Poly& p);

/// Number of distinct real roots of a square-free polynomial in (a, b],
/// by Sturm sign-variation counts.
int sturm_distinct_root_count(const Poly& square_free, double a, double b);

struct RootWindow {
  double lo, hi;
};

/// All distinct real roots of p in the window (whole line when absent),
/// with certified enclosures refined to `enclosure_width` and
/// multiplicities from the square-free decomposition.
/// Throws IdenticallyZeroError when p == 0.
std::vector<RealRoot> isolate_roots(const Poly& p,
                                    std::optional<RootWindow> window = std::nullopt,
                                    double enclosure_width = 1e-12);

/// Polynomial vector F(x) = (F^1(x), ..., F^n(x)) of degree <= k.
/// coeffs[j][i] is the x^i coefficient of component j.
class PolyVec {
 public:
  PolyVec() : PolyVec(std::vector<std::vector<double>>{{0.0}}) {}  // zero constant
  explicit PolyVec(std::vector<std::vector<double>> coeffs);
  static PolyVec from_components(const std::vector<Poly>& components, int k = -1);

  int components() const noexcept { return n_; }     // n
  int degree_bound() const noexcept { return k_; }   // k
  const std::vector<std::vector<double>>& coeffs() const noexcept { return coeffs_; }
  double coeff(int j, int i) const { return coeffs_[static_cast<size_t>(j)][static_cast<size_t>(i)]; }
  Poly component(int j) const;

  bool is_constant(double eps = kCoeffZeroThreshold) const;
  int degree(double eps = kCoeffZeroThreshold) const;

  std::vector<double> eval(double x) const;
  PolyVec derivative(int order = 1) const;

  /// ||F(x)||^2 as a scalar polynomial of degree <= 2k.
  Poly sq_norm_poly() const;

 private:
  int n_, k_;
  std::vector<std::vector<double>> coeffs_;
};

}  // namespace jetflow
