#pragma once

#include <cmath>
#include <span>
#include <vector>

#ifdef __FAST_MATH__
#error "fast math would defeat the compensated and double-word arithmetic below"
#endif

namespace anosov {

/// Neumaier's improved Kahan summation.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double init) : sum_(init) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// Exact sum of doubles kept as a nonoverlapping expansion (Shewchuk), increasing magnitude.
class ExactSum {
 public:
  void add(double x);
  ExactSum& operator+=(double x) {
    add(x);
    return *this;
  }
  /// Exact product with a double.
  ExactSum scaled(double b) const;
  ExactSum negated() const;
  /// Nearly correctly rounded value of the exact sum.
  double value() const;
  bool is_zero() const { return parts_.empty(); }
  const std::vector<double>& parts() const { return parts_; }

 private:
  std::vector<double> parts_;
};

/// True iff both expansions represent the same real number.
bool exactly_equal(const ExactSum& a, const ExactSum& b);

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2 (about 106 significant bits).
struct DoubleWord {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleWord() = default;
  constexpr DoubleWord(double x) : hi(x), lo(0.0) {}  // NOLINT: implicit by design of the scalar interface
  constexpr DoubleWord(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const noexcept { return hi + lo; }
};

namespace dw_detail {
inline DoubleWord two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}
inline DoubleWord fast_two_sum(double a, double b) noexcept {
  const double s = a + b;
  return {s, b - (s - a)};
}
inline DoubleWord two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}
}  // namespace dw_detail

inline DoubleWord operator+(DoubleWord a, DoubleWord b) noexcept {
  DoubleWord s = dw_detail::two_sum(a.hi, b.hi);
  DoubleWord t = dw_detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = dw_detail::fast_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return dw_detail::fast_two_sum(s.hi, s.lo);
}
inline DoubleWord operator-(DoubleWord a) noexcept { return {-a.hi, -a.lo}; }
inline DoubleWord operator-(DoubleWord a, DoubleWord b) noexcept { return a + (-b); }
inline DoubleWord operator*(DoubleWord a, DoubleWord b) noexcept {
  DoubleWord p = dw_detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return dw_detail::fast_two_sum(p.hi, p.lo);
}
inline DoubleWord operator/(DoubleWord a, DoubleWord b) noexcept {
  const double q1 = a.hi / b.hi;
  DoubleWord r = a - b * DoubleWord(q1);
  const double q2 = r.hi / b.hi;
  r = r - b * DoubleWord(q2);
  const double q3 = r.hi / b.hi;
  return dw_detail::fast_two_sum(q1, q2) + DoubleWord(q3);
}
inline DoubleWord& operator+=(DoubleWord& a, DoubleWord b) noexcept { return a = a + b; }
inline DoubleWord& operator-=(DoubleWord& a, DoubleWord b) noexcept { return a = a - b; }
inline DoubleWord& operator*=(DoubleWord& a, DoubleWord b) noexcept { return a = a * b; }
inline DoubleWord& operator/=(DoubleWord& a, DoubleWord b) noexcept { return a = a / b; }
inline bool operator<(DoubleWord a, DoubleWord b) noexcept {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(DoubleWord a, DoubleWord b) noexcept { return b < a; }
inline DoubleWord abs(DoubleWord a) noexcept { return a.hi < 0.0 ? -a : a; }
inline double to_double(DoubleWord a) noexcept { return a.hi + a.lo; }
inline double to_double(double a) noexcept { return a; }
using std::abs;

/// Integer power by repeated squaring; exact enough for both scalar types.
template <class Scalar>
Scalar ipow(Scalar base, int n) {
  if (n < 0) return Scalar(1.0) / ipow(base, -n);
  Scalar result(1.0);
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
};

/// Ordinary least squares y ~ slope*x + intercept. Requires >= 2 points.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace anosov
