#include "anosov/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "anosov/error.hpp"

namespace anosov {
namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw Error(ErrorCode::EnumerationCapExceeded, "integer overflow in exact matrix arithmetic");
  }
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) {
    throw Error(ErrorCode::EnumerationCapExceeded, "integer overflow in exact matrix arithmetic");
  }
  return r;
}

IntMat2 checked_product(const IntMat2& x, const IntMat2& y) {
  IntMat2 r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r(i, j) = checked_add(checked_mul(x(i, 0), y(0, j)), checked_mul(x(i, 1), y(1, j)));
    }
  }
  return r;
}

std::int64_t det2(const IntMat2& m) {
  return checked_add(checked_mul(m(0, 0), m(1, 1)), -checked_mul(m(0, 1), m(1, 0)));
}

std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

Eigen::Vector2d eigenvector(const IntMat2& m, double lambda) {
  const double a = static_cast<double>(m(0, 0));
  const double b = static_cast<double>(m(0, 1));
  const double c = static_cast<double>(m(1, 0));
  const double d = static_cast<double>(m(1, 1));
  Eigen::Vector2d v1(b, lambda - a);
  Eigen::Vector2d v2(lambda - d, c);
  Eigen::Vector2d v = v1.norm() >= v2.norm() ? v1 : v2;
  v.normalize();
  if (v(0) < 0.0 || (v(0) == 0.0 && v(1) < 0.0)) v = -v;
  return v;
}

// Fixed points of M^n on T^2 as numerators over |det(M^n - I)|.
std::vector<std::array<std::int64_t, 2>> torus_fixed_points(const IntMat2& power,
                                                            std::int64_t& denominator) {
  IntMat2 n = power;
  n(0, 0) -= 1;
  n(1, 1) -= 1;
  const std::int64_t det = det2(n);
  if (det == 0) {
    throw Error(ErrorCode::NotHyperbolic, "M^n - I is singular");
  }
  denominator = std::abs(det);

  // Column Hermite form of N: N U = [[h11, 0], [h21, h22]].
  const std::int64_t a = n(0, 0);
  const std::int64_t b = n(0, 1);
  std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_tuple(r, old_r - q * r);
    std::tie(old_s, s) = std::make_tuple(s, old_s - q * s);
    std::tie(old_t, t) = std::make_tuple(t, old_t - q * t);
  }
  const std::int64_t g = old_r;  // = a*old_s + b*old_t
  IntMat2 u;
  u << old_s, -b / g, old_t, a / g;
  const IntMat2 h = checked_product(n, u);
  const std::int64_t h11 = std::abs(h(0, 0));
  const std::int64_t h22 = std::abs(h(1, 1));
  if (h11 * h22 != denominator) {
    throw Error(ErrorCode::NotHyperbolic, "inconsistent Hermite form");
  }

  // x = N^{-1} m = adj(N) m / det(N), coset representatives m of Z^2 / N Z^2.
  IntMat2 adj;
  adj << n(1, 1), -n(0, 1), -n(1, 0), n(0, 0);
  if (det < 0) adj = -adj;
  std::vector<std::array<std::int64_t, 2>> points;
  points.reserve(static_cast<std::size_t>(denominator));
  for (std::int64_t i = 0; i < h11; ++i) {
    for (std::int64_t j = 0; j < h22; ++j) {
      const std::int64_t x0 = checked_add(checked_mul(adj(0, 0), i), checked_mul(adj(0, 1), j));
      const std::int64_t x1 = checked_add(checked_mul(adj(1, 0), i), checked_mul(adj(1, 1), j));
      points.push_back({mod_floor(x0, denominator), mod_floor(x1, denominator)});
    }
  }
  std::sort(points.begin(), points.end());
  return points;
}

}  // namespace

IntMat2 ToralAutomorphism::inverse() const {
  IntMat2 inv;
  inv << matrix(1, 1), -matrix(0, 1), -matrix(1, 0), matrix(0, 0);
  return inv;
}

ToralAutomorphism hyperbolic_eigen(const IntMat2& matrix) {
  ToralAutomorphism m;
  m.matrix = matrix;
  m.det = det2(matrix);
  m.trace = matrix(0, 0) + matrix(1, 1);
  if (m.det != 1) {
    throw Error(ErrorCode::NotUnimodular, "determinant is " + std::to_string(m.det));
  }
  if (std::abs(m.trace) <= 2) {
    throw Error(ErrorCode::NotHyperbolic, "|trace| = " + std::to_string(std::abs(m.trace)) + " <= 2");
  }
  if (m.trace < 0) {
    throw Error(ErrorCode::NegativeEigenvalues, "negative trace gives negative eigenvalues");
  }
  const double t = static_cast<double>(m.trace);
  const double root = std::sqrt(t * t - 4.0);
  m.large_eig = 0.5 * (t + root);
  m.small_eig = 2.0 / (t + root);
  m.e_s = eigenvector(matrix, m.small_eig);
  m.e_u = eigenvector(matrix, m.large_eig);
  return m;
}

IntMat2 int_power(const IntMat2& m, int n) {
  if (n < 0) {
    IntMat2 inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return int_power(inv, -n);
  }
  IntMat2 result = IntMat2::Identity();
  IntMat2 base = m;
  while (n > 0) {
    if (n & 1) result = checked_product(result, base);
    n >>= 1;
    if (n > 0) base = checked_product(base, base);
  }
  return result;
}

EigenQuadruple EigenQuadruple::make(double mu_hat, double mu, double lam, double lam_hat) {
  if (!(0.0 < mu_hat && mu_hat < mu && mu < 1.0 && 1.0 < lam && lam < lam_hat &&
        std::isfinite(lam_hat))) {
    throw Error(ErrorCode::InvalidQuadruple,
                "expected 0 < mu_hat < mu < 1 < lam < lam_hat");
  }
  return {mu_hat, mu, lam, lam_hat};
}

Eigen::Vector4d RationalTorusPoint::to_real() const {
  Eigen::Vector4d z;
  for (int i = 0; i < 4; ++i) {
    z(i) = static_cast<double>(numerators[i]) / static_cast<double>(denominator);
  }
  return z;
}

std::int64_t fixed_point_count(const ToralAutomorphism& m, int n) {
  IntMat2 p = int_power(m.matrix, n);
  p(0, 0) -= 1;
  p(1, 1) -= 1;
  return std::abs(det2(p));
}

std::vector<RationalTorusPoint> periodic_points_linear(const ToralAutomorphism& a,
                                                       const ToralAutomorphism& b, int n,
                                                       std::int64_t cap) {
  if (n < 1) throw Error(ErrorCode::InvalidModel, "period must be >= 1");
  const std::int64_t count_a = fixed_point_count(a, n);
  const std::int64_t count_b = fixed_point_count(b, n);
  if (checked_mul(count_a, count_b) > cap) {
    throw Error(ErrorCode::EnumerationCapExceeded,
                std::to_string(count_a) + " x " + std::to_string(count_b) +
                    " periodic points exceed the cap " + std::to_string(cap));
  }
  std::int64_t da = 1, db = 1;
  const auto xs = torus_fixed_points(int_power(a.matrix, n), da);
  const auto ys = torus_fixed_points(int_power(b.matrix, n), db);
  const std::int64_t den = checked_mul(da, db);

  std::vector<RationalTorusPoint> out;
  out.reserve(xs.size() * ys.size());
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      RationalTorusPoint p;
      p.denominator = den;
      p.numerators = {x[0] * db, x[1] * db, y[0] * da, y[1] * da};
      out.push_back(p);
    }
  }
  return out;
}

bool is_linear_periodic(const ToralAutomorphism& a, const ToralAutomorphism& b, int n,
                        const RationalTorusPoint& z) {
  const IntMat2 an = int_power(a.matrix, n);
  const IntMat2 bn = int_power(b.matrix, n);
  const auto& v = z.numerators;
  const std::int64_t d = z.denominator;
  auto fixed = [&](const IntMat2& m, std::int64_t p0, std::int64_t p1) {
    const std::int64_t r0 = checked_add(checked_mul(m(0, 0), p0), checked_mul(m(0, 1), p1)) - p0;
    const std::int64_t r1 = checked_add(checked_mul(m(1, 0), p0), checked_mul(m(1, 1), p1)) - p1;
    return r0 % d == 0 && r1 % d == 0;
  };
  return fixed(an, v[0], v[1]) && fixed(bn, v[2], v[3]);
}

std::vector<Resonance> check_nonresonance(const EigenQuadruple& q, int max_degree, double rtol) {
  const auto lambdas = q.as_array();
  std::vector<Resonance> out;
  std::array<int, 4> alpha{};
  for (alpha[0] = -max_degree; alpha[0] <= max_degree; ++alpha[0]) {
    for (alpha[1] = -max_degree; alpha[1] <= max_degree; ++alpha[1]) {
      for (alpha[2] = -max_degree; alpha[2] <= max_degree; ++alpha[2]) {
        for (alpha[3] = -max_degree; alpha[3] <= max_degree; ++alpha[3]) {
          const int order = std::abs(alpha[0]) + std::abs(alpha[1]) + std::abs(alpha[2]) +
                            std::abs(alpha[3]);
          if (order > max_degree) continue;
          double value = 1.0;
          for (int j = 0; j < 4; ++j) value *= std::pow(lambdas[j], alpha[j]);
          for (int i = 0; i < 4; ++i) {
            bool unit = true;
            for (int j = 0; j < 4; ++j) unit = unit && alpha[j] == (i == j ? 1 : 0);
            if (unit) continue;
            const double gap = std::abs(lambdas[i] - value) / lambdas[i];
            if (gap < rtol) out.push_back({i + 1, alpha, gap});
          }
        }
      }
    }
  }
  return out;
}

}  // namespace anosov
