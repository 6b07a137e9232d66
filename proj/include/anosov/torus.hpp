#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace anosov {

using IntMat2 = Eigen::Matrix<std::int64_t, 2, 2>;
using IntVec2 = Eigen::Matrix<std::int64_t, 2, 1>;

/// Hyperbolic element of SL(2,Z) with positive eigenvalues, plus its eigendata.
struct ToralAutomorphism {
  IntMat2 matrix;
  std::int64_t det = 1;
  std::int64_t trace = 0;
  double small_eig = 0.0;  // in (0,1)
  double large_eig = 0.0;  // = 1 / small_eig
  Eigen::Vector2d e_s;     // unit, matrix * e_s = small_eig * e_s
  Eigen::Vector2d e_u;     // unit, matrix * e_u = large_eig * e_u

  Eigen::Matrix2d as_real() const { return matrix.cast<double>(); }
  /// Exact integer inverse (det = 1).
  IntMat2 inverse() const;
};

/// Validates and builds eigendata. Throws NotUnimodular, NotHyperbolic,
/// NegativeEigenvalues (trace < -2 is outside the supported class).
ToralAutomorphism hyperbolic_eigen(const IntMat2& matrix);

/// Exact power with overflow detection (throws EnumerationCapExceeded on overflow).
IntMat2 int_power(const IntMat2& m, int n);

/// Moduli of the return map at a periodic point, sorted mu_hat < mu < 1 < lam < lam_hat.
struct EigenQuadruple {
  double mu_hat = 0.0;
  double mu = 0.0;
  double lam = 0.0;
  double lam_hat = 0.0;

  /// Throws InvalidQuadruple unless the strict 4-way order holds.
  static EigenQuadruple make(double mu_hat, double mu, double lam, double lam_hat);
  std::array<double, 4> as_array() const { return {mu_hat, mu, lam, lam_hat}; }
};

/// A point of T^4 = T^2 x T^2 with rational coordinates numerators[i] / denominator in [0,1).
struct RationalTorusPoint {
  std::array<std::int64_t, 4> numerators{};
  std::int64_t denominator = 1;

  Eigen::Vector4d to_real() const;
  friend bool operator==(const RationalTorusPoint&, const RationalTorusPoint&) = default;
};

/// |det(M^n - I)|, the number of points of T^2 fixed by M^n.
std::int64_t fixed_point_count(const ToralAutomorphism& m, int n);

/// All z in T^4 with L_0^n(z) = z for L_0 = A x B, enumerated exactly through the
/// Hermite normal form of the lattice (M^n - I) Z^2 in each factor.
std::vector<RationalTorusPoint> periodic_points_linear(const ToralAutomorphism& a,
                                                       const ToralAutomorphism& b, int n,
                                                       std::int64_t cap = 4'000'000);

/// Exact check of L_0^n(z) = z in rational arithmetic.
bool is_linear_periodic(const ToralAutomorphism& a, const ToralAutomorphism& b, int n,
                        const RationalTorusPoint& z);

struct Resonance {
  int index = 0;                // 1-based i with lambda_i ~ Lambda^alpha
  std::array<int, 4> alpha{};   // multi-index, |alpha|_1 <= max_degree
  double relative_gap = 0.0;    // |lambda_i - Lambda^alpha| / lambda_i
};

/// Every (i, alpha) with |alpha|_1 <= max_degree, alpha != e_i and
/// |lambda_i - Lambda^alpha| < rtol * lambda_i. Empty means non-resonant.
std::vector<Resonance> check_nonresonance(const EigenQuadruple& q, int max_degree = 3,
                                          double rtol = 1e-9);

}  // namespace anosov
