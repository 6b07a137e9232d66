#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "anosov/fourier.hpp"
#include "anosov/torus.hpp"

namespace anosov {

/// Coordinates reduced to [0,1).
Eigen::Vector4d wrap4(const Eigen::Vector4d& z);
/// Componentwise difference reduced to [-1/2, 1/2).
Eigen::Vector4d wrapped_difference(const Eigen::Vector4d& a, const Eigen::Vector4d& b);
/// Max-metric on T^4, minimized over deck translations.
double torus_distance(const Eigen::Vector4d& a, const Eigen::Vector4d& b);
/// Unsigned angle between two lines in R^n.
double line_angle(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

class SkewProduct;

/// A diffeomorphism of T^4 homotopic to A x B.
class DynamicalMap {
 public:
  virtual ~DynamicalMap() = default;
  /// F on lifts: the result is not reduced, and lift(z + m) - lift(z) is an integer vector.
  virtual Eigen::Vector4d lift(const Eigen::Vector4d& z) const = 0;
  virtual Eigen::Matrix4d differential(const Eigen::Vector4d& z) const = 0;
  /// F^{-1}(z), reduced.
  virtual Eigen::Vector4d inverse(const Eigen::Vector4d& z) const = 0;
  /// log det DF(z).
  virtual double log_jacobian(const Eigen::Vector4d& z) const = 0;
  virtual const SkewProduct& base() const = 0;
  virtual double c1_norm_bound() const { return 0.0; }

  Eigen::Vector4d step(const Eigen::Vector4d& z) const { return wrap4(lift(z)); }
};

/// F^n(z) reduced mod 1; negative n iterates the inverse.
Eigen::Vector4d apply(const DynamicalMap& f, const Eigen::Vector4d& z, int n);

/// L_phi(x, y) = (Ax, By + phi(x)).
class SkewProduct final : public DynamicalMap {
 public:
  SkewProduct(ToralAutomorphism a, ToralAutomorphism b, TrigMap phi);

  Eigen::Vector4d lift(const Eigen::Vector4d& z) const override;
  Eigen::Matrix4d differential(const Eigen::Vector4d& z) const override;
  Eigen::Vector4d inverse(const Eigen::Vector4d& z) const override;
  double log_jacobian(const Eigen::Vector4d&) const override { return 0.0; }
  const SkewProduct& base() const override { return *this; }

  const ToralAutomorphism& a() const { return a_; }
  const ToralAutomorphism& b() const { return b_; }
  const TrigMap& phi() const { return phi_; }
  /// Columns (e_s^A,0), (0,e_s^B), (0,e_u^B), (e_u^A,0): the frame of L_0.
  Eigen::Matrix4d linear_frame() const;

 private:
  ToralAutomorphism a_;
  ToralAutomorphism b_;
  TrigMap phi_;
  Eigen::Matrix2d am_, bm_, a_inv_, b_inv_;
};

/// Displacement d(w) = rho(|w|/r) V diag(c) V^{-1} w around a center, w the wrapped offset,
/// with rho(s) = 1 - 10 s^3 + 15 s^4 - 6 s^5 on [0,1) and 0 beyond.
struct Bump {
  Eigen::Vector4d center = Eigen::Vector4d::Zero();
  double radius = 0.1;
  std::array<double, 4> coefficients{};  // along e_ss, e_ws, e_wu, e_uu of L_0
};

double bump_profile(double s);
double bump_profile_derivative(double s);

/// F(z) = L_phi(z + sum_b d_b(z)). Throws C1BoundExceeded if some sup |Dd_b| bound reaches 0.5,
/// InvalidModel if a radius is not in (0, 1/2).
class PerturbedMap final : public DynamicalMap {
 public:
  PerturbedMap(SkewProduct base, std::vector<Bump> bumps);

  Eigen::Vector4d lift(const Eigen::Vector4d& z) const override;
  Eigen::Matrix4d differential(const Eigen::Vector4d& z) const override;
  Eigen::Vector4d inverse(const Eigen::Vector4d& z) const override;
  double log_jacobian(const Eigen::Vector4d& z) const override;
  const SkewProduct& base() const override { return base_; }
  double c1_norm_bound() const override { return c1_bound_; }

  const std::vector<Bump>& bumps() const { return bumps_; }
  /// Total displacement and its differential at z.
  Eigen::Vector4d displacement(const Eigen::Vector4d& z) const;
  Eigen::Matrix4d displacement_differential(const Eigen::Vector4d& z) const;
  bool in_support(const Eigen::Vector4d& z) const;

 private:
  SkewProduct base_;
  std::vector<Bump> bumps_;
  std::vector<Eigen::Matrix4d> matrices_;
  double c1_bound_ = 0.0;
};

struct SplittingOptions {
  int depth = 60;
  int max_doublings = 3;
  double rate_tol = 1e-3;
  double c1_threshold = 0.05;
  double collapse_angle = 1e-6;
};

struct SplittingFrame {
  Eigen::Vector4d point = Eigen::Vector4d::Zero();
  Eigen::Vector4d e_ss, e_ws, e_wu, e_uu;
  std::array<double, 4> rates{};  // mu_hat, mu, lam, lam_hat estimates
  int depth_used = 0;

  const Eigen::Vector4d& leg(int i) const;
};

/// Throws C1BoundExceeded above the threshold, SplittingCollapse on ill-conditioned intersections.
SplittingFrame compute_splitting(const DynamicalMap& f, const Eigen::Vector4d& z,
                                 const SplittingOptions& opts = {});

/// Frames at z, F(z), ..., F^steps(z) computed along one shared pseudo-orbit. The strong legs are only
/// Holder in the base point, so frames from separately seeded pseudo-orbits through z and F(z)
/// can disagree far above rounding; consecutive frames from this call are mutually consistent.
std::vector<SplittingFrame> compute_splitting_orbit(const DynamicalMap& f, const Eigen::Vector4d& z, int steps,
                                                    const SplittingOptions& opts = {});

/// max over legs of angle(DF(z) e(z), e(F z)).
double invariance_angle(const DynamicalMap& f, const SplittingFrame& at_z,
                        const SplittingFrame& at_fz);

}  // namespace anosov
