#include "anosov/maps.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "anosov/error.hpp"

namespace anosov {
namespace {

// max_s s |rho'(s)| = 30 s^3 (1-s)^2 at s = 3/5
constexpr double kProfileSlope = 1.0368;

Eigen::Matrix<double, 4, Eigen::Dynamic> orthonormalize(const Eigen::Matrix<double, 4, Eigen::Dynamic>& x,
                                                        double* log_volume = nullptr) {
  Eigen::HouseholderQR<Eigen::Matrix<double, 4, Eigen::Dynamic>> qr(x);
  const long k = x.cols();
  Eigen::Matrix<double, 4, Eigen::Dynamic> q =
      qr.householderQ() * Eigen::Matrix<double, 4, Eigen::Dynamic>::Identity(4, k);
  const auto& r = qr.matrixQR();
  double lv = 0.0;
  for (long i = 0; i < k; ++i) {
    lv += std::log(std::abs(r(i, i)));
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  if (log_volume) *log_volume = lv;
  return q;
}

Eigen::Matrix<double, 4, Eigen::Dynamic> generic_block(int cols) {
  Eigen::Matrix4d g;
  g << 0.61, -0.27, 0.35, 0.18,
       -0.44, 0.53, 0.29, -0.33,
       0.38, 0.41, -0.57, 0.26,
       0.52, 0.19, 0.31, 0.71;
  return g.leftCols(cols);
}

// Unit vector spanning plane ∩ hyperplane, both given by orthonormal bases.
Eigen::Vector4d intersect(const Eigen::Matrix<double, 4, Eigen::Dynamic>& plane,
                          const Eigen::Matrix<double, 4, Eigen::Dynamic>& hyper, double tol,
                          const char* name) {
  Eigen::HouseholderQR<Eigen::Matrix<double, 4, Eigen::Dynamic>> qr(hyper);
  const Eigen::Matrix4d q = qr.householderQ();
  const Eigen::Vector4d normal = q.col(3);
  const Eigen::Vector2d w = plane.transpose() * normal;
  if (w.norm() < tol) {
    throw Error(ErrorCode::SplittingCollapse,
                std::string("plane nearly inside hyperplane while computing ") + name);
  }
  Eigen::Vector4d e = plane * Eigen::Vector2d(-w(1), w(0));
  return e.normalized();
}

void orient(Eigen::Vector4d& v, const Eigen::Vector4d& ref) {
  if (v.dot(ref) < 0.0) v = -v;
}

struct Pass {
  Eigen::Vector4d e_ss, e_uu;
  Eigen::Matrix<double, 4, Eigen::Dynamic> e_u, e_s, e_cs, e_cu;
  std::array<double, 4> rates{};
};

// Points F^k(z) for -back <= k <= fwd; backward points come from f.inverse, forward ones from f.step.
class PseudoOrbit {
 public:
  PseudoOrbit(const DynamicalMap& f, const Eigen::Vector4d& z, int back, int fwd)
      : pts_(static_cast<std::size_t>(back + fwd + 1)), zero_(back) {
    pts_[static_cast<std::size_t>(back)] = z;
    for (int k = back - 1; k >= 0; --k) pts_[static_cast<std::size_t>(k)] = f.inverse(pts_[static_cast<std::size_t>(k + 1)]);
    for (int k = back + 1; k <= back + fwd; ++k) pts_[static_cast<std::size_t>(k)] = f.step(pts_[static_cast<std::size_t>(k - 1)]);
  }
  const Eigen::Vector4d& at(int k) const { return pts_[static_cast<std::size_t>(zero_ + k)]; }

 private:
  std::vector<Eigen::Vector4d> pts_;
  int zero_;
};

// Subspace iteration over the window [j - depth, j + depth] of the pseudo-orbit.
Pass splitting_pass(const DynamicalMap& f, const PseudoOrbit& orbit, int j, int depth) {
  Pass p;
  Eigen::Matrix<double, 4, Eigen::Dynamic> u = orthonormalize(generic_block(2));
  Eigen::Matrix<double, 4, Eigen::Dynamic> cu = orthonormalize(generic_block(3));
  Eigen::Vector4d uu = generic_block(1).col(0).normalized();
  for (int k = j - depth; k < j; ++k) {
    const Eigen::Matrix4d m = f.differential(orbit.at(k));
    u = orthonormalize(m * u);
    cu = orthonormalize(m * cu);
    uu = (m * uu).normalized();
  }
  Eigen::Matrix<double, 4, Eigen::Dynamic> s = orthonormalize(generic_block(2));
  Eigen::Matrix<double, 4, Eigen::Dynamic> cs = orthonormalize(generic_block(3));
  Eigen::Vector4d ss = generic_block(1).col(0).normalized();
  for (int k = j + depth - 1; k >= j; --k) {
    const auto lu = f.differential(orbit.at(k)).partialPivLu();
    s = orthonormalize(lu.solve(s));
    cs = orthonormalize(lu.solve(cs));
    ss = lu.solve(ss).normalized();
  }
  p.e_u = u;
  p.e_cu = cu;
  p.e_uu = uu;
  p.e_s = s;
  p.e_cs = cs;
  p.e_ss = ss;

  // growth along the window that follows z (forward) or precedes it (backward)
  double g_uu = 0.0, g_u = 0.0;
  Eigen::Matrix<double, 4, Eigen::Dynamic> plane = u;
  Eigen::Vector4d v = uu;
  for (int k = j; k < j + depth; ++k) {
    const Eigen::Matrix4d m = f.differential(orbit.at(k));
    double lv = 0.0;
    plane = orthonormalize(m * plane, &lv);
    g_u += lv;
    v = m * v;
    g_uu += std::log(v.norm());
    v.normalize();
  }
  double g_ss = 0.0, g_s = 0.0;
  plane = s;
  v = ss;
  for (int k = j - 1; k >= j - depth; --k) {
    const auto lu = f.differential(orbit.at(k)).partialPivLu();
    double lv = 0.0;
    plane = orthonormalize(lu.solve(plane), &lv);
    g_s += lv;
    v = lu.solve(v);
    g_ss += std::log(v.norm());
    v.normalize();
  }
  const double d = depth;
  p.rates = {std::exp(-g_ss / d), std::exp(-(g_s - g_ss) / d), std::exp((g_u - g_uu) / d),
             std::exp(g_uu / d)};
  return p;
}

void check_c1(const DynamicalMap& f, const SplittingOptions& opts) {
  if (f.c1_norm_bound() > opts.c1_threshold) {
    throw Error(ErrorCode::C1BoundExceeded, "c1_norm_bound " + std::to_string(f.c1_norm_bound()) +
                                                " above threshold " +
                                                std::to_string(opts.c1_threshold));
  }
}

// Doubles the depth at the orbit origin until the rates settle; returns the final pass and depth.
std::pair<Pass, int> settle_depth(const DynamicalMap& f, const PseudoOrbit& orbit, const SplittingOptions& opts) {
  int depth = opts.depth;
  Pass pass = splitting_pass(f, orbit, 0, depth);
  for (int k = 0; k < opts.max_doublings; ++k) {
    Pass next = splitting_pass(f, orbit, 0, 2 * depth);
    depth *= 2;
    double change = 0.0;
    for (int i = 0; i < 4; ++i) {
      change = std::max(change, std::abs(next.rates[i] - pass.rates[i]) / pass.rates[i]);
    }
    pass = std::move(next);
    if (change < opts.rate_tol) break;
  }
  return {std::move(pass), depth};
}

SplittingFrame make_frame(const DynamicalMap& f, const Pass& pass, const Eigen::Vector4d& point, int depth,
                          const SplittingOptions& opts) {
  SplittingFrame frame;
  frame.point = point;
  frame.depth_used = depth;
  frame.e_uu = pass.e_uu;
  frame.e_ss = pass.e_ss;
  frame.e_wu = intersect(pass.e_u, pass.e_cs, opts.collapse_angle, "e_wu");
  frame.e_ws = intersect(pass.e_s, pass.e_cu, opts.collapse_angle, "e_ws");
  const Eigen::Matrix4d ref = f.base().linear_frame();
  orient(frame.e_ss, ref.col(0));
  orient(frame.e_ws, ref.col(1));
  orient(frame.e_wu, ref.col(2));
  orient(frame.e_uu, ref.col(3));
  for (int i = 0; i < 4; ++i) {
    for (int k = i + 1; k < 4; ++k) {
      if (line_angle(frame.leg(i), frame.leg(k)) < opts.collapse_angle) {
        throw Error(ErrorCode::SplittingCollapse, "two legs of the splitting coincide");
      }
    }
  }
  frame.rates = pass.rates;
  return frame;
}

}  // namespace

Eigen::Vector4d wrap4(const Eigen::Vector4d& z) {
  Eigen::Vector4d r;
  for (int i = 0; i < 4; ++i) {
    r(i) = z(i) - std::floor(z(i));
    if (r(i) >= 1.0) r(i) = 0.0;
  }
  return r;
}

Eigen::Vector4d wrapped_difference(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  Eigen::Vector4d d = a - b;
  for (int i = 0; i < 4; ++i) d(i) -= std::floor(d(i) + 0.5);
  return d;
}

double torus_distance(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  return wrapped_difference(a, b).cwiseAbs().maxCoeff();
}

double line_angle(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const Eigen::VectorXd a = u.normalized();
  const Eigen::VectorXd b = v.normalized();
  const double c = std::abs(a.dot(b));
  const double s = (a - a.dot(b) * b).norm();
  return std::atan2(s, c);
}

Eigen::Vector4d apply(const DynamicalMap& f, const Eigen::Vector4d& z, int n) {
  Eigen::Vector4d w = wrap4(z);
  for (int i = 0; i < n; ++i) w = f.step(w);
  for (int i = 0; i > n; --i) w = f.inverse(w);
  return w;
}

SkewProduct::SkewProduct(ToralAutomorphism a, ToralAutomorphism b, TrigMap phi)
    : a_(std::move(a)), b_(std::move(b)), phi_(std::move(phi)) {
  phi_.check_reality(1e-12);
  am_ = a_.as_real();
  bm_ = b_.as_real();
  a_inv_ = a_.inverse().cast<double>();
  b_inv_ = b_.inverse().cast<double>();
}

Eigen::Vector4d SkewProduct::lift(const Eigen::Vector4d& z) const {
  const Eigen::Vector2d x = z.head<2>();
  Eigen::Vector4d out;
  out.head<2>() = am_ * x;
  out.tail<2>() = bm_ * z.tail<2>() + evaluate(phi_, x);
  return out;
}

Eigen::Matrix4d SkewProduct::differential(const Eigen::Vector4d& z) const {
  Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
  d.topLeftCorner<2, 2>() = am_;
  d.bottomRightCorner<2, 2>() = bm_;
  if (!phi_.empty()) d.bottomLeftCorner<2, 2>() = jacobian(phi_, z.head<2>());
  return d;
}

Eigen::Vector4d SkewProduct::inverse(const Eigen::Vector4d& z) const {
  const Eigen::Vector4d w = wrap4(z);
  Eigen::Vector4d out;
  out.head<2>() = a_inv_ * w.head<2>();
  const Eigen::Vector4d x = wrap4(out);
  out.tail<2>() = b_inv_ * (w.tail<2>() - evaluate(phi_, x.head<2>()));
  return wrap4(out);
}

Eigen::Matrix4d SkewProduct::linear_frame() const {
  Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
  v.block<2, 1>(0, 0) = a_.e_s;
  v.block<2, 1>(2, 1) = b_.e_s;
  v.block<2, 1>(2, 2) = b_.e_u;
  v.block<2, 1>(0, 3) = a_.e_u;
  return v;
}

double bump_profile(double s) {
  if (s >= 1.0) return 0.0;
  const double s3 = s * s * s;
  return 1.0 - s3 * (10.0 - 15.0 * s + 6.0 * s * s);
}

double bump_profile_derivative(double s) {
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s;
  return -30.0 * s * s * t * t;
}

PerturbedMap::PerturbedMap(SkewProduct base, std::vector<Bump> bumps)
    : base_(std::move(base)), bumps_(std::move(bumps)) {
  const Eigen::Matrix4d v = base_.linear_frame();
  const Eigen::Matrix4d v_inv = v.inverse();
  for (const auto& b : bumps_) {
    if (!(b.radius > 0.0 && b.radius < 0.5)) {
      throw Error(ErrorCode::InvalidModel, "bump radius must lie in (0, 1/2)");
    }
    Eigen::Vector4d c(b.coefficients[0], b.coefficients[1], b.coefficients[2], b.coefficients[3]);
    const Eigen::Matrix4d m = v * c.asDiagonal() * v_inv;
    const double op_norm = Eigen::JacobiSVD<Eigen::Matrix4d>(m).singularValues()(0);
    if (op_norm * (1.0 + kProfileSlope) >= 0.5) {
      throw Error(ErrorCode::C1BoundExceeded,
                  "bump displacement differential may reach 0.5 (bound " +
                      std::to_string(op_norm * (1.0 + kProfileSlope)) + ")");
    }
    c1_bound_ += c.cwiseAbs().maxCoeff() * (1.0 + kProfileSlope);
    matrices_.push_back(m);
  }
}

bool PerturbedMap::in_support(const Eigen::Vector4d& z) const {
  for (const auto& b : bumps_) {
    if (wrapped_difference(z, b.center).norm() < b.radius) return true;
  }
  return false;
}

Eigen::Vector4d PerturbedMap::displacement(const Eigen::Vector4d& z) const {
  Eigen::Vector4d d = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < bumps_.size(); ++i) {
    const Eigen::Vector4d w = wrapped_difference(z, bumps_[i].center);
    const double s = w.norm() / bumps_[i].radius;
    if (s >= 1.0) continue;
    d += bump_profile(s) * (matrices_[i] * w);
  }
  return d;
}

Eigen::Matrix4d PerturbedMap::displacement_differential(const Eigen::Vector4d& z) const {
  Eigen::Matrix4d dd = Eigen::Matrix4d::Zero();
  for (std::size_t i = 0; i < bumps_.size(); ++i) {
    const Eigen::Vector4d w = wrapped_difference(z, bumps_[i].center);
    const double r = w.norm();
    const double s = r / bumps_[i].radius;
    if (s >= 1.0) continue;
    dd += bump_profile(s) * matrices_[i];
    if (r > 0.0) {
      dd += (matrices_[i] * w) *
            (bump_profile_derivative(s) / (bumps_[i].radius * r) * w.transpose());
    }
  }
  return dd;
}

Eigen::Vector4d PerturbedMap::lift(const Eigen::Vector4d& z) const {
  if (!in_support(z)) return base_.lift(z);
  return base_.lift(z + displacement(z));
}

Eigen::Matrix4d PerturbedMap::differential(const Eigen::Vector4d& z) const {
  if (!in_support(z)) return base_.differential(z);
  const Eigen::Matrix4d dd = displacement_differential(z);
  return base_.differential(z + displacement(z)) * (Eigen::Matrix4d::Identity() + dd);
}

double PerturbedMap::log_jacobian(const Eigen::Vector4d& z) const {
  if (!in_support(z)) return 0.0;
  return std::log((Eigen::Matrix4d::Identity() + displacement_differential(z)).determinant());
}

Eigen::Vector4d PerturbedMap::inverse(const Eigen::Vector4d& z) const {
  // Solve x + d(x) = u with u = L^{-1}(z) on lifts near u.
  const Eigen::Vector4d u = base_.inverse(z);
  if (bumps_.empty()) return u;
  Eigen::Vector4d x = u;
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector4d r = x + displacement(x) - u;
    if (r.cwiseAbs().maxCoeff() < 1e-15) return wrap4(x);
    const Eigen::Matrix4d j = Eigen::Matrix4d::Identity() + displacement_differential(x);
    x -= j.partialPivLu().solve(r);
  }
  const Eigen::Vector4d r = x + displacement(x) - u;
  if (r.cwiseAbs().maxCoeff() < 1e-13) return wrap4(x);
  throw Error(ErrorCode::InverseNewtonDiverged, "inverse Newton did not reach 1e-13");
}

const Eigen::Vector4d& SplittingFrame::leg(int i) const {
  switch (i) {
    case 0: return e_ss;
    case 1: return e_ws;
    case 2: return e_wu;
    default: return e_uu;
  }
}

SplittingFrame compute_splitting(const DynamicalMap& f, const Eigen::Vector4d& z,
                                 const SplittingOptions& opts) {
  check_c1(f, opts);
  const int reach = opts.depth << opts.max_doublings;
  const PseudoOrbit orbit(f, wrap4(z), reach, reach);
  const auto [pass, depth] = settle_depth(f, orbit, opts);
  return make_frame(f, pass, orbit.at(0), depth, opts);
}

std::vector<SplittingFrame> compute_splitting_orbit(const DynamicalMap& f, const Eigen::Vector4d& z, int steps,
                                                    const SplittingOptions& opts) {
  check_c1(f, opts);
  const int reach = opts.depth << opts.max_doublings;
  const PseudoOrbit orbit(f, wrap4(z), reach, reach + steps);
  const auto [first, depth] = settle_depth(f, orbit, opts);
  std::vector<SplittingFrame> frames{make_frame(f, first, orbit.at(0), depth, opts)};
  for (int j = 1; j <= steps; ++j) {
    frames.push_back(make_frame(f, splitting_pass(f, orbit, j, depth), orbit.at(j), depth, opts));
  }
  return frames;
}

double invariance_angle(const DynamicalMap& f, const SplittingFrame& at_z,
                        const SplittingFrame& at_fz) {
  const Eigen::Matrix4d d = f.differential(at_z.point);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    worst = std::max(worst, line_angle(d * at_z.leg(i), at_fz.leg(i)));
  }
  return worst;
}

}  // namespace anosov
