#include "anosov/cohomology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "anosov/error.hpp"
#include "anosov/numerics.hpp"

namespace anosov {
namespace {

Eigen::Vector2d wrap(const Eigen::Vector2d& v) {
  return {v(0) - std::floor(v(0)), v(1) - std::floor(v(1))};
}

double wrapped_distance(double a, double b) {
  double d = a - b;
  d -= std::round(d);
  return std::abs(d);
}

double torus_distance(const Eigen::Vector4d& p, const Eigen::Vector4d& q) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, wrapped_distance(p(i), q(i)));
  return m;
}

// Per-frequency compensated accumulators for (re, im) x (s, u).
using Accumulator = std::map<Freq, std::array<CompensatedSum, 4>>;

void accumulate(Accumulator& acc, const Freq& k, int component, std::complex<double> c) {
  auto& slot = acc[k];
  slot[2 * component] += c.real();
  slot[2 * component + 1] += c.imag();
}

Eigen::Vector4d skew_apply(const ToralAutomorphism& a, const ToralAutomorphism& b,
                           const TrigMap& phi, const Eigen::Vector4d& z) {
  const Eigen::Vector2d x = z.head<2>();
  const Eigen::Vector2d y = z.tail<2>();
  Eigen::Vector4d out;
  out.head<2>() = wrap(a.as_real() * x);
  out.tail<2>() = wrap(b.as_real() * y + evaluate(phi, x));
  return out;
}

}  // namespace

Eigen::Matrix2d eigenbasis(const ToralAutomorphism& b) {
  Eigen::Matrix2d v;
  v.col(0) = b.e_s;
  v.col(1) = b.e_u;
  return v;
}

CohomologySolution solve_cohomology(const ToralAutomorphism& a, const ToralAutomorphism& b,
                                    const TrigMap& g, const CohomologyOptions& opts) {
  g.check_reality(1e-12);
  const double mu = b.small_eig;
  const double eps = opts.trunc_eps;
  if (!(eps > 0.0)) throw Error(ErrorCode::NoConvergence, "trunc_eps must be positive");

  const Eigen::Matrix2d v = eigenbasis(b);
  const TrigMap g_eigen = transform_coefficients(g, v.inverse());

  Accumulator acc;
  std::size_t transported = 0;
  for (const auto& [k, c] : g_eigen.terms) {
    const std::complex<double> cs = c[0];
    const std::complex<double> cu = c[1];
    if (k[0] == 0 && k[1] == 0) {
      // psi_s - mu psi_s = c_s, psi_u - mu^{-1} psi_u = c_u
      const double ds = 1.0 - mu;
      const double du = 1.0 - 1.0 / mu;
      if (std::abs(ds) < 1e-14 || std::abs(du) < 1e-14) {
        throw Error(ErrorCode::MeanObstruction, "B has an eigenvalue at 1");
      }
      accumulate(acc, k, 0, cs / ds);
      accumulate(acc, k, 1, cu / du);
      continue;
    }
    // Unstable: psi_u = -sum_{n>=0} mu^{n+1} g_u o A^n. Stopping after term n-1 leaves
    // residual mu^n |c_u|, so include term n while that exceeds eps/2.
    if (std::abs(cu) > 0.0) {
      Freq kn = k;
      double w = mu;  // mu^{n+1}
      int n = 0;
      while (w / mu * std::abs(cu) >= 0.5 * eps) {
        if (n >= opts.orbit_cap) {
          throw Error(ErrorCode::NoConvergence, "unstable series did not reach trunc_eps");
        }
        accumulate(acc, kn, 1, -w * cu);
        ++transported;
        auto next = try_pushforward_frequency(a, kn, 1);
        if (!next) throw Error(ErrorCode::NoConvergence, "frequency transport overflows int64");
        kn = *next;
        w *= mu;
        ++n;
      }
    }
    // Stable: psi_s = sum_{n>=1} mu^{n-1} g_s o A^{-n}; stopping after term n leaves mu^n |c_s|.
    if (std::abs(cs) > 0.0) {
      double w = 1.0;  // mu^{n-1}
      int n = 1;
      auto kn = try_pushforward_frequency(a, k, -1);
      while (true) {
        if (!kn) throw Error(ErrorCode::NoConvergence, "frequency transport overflows int64");
        if (n > opts.orbit_cap) {
          throw Error(ErrorCode::NoConvergence, "stable series did not reach trunc_eps");
        }
        accumulate(acc, *kn, 0, w * cs);
        ++transported;
        if (w * mu * std::abs(cs) < 0.5 * eps) break;
        kn = try_pushforward_frequency(a, *kn, -1);
        w *= mu;
        ++n;
      }
    }
  }

  CohomologySolution sol;
  sol.psi_eigen.basis = "B_eigen";
  for (const auto& [k, s] : acc) {
    sol.psi_eigen.terms[k] = {std::complex<double>(s[0].value(), s[1].value()),
                              std::complex<double>(s[2].value(), s[3].value())};
  }
  sol.psi_eigen.truncation_eps = eps;
  sol.psi = transform_coefficients(sol.psi_eigen, v);
  sol.psi.basis = "standard";
  sol.truncation_eps = eps;
  sol.transported_terms = transported;
  sol.predicted_alpha = std::log(mu) / std::log(a.small_eig);
  sol.residual_sup = cohomology_residual(a, b, sol.psi, g, opts.residual_grid);
  return sol;
}

double cohomology_residual(const ToralAutomorphism& a, const ToralAutomorphism& b,
                           const TrigMap& psi, const TrigMap& g, int grid) {
  const Eigen::Matrix2d am = a.as_real();
  const Eigen::Matrix2d bm = b.as_real();
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Eigen::Vector2d x(static_cast<double>(i) / grid, static_cast<double>(j) / grid);
      const Eigen::Vector2d r = evaluate(psi, wrap(am * x)) - bm * evaluate(psi, x) - evaluate(g, x);
      worst = std::max(worst, r.norm());
    }
  }
  return worst;
}

Eigen::Vector4d ConjugacyMap::apply(const Eigen::Vector4d& z) const {
  Eigen::Vector4d out = z;
  out.tail<2>() = wrap(z.tail<2>() + evaluate(psi, z.head<2>()));
  return out;
}

Eigen::Vector4d ConjugacyMap::apply_inverse(const Eigen::Vector4d& z) const {
  Eigen::Vector4d out = z;
  out.tail<2>() = wrap(z.tail<2>() - evaluate(psi, z.head<2>()));
  return out;
}

ConjugacyMap ConjugacyMap::compose(const ConjugacyMap& other) const {
  return {psi + other.psi};
}

ConjugacyMap build_conjugacy(const TrigMap& phi0, const TrigMap& phi1, const ToralAutomorphism& a,
                             const ToralAutomorphism& b, const CohomologyOptions& opts) {
  const CohomologySolution sol = solve_cohomology(a, b, phi1 - phi0, opts);
  return {sol.psi};
}

double conjugacy_residual(const ConjugacyMap& h, const TrigMap& phi0, const TrigMap& phi1,
                          const ToralAutomorphism& a, const ToralAutomorphism& b, int grid) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double x0 = static_cast<double>(i) / grid;
      const double x1 = static_cast<double>(j) / grid;
      const Eigen::Vector4d z(x0, x1, 0.5 * x1 + 0.25, 0.75 - 0.5 * x0);
      const Eigen::Vector4d lhs = h.apply(skew_apply(a, b, phi0, z));
      const Eigen::Vector4d rhs = skew_apply(a, b, phi1, h.apply(z));
      worst = std::max(worst, torus_distance(lhs, rhs));
    }
  }
  return worst;
}

double conjugacy_roundtrip_error(const ConjugacyMap& h, int samples) {
  const auto xs = low_discrepancy_points(samples);
  const auto ys = low_discrepancy_points(samples + 17);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Eigen::Vector4d z;
    z << xs[i], ys[i + 17];
    worst = std::max(worst, torus_distance(h.apply_inverse(h.apply(z)), z));
  }
  return worst;
}

std::string to_string(HolderMethod m) {
  return m == HolderMethod::Increments ? "increments" : "fourier_decay";
}

HolderMethod holder_method_from_string(const std::string& s) {
  if (s == "increments") return HolderMethod::Increments;
  if (s == "fourier_decay") return HolderMethod::FourierDecay;
  throw Error(ErrorCode::SchemaError, "unknown Hölder method '" + s + "'");
}

std::vector<Eigen::Vector2d> low_discrepancy_points(int count) {
  // plastic number
  constexpr double g = 1.32471795724474602596;
  constexpr double a1 = 1.0 / g;
  constexpr double a2 = 1.0 / (g * g);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double u = 0.5 + a1 * i;
    const double v = 0.5 + a2 * i;
    pts.emplace_back(u - std::floor(u), v - std::floor(v));
  }
  return pts;
}

HolderEstimate estimate_holder(const TrigMap& psi, HolderMethod method, const ToralAutomorphism& a,
                               const HolderOptions& opts) {
  HolderEstimate est;
  est.method = method;
  std::vector<double> xs, ys;

  if (method == HolderMethod::Increments) {
    const auto pts = low_discrepancy_points(opts.samples);
    std::vector<Eigen::Vector2d> base;
    base.reserve(pts.size());
    for (const auto& p : pts) base.push_back(evaluate(psi, p));
    for (int j = opts.j_min; j <= opts.j_max; ++j) {
      const double h = std::ldexp(1.0, -j);
      double sup = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Eigen::Vector2d shifted = wrap(pts[i] + h * a.e_u);
        sup = std::max(sup, (evaluate(psi, shifted) - base[i]).norm());
      }
      if (!(sup > 1e-13) || !std::isfinite(sup)) continue;
      est.scales.push_back(h);
      est.values.push_back(sup);
      xs.push_back(std::log(h));
      ys.push_back(std::log(sup));
    }
  } else {
    const double floor_coef =
        opts.min_coefficient > 0.0 ? opts.min_coefficient : 100.0 * psi.truncation_eps;
    for (const auto& [k, c] : psi.terms) {
      if (k[0] == 0 && k[1] == 0) continue;
      // one representative per conjugate pair
      if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) continue;
      const double mag = std::max(std::abs(c[0]), std::abs(c[1]));
      if (!(mag > floor_coef)) continue;
      est.scales.push_back(frequency_norm(k));
      est.values.push_back(mag);
      xs.push_back(-std::log(frequency_norm(k)));
      ys.push_back(std::log(mag));
    }
  }

  if (xs.size() < 4) {
    throw Error(ErrorCode::InsufficientScales,
                "only " + std::to_string(xs.size()) + " usable scales");
  }
  const LinearFit fit = fit_line(xs, ys);
  est.alpha_hat = fit.slope;
  est.fit_r2 = fit.r2;
  est.residuals = fit.residuals;
  const auto [lo, hi] = std::minmax_element(est.scales.begin(), est.scales.end());
  est.scale_range = {*lo, *hi};
  est.saturated = est.alpha_hat > 0.98;
  est.trusted = est.fit_r2 >= 0.9 && !est.saturated && est.alpha_hat > 0.0 && est.alpha_hat < 1.5;
  return est;
}

}  // namespace anosov
