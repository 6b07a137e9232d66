#include "anosov/local_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "anosov/error.hpp"
#include "anosov/numerics.hpp"

namespace anosov {
namespace {

template <class S>
using V4 = std::array<S, 4>;
template <class S>
using M4 = std::array<std::array<S, 4>, 4>;

template <class S>
S monomial_value(const Monomial& t, const V4<S>& x) {
  S v(t.coefficient);
  for (int i = 0; i < 4; ++i) {
    if (t.exponents[i] > 0) v = v * ipow(x[i], t.exponents[i]);
  }
  return v;
}

template <class S>
V4<S> glue(const Gluing& g, const V4<S>& z) {
  V4<S> d, out;
  for (int i = 0; i < 4; ++i) d[i] = z[i] - S(g.q(i));
  for (int i = 0; i < 4; ++i) {
    out[i] = S(g.q_prime(i));
    for (int j = 0; j < 4; ++j) out[i] += S(g.linear(i, j)) * d[j];
  }
  for (const auto& t : g.quadratic) out[t.out] += S(t.coefficient) * d[t.i] * d[t.j];
  return out;
}

template <class S>
M4<S> glue_jacobian(const Gluing& g, const V4<S>& z) {
  V4<S> d;
  for (int i = 0; i < 4; ++i) d[i] = z[i] - S(g.q(i));
  M4<S> j;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) j[r][c] = S(g.linear(r, c));
  }
  for (const auto& t : g.quadratic) {
    j[t.out][t.i] += S(t.coefficient) * d[t.j];
    j[t.out][t.j] += S(t.coefficient) * d[t.i];
  }
  return j;
}

template <class S>
S taubar_value(const Gluing& g, const V4<S>& z) {
  V4<S> d;
  for (int i = 0; i < 4; ++i) d[i] = z[i] - S(g.q(i));
  S v(0.0);
  for (int i = 0; i < 4; ++i) v += S(g.taubar_linear(i)) * d[i];
  for (const auto& t : g.taubar_quadratic) v += S(t.coefficient) * d[t.i] * d[t.j];
  return v;
}

// Gaussian elimination with partial pivoting; throws NewtonDiverged on a singular pivot.
template <class S>
V4<S> solve4(M4<S> a, V4<S> b) {
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r) {
      if (to_double(abs(a[r][c])) > to_double(abs(a[piv][c]))) piv = r;
    }
    if (to_double(abs(a[piv][c])) == 0.0) {
      throw Error(ErrorCode::NewtonDiverged, "singular shadowing Jacobian");
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 4; ++r) {
      const S f = a[r][c] / a[c][c];
      for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  V4<S> x;
  for (int r = 3; r >= 0; --r) {
    S s = b[r];
    for (int k = r + 1; k < 4; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

template <class S>
double max_abs(const V4<S>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(to_double(x)));
  return m;
}

template <class S>
Eigen::Vector4d to_eigen(const V4<S>& v) {
  return {to_double(v[0]), to_double(v[1]), to_double(v[2]), to_double(v[3])};
}

template <class S>
struct Solution {
  V4<S> u;  // (xi_hat', xi', eta, eta_hat)
  double residual = 0.0;
  int iterations = 0;
};

// Balanced multiple shooting: p_n = (mu_hat^n u0, mu^n u1, u2, u3), p_n' = (u0, u1, lam^-n u2, lam_hat^-n u3),
// residual Pi_bar(p_n) - p_n'.
template <class S>
class ShadowingProblem {
 public:
  ShadowingProblem(const LocalModel& m, int n) : m_(m), n_(n) {
    const auto e = m.eig.as_array();
    for (int i = 0; i < 2; ++i) {
      scale_[i] = ipow(S(e[i]), n);
      shrink_[i] = S(1.0);
    }
    for (int i = 2; i < 4; ++i) {
      scale_[i] = S(1.0);
      shrink_[i] = ipow(S(e[i]), -n);
    }
  }

  V4<S> p_n(const V4<S>& u) const {
    V4<S> z;
    for (int i = 0; i < 4; ++i) z[i] = scale_[i] * u[i];
    return z;
  }
  V4<S> p_n_prime(const V4<S>& u) const {
    V4<S> w;
    for (int i = 0; i < 4; ++i) w[i] = shrink_[i] * u[i];
    return w;
  }
  V4<S> residual(const V4<S>& u) const {
    const V4<S> img = glue(m_.gluing, p_n(u));
    const V4<S> w = p_n_prime(u);
    V4<S> r;
    for (int i = 0; i < 4; ++i) r[i] = img[i] - w[i];
    return r;
  }
  M4<S> jacobian(const V4<S>& u) const {
    M4<S> j = glue_jacobian(m_.gluing, p_n(u));
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) j[r][c] = j[r][c] * scale_[c];
      j[r][r] -= shrink_[r];
    }
    return j;
  }

  Solution<S> newton(V4<S> u, double tol, int max_it) const {
    V4<S> r = residual(u);
    double res = max_abs(r);
    double prev = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_it; ++it) {
      if (res <= tol && (res == 0.0 || res > 0.25 * prev || res < 1e-3 * tol)) break;
      const V4<S> du = solve4(jacobian(u), r);
      double step = 1.0;
      V4<S> trial;
      V4<S> r_trial;
      double res_trial = res;
      for (int h = 0; h < 40; ++h) {
        for (int i = 0; i < 4; ++i) trial[i] = u[i] - S(step) * du[i];
        r_trial = residual(trial);
        res_trial = max_abs(r_trial);
        if (res_trial < res) break;
        step *= 0.5;
      }
      if (!(res_trial < res)) break;
      prev = res;
      u = trial;
      r = r_trial;
      res = res_trial;
    }
    if (!(res <= tol) || !std::isfinite(res)) {
      std::ostringstream msg;
      msg << "shadowing Newton for n = " << n_ << " stopped at residual " << res;
      throw Error(ErrorCode::NewtonDiverged, msg.str());
    }
    return {u, res, it};
  }

 private:
  const LocalModel& m_;
  int n_;
  V4<S> scale_{};
  V4<S> shrink_{};
};

template <class S>
ShadowingOrbit shadowing_impl(const LocalModel& m, int n, const ShadowingOptions& opts, double tol) {
  if (n < 1) throw Error(ErrorCode::InvalidModel, "n must be >= 1");
  const ShadowingProblem<S> prob(m, n);
  const auto& g = m.gluing;
  const V4<S> seed{S(g.q_prime(0)), S(g.q_prime(1)), S(g.q(2)), S(g.q(3))};
  const Solution<S> sol = prob.newton(seed, tol, opts.max_iterations);

  if (opts.check_uniqueness) {
    for (int i = 0; i < 4; ++i) {
      for (double sign : {-1.0, 1.0}) {
        V4<S> other = seed;
        other[i] += S(sign * opts.uniqueness_offset);
        Solution<S> alt;
        try {
          alt = prob.newton(other, tol, opts.max_iterations);
        } catch (const Error&) {
          continue;
        }
        V4<S> diff;
        for (int k = 0; k < 4; ++k) diff[k] = alt.u[k] - sol.u[k];
        if (max_abs(diff) > 1e-8) {
          throw Error(ErrorCode::UniquenessSuspect,
                      "a second shadowing solution lies within the offset ball for n = " +
                          std::to_string(n));
        }
      }
    }
  }

  const V4<S> z = prob.p_n(sol.u);
  const V4<S> w = prob.p_n_prime(sol.u);
  const auto e = m.eig.as_array();

  S local(0.0);
  CompensatedSum local_c;
  for (int k = 0; k < n; ++k) {
    V4<S> x;
    for (int i = 0; i < 4; ++i) x[i] = ipow(S(e[i]), k) * w[i];
    for (const auto& t : m.tau.mixed_terms) {
      const S v = monomial_value(t, x);
      local += v;
      local_c += to_double(v);
    }
  }
  const S tb = taubar_value(g, z);

  ShadowingOrbit out;
  out.n = n;
  out.p_n = to_eigen(z);
  out.p_n_prime = to_eigen(w);
  out.residual = sol.residual;
  out.iterations = sol.iterations;
  out.taubar = to_double(tb);
  if constexpr (std::is_same_v<S, double>) {
    out.local_sum = local_c.value();
    CompensatedSum d;
    d += out.local_sum;
    d += out.taubar;
    out.deviation = d.value();
    CompensatedSum t;
    t += static_cast<double>(n) * m.tau.T;
    t += g.T_prime;
    t += out.deviation;
    out.T_n = t.value();
  } else {
    out.local_sum = to_double(local);
    const S dev = local + tb;
    out.deviation = to_double(dev);
    out.T_n = to_double(S(static_cast<double>(n)) * S(m.tau.T) + S(g.T_prime) + dev);
  }
  return out;
}

double tol_for(Precision p) { return p == Precision::Extended ? 1e-28 : 1e-13; }

}  // namespace

void ReturnTime::validate() const {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidModel, "return time T must be positive");
  for (const auto& t : mixed_terms) {
    const auto& e = t.exponents;
    for (int x : e) {
      if (x < 0) throw Error(ErrorCode::InvalidModel, "negative monomial exponent");
    }
    if (e[0] + e[1] < 1 || e[2] + e[3] < 1) {
      throw Error(ErrorCode::InvalidModel, "return-time monomial is not mixed stable x unstable");
    }
    if (e[0] + e[1] + e[2] + e[3] > 3) {
      throw Error(ErrorCode::InvalidModel, "return-time monomial degree exceeds 3");
    }
  }
}

double ReturnTime::operator()(const Eigen::Vector4d& x) const {
  const V4<double> v{x(0), x(1), x(2), x(3)};
  CompensatedSum s(T);
  for (const auto& t : mixed_terms) s += monomial_value(t, v);
  return s.value();
}

Eigen::Vector4d ReturnTime::gradient(const Eigen::Vector4d& x) const {
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  for (const auto& t : mixed_terms) {
    for (int i = 0; i < 4; ++i) {
      if (t.exponents[i] == 0) continue;
      double v = t.coefficient * t.exponents[i];
      for (int k = 0; k < 4; ++k) {
        const int p = t.exponents[k] - (k == i ? 1 : 0);
        if (p > 0) v *= std::pow(x(k), p);
      }
      g(i) += v;
    }
  }
  return g;
}

Eigen::Vector4d Gluing::map(const Eigen::Vector4d& z) const {
  const V4<double> v = glue(*this, V4<double>{z(0), z(1), z(2), z(3)});
  return to_eigen(v);
}

Eigen::Matrix4d Gluing::jacobian(const Eigen::Vector4d& z) const {
  const M4<double> j = glue_jacobian(*this, V4<double>{z(0), z(1), z(2), z(3)});
  Eigen::Matrix4d out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out(r, c) = j[r][c];
  }
  return out;
}

double Gluing::taubar(const Eigen::Vector4d& z) const {
  return taubar_value(*this, V4<double>{z(0), z(1), z(2), z(3)});
}

Eigen::Vector4d Gluing::taubar_gradient(const Eigen::Vector4d& z) const {
  const Eigen::Vector4d d = z - q;
  Eigen::Vector4d g = taubar_linear;
  for (const auto& t : taubar_quadratic) {
    g(t.i) += t.coefficient * d(t.j);
    g(t.j) += t.coefficient * d(t.i);
  }
  return g;
}

double Gluing::transversality_condition() const {
  const Eigen::Matrix2d block = jacobian(q).block<2, 2>(2, 2);
  const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::Matrix2d>(block).singularValues();
  return sv(1) > 0.0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
}

void LocalModel::validate() const {
  EigenQuadruple::make(eig.mu_hat, eig.mu, eig.lam, eig.lam_hat);
  if (!(eig.mu * eig.lam > 1.0)) {
    throw Error(ErrorCode::InvalidModel, "model is not center-expanding (mu * lam <= 1)");
  }
  const auto res = check_nonresonance(eig);
  if (!res.empty()) {
    std::ostringstream msg;
    msg << "resonance lambda_" << res.front().index << " = Lambda^(" << res.front().alpha[0] << ","
        << res.front().alpha[1] << "," << res.front().alpha[2] << "," << res.front().alpha[3] << ")";
    throw Error(ErrorCode::InvalidModel, msg.str());
  }
  tau.validate();
  const auto& g = gluing;
  if (g.q(0) != 0.0 || g.q(1) != 0.0 || !(std::abs(g.q(2)) < 1.0) || !(std::abs(g.q(3)) < 1.0)) {
    throw Error(ErrorCode::InvalidModel, "q must be (0, 0, eta, eta_hat) with |eta|, |eta_hat| < 1");
  }
  if (g.q_prime(2) != 0.0 || g.q_prime(3) != 0.0) {
    throw Error(ErrorCode::InvalidModel, "q' must lie on the stable plane");
  }
  if (!(g.T_prime > 0.0)) throw Error(ErrorCode::InvalidModel, "T' must be positive");
  for (const auto& t : g.quadratic) {
    if (t.out < 0 || t.out > 3 || t.i < 0 || t.i > 3 || t.j < 0 || t.j > 3) {
      throw Error(ErrorCode::InvalidModel, "quadratic gluing index out of range");
    }
  }
  for (const auto& t : g.taubar_quadratic) {
    if (t.i < 0 || t.i > 3 || t.j < 0 || t.j > 3) {
      throw Error(ErrorCode::InvalidModel, "quadratic excursion index out of range");
    }
  }
  const double cond = g.transversality_condition();
  if (!(cond < 1e6)) {
    throw Error(ErrorCode::TransversalityFailure,
                "unstable block of the gluing has condition number " + std::to_string(cond));
  }
}

Eigen::Vector4d LocalModel::linear_power(int k) const {
  const auto e = eig.as_array();
  return {ipow(e[0], k), ipow(e[1], k), ipow(e[2], k), ipow(e[3], k)};
}

TemplateData compute_templates(const LocalModel& m) {
  const auto& g = m.gluing;
  if (!(g.transversality_condition() < 1e6)) {
    throw Error(ErrorCode::TransversalityFailure, "gluing is not transverse at q");
  }
  const Eigen::Matrix4d j = g.jacobian(g.q);
  const Eigen::Matrix2d block = j.block<2, 2>(2, 2);
  const Eigen::Vector4d a = g.taubar_gradient(g.q);
  TemplateData out;
  for (int col = 0; col < 2; ++col) {
    const Eigen::Vector2d rhs = -j.block<2, 1>(2, col);
    const auto lu = block.fullPivLu();
    Eigen::Vector2d x = lu.solve(rhs);
    Eigen::Vector4d v = Eigen::Vector4d::Zero();
    v(col) = 1.0;
    v.tail<2>() = x;
    const double t = a.dot(v);
    // one step of iterative refinement as a conditioning check
    const Eigen::Vector2d refined = x + lu.solve(rhs - block * x);
    Eigen::Vector4d vr = v;
    vr.tail<2>() = refined;
    out.refinement_change = std::max(out.refinement_change, std::abs(a.dot(vr) - t));
    if (col == 0) {
      out.v_ss = v;
      out.t_ss = t;
    } else {
      out.v_ws = v;
      out.t_ws = t;
    }
  }
  return out;
}

SeriesResult compute_Pp(const LocalModel& m, double tail_eps) {
  const double mu = m.eig.mu;
  const double lam = m.eig.lam;
  const double lam_hat = m.eig.lam_hat;
  if (!(mu * lam > 1.0)) {
    throw Error(ErrorCode::DivergentSeries, "P_p diverges when mu * lam <= 1");
  }
  const double eta = m.gluing.q(2);
  const double eta_hat = m.gluing.q(3);
  // d_2 tau on the unstable plane only sees c * xi * eta^k * eta_hat^l
  std::vector<Monomial> active;
  for (const auto& t : m.tau.mixed_terms) {
    if (t.exponents[0] == 0 && t.exponents[1] == 1) active.push_back(t);
  }
  SeriesResult out;
  CompensatedSum sum;
  const double ratio = 1.0 / (mu * lam);
  double bound = 1.0;
  for (int l = 1; l <= 100000; ++l) {
    const double el = ipow(lam, -l) * eta;
    const double eh = ipow(lam_hat, -l) * eta_hat;
    for (const auto& t : active) {
      const double d2 = t.coefficient * ipow(el, t.exponents[2]) * ipow(eh, t.exponents[3]);
      sum += -ipow(mu, -l) * d2;
    }
    out.terms = l;
    bound *= ratio;
    if (bound < tail_eps) break;
  }
  out.value = sum.value();
  out.tail_bound = bound / (1.0 - ratio);
  return out;
}

std::string to_string(Precision p) { return p == Precision::Extended ? "extended" : "double"; }

Precision precision_from_string(const std::string& s) {
  if (s == "double") return Precision::Double;
  if (s == "extended") return Precision::Extended;
  throw Error(ErrorCode::SchemaError, "unknown precision '" + s + "'");
}

ShadowingOrbit find_shadowing_orbit(const LocalModel& m, int n, const ShadowingOptions& opts) {
  if (opts.precision == Precision::Extended) {
    return shadowing_impl<DoubleWord>(m, n, opts, tol_for(opts.precision));
  }
  return shadowing_impl<double>(m, n, opts, tol_for(opts.precision));
}

int find_n0(const LocalModel& m, int n_max, const ShadowingOptions& opts) {
  ShadowingOptions o = opts;
  o.check_uniqueness = false;
  for (int n = 1; n <= n_max; ++n) {
    try {
      find_shadowing_orbit(m, n, o);
      return n;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NewtonDiverged) throw;
    }
  }
  throw Error(ErrorCode::NewtonDiverged, "no n <= " + std::to_string(n_max) + " converges");
}

double gamma_exponent(double mu, double lam) {
  return 2.0 * std::log(lam) / (std::log(lam) - std::log(mu));
}

double theta_rate(double mu, double lam) { return std::pow(mu, gamma_exponent(mu, lam)); }

int ell_n(double mu, double lam, int n) {
  return static_cast<int>(std::floor(-std::log(mu) / (std::log(lam) - std::log(mu)) * n));
}

double ExpansionReport::relative_gap() const {
  const double scale = std::abs(omega_closed);
  const double gap = std::abs(omega_fit - omega_closed);
  if (scale == 0.0) return gap;
  return gap / scale;
}

int ExpansionReport::ell(int k) const { return ell_n(mu, lam, k); }

double zeta(const LocalModel& m, double tail_eps) {
  return compute_templates(m).t_ws - compute_Pp(m, tail_eps).value;
}

ExpansionReport expansion_experiment(const LocalModel& m, int n_min, int n_max,
                                     const ExpansionOptions& opts) {
  if (n_min < 1 || n_max - n_min < 8) {
    throw Error(ErrorCode::InvalidModel, "expansion needs n_min >= 1 and n_max - n_min >= 8");
  }
  m.validate();
  ExpansionReport rep;
  rep.n_min = n_min;
  rep.n_max = n_max;
  rep.mu = m.eig.mu;
  rep.lam = m.eig.lam;
  rep.theta = theta_rate(m.eig.mu, m.eig.lam);
  rep.gamma = gamma_exponent(m.eig.mu, m.eig.lam);
  const TemplateData tpl = compute_templates(m);
  rep.t_ws = tpl.t_ws;
  rep.P_p = compute_Pp(m, opts.tail_eps).value;
  rep.xi_inf = m.xi_inf();
  rep.omega_closed = rep.xi_inf * (rep.t_ws - rep.P_p);

  for (int n = n_min; n <= n_max; ++n) {
    const ShadowingOrbit o = find_shadowing_orbit(m, n, opts.shadowing);
    rep.n.push_back(n);
    rep.periods.push_back(o.T_n);
    rep.deviations.push_back(o.deviation);
    rep.omega_hats.push_back(o.deviation / ipow(m.eig.mu, n));
    rep.orbits.push_back(o);
  }

  const std::size_t count = rep.n.size();
  rep.usable.assign(count, false);
  for (std::size_t k = 2; k < count; ++k) {
    const double d = std::abs(rep.omega_hats[k] - rep.omega_hats[k - 1]);
    const double d_prev = std::abs(rep.omega_hats[k - 1] - rep.omega_hats[k - 2]);
    rep.usable[k] = d <= d_prev;
  }
  std::vector<double> tail;
  for (std::size_t k = count; k-- > 0 && static_cast<int>(tail.size()) < opts.tail_count;) {
    if (rep.usable[k]) tail.push_back(rep.omega_hats[k]);
  }
  if (tail.empty()) tail.push_back(rep.omega_hats.back());
  rep.omega_fit = compensated_sum(tail) / static_cast<double>(tail.size());

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < count; ++k) {
    const double r = std::abs(rep.omega_hats[k] - rep.omega_fit);
    rep.residuals.push_back(r);
    if (rep.n[k] <= n_max - opts.tail_count && r > 0.0) {
      xs.push_back(rep.n[k]);
      ys.push_back(std::log(r));
    }
  }
  if (xs.size() >= 3) {
    const LinearFit fit = fit_line(xs, ys);
    rep.residual_rate = fit.slope;
    rep.residual_fit_r2 = fit.r2;
  }
  return rep;
}

ExcursionReport excursion_term_check(const LocalModel& m, int n_min, int n_max,
                                     const ShadowingOptions& opts) {
  m.validate();
  ExcursionReport rep;
  const TemplateData tpl = compute_templates(m);
  rep.predicted_coefficient = m.xi_inf() * tpl.t_ws;
  rep.expected_rate = std::min(2.0 * std::abs(std::log(m.eig.mu)), std::log(m.eig.lam));
  std::vector<double> xs, ys;
  for (int n = n_min; n <= n_max; ++n) {
    const ShadowingOrbit o = find_shadowing_orbit(m, n, opts);
    const double mun = ipow(m.eig.mu, n);
    const double r = std::abs(o.taubar - rep.predicted_coefficient * mun);
    rep.n.push_back(n);
    rep.taubar.push_back(o.taubar);
    rep.scaled.push_back(o.taubar / mun);
    rep.residuals.push_back(r);
    if (r > 0.0) {
      xs.push_back(n);
      ys.push_back(std::log(r));
    }
  }
  rep.leading_coefficient = rep.scaled.back();
  const double scale = std::abs(rep.predicted_coefficient);
  rep.relative_error = scale > 0.0 ? std::abs(rep.leading_coefficient - rep.predicted_coefficient) / scale
                                   : std::abs(rep.leading_coefficient);
  if (xs.size() >= 3) rep.residual_rate = -fit_line(xs, ys).slope;
  return rep;
}

ShadowingDecay shadowing_decay(const LocalModel& m, int n_min, int n_max, const ShadowingOptions& opts) {
  ShadowingDecay out;
  std::vector<double> xs, d, a, b;
  const auto& qp = m.gluing.q_prime;
  for (int n = n_min; n <= n_max; ++n) {
    const ShadowingOrbit o = find_shadowing_orbit(m, n, opts);
    out.n.push_back(n);
    out.distance_to_q.push_back((o.p_n - m.gluing.q).norm());
    out.xi_hat_error.push_back(std::abs(o.p_n(0) - ipow(m.eig.mu_hat, n) * qp(0)));
    out.xi_error.push_back(std::abs(o.p_n(1) - ipow(m.eig.mu, n) * qp(1)));
    xs.push_back(n);
    d.push_back(std::log(out.distance_to_q.back()));
    a.push_back(std::log(out.xi_hat_error.back()));
    b.push_back(std::log(out.xi_error.back()));
  }
  out.distance_rate = fit_line(xs, d).slope;
  out.xi_hat_rate = fit_line(xs, a).slope;
  out.xi_rate = fit_line(xs, b).slope;
  return out;
}

LocalModel ModelFamily::at(double s) const {
  auto lerp = [s](double x, double y) { return (1.0 - s) * x + s * y; };
  const LocalModel& a = start;
  const LocalModel& b = end;
  if (a.tau.mixed_terms.size() != b.tau.mixed_terms.size() ||
      a.gluing.quadratic.size() != b.gluing.quadratic.size() ||
      a.gluing.taubar_quadratic.size() != b.gluing.taubar_quadratic.size()) {
    throw Error(ErrorCode::InvalidModel, "family endpoints have different term structures");
  }
  LocalModel m = a;
  m.eig = EigenQuadruple::make(lerp(a.eig.mu_hat, b.eig.mu_hat), lerp(a.eig.mu, b.eig.mu),
                               lerp(a.eig.lam, b.eig.lam), lerp(a.eig.lam_hat, b.eig.lam_hat));
  m.tau.T = lerp(a.tau.T, b.tau.T);
  for (std::size_t i = 0; i < a.tau.mixed_terms.size(); ++i) {
    if (a.tau.mixed_terms[i].exponents != b.tau.mixed_terms[i].exponents) {
      throw Error(ErrorCode::InvalidModel, "family endpoints have different monomials");
    }
    m.tau.mixed_terms[i].coefficient =
        lerp(a.tau.mixed_terms[i].coefficient, b.tau.mixed_terms[i].coefficient);
  }
  for (int i = 0; i < 4; ++i) {
    m.gluing.q(i) = lerp(a.gluing.q(i), b.gluing.q(i));
    m.gluing.q_prime(i) = lerp(a.gluing.q_prime(i), b.gluing.q_prime(i));
  }
  m.gluing.T_prime = lerp(a.gluing.T_prime, b.gluing.T_prime);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m.gluing.linear(r, c) = lerp(a.gluing.linear(r, c), b.gluing.linear(r, c));
    m.gluing.taubar_linear(r) = lerp(a.gluing.taubar_linear(r), b.gluing.taubar_linear(r));
  }
  for (std::size_t i = 0; i < a.gluing.quadratic.size(); ++i) {
    m.gluing.quadratic[i].coefficient =
        lerp(a.gluing.quadratic[i].coefficient, b.gluing.quadratic[i].coefficient);
  }
  for (std::size_t i = 0; i < a.gluing.taubar_quadratic.size(); ++i) {
    m.gluing.taubar_quadratic[i].coefficient =
        lerp(a.gluing.taubar_quadratic[i].coefficient, b.gluing.taubar_quadratic[i].coefficient);
  }
  return m;
}

namespace {

int sign_of(double x, double tol) {
  if (x > tol) return 1;
  if (x < -tol) return -1;
  return 0;
}

std::vector<Crossing> crossings(const std::vector<double>& s, const std::vector<int>& sign) {
  std::vector<Crossing> out;
  int last = -1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (sign[i] == 0) continue;
    if (last >= 0 && sign[static_cast<std::size_t>(last)] != sign[i]) {
      out.push_back({s[static_cast<std::size_t>(last)], s[i]});
    }
    last = static_cast<int>(i);
  }
  return out;
}

}  // namespace

SignScanReport family_sign_scan(const ModelFamily& family, const std::vector<double>& grid, int n_min,
                                int n_max, const ExpansionOptions& opts) {
  SignScanReport rep;
  for (double s : grid) {
    const LocalModel m = family.at(s);
    const double z = zeta(m, opts.tail_eps);
    if (std::abs(z) < 1e-9) {
      throw Error(ErrorCode::ZetaVanished, "zeta vanishes at s = " + std::to_string(s));
    }
    const ExpansionReport e = expansion_experiment(m, n_min, n_max, opts);
    rep.s.push_back(s);
    rep.xi_inf.push_back(m.xi_inf());
    rep.zeta.push_back(z);
    rep.omega.push_back(e.omega_fit);
  }
  double omega_scale = 0.0, xi_scale = 0.0;
  for (std::size_t i = 0; i < rep.s.size(); ++i) {
    omega_scale = std::max(omega_scale, std::abs(rep.omega[i]));
    xi_scale = std::max(xi_scale, std::abs(rep.xi_inf[i]));
  }
  rep.zero_tol = 1e-6 * omega_scale;
  for (std::size_t i = 0; i < rep.s.size(); ++i) {
    rep.omega_sign.push_back(sign_of(rep.omega[i], rep.zero_tol));
    rep.xi_sign.push_back(sign_of(rep.xi_inf[i], 1e-12 * xi_scale));
  }
  rep.omega_crossings = crossings(rep.s, rep.omega_sign);
  rep.xi_crossings = crossings(rep.s, rep.xi_sign);
  auto covered = [](const Crossing& c, const std::vector<Crossing>& others) {
    for (const auto& o : others) {
      if (o.s_lo >= c.s_lo - 1e-12 && o.s_hi <= c.s_hi + 1e-12) return true;
      if (c.s_lo >= o.s_lo - 1e-12 && c.s_hi <= o.s_hi + 1e-12) return true;
    }
    return false;
  };
  rep.consistent = true;
  for (const auto& c : rep.omega_crossings) rep.consistent = rep.consistent && covered(c, rep.xi_crossings);
  for (const auto& c : rep.xi_crossings) rep.consistent = rep.consistent && covered(c, rep.omega_crossings);
  return rep;
}

}  // namespace anosov
