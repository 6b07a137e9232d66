#include "anosov/coarse_chart.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "anosov/error.hpp"
#include "anosov/numerics.hpp"

namespace anosov {

Eigen::Vector4d Shear::operator()(const Eigen::Vector4d& x) const {
  Eigen::Vector4d y = linear * x;
  for (const auto& t : terms) {
    double v = t.coefficient;
    for (int i = 0; i < 4; ++i) v *= ipow(x(i), t.exponents[i]);
    y(t.out) += v;
  }
  return y;
}

Eigen::Matrix4d Shear::jacobian(const Eigen::Vector4d& x) const {
  Eigen::Matrix4d j = linear;
  for (const auto& t : terms) {
    for (int i = 0; i < 4; ++i) {
      if (t.exponents[i] == 0) continue;
      double v = t.coefficient * t.exponents[i];
      for (int k = 0; k < 4; ++k) v *= ipow(x(k), t.exponents[k] - (k == i ? 1 : 0));
      j(t.out, i) += v;
    }
  }
  return j;
}

Eigen::Vector4d Shear::inverse(const Eigen::Vector4d& y) const {
  Eigen::Vector4d x = linear.fullPivLu().solve(y);
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector4d r = (*this)(x) - y;
    if (r.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + y.lpNorm<Eigen::Infinity>())) return x;
    x -= jacobian(x).fullPivLu().solve(r);
  }
  const Eigen::Vector4d r = (*this)(x) - y;
  if (r.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + y.lpNorm<Eigen::Infinity>())) return x;
  throw Error(ErrorCode::NoConvergence, "shear '" + name + "' inverse did not converge");
}

namespace {

void require(bool ok, const Shear& s, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ChartNotAdapted, "shear '" + s.name + "' breaks " + what);
}

bool vanish(const Eigen::Vector4d& y, std::initializer_list<int> comps) {
  for (int c : comps) {
    if (std::abs(y(c)) > 1e-12) return false;
  }
  return true;
}

}  // namespace

void check_adapted(const Shear& s, const Eigen::Vector4d& q) {
  require(vanish(s(Eigen::Vector4d::Zero()), {0, 1, 2, 3}), s, "S(0) = 0");
  std::mt19937 rng(20240607);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int k = 0; k < 32; ++k) {
    const double a = u(rng), b = u(rng);
    require(vanish(s(Eigen::Vector4d(a, b, 0, 0)), {2, 3}), s, "the stable plane");
    require(vanish(s(Eigen::Vector4d(a, 0, 0, 0)), {1, 2, 3}), s, "the strong-stable axis");
    require(vanish(s(Eigen::Vector4d(0, 0, a, b)), {0, 1}), s, "the unstable plane");
    require(vanish(s(Eigen::Vector4d(0, 0, 0, b)), {0, 1, 2}), s, "the strong-unstable axis");
  }
  const Eigen::Matrix4d d0 = s.jacobian(Eigen::Vector4d::Zero());
  require(std::abs(d0(0, 1)) <= 1e-12, s, "the weak-stable tangency");
  require(std::abs(d0(3, 2)) <= 1e-12, s, "the weak-unstable tangency");
  require(d0(1, 1) > 0.0, s, "the orientation of the xi axis");
  require(s.jacobian(q)(1, 1) > 0.0, s, "the orientation of the xi axis at q");
  for (int k = 0; k < 16; ++k) {
    const Eigen::Vector4d x(u(rng) * 0.5, u(rng) * 0.5, u(rng) * 0.5, u(rng) * 0.5);
    Eigen::Vector4d back;
    try {
      back = s.inverse(s(x));
    } catch (const Error&) {
      require(false, s, "invertibility");
    }
    require((back - x).lpNorm<Eigen::Infinity>() <= 1e-12, s, "invertibility");
  }
}

CoarseChartReport coarse_chart_check(const LocalModel& m, const Shear& s, double omega, double tail_eps) {
  m.validate();
  const auto& g = m.gluing;
  check_adapted(s, g.q);
  CoarseChartReport rep;
  rep.shear = s.name;
  rep.xi_inf = m.xi_inf();
  rep.omega = omega;
  rep.zeta = zeta(m, tail_eps);

  const TemplateData tpl = compute_templates(m);
  const Eigen::Matrix4d ds_q = s.jacobian(g.q);
  const Eigen::Vector4d sv = ds_q * tpl.v_ws;
  rep.xi_scale = sv(1);
  const Eigen::Vector4d v_hat = sv / sv(1);
  const Eigen::Vector4d q_circ = s(g.q);
  rep.xi_inf_circ = s(g.q_prime)(1);

  // excursion time in the new chart is tau_bar o S^{-1}
  const Eigen::RowVector4d dtaubar_hat = g.taubar_gradient(g.q).transpose() * ds_q.inverse();
  rep.t_ws_hat = dtaubar_hat.dot(v_hat.transpose());

  const auto e = m.eig.as_array();
  const Eigen::Vector4d l_inv(1.0 / e[0], 1.0 / e[1], 1.0 / e[2], 1.0 / e[3]);
  const double ratio = 1.0 / (m.eig.mu * m.eig.lam);
  CompensatedSum sum;
  Eigen::Vector4d x = q_circ;
  Eigen::Vector4d w = v_hat;
  double bound = 1.0;
  for (int l = 1; l <= 100000; ++l) {
    const Eigen::Vector4d y = s.inverse(x);
    const Eigen::Vector4d z = l_inv.cwiseProduct(y);
    const Eigen::Matrix4d ds_z = s.jacobian(z);
    w = ds_z * l_inv.cwiseProduct(s.jacobian(y).fullPivLu().solve(w));
    x = s(z);
    rep.weights.push_back(w(1));
    const Eigen::RowVector4d dtau_hat = m.tau.gradient(z).transpose() * ds_z.inverse();
    sum += -dtau_hat.dot(w.transpose());
    bound *= ratio;
    if (bound < tail_eps) break;
  }
  rep.P_hat = sum.value();
  rep.zeta_hat = rep.t_ws_hat - rep.P_hat;

  auto sign = [](double v) { return v > 1e-14 ? 1 : (v < -1e-14 ? -1 : 0); };
  rep.chart_sign = sign(rep.xi_inf_circ * rep.zeta_hat);
  rep.omega_sign = sign(omega);
  rep.agree = rep.chart_sign == rep.omega_sign;
  return rep;
}

}  // namespace anosov
