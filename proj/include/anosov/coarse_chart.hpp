#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anosov/local_model.hpp"

namespace anosov {

/// out-component += coefficient * x^exponents.
struct ShearTerm {
  int out = 0;
  std::array<int, 4> exponents{};
  double coefficient = 0.0;
};

/// Polynomial chart change S(x) = M x + sum of terms, coordinates (xi_hat, xi, eta, eta_hat).
struct Shear {
  std::string name = "identity";
  Eigen::Matrix4d linear = Eigen::Matrix4d::Identity();
  std::vector<ShearTerm> terms;

  Eigen::Vector4d operator()(const Eigen::Vector4d& x) const;
  Eigen::Matrix4d jacobian(const Eigen::Vector4d& x) const;
  /// Newton from x = M^{-1} y; throws NoConvergence.
  Eigen::Vector4d inverse(const Eigen::Vector4d& y) const;
};

/// Throws ChartNotAdapted naming the first violated condition: origin fixed, stable plane,
/// strong-stable axis, weak-stable tangency, unstable plane, strong-unstable axis,
/// weak-unstable tangency, orientation of the xi axis at 0 and at q, invertibility on samples.
void check_adapted(const Shear& s, const Eigen::Vector4d& q);

struct CoarseChartReport {
  std::string shear;
  double xi_inf = 0.0;
  double xi_inf_circ = 0.0;
  double t_ws_hat = 0.0;
  double P_hat = 0.0;
  double zeta = 0.0;
  double zeta_hat = 0.0;
  double xi_scale = 0.0;  // d S_xi / d xi at q
  std::vector<double> weights;  // xi-component of D Pi_hat^{-l} applied to the template vector
  double omega = 0.0;
  int omega_sign = 0;
  int chart_sign = 0;
  bool agree = false;
};

CoarseChartReport coarse_chart_check(const LocalModel& m, const Shear& s, double omega,
                                     double tail_eps = 1e-17);

}  // namespace anosov
