#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anosov/torus.hpp"

namespace anosov {

/// c * xi_hat^i xi^j eta^k eta_hat^l with i+j >= 1, k+l >= 1, i+j+k+l <= 3.
struct Monomial {
  std::array<int, 4> exponents{};
  double coefficient = 0.0;
};

/// tau = T + sum of mixed monomials, so tau is T on both coordinate planes.
struct ReturnTime {
  double T = 1.0;
  std::vector<Monomial> mixed_terms;

  /// Throws InvalidModel.
  void validate() const;
  double operator()(const Eigen::Vector4d& x) const;
  Eigen::Vector4d gradient(const Eigen::Vector4d& x) const;
};

/// coefficient * d_i d_j added to output component `out`, d = z - q.
struct QuadraticTerm {
  int out = 0;
  int i = 0;
  int j = 0;
  double coefficient = 0.0;
};

/// Homoclinic excursion: Pi_bar(z) = q' + L (z - q) + quadratic, taking time T' + tau_bar(z)
/// with tau_bar(z) = a . (z - q) + quadratic.
struct Gluing {
  Eigen::Vector4d q = Eigen::Vector4d::Zero();
  Eigen::Vector4d q_prime = Eigen::Vector4d::Zero();
  double T_prime = 1.0;
  Eigen::Matrix4d linear = Eigen::Matrix4d::Identity();
  std::vector<QuadraticTerm> quadratic;
  Eigen::Vector4d taubar_linear = Eigen::Vector4d::Zero();
  std::vector<QuadraticTerm> taubar_quadratic;  // `out` unused

  Eigen::Vector4d map(const Eigen::Vector4d& z) const;
  Eigen::Matrix4d jacobian(const Eigen::Vector4d& z) const;
  double taubar(const Eigen::Vector4d& z) const;
  Eigen::Vector4d taubar_gradient(const Eigen::Vector4d& z) const;
  /// Condition number of the unstable-to-unstable block of DPi_bar(q).
  double transversality_condition() const;
};

struct LocalModel {
  EigenQuadruple eig;
  ReturnTime tau;
  Gluing gluing;

  /// Throws InvalidModel (shape, center-contracting, resonance) or TransversalityFailure.
  void validate() const;
  double xi_inf() const { return gluing.q_prime(1); }
  /// diag(mu_hat, mu, lam, lam_hat)^k
  Eigen::Vector4d linear_power(int k) const;
};

struct TemplateData {
  double t_ws = 0.0;
  double t_ss = 0.0;
  Eigen::Vector4d v_ws = Eigen::Vector4d::Zero();  // (0, 1, v_eta, v_eta_hat)
  Eigen::Vector4d v_ss = Eigen::Vector4d::Zero();  // (1, 0, v_eta, v_eta_hat)
  double refinement_change = 0.0;
};

/// t = D tau_bar(q) . v with v the stable-side vector carried into the stable plane at q'.
TemplateData compute_templates(const LocalModel& m);

struct SeriesResult {
  double value = 0.0;
  int terms = 0;
  double tail_bound = 0.0;
};

/// P_p = -sum_{l>=1} mu^{-l} d_2 tau(0, 0, lam^{-l} eta, lam_hat^{-l} eta_hat). Throws DivergentSeries.
SeriesResult compute_Pp(const LocalModel& m, double tail_eps = 1e-17);

enum class Precision { Double, Extended };
std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

struct ShadowingOptions {
  Precision precision = Precision::Double;
  int max_iterations = 100;
  bool check_uniqueness = true;
  double uniqueness_offset = 0.05;
};

struct ShadowingOrbit {
  int n = 0;
  Eigen::Vector4d p_n = Eigen::Vector4d::Zero();
  Eigen::Vector4d p_n_prime = Eigen::Vector4d::Zero();
  double T_n = 0.0;
  double deviation = 0.0;  // T_n - nT - T'
  double taubar = 0.0;     // tau_bar(p_n)
  double local_sum = 0.0;  // sum_{m<n} (tau(L^m p_n') - T)
  double residual = 0.0;
  int iterations = 0;
};

/// Solves L^n(Pi_bar(z)) = z near q. Throws NewtonDiverged, UniquenessSuspect.
ShadowingOrbit find_shadowing_orbit(const LocalModel& m, int n, const ShadowingOptions& opts = {});

/// Smallest n >= 1 for which the shadowing Newton converges from q.
int find_n0(const LocalModel& m, int n_max = 200, const ShadowingOptions& opts = {});

double theta_rate(double mu, double lam);
double gamma_exponent(double mu, double lam);
int ell_n(double mu, double lam, int n);

struct ExpansionOptions {
  ShadowingOptions shadowing;
  int tail_count = 5;
  double tail_eps = 1e-17;
};

struct ExpansionReport {
  int n_min = 0;
  int n_max = 0;
  std::vector<int> n;
  std::vector<double> periods;
  std::vector<double> deviations;
  std::vector<double> omega_hats;
  std::vector<bool> usable;
  std::vector<double> residuals;  // |omega_hat - omega_fit|
  double omega_fit = 0.0;
  double omega_closed = 0.0;
  double t_ws = 0.0;
  double P_p = 0.0;
  double xi_inf = 0.0;
  double residual_rate = 0.0;
  double residual_fit_r2 = 0.0;
  double theta = 0.0;
  double gamma = 0.0;
  std::vector<ShadowingOrbit> orbits;

  double relative_gap() const;
  int ell(int k) const;
  double mu = 0.0;
  double lam = 0.0;
};

/// Throws InvalidModel if n_max - n_min < 8; errors from find_shadowing_orbit propagate.
ExpansionReport expansion_experiment(const LocalModel& m, int n_min, int n_max,
                                     const ExpansionOptions& opts = {});

struct ExcursionReport {
  std::vector<int> n;
  std::vector<double> taubar;
  std::vector<double> scaled;     // tau_bar(p_n) / mu^n
  std::vector<double> residuals;  // |tau_bar(p_n) - xi_inf t_ws mu^n|
  double predicted_coefficient = 0.0;  // xi_inf t_ws
  double leading_coefficient = 0.0;    // scaled value at n_max
  double relative_error = 0.0;
  double residual_rate = 0.0;          // -slope of log residual vs n
  double expected_rate = 0.0;          // min(2|log mu|, log lam)
};

ExcursionReport excursion_term_check(const LocalModel& m, int n_min, int n_max,
                                     const ShadowingOptions& opts = {});

/// Distances of p_n from q and from the linear laws mu_hat^n xi_hat_inf, mu^n xi_inf, with fitted decay exponents.
struct ShadowingDecay {
  std::vector<int> n;
  std::vector<double> distance_to_q;  // |p_n - q|
  std::vector<double> xi_hat_error;   // |xi_hat_n - mu_hat^n xi_hat_inf|
  std::vector<double> xi_error;       // |xi_n - mu^n xi_inf|
  double distance_rate = 0.0;
  double xi_hat_rate = 0.0;
  double xi_rate = 0.0;
};

ShadowingDecay shadowing_decay(const LocalModel& m, int n_min, int n_max,
                               const ShadowingOptions& opts = {});

/// zeta = t_ws - P_p.
double zeta(const LocalModel& m, double tail_eps = 1e-17);

/// Members interpolate linearly between two models with identical term structure.
struct ModelFamily {
  LocalModel start;
  LocalModel end;

  /// Throws InvalidModel if the term structures differ.
  LocalModel at(double s) const;
};

struct Crossing {
  double s_lo = 0.0;
  double s_hi = 0.0;
};

struct SignScanReport {
  std::vector<double> s;
  std::vector<double> xi_inf;
  std::vector<double> zeta;
  std::vector<double> omega;
  std::vector<int> omega_sign;
  std::vector<int> xi_sign;
  std::vector<Crossing> omega_crossings;
  std::vector<Crossing> xi_crossings;
  bool consistent = false;  // every omega crossing matches a xi crossing and vice versa
  double zero_tol = 0.0;
};

/// Throws ZetaVanished if |zeta(s)| < 1e-9 at a grid point.
SignScanReport family_sign_scan(const ModelFamily& family, const std::vector<double>& grid, int n_min,
                                int n_max, const ExpansionOptions& opts = {});

}  // namespace anosov
