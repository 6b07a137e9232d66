#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "anosov/error.hpp"
#include "anosov/local_model.hpp"

using namespace anosov;

namespace {

Eigen::Matrix4d coupled_linear() {
  Eigen::Matrix4d l;
  l << 0.9, 0.2, 0.1, -0.3, 0.1, 1.1, 0.2, 0.4, 0.3, -0.5, 1.2, 0.3, -0.2, 0.4, 0.1, 0.8;
  return l;
}

LocalModel base_model() {
  LocalModel m;
  m.eig = EigenQuadruple::make(0.55, 0.8, 4.0, 7.5);
  m.tau.T = 1.0;
  m.tau.mixed_terms = {{{0, 1, 1, 0}, 0.3}};
  m.gluing.q = Eigen::Vector4d(0, 0, 0.5, 0.3);
  m.gluing.q_prime = Eigen::Vector4d(0.4, 0.6, 0, 0);
  m.gluing.T_prime = 2.0;
  m.gluing.linear = coupled_linear();
  m.gluing.taubar_linear = Eigen::Vector4d(0, 0.2, 0, 0);
  m.validate();
  return m;
}

LocalModel trivial_model() {
  LocalModel m = base_model();
  m.tau.mixed_terms.clear();
  m.gluing.taubar_linear.setZero();
  m.validate();
  return m;
}

LocalModel generic_model() {
  LocalModel m;
  m.eig = EigenQuadruple::make(0.45, 0.75, 3.2, 6.5);
  m.tau.T = 1.5;
  m.tau.mixed_terms = {{{0, 1, 1, 0}, 0.25}, {{0, 1, 0, 1}, -0.15}, {{1, 0, 1, 0}, 0.2},
                       {{0, 1, 1, 1}, 0.1}, {{0, 2, 1, 0}, 0.05}};
  m.gluing.q = Eigen::Vector4d(0, 0, 0.4, -0.35);
  m.gluing.q_prime = Eigen::Vector4d(-0.3, 0.5, 0, 0);
  m.gluing.T_prime = 1.25;
  m.gluing.linear = coupled_linear();
  m.gluing.quadratic = {{2, 1, 1, 0.3}, {3, 0, 2, -0.2}, {1, 2, 3, 0.1}};
  m.gluing.taubar_linear = Eigen::Vector4d(0.1, -0.15, 0.05, 0.02);
  m.gluing.taubar_quadratic = {{0, 1, 1, 0.2}, {0, 2, 2, -0.1}};
  m.validate();
  return m;
}

// d/ds tau_bar along the curve z(s) = q + s e_col + (0, 0, a(s), b(s)) that Pi_bar sends into
// the stable plane, by central differences of a nonlinear solve.
double template_oracle(const LocalModel& m, int col) {
  const Gluing& g = m.gluing;
  auto point_on_curve = [&](double s) {
    Eigen::Vector4d z = g.q;
    z(col) += s;
    for (int it = 0; it < 50; ++it) {
      const Eigen::Vector4d image = g.map(z);
      const Eigen::Vector2d r = image.tail<2>();
      if (r.norm() < 1e-15) break;
      Eigen::Matrix2d j;
      for (int c = 0; c < 2; ++c) {
        Eigen::Vector4d dz = Eigen::Vector4d::Zero();
        dz(2 + c) = 1e-7;
        j.col(c) = (g.map(z + dz).tail<2>() - g.map(z - dz).tail<2>()) / 2e-7;
      }
      z.tail<2>() -= j.lu().solve(r);
    }
    return z;
  };
  const double h = 1e-5;
  return (g.taubar(point_on_curve(h)) - g.taubar(point_on_curve(-h))) / (2 * h);
}

LocalModel with_terms(std::vector<Monomial> terms) {
  LocalModel m = base_model();
  m.tau.mixed_terms = std::move(terms);
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("return time and gluing evaluation") {
  const LocalModel m = generic_model();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
    const double expected = 1.5 + 0.25 * x(1) * x(2) - 0.15 * x(1) * x(3) + 0.2 * x(0) * x(2) +
                            0.1 * x(1) * x(2) * x(3) + 0.05 * x(1) * x(1) * x(2);
    CHECK(m.tau(x) == doctest::Approx(expected).epsilon(1e-14));
    const Eigen::Vector4d grad = m.tau.gradient(x);
    const Eigen::Matrix4d jac = m.gluing.jacobian(x);
    for (int k = 0; k < 4; ++k) {
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      e(k) = 1e-6;
      CHECK(grad(k) == doctest::Approx((m.tau(x + e) - m.tau(x - e)) / 2e-6).epsilon(1e-7));
      CHECK(m.gluing.taubar_gradient(x)(k) ==
            doctest::Approx((m.gluing.taubar(x + e) - m.gluing.taubar(x - e)) / 2e-6).epsilon(1e-7));
      const Eigen::Vector4d fd = (m.gluing.map(x + e) - m.gluing.map(x - e)) / 2e-6;
      CHECK((jac.col(k) - fd).norm() < 1e-8);
    }
    // tau is T on both coordinate planes
    CHECK(m.tau(Eigen::Vector4d(x(0), x(1), 0, 0)) == 1.5);
    CHECK(m.tau(Eigen::Vector4d(0, 0, x(2), x(3))) == 1.5);
  }
  CHECK((m.gluing.map(m.gluing.q) - m.gluing.q_prime).norm() == 0.0);
  CHECK(m.gluing.taubar(m.gluing.q) == 0.0);
}

TEST_CASE("templates") {
  SUBCASE("block-diagonal gluing reads off the tau_bar gradient") {
    LocalModel m = base_model();
    m.gluing.linear = Eigen::Matrix4d::Identity();
    m.gluing.taubar_linear = Eigen::Vector4d(0.7, -0.2, 0.3, 0.4);
    const TemplateData t = compute_templates(m);
    CHECK(t.t_ws == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(t.t_ss == doctest::Approx(0.7).epsilon(1e-15));
    CHECK((t.v_ws - Eigen::Vector4d(0, 1, 0, 0)).norm() < 1e-15);
    CHECK((t.v_ss - Eigen::Vector4d(1, 0, 0, 0)).norm() < 1e-15);
  }
  SUBCASE("coupled gluing against a nonlinear finite-difference oracle") {
    for (const LocalModel& m : {base_model(), generic_model()}) {
      const TemplateData t = compute_templates(m);
      CHECK(t.t_ws == doctest::Approx(template_oracle(m, 1)).epsilon(1e-7));
      CHECK(t.t_ss == doctest::Approx(template_oracle(m, 0)).epsilon(1e-7));
      CHECK(t.v_ws(0) == 0.0);
      CHECK(t.v_ws(1) == 1.0);
      const Eigen::Vector4d image = m.gluing.jacobian(m.gluing.q) * t.v_ws;
      CHECK(image.tail<2>().norm() < 1e-14);
      CHECK(t.refinement_change < 1e-14);
    }
  }
}

TEST_CASE("P_p closed forms") {
  const double mu = 0.8, lam = 4.0, lam_hat = 7.5, eta = 0.5, eta_hat = 0.3;
  CHECK(compute_Pp(with_terms({{{0, 1, 1, 0}, 0.3}})).value ==
        doctest::Approx(-0.3 * eta / (mu * lam - 1)).epsilon(1e-15));
  CHECK(compute_Pp(with_terms({{{0, 1, 0, 1}, -0.4}})).value ==
        doctest::Approx(0.4 * eta_hat / (mu * lam_hat - 1)).epsilon(1e-15));
  CHECK(compute_Pp(with_terms({{{0, 1, 1, 1}, 0.2}})).value ==
        doctest::Approx(-0.2 * eta * eta_hat / (mu * lam * lam_hat - 1)).epsilon(1e-15));
  CHECK(compute_Pp(with_terms({{{1, 0, 1, 0}, 0.3}})).value == 0.0);
  CHECK(compute_Pp(with_terms({{{0, 2, 1, 0}, 0.3}})).value == 0.0);
  CHECK(compute_Pp(with_terms({})).value == 0.0);

  const SeriesResult one = compute_Pp(with_terms({{{0, 1, 1, 0}, 0.3}, {{0, 1, 0, 1}, -0.4}}));
  const SeriesResult two = compute_Pp(with_terms({{{0, 1, 1, 0}, 0.6}, {{0, 1, 0, 1}, -0.8}}));
  CHECK(two.value == 2 * one.value);
  CHECK(one.terms > 10);
  CHECK(one.tail_bound < 1e-16);
}

TEST_CASE("P_p diverges when mu lam <= 1") {
  LocalModel m = base_model();
  m.eig = EigenQuadruple::make(0.2, 0.3, 2.5, 5.0);
  try {
    compute_Pp(m);
    FAIL("expected DivergentSeries");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergentSeries);
  }
}

TEST_CASE("rates and windows") {
  for (const auto& [mu, lam] : {std::pair{0.8, 4.0}, {0.75, 3.2}, {0.5, 2.5}, {0.9, 1.2}}) {
    const double g = gamma_exponent(mu, lam);
    CHECK(g > 1.0);
    CHECK(g < 2.0);
    const double th = theta_rate(mu, lam);
    CHECK(th > mu * mu);
    CHECK(th < mu);
    for (int n = 1; n <= 100; ++n) {
      const int l = ell_n(mu, lam, n);
      CHECK(l >= 0);
      CHECK(2 * l <= n);
      // mu^l and lam^-(n-l) balance to within one factor
      CHECK(std::abs(l * std::log(mu) + (n - l) * std::log(lam) - n * std::log(lam)) <=
            std::abs(std::log(mu)) * n);
    }
  }
}

TEST_CASE("trivial model has exactly nT + T'") {
  const LocalModel m = trivial_model();
  for (int n = 3; n <= 40; n += 7) {
    const ShadowingOrbit o = find_shadowing_orbit(m, n);
    CHECK(std::abs(o.deviation) < 1e-11);
    CHECK(o.T_n == doctest::Approx(n * 1.0 + 2.0).epsilon(1e-14));
    CHECK(o.residual < 1e-12);
  }
}

TEST_CASE("shadowing orbits close up") {
  const LocalModel m = generic_model();
  for (int n : {5, 12, 30}) {
    const ShadowingOrbit o = find_shadowing_orbit(m, n);
    CHECK(o.n == n);
    // stable coordinates forward, unstable ones backward, so nothing is amplified
    const Eigen::Vector4d image = m.gluing.map(o.p_n);
    const Eigen::Vector4d power = m.linear_power(n);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(power(i) * image(i) - o.p_n(i)) < 1e-14);
    for (int i = 2; i < 4; ++i) CHECK(std::abs(image(i) - o.p_n(i) / power(i)) < 1e-14);
    CHECK((o.p_n_prime - m.gluing.map(o.p_n)).norm() < 1e-15);
    CHECK(o.T_n == doctest::Approx(n * m.tau.T + m.gluing.T_prime + o.deviation).epsilon(1e-15));
    CHECK(o.deviation == doctest::Approx(o.taubar + o.local_sum).epsilon(1e-12));
    double local = 0.0;
    for (int k = 0; k < n; ++k) local += m.tau(m.linear_power(k).cwiseProduct(o.p_n_prime)) - m.tau.T;
    CHECK(o.local_sum == doctest::Approx(local).epsilon(1e-10));
  }
  CHECK(find_n0(m) >= 1);
}

TEST_CASE("expansion recovers omega") {
  for (const LocalModel& m : {base_model(), generic_model()}) {
    const ExpansionReport r = expansion_experiment(m, 15, 45);
    CHECK(r.n.size() == 31);
    CHECK(r.omega_closed == doctest::Approx(m.xi_inf() * (compute_templates(m).t_ws - compute_Pp(m).value)));
    CHECK(r.relative_gap() < 1e-3);
    CHECK(r.residual_rate < 0.0);
    CHECK(r.theta == theta_rate(m.eig.mu, m.eig.lam));
    int usable = 0;
    for (bool b : r.usable) usable += b ? 1 : 0;
    CHECK(usable >= 5);
  }
  const LocalModel m = base_model();
  const double closed = 0.6 * (template_oracle(m, 1) + 0.3 * 0.5 / (0.8 * 4.0 - 1));
  CHECK(expansion_experiment(m, 15, 45).omega_closed == doctest::Approx(closed).epsilon(1e-7));
  CHECK_THROWS_AS(expansion_experiment(m, 15, 20), Error);
}

TEST_CASE("excursion term and decay rates") {
  const LocalModel m = base_model();
  const ExcursionReport ex = excursion_term_check(m, 15, 45);
  CHECK(ex.predicted_coefficient == doctest::Approx(m.xi_inf() * compute_templates(m).t_ws));
  CHECK(ex.relative_error < 1e-3);
  CHECK(ex.expected_rate == doctest::Approx(std::min(2 * std::abs(std::log(0.8)), std::log(4.0))));
  CHECK(ex.residual_rate == doctest::Approx(ex.expected_rate).epsilon(0.2));

  const ShadowingDecay d = shadowing_decay(m, 10, 30);
  CHECK(d.distance_rate <= std::log(0.8) + 0.05 * std::abs(std::log(0.8)));
  CHECK(d.xi_hat_rate == doctest::Approx(std::log(0.55) + std::log(0.8)).epsilon(0.05));
  CHECK(d.xi_rate == doctest::Approx(2 * std::log(0.8)).epsilon(0.05));
  for (std::size_t i = 0; i < d.n.size(); ++i) CHECK(d.distance_to_q[i] <= std::pow(0.8, d.n[i] / 2.0));
}

TEST_CASE("unstable coordinates of p_n") {
  // with no xi -> eta coupling in the gluing, eta_n - eta_inf is O(lam^-n); coupling makes it O(mu^n)
  LocalModel decoupled = base_model();
  decoupled.gluing.linear.block<2, 2>(2, 0).setZero();
  LocalModel coupled = base_model();
  for (int n : {10, 15, 20}) {
    const double lam_n = std::pow(4.0, -n);
    const double mu_n = std::pow(0.8, n);
    const ShadowingOrbit a = find_shadowing_orbit(decoupled, n);
    CHECK((a.p_n.tail<2>() - decoupled.gluing.q.tail<2>()).norm() < 10 * lam_n);
    const ShadowingOrbit b = find_shadowing_orbit(coupled, n);
    const double gap = (b.p_n.tail<2>() - coupled.gluing.q.tail<2>()).norm();
    CHECK(gap > 0.1 * mu_n);
    CHECK(gap < 10 * mu_n);
  }
}

TEST_CASE("excursion with a purely quadratic tau_bar") {
  LocalModel m = base_model();
  m.gluing.taubar_linear.setZero();
  m.gluing.taubar_quadratic = {{0, 1, 1, 0.4}, {0, 0, 1, -0.3}};
  m.validate();
  const ExcursionReport ex = excursion_term_check(m, 15, 45);
  CHECK(ex.predicted_coefficient == 0.0);
  CHECK(std::abs(ex.leading_coefficient) < 1e-3);
  CHECK(ex.residual_rate >= 0.9 * ex.expected_rate);
}

TEST_CASE("extended precision agrees with double") {
  const LocalModel m = generic_model();
  ShadowingOptions ext;
  ext.precision = Precision::Extended;
  for (int n : {10, 25, 40}) {
    const ShadowingOrbit a = find_shadowing_orbit(m, n);
    const ShadowingOrbit b = find_shadowing_orbit(m, n, ext);
    CHECK(std::abs(a.T_n - b.T_n) < 1e-13 * b.T_n);
    CHECK(std::abs(a.deviation - b.deviation) < 1e-14);
  }
  CHECK(precision_from_string(to_string(Precision::Extended)) == Precision::Extended);
  CHECK_THROWS_AS(precision_from_string("quad"), Error);
}

TEST_CASE("family sign scan") {
  ModelFamily fam;
  fam.start = base_model();
  fam.end = base_model();
  fam.start.gluing.q_prime(1) = -0.5;
  fam.end.gluing.q_prime(1) = 0.5;
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  const SignScanReport r = family_sign_scan(fam, grid, 15, 35);
  REQUIRE(r.xi_crossings.size() == 1);
  REQUIRE(r.omega_crossings.size() == 1);
  CHECK(r.xi_crossings[0].s_lo >= 0.4);
  CHECK(r.xi_crossings[0].s_hi <= 0.6);
  CHECK(r.omega_crossings[0].s_lo >= 0.4);
  CHECK(r.omega_crossings[0].s_hi <= 0.6);
  CHECK(r.consistent);
  CHECK(r.omega_sign.front() == -r.omega_sign.back());

  ModelFamily flat;
  flat.start = base_model();
  flat.end = base_model();
  const SignScanReport none = family_sign_scan(flat, grid, 15, 35);
  CHECK(none.omega_crossings.empty());
  CHECK(none.xi_crossings.empty());
  CHECK(none.consistent);

  ModelFamily vanishing;
  vanishing.start = base_model();
  vanishing.start.tau.mixed_terms[0].coefficient = 0.0;
  vanishing.end = vanishing.start;
  vanishing.start.gluing.taubar_linear(1) = -0.2;
  vanishing.end.gluing.taubar_linear(1) = 0.2;
  try {
    family_sign_scan(vanishing, grid, 15, 35);
    FAIL("expected ZetaVanished");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZetaVanished);
  }

  ModelFamily mismatched;
  mismatched.start = base_model();
  mismatched.end = generic_model();
  CHECK_THROWS_AS(mismatched.at(0.5), Error);
  CHECK(fam.at(0.25).gluing.q_prime(1) == doctest::Approx(-0.25));
}

TEST_CASE("model validation") {
  auto code_of = [](const LocalModel& m) {
    try {
      m.validate();
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected a validation error");
    return ErrorCode::InvalidModel;
  };
  LocalModel m = base_model();
  m.eig = {0.55, 0.8, 1.1, 7.5};  // mu lam < 1
  CHECK(code_of(m) == ErrorCode::InvalidModel);
  m = base_model();
  m.eig = {0.5, 0.75, 3.0, 6.0};  // xi_hat eta_hat = xi^3 resonance family
  CHECK_THROWS_AS(m.validate(), Error);
  m = base_model();
  m.tau.mixed_terms = {{{1, 1, 0, 0}, 0.2}};  // not mixed
  CHECK(code_of(m) == ErrorCode::InvalidModel);
  m = base_model();
  m.tau.mixed_terms = {{{0, 2, 2, 0}, 0.2}};  // degree 4
  CHECK(code_of(m) == ErrorCode::InvalidModel);
  m = base_model();
  m.gluing.q = Eigen::Vector4d(0.1, 0, 0.5, 0.3);  // q off the unstable plane
  CHECK(code_of(m) == ErrorCode::InvalidModel);
  m = base_model();
  m.gluing.q_prime = Eigen::Vector4d(0.4, 0.6, 0.1, 0);
  CHECK(code_of(m) == ErrorCode::InvalidModel);
  m = base_model();
  m.gluing.quadratic = {{4, 0, 0, 1.0}};
  CHECK(code_of(m) == ErrorCode::InvalidModel);
  m = base_model();
  m.gluing.linear.block<2, 2>(2, 2) << 1.0, 2.0, 0.5, 1.0;  // singular unstable block
  CHECK(code_of(m) == ErrorCode::TransversalityFailure);
}

TEST_CASE("runs are deterministic") {
  const LocalModel m = generic_model();
  const ExpansionReport a = expansion_experiment(m, 12, 30);
  const ExpansionReport b = expansion_experiment(m, 12, 30);
  CHECK(a.periods == b.periods);
  CHECK(a.omega_hats == b.omega_hats);
  CHECK(a.omega_fit == b.omega_fit);
}
