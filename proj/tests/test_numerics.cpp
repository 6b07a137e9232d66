#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "anosov/error.hpp"
#include "anosov/numerics.hpp"

using namespace anosov;

namespace {

// Values k * 2^-20 with |k| < 2^40: any sum of up to 2^12 of them is an exact double,
// and the integer sum of the k is the oracle.
struct Dyadic {
  std::vector<double> values;
  std::int64_t numerator_sum = 0;
  double exact() const { return std::ldexp(static_cast<double>(numerator_sum), -20); }
};

Dyadic random_dyadic(std::mt19937& rng, int count) {
  std::uniform_int_distribution<std::int64_t> k(-(std::int64_t{1} << 40), std::int64_t{1} << 40);
  std::uniform_int_distribution<int> scale(0, 30);
  Dyadic d;
  for (int i = 0; i < count; ++i) {
    // mix magnitudes so that naive summation loses bits
    const std::int64_t v = k(rng) >> scale(rng);
    d.numerator_sum += v;
    d.values.push_back(std::ldexp(static_cast<double>(v), -20));
  }
  return d;
}

}  // namespace

TEST_CASE("compensated sum recovers cancelled low bits") {
  CompensatedSum s;
  for (double x : {1e16, 1.0, -1e16}) s += x;
  CHECK(s.value() == 1.0);
  const std::vector<double> xs{1.0, 1e100, 1.0, -1e100};
  CHECK(compensated_sum(xs) == 2.0);
}

TEST_CASE("exact and compensated sums against an integer oracle") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const Dyadic d = random_dyadic(rng, 1 + trial * 7 % 300);
    ExactSum e;
    CompensatedSum c;
    for (double x : d.values) {
      e += x;
      c += x;
    }
    CHECK(e.value() == d.exact());
    CHECK(std::abs(c.value() - d.exact()) <= 1e-15 * std::abs(d.exact()) + 1e-300);
  }
}

TEST_CASE("exact sums are additive over arbitrary splittings") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-40, 40);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs;
    for (int i = 0; i < 64; ++i) xs.push_back(std::ldexp(u(rng), e(rng)));
    ExactSum whole, left, right;
    const std::size_t cut = static_cast<std::size_t>(trial) % xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      whole += xs[i];
      (i < cut ? left : right) += xs[i];
    }
    ExactSum joined = left;
    for (double p : right.parts()) joined += p;
    CHECK(exactly_equal(whole, joined));

    ExactSum twice = whole;
    for (double p : whole.parts()) twice += p;
    CHECK(exactly_equal(whole.scaled(2.0), twice));

    ExactSum zero = whole;
    const ExactSum minus = whole.negated();
    for (double p : minus.parts()) zero += p;
    CHECK(zero.is_zero());
  }
}

TEST_CASE("exact sum detects a one-ulp difference") {
  ExactSum a, b;
  a += 1.0;
  a += 1e-30;
  b += 1.0;
  b += std::nextafter(1e-30, 1.0);
  CHECK_FALSE(exactly_equal(a, b));
}

TEST_CASE("double-word arithmetic carries about 106 bits") {
  const DoubleWord tiny = std::ldexp(1.0, -70);
  const DoubleWord x = DoubleWord(1.0) + tiny;
  CHECK(to_double(x - DoubleWord(1.0)) == std::ldexp(1.0, -70));

  const DoubleWord third = DoubleWord(1.0) / DoubleWord(3.0);
  const DoubleWord back = third * DoubleWord(3.0) - DoubleWord(1.0);
  CHECK(std::abs(to_double(back)) < 1e-31);

  // (1 + 2^-40)^2 = 1 + 2^-39 + 2^-80, the last term is invisible in binary64
  const DoubleWord y = DoubleWord(1.0) + DoubleWord(std::ldexp(1.0, -40));
  const DoubleWord sq = y * y - DoubleWord(1.0) - DoubleWord(std::ldexp(1.0, -39));
  CHECK(to_double(sq) == std::ldexp(1.0, -80));
  CHECK(abs(DoubleWord(-2.0)).hi == 2.0);
  CHECK(DoubleWord(1.0, 1e-20) > DoubleWord(1.0));
}

TEST_CASE("integer powers") {
  CHECK(ipow(2.0, 10) == 1024.0);
  CHECK(ipow(2.0, -2) == 0.25);
  CHECK(ipow(5.0, 0) == 1.0);
  const DoubleWord p = ipow(DoubleWord(0.8), 45);
  CHECK(std::abs(to_double(p) / std::pow(0.8, 45) - 1.0) < 1e-14);
}

TEST_CASE("least squares line") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(-0.5 * v + 2.0);
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.residuals.size() == x.size());

  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(fit_line(one, one), Error);
  const std::vector<double> same{2.0, 2.0, 2.0};
  const std::vector<double> ys{1.0, 2.0, 3.0};
  try {
    fit_line(same, ys);
    FAIL("degenerate abscissae accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientScales);
  }
}

TEST_CASE("error codes partition into validation and numerical") {
  CHECK_FALSE(is_numerical(ErrorCode::NotHyperbolic));
  CHECK_FALSE(is_numerical(ErrorCode::SchemaError));
  CHECK(is_numerical(ErrorCode::NewtonDiverged));
  CHECK(is_numerical(ErrorCode::DivergentSeries));
  CHECK(to_string(ErrorCode::ZetaVanished) == "ZetaVanished");
}
