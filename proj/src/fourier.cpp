#include "anosov/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anosov/error.hpp"
#include "anosov/numerics.hpp"

namespace anosov {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double coef_norm(const Coef& c) { return std::max(std::abs(c[0]), std::abs(c[1])); }

// frac(k * x) for |k| < 2^62, split so each partial product is exact in two doubles.
double frac_product(std::int64_t k, double x) {
  const bool negative = k < 0;
  const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(k + 1)) + 1u
                                     : static_cast<std::uint64_t>(k);
  const double hi = static_cast<double>(mag >> 31 << 31);
  const double lo = static_cast<double>(mag & ((1ull << 31) - 1));
  double acc = 0.0;
  for (double part : {hi, lo}) {
    const double p = part * x;
    const double e = std::fma(part, x, -p);
    acc += (p - std::floor(p)) + e;
    acc -= std::floor(acc);
  }
  if (negative) acc = -acc;
  return acc - std::floor(acc);
}

}  // namespace

void TrigMap::add_term(const Freq& k, const Coef& c) {
  if (k[0] == 0 && k[1] == 0) {
    auto& slot = terms[k];
    slot[0] += c[0].real();
    slot[1] += c[1].real();
    return;
  }
  auto& slot = terms[k];
  slot[0] += c[0];
  slot[1] += c[1];
  auto& mirror = terms[negate(k)];
  mirror[0] += std::conj(c[0]);
  mirror[1] += std::conj(c[1]);
}

void TrigMap::add_cosine(const Freq& k, const Eigen::Vector2d& v, double amplitude) {
  if (k[0] == 0 && k[1] == 0) {
    add_term(k, {amplitude * v(0), amplitude * v(1)});
    return;
  }
  add_term(k, {0.5 * amplitude * v(0), 0.5 * amplitude * v(1)});
}

void TrigMap::add_sine(const Freq& k, const Eigen::Vector2d& v, double amplitude) {
  if (k[0] == 0 && k[1] == 0) return;
  const std::complex<double> half(0.0, -0.5 * amplitude);
  add_term(k, {half * v(0), half * v(1)});
}

double TrigMap::reality_defect() const {
  double worst = 0.0;
  for (const auto& [k, c] : terms) {
    const auto it = terms.find(negate(k));
    if (it == terms.end()) {
      worst = std::max(worst, coef_norm(c));
      continue;
    }
    for (int i = 0; i < 2; ++i) {
      worst = std::max(worst, std::abs(it->second[i] - std::conj(c[i])));
    }
  }
  return worst;
}

void TrigMap::check_reality(double tol) const {
  const double d = reality_defect();
  if (d > tol) {
    throw Error(ErrorCode::RealityViolation,
                "coefficients are not conjugate-symmetric (defect " + std::to_string(d) + ")");
  }
}

void TrigMap::truncate(double eps) {
  std::erase_if(terms, [eps](const auto& kv) { return coef_norm(kv.second) < eps; });
  truncation_eps = std::max(truncation_eps, eps);
}

double TrigMap::max_coefficient() const {
  double m = 0.0;
  for (const auto& [k, c] : terms) m = std::max(m, coef_norm(c));
  return m;
}

TrigMap operator+(const TrigMap& a, const TrigMap& b) {
  TrigMap r = a;
  for (const auto& [k, c] : b.terms) {
    auto& slot = r.terms[k];
    slot[0] += c[0];
    slot[1] += c[1];
  }
  r.truncation_eps = std::max(a.truncation_eps, b.truncation_eps);
  return r;
}

TrigMap operator*(double s, const TrigMap& a) {
  TrigMap r = a;
  for (auto& [k, c] : r.terms) {
    c[0] *= s;
    c[1] *= s;
  }
  return r;
}

TrigMap operator-(const TrigMap& a, const TrigMap& b) { return a + (-1.0) * b; }

double coefficient_distance(const TrigMap& a, const TrigMap& b) {
  double worst = 0.0;
  for (const auto& [k, c] : a.terms) {
    const auto it = b.terms.find(k);
    const Coef other = it == b.terms.end() ? Coef{} : it->second;
    worst = std::max(worst, coef_norm({c[0] - other[0], c[1] - other[1]}));
  }
  for (const auto& [k, c] : b.terms) {
    if (!a.terms.contains(k)) worst = std::max(worst, coef_norm(c));
  }
  return worst;
}

double phase_mod1(const Freq& k, const Eigen::Vector2d& x) {
  double s = frac_product(k[0], x(0)) + frac_product(k[1], x(1));
  return s - std::floor(s);
}

Eigen::Vector2d evaluate(const TrigMap& f, const Eigen::Vector2d& x) {
  CompensatedSum re[2], im[2];
  for (const auto& [k, c] : f.terms) {
    const double theta = kTwoPi * phase_mod1(k, x);
    const std::complex<double> e(std::cos(theta), std::sin(theta));
    for (int i = 0; i < 2; ++i) {
      const std::complex<double> t = c[i] * e;
      re[i] += t.real();
      im[i] += t.imag();
    }
  }
  const double imag = std::max(std::abs(im[0].value()), std::abs(im[1].value()));
  if (imag > 1e-9) {
    throw Error(ErrorCode::RealityViolation,
                "imaginary part " + std::to_string(imag) + " in evaluation");
  }
  return {re[0].value(), re[1].value()};
}

Eigen::Matrix2d jacobian(const TrigMap& f, const Eigen::Vector2d& x) {
  CompensatedSum acc[2][2];
  for (const auto& [k, c] : f.terms) {
    const double theta = kTwoPi * phase_mod1(k, x);
    const std::complex<double> e(std::cos(theta), std::sin(theta));
    for (int i = 0; i < 2; ++i) {
      // d/dx_j of c e^{2 pi i <k,x>} = 2 pi i k_j c e^{...}
      const double re = (std::complex<double>(0.0, kTwoPi) * c[i] * e).real();
      acc[i][0] += re * static_cast<double>(k[0]);
      acc[i][1] += re * static_cast<double>(k[1]);
    }
  }
  Eigen::Matrix2d d;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) d(i, j) = acc[i][j].value();
  }
  return d;
}

TrigMap transform_coefficients(const TrigMap& f, const Eigen::Matrix2d& m) {
  TrigMap r;
  r.truncation_eps = f.truncation_eps;
  for (const auto& [k, c] : f.terms) {
    r.terms[k] = {m(0, 0) * c[0] + m(0, 1) * c[1], m(1, 0) * c[0] + m(1, 1) * c[1]};
  }
  return r;
}

ModeAmplitude mode_amplitude(const TrigMap& f, const Freq& k) {
  ModeAmplitude out;
  const auto it = f.terms.find(k);
  if (it == f.terms.end()) return out;
  const bool zero = k[0] == 0 && k[1] == 0;
  for (int i = 0; i < 2; ++i) {
    out.cos_amp(i) = zero ? it->second[i].real() : 2.0 * it->second[i].real();
    out.sin_amp(i) = zero ? 0.0 : -2.0 * it->second[i].imag();
  }
  return out;
}

std::optional<Freq> try_pushforward_frequency(const ToralAutomorphism& a, const Freq& k, int n) {
  IntMat2 step = a.matrix.transpose();
  if (n < 0) {
    step = a.inverse().transpose();
    n = -n;
  }
  Freq cur = k;
  for (int s = 0; s < n; ++s) {
    Freq next{};
    for (int i = 0; i < 2; ++i) {
      std::int64_t p0 = 0, p1 = 0, sum = 0;
      if (__builtin_mul_overflow(step(i, 0), cur[0], &p0) ||
          __builtin_mul_overflow(step(i, 1), cur[1], &p1) ||
          __builtin_add_overflow(p0, p1, &sum)) {
        return std::nullopt;
      }
      next[i] = sum;
    }
    cur = next;
  }
  return cur;
}

Freq pushforward_frequency(const ToralAutomorphism& a, const Freq& k, int n) {
  auto r = try_pushforward_frequency(a, k, n);
  if (!r) throw Error(ErrorCode::NoConvergence, "frequency transport overflows int64");
  return *r;
}

double frequency_norm(const Freq& k) {
  return std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]));
}

Freq negate(const Freq& k) { return {-k[0], -k[1]}; }

FrequencyOrbit frequency_orbit(const ToralAutomorphism& a, const Freq& seed, int length) {
  FrequencyOrbit orbit;
  orbit.seed = seed;
  orbit.elements.push_back(seed);
  double k_min = frequency_norm(seed);
  double scale = 1.0;
  for (int n = 1; n <= length; ++n) {
    orbit.elements.push_back(pushforward_frequency(a, orbit.elements.back(), 1));
    scale *= a.small_eig;
    k_min = std::min(k_min, frequency_norm(orbit.elements.back()) * scale);
  }
  orbit.growth_constant = k_min;
  return orbit;
}

}  // namespace anosov
