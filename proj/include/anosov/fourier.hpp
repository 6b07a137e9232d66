#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anosov/torus.hpp"

namespace anosov {

using Freq = std::array<std::int64_t, 2>;
using Coef = std::array<std::complex<double>, 2>;

/// Real-valued map T^2 -> R^2 stored as sparse Fourier coefficients,
/// f(x) = sum_k c_k exp(2 pi i <k, x>), with c_{-k} = conj(c_k).
struct TrigMap {
  std::map<Freq, Coef> terms;
  double truncation_eps = 0.0;
  /// Basis the coefficient vectors are expressed in: "standard" or "B_eigen".
  std::string basis = "standard";

  /// Adds c at k and conj(c) at -k (c must be real for k = 0).
  void add_term(const Freq& k, const Coef& c);
  /// Adds v * amplitude * cos(2 pi <k, x>).
  void add_cosine(const Freq& k, const Eigen::Vector2d& v, double amplitude = 1.0);
  /// Adds v * amplitude * sin(2 pi <k, x>).
  void add_sine(const Freq& k, const Eigen::Vector2d& v, double amplitude = 1.0);

  /// Largest violation of the reality condition over stored frequencies.
  double reality_defect() const;
  /// Throws RealityViolation if reality_defect() > tol.
  void check_reality(double tol = 1e-12) const;

  /// Drops terms with max-norm coefficient below eps and records eps.
  void truncate(double eps);
  bool empty() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }
  double max_coefficient() const;
};

TrigMap operator+(const TrigMap& a, const TrigMap& b);
TrigMap operator-(const TrigMap& a, const TrigMap& b);
TrigMap operator*(double s, const TrigMap& a);

/// Max coefficient-wise difference, frequencies missing on one side count as zero.
double coefficient_distance(const TrigMap& a, const TrigMap& b);

/// Phase <k, x> mod 1 with the integer-by-double products carried exactly.
double phase_mod1(const Freq& k, const Eigen::Vector2d& x);

/// f(x). Throws RealityViolation if the imaginary part exceeds 1e-9.
Eigen::Vector2d evaluate(const TrigMap& f, const Eigen::Vector2d& x);
/// Df(x) as a real 2x2 matrix.
Eigen::Matrix2d jacobian(const TrigMap& f, const Eigen::Vector2d& x);

/// The same map with coefficient vectors multiplied by m.
TrigMap transform_coefficients(const TrigMap& f, const Eigen::Matrix2d& m);

/// Cosine and sine amplitudes at k: f contains a cos(2 pi <k,x>) + b sin(2 pi <k,x>).
struct ModeAmplitude {
  Eigen::Vector2d cos_amp = Eigen::Vector2d::Zero();
  Eigen::Vector2d sin_amp = Eigen::Vector2d::Zero();
};
ModeAmplitude mode_amplitude(const TrigMap& f, const Freq& k);

/// (A^T)^n k exactly; std::nullopt on int64 overflow.
std::optional<Freq> try_pushforward_frequency(const ToralAutomorphism& a, const Freq& k, int n);
/// (A^T)^n k exactly; throws NoConvergence on overflow.
Freq pushforward_frequency(const ToralAutomorphism& a, const Freq& k, int n);

double frequency_norm(const Freq& k);
Freq negate(const Freq& k);

struct FrequencyOrbit {
  Freq seed{};
  std::vector<Freq> elements;  // (A^T)^n seed for n = 0..N, the orbit of -seed is the negation
  double growth_constant = 0.0;  // min_n |elements[n]| * lam^n
};

FrequencyOrbit frequency_orbit(const ToralAutomorphism& a, const Freq& seed, int length);

}  // namespace anosov
