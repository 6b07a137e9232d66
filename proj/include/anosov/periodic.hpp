#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anosov/cohomology.hpp"
#include "anosov/maps.hpp"
#include "anosov/torus.hpp"

namespace anosov {

enum class CenterClass { Expanding, Contracting, Neutral };
std::string to_string(CenterClass c);

struct PeriodicOrbit {
  int period_n = 0;
  std::vector<Eigen::Vector4d> points;
  std::array<double, 4> eigmoduli{};  // sorted ascending; zero when not computed
  bool has_spectrum = false;
  CenterClass center_class = CenterClass::Neutral;
  double residual = 0.0;
  int newton_iterations = 0;

  /// Throws InvalidQuadruple when two moduli coincide.
  EigenQuadruple quadruple() const;
};

struct PeriodicOptions {
  bool compute_spectrum = true;
  double tol = 1e-12;
  int max_iterations = 50;
  double class_tol = 1e-8;
  double hyperbolicity_margin = 1e-6;
};

/// Multiple-shooting damped Newton for F^n(z) = z from seed and its L_0-images.
/// Throws NewtonDiverged, HyperbolicityLost.
PeriodicOrbit find_periodic_orbit(const DynamicalMap& f, const Eigen::Vector4d& seed, int n,
                                  const PeriodicOptions& opts = {});
/// Same with an explicit initial guess for every orbit point.
PeriodicOrbit find_periodic_orbit(const DynamicalMap& f, const std::vector<Eigen::Vector4d>& guess,
                                  const PeriodicOptions& opts = {});

/// Moduli of the eigenvalues of DF^n along the orbit by periodic QR, sorted ascending.
/// Throws NoConvergence.
std::array<double, 4> cocycle_moduli(const DynamicalMap& f, const std::vector<Eigen::Vector4d>& points);

CenterClass classify_center(const PeriodicOrbit& orbit, double class_tol = 1e-8);
CenterClass classify_center(const std::array<double, 4>& moduli, double class_tol = 1e-8);

/// The L_0-orbit of a rational periodic point, exact.
std::vector<RationalTorusPoint> linear_orbit(const ToralAutomorphism& a, const ToralAutomorphism& b,
                                             const RationalTorusPoint& z, int n);
/// Smallest d >= 1 with L_0^d(z) = z.
int minimal_linear_period(const ToralAutomorphism& a, const ToralAutomorphism& b,
                          const RationalTorusPoint& z, int n);

struct CountReport {
  int period = 0;
  std::int64_t expected = 0;   // |det(A^n - I)| |det(B^n - I)|
  std::int64_t found = 0;      // distinct F-periodic points
  std::int64_t newton_solves = 0;
  double max_residual = 0.0;
};

/// Continues every L_0-periodic point of period dividing n to an F-periodic point and counts them.
CountReport count_periodic_points(const DynamicalMap& f, int n, std::int64_t cap = 4'000'000);

/// One L_0-orbit per cycle of minimal period exactly n, each starting at its smallest point.
std::vector<std::vector<RationalTorusPoint>> prime_linear_orbits(const ToralAutomorphism& a,
                                                               const ToralAutomorphism& b, int n);

enum class Matcher { Conjugacy, Continuation };
std::string to_string(Matcher m);
Matcher matcher_from_string(const std::string& s);

struct OrbitPair {
  PeriodicOrbit orbit_f;
  PeriodicOrbit orbit_g;
  double max_relative_eig_gap = 0.0;
};

struct SpectraComparison {
  std::vector<OrbitPair> pairs;
  double max_gap = 0.0;
  int periods_checked = 0;
};

/// Orbits of prime period <= max_period seeded from L_0, matched to G through h (conjugacy)
/// or a straight-line homotopy of lifts (continuation). Throws MatchFailed.
SpectraComparison compare_spectra(const DynamicalMap& f, const DynamicalMap& g, Matcher matcher,
                                  int max_period, const ConjugacyMap* h = nullptr);

}  // namespace anosov
