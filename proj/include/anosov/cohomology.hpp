#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "anosov/fourier.hpp"
#include "anosov/torus.hpp"

namespace anosov {

struct CohomologyOptions {
  double trunc_eps = 1e-13;
  int orbit_cap = 400;     // max transported terms per seed frequency
  int residual_grid = 128; // verification grid is residual_grid^2
};

struct CohomologySolution {
  TrigMap psi;        // standard basis of R^2
  TrigMap psi_eigen;  // component 0 along e_s(B), component 1 along e_u(B)
  double residual_sup = 0.0;
  double truncation_eps = 0.0;
  double predicted_alpha = 0.0;  // log mu_B / log lambda_A
  std::size_t transported_terms = 0;
};

/// Solves psi o A - B psi = g by transporting coefficients along A^T orbits.
/// Throws NoConvergence, MeanObstruction.
CohomologySolution solve_cohomology(const ToralAutomorphism& a, const ToralAutomorphism& b,
                                    const TrigMap& g, const CohomologyOptions& opts = {});

/// sup over a grid x grid lattice of |psi(Ax) - B psi(x) - g(x)|.
double cohomology_residual(const ToralAutomorphism& a, const ToralAutomorphism& b,
                           const TrigMap& psi, const TrigMap& g, int grid = 128);

/// Columns e_s(B), e_u(B).
Eigen::Matrix2d eigenbasis(const ToralAutomorphism& b);

/// h(x, y) = (x, y + psi(x)) on T^4.
struct ConjugacyMap {
  TrigMap psi;

  Eigen::Vector4d apply(const Eigen::Vector4d& z) const;
  Eigen::Vector4d apply_inverse(const Eigen::Vector4d& z) const;
  /// this o other
  ConjugacyMap compose(const ConjugacyMap& other) const;
};

/// h with h o L_phi0 = L_phi1 o h. Errors propagate from solve_cohomology.
ConjugacyMap build_conjugacy(const TrigMap& phi0, const TrigMap& phi1, const ToralAutomorphism& a,
                             const ToralAutomorphism& b, const CohomologyOptions& opts = {});

/// sup over grid of the torus distance between h(L_phi0(z)) and L_phi1(h(z)).
double conjugacy_residual(const ConjugacyMap& h, const TrigMap& phi0, const TrigMap& phi1,
                          const ToralAutomorphism& a, const ToralAutomorphism& b, int grid = 128);

/// sup over sample points of the torus distance between h^{-1}(h(z)) and z.
double conjugacy_roundtrip_error(const ConjugacyMap& h, int samples = 1024);

enum class HolderMethod { Increments, FourierDecay };
std::string to_string(HolderMethod m);
HolderMethod holder_method_from_string(const std::string& s);

struct HolderOptions {
  int j_min = 3;
  int j_max = 18;
  int samples = 4096;
  double min_coefficient = 0.0;  // fourier_decay ignores smaller coefficients; 0 means 100*eps
};

struct HolderEstimate {
  double alpha_hat = 0.0;
  HolderMethod method = HolderMethod::Increments;
  double fit_r2 = 0.0;
  std::pair<double, double> scale_range{0.0, 0.0};
  bool saturated = false;  // slope at the Lipschitz edge, no information about alpha
  bool trusted = false;    // fit_r2 >= 0.9 and not saturated
  std::vector<double> scales;     // h or |k|
  std::vector<double> values;     // M(h) or |psi_k|
  std::vector<double> residuals;  // log-log fit residuals
};

/// Throws InsufficientScales with fewer than 4 usable scales.
HolderEstimate estimate_holder(const TrigMap& psi, HolderMethod method, const ToralAutomorphism& a,
                               const HolderOptions& opts = {});

/// Two-dimensional additive recurrence (R2) sample in [0,1)^2.
std::vector<Eigen::Vector2d> low_discrepancy_points(int count);

}  // namespace anosov
