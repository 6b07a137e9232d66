#pragma once

#include "anosov/maps.hpp"
#include "anosov/numerics.hpp"
#include "anosov/periodic.hpp"

namespace anosov {

/// Suspension of a base map under the roof K + log J.
struct SuspensionConfig {
  double K = 0.0;
  const DynamicalMap* base = nullptr;
};

/// 4 log lam_hat of the linear part.
double default_roof_constant(const SkewProduct& base);

/// Checks K + log J > 0 on a grid^4 lattice. Throws NonpositiveRoof.
SuspensionConfig make_suspension(const DynamicalMap& base, double K, int grid = 8);
SuspensionConfig make_suspension(const DynamicalMap& base);

/// K + log det DF(z). Throws NonpositiveRoof.
double roof(const SuspensionConfig& cfg, const Eigen::Vector4d& z);

enum class SumMode { Compensated, Exact };

struct FlowPeriodicOrbit {
  PeriodicOrbit base_orbit;
  double flow_period = 0.0;
  ExactSum exact_period;  // filled in exact mode
  double error_bound = 0.0;
};

/// Sum of the roof along the orbit. Throws InvalidModel if the orbit residual exceeds 1e-10.
FlowPeriodicOrbit flow_period(const SuspensionConfig& cfg, const PeriodicOrbit& orbit,
                              SumMode mode = SumMode::Compensated);

/// The orbit traversed k times, as a period k*n orbit.
PeriodicOrbit cover_orbit(const PeriodicOrbit& orbit, int k);

}  // namespace anosov
