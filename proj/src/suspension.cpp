#include "anosov/suspension.hpp"

#include <cmath>
#include <string>

#include "anosov/error.hpp"

namespace anosov {

double default_roof_constant(const SkewProduct& base) {
  return 4.0 * std::log(std::max(base.a().large_eig, base.b().large_eig));
}

SuspensionConfig make_suspension(const DynamicalMap& base, double K, int grid) {
  SuspensionConfig cfg{K, &base};
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      for (int k = 0; k < grid; ++k) {
        for (int l = 0; l < grid; ++l) {
          roof(cfg, Eigen::Vector4d(i, j, k, l) / grid);
        }
      }
    }
  }
  // the grid can miss a small bump, so check every bump center as well
  if (const auto* p = dynamic_cast<const PerturbedMap*>(&base)) {
    for (const auto& b : p->bumps()) roof(cfg, b.center);
  }
  return cfg;
}

SuspensionConfig make_suspension(const DynamicalMap& base) {
  return make_suspension(base, default_roof_constant(base.base()));
}

double roof(const SuspensionConfig& cfg, const Eigen::Vector4d& z) {
  const double r = cfg.K + cfg.base->log_jacobian(z);
  if (!(r > 0.0)) {
    throw Error(ErrorCode::NonpositiveRoof, "roof is " + std::to_string(r));
  }
  return r;
}

FlowPeriodicOrbit flow_period(const SuspensionConfig& cfg, const PeriodicOrbit& orbit, SumMode mode) {
  if (!(orbit.residual < 1e-10)) {
    throw Error(ErrorCode::InvalidModel, "orbit residual above 1e-10");
  }
  FlowPeriodicOrbit out;
  out.base_orbit = orbit;
  CompensatedSum sum;
  for (const auto& z : orbit.points) {
    const double r = roof(cfg, z);
    sum += r;
    if (mode == SumMode::Exact) out.exact_period += r;
  }
  out.flow_period = mode == SumMode::Exact ? out.exact_period.value() : sum.value();
  out.error_bound = static_cast<double>(orbit.points.size()) * 1e-14;
  return out;
}

PeriodicOrbit cover_orbit(const PeriodicOrbit& orbit, int k) {
  PeriodicOrbit r = orbit;
  r.points.clear();
  for (int i = 0; i < k; ++i) r.points.insert(r.points.end(), orbit.points.begin(), orbit.points.end());
  r.period_n = orbit.period_n * k;
  if (r.has_spectrum) {
    for (double& m : r.eigmoduli) m = std::pow(m, k);
  }
  return r;
}

}  // namespace anosov
