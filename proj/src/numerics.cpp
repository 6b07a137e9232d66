#include "anosov/numerics.hpp"

#include "anosov/error.hpp"

namespace anosov {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotUnimodular: return "NotUnimodular";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::NegativeEigenvalues: return "NegativeEigenvalues";
    case ErrorCode::InvalidQuadruple: return "InvalidQuadruple";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::RealityViolation: return "RealityViolation";
    case ErrorCode::InsufficientScales: return "InsufficientScales";
    case ErrorCode::C1BoundExceeded: return "C1BoundExceeded";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::TransversalityFailure: return "TransversalityFailure";
    case ErrorCode::ChartNotAdapted: return "ChartNotAdapted";
    case ErrorCode::ZetaVanished: return "ZetaVanished";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MeanObstruction: return "MeanObstruction";
    case ErrorCode::InverseNewtonDiverged: return "InverseNewtonDiverged";
    case ErrorCode::SplittingCollapse: return "SplittingCollapse";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::HyperbolicityLost: return "HyperbolicityLost";
    case ErrorCode::MatchFailed: return "MatchFailed";
    case ErrorCode::NonpositiveRoof: return "NonpositiveRoof";
    case ErrorCode::DivergentSeries: return "DivergentSeries";
    case ErrorCode::UniquenessSuspect: return "UniquenessSuspect";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoConvergence:
    case ErrorCode::MeanObstruction:
    case ErrorCode::InverseNewtonDiverged:
    case ErrorCode::SplittingCollapse:
    case ErrorCode::NewtonDiverged:
    case ErrorCode::HyperbolicityLost:
    case ErrorCode::MatchFailed:
    case ErrorCode::NonpositiveRoof:
    case ErrorCode::DivergentSeries:
    case ErrorCode::UniquenessSuspect:
      return true;
    default:
      return false;
  }
}

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

void ExactSum::add(double x) {
  // grow-expansion with zero elimination
  std::vector<double> out;
  out.reserve(parts_.size() + 1);
  double q = x;
  for (double e : parts_) {
    const DoubleWord s = dw_detail::two_sum(q, e);
    if (s.lo != 0.0) out.push_back(s.lo);
    q = s.hi;
  }
  if (q != 0.0) out.push_back(q);
  parts_ = std::move(out);
}

ExactSum ExactSum::scaled(double b) const {
  ExactSum r;
  for (double e : parts_) {
    const DoubleWord p = dw_detail::two_prod(e, b);
    r.add(p.lo);
    r.add(p.hi);
  }
  return r;
}

ExactSum ExactSum::negated() const {
  ExactSum r;
  r.parts_ = parts_;
  for (double& e : r.parts_) e = -e;
  return r;
}

double ExactSum::value() const {
  double s = 0.0;
  for (double e : parts_) s += e;
  return s;
}

bool exactly_equal(const ExactSum& a, const ExactSum& b) {
  ExactSum d = a;
  for (double e : b.parts()) d.add(-e);
  return d.is_zero();
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InsufficientScales, "line fit needs at least two points");
  }
  const double n = static_cast<double>(x.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxx, sxy, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinearFit fit;
  if (sxx.value() == 0.0) {
    throw Error(ErrorCode::InsufficientScales, "degenerate abscissae in line fit");
  }
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  CompensatedSum ssr;
  fit.residuals.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  fit.r2 = syy.value() > 0.0 ? 1.0 - ssr.value() / syy.value() : 1.0;
  return fit;
}

}  // namespace anosov
