#include "anosov/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "anosov/error.hpp"

namespace anosov {
namespace {

// (1-t) F + t G on lifts; only what Newton needs.
class HomotopyMap final : public DynamicalMap {
 public:
  HomotopyMap(const DynamicalMap& f, const DynamicalMap& g, double t) : f_(f), g_(g), t_(t) {}
  Eigen::Vector4d lift(const Eigen::Vector4d& z) const override {
    return (1.0 - t_) * f_.lift(z) + t_ * g_.lift(z);
  }
  Eigen::Matrix4d differential(const Eigen::Vector4d& z) const override {
    return (1.0 - t_) * f_.differential(z) + t_ * g_.differential(z);
  }
  Eigen::Vector4d inverse(const Eigen::Vector4d&) const override {
    throw Error(ErrorCode::InvalidModel, "homotopy maps are not inverted");
  }
  double log_jacobian(const Eigen::Vector4d& z) const override {
    return std::log(std::abs(differential(z).determinant()));
  }
  const SkewProduct& base() const override { return f_.base(); }

 private:
  const DynamicalMap& f_;
  const DynamicalMap& g_;
  double t_;
};

double orbit_residual(const DynamicalMap& f, const std::vector<Eigen::Vector4d>& z) {
  const std::size_t n = z.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, torus_distance(f.step(z[i]), z[(i + 1) % n]));
  }
  return worst;
}

Eigen::Vector4d linear_image(const SkewProduct& base, const Eigen::Vector4d& z) {
  Eigen::Vector4d out;
  out.head<2>() = base.a().as_real() * z.head<2>();
  out.tail<2>() = base.b().as_real() * z.tail<2>();
  return wrap4(out);
}

std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::string to_string(CenterClass c) {
  switch (c) {
    case CenterClass::Expanding: return "expanding";
    case CenterClass::Contracting: return "contracting";
    default: return "neutral";
  }
}

EigenQuadruple PeriodicOrbit::quadruple() const {
  return EigenQuadruple::make(eigmoduli[0], eigmoduli[1], eigmoduli[2], eigmoduli[3]);
}

PeriodicOrbit find_periodic_orbit(const DynamicalMap& f, const Eigen::Vector4d& seed, int n,
                                  const PeriodicOptions& opts) {
  if (n < 1) throw Error(ErrorCode::InvalidModel, "period must be >= 1");
  std::vector<Eigen::Vector4d> guess{wrap4(seed)};
  for (int i = 1; i < n; ++i) guess.push_back(linear_image(f.base(), guess.back()));
  return find_periodic_orbit(f, guess, opts);
}

PeriodicOrbit find_periodic_orbit(const DynamicalMap& f, const std::vector<Eigen::Vector4d>& guess,
                                  const PeriodicOptions& opts) {
  const int n = static_cast<int>(guess.size());
  if (n < 1) throw Error(ErrorCode::InvalidModel, "empty orbit guess");
  std::vector<Eigen::Vector4d> z;
  for (const auto& g : guess) z.push_back(wrap4(g));

  auto residual_vector = [&](const std::vector<Eigen::Vector4d>& pts) {
    Eigen::VectorXd r(4 * n);
    for (int i = 0; i < n; ++i) {
      r.segment<4>(4 * i) = wrapped_difference(f.step(pts[i]), pts[(i + 1) % n]);
    }
    return r;
  };

  Eigen::VectorXd r = residual_vector(z);
  double res = r.cwiseAbs().maxCoeff();
  double prev = res;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (res < opts.tol && (res < 1e-14 || res >= 0.5 * prev)) break;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    for (int i = 0; i < n; ++i) {
      j.block<4, 4>(4 * i, 4 * i) = f.differential(z[i]);
      j.block<4, 4>(4 * i, 4 * ((i + 1) % n)) -= Eigen::Matrix4d::Identity();
    }
    const Eigen::VectorXd dz = j.partialPivLu().solve(r);
    double step = 1.0;
    std::vector<Eigen::Vector4d> trial(z.size());
    Eigen::VectorXd r_trial;
    double res_trial = 0.0;
    for (int halving = 0; halving < 30; ++halving) {
      for (int i = 0; i < n; ++i) trial[i] = wrap4(z[i] - step * dz.segment<4>(4 * i));
      r_trial = residual_vector(trial);
      res_trial = r_trial.cwiseAbs().maxCoeff();
      if (res_trial < res || res < 1e-13) break;
      step *= 0.5;
    }
    if (!(res_trial < res) && res >= opts.tol) {
      throw Error(ErrorCode::NewtonDiverged, "line search failed at residual " + std::to_string(res));
    }
    if (!(res_trial < res)) break;
    prev = res;
    z = trial;
    r = r_trial;
    res = res_trial;
  }
  if (!(res < opts.tol)) {
    throw Error(ErrorCode::NewtonDiverged,
                "periodic Newton stopped at residual " + std::to_string(res));
  }

  PeriodicOrbit orbit;
  orbit.period_n = n;
  orbit.points = z;
  orbit.residual = orbit_residual(f, z);
  orbit.newton_iterations = it;
  if (opts.compute_spectrum) {
    orbit.eigmoduli = cocycle_moduli(f, z);
    orbit.has_spectrum = true;
    for (double m : orbit.eigmoduli) {
      if (std::abs(m - 1.0) < opts.hyperbolicity_margin) {
        throw Error(ErrorCode::HyperbolicityLost, "eigenvalue modulus within 1e-6 of 1");
      }
    }
    orbit.center_class = classify_center(orbit.eigmoduli, opts.class_tol);
  }
  return orbit;
}

std::array<double, 4> cocycle_moduli(const DynamicalMap& f, const std::vector<Eigen::Vector4d>& points) {
  Eigen::Matrix4d q = Eigen::Matrix4d::Identity();
  Eigen::Vector4d logs_prev = Eigen::Vector4d::Constant(1e300);
  for (int sweep = 0; sweep < 2000; ++sweep) {
    Eigen::Vector4d logs = Eigen::Vector4d::Zero();
    for (const auto& p : points) {
      Eigen::HouseholderQR<Eigen::Matrix4d> qr(f.differential(p) * q);
      q = qr.householderQ();
      for (int i = 0; i < 4; ++i) logs(i) += std::log(std::abs(qr.matrixQR()(i, i)));
    }
    if (sweep > 0 && (logs - logs_prev).cwiseAbs().maxCoeff() < 1e-13) {
      std::array<double, 4> m{};
      for (int i = 0; i < 4; ++i) m[i] = std::exp(logs(i));
      std::sort(m.begin(), m.end());
      return m;
    }
    logs_prev = logs;
  }
  throw Error(ErrorCode::NoConvergence, "periodic QR did not converge in 2000 sweeps");
}

CenterClass classify_center(const std::array<double, 4>& moduli, double class_tol) {
  const double product = moduli[1] * moduli[2];
  if (product > 1.0 + class_tol) return CenterClass::Expanding;
  if (product < 1.0 - class_tol) return CenterClass::Contracting;
  return CenterClass::Neutral;
}

CenterClass classify_center(const PeriodicOrbit& orbit, double class_tol) {
  return classify_center(orbit.eigmoduli, class_tol);
}

std::vector<RationalTorusPoint> linear_orbit(const ToralAutomorphism& a, const ToralAutomorphism& b,
                                             const RationalTorusPoint& z, int n) {
  std::vector<RationalTorusPoint> out{z};
  const std::int64_t d = z.denominator;
  for (int i = 1; i < n; ++i) {
    const auto& v = out.back().numerators;
    RationalTorusPoint p;
    p.denominator = d;
    p.numerators = {mod_floor(a.matrix(0, 0) * v[0] + a.matrix(0, 1) * v[1], d),
                    mod_floor(a.matrix(1, 0) * v[0] + a.matrix(1, 1) * v[1], d),
                    mod_floor(b.matrix(0, 0) * v[2] + b.matrix(0, 1) * v[3], d),
                    mod_floor(b.matrix(1, 0) * v[2] + b.matrix(1, 1) * v[3], d)};
    out.push_back(p);
  }
  return out;
}

int minimal_linear_period(const ToralAutomorphism& a, const ToralAutomorphism& b,
                          const RationalTorusPoint& z, int n) {
  const auto orbit = linear_orbit(a, b, z, n + 1);
  for (int d = 1; d <= n; ++d) {
    if (orbit[static_cast<std::size_t>(d)] == z) return d;
  }
  return n;
}

CountReport count_periodic_points(const DynamicalMap& f, int n, std::int64_t cap) {
  const auto& a = f.base().a();
  const auto& b = f.base().b();
  const auto seeds = periodic_points_linear(a, b, n, cap);
  CountReport rep;
  rep.period = n;
  rep.expected = static_cast<std::int64_t>(seeds.size());

  auto index_of = [&](const RationalTorusPoint& p) {
    const auto it = std::lower_bound(seeds.begin(), seeds.end(), p,
                                     [](const RationalTorusPoint& x, const RationalTorusPoint& y) {
                                       return x.numerators < y.numerators;
                                     });
    if (it == seeds.end() || !(*it == p)) {
      throw Error(ErrorCode::InvalidModel, "linear orbit left the periodic lattice");
    }
    return static_cast<std::size_t>(it - seeds.begin());
  };

  std::vector<Eigen::Vector4d> found(seeds.size());
  std::vector<bool> covered(seeds.size(), false);
  PeriodicOptions opts;
  opts.compute_spectrum = false;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (covered[s]) continue;
    const auto orbit = linear_orbit(a, b, seeds[s], n);
    std::vector<Eigen::Vector4d> guess;
    for (const auto& p : orbit) guess.push_back(p.to_real());
    const PeriodicOrbit po = find_periodic_orbit(f, guess, opts);
    ++rep.newton_solves;
    rep.max_residual = std::max(rep.max_residual, po.residual);
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = index_of(orbit[static_cast<std::size_t>(i)]);
      if (!covered[idx]) {
        covered[idx] = true;
        found[idx] = po.points[static_cast<std::size_t>(i)];
      }
    }
  }

  // distinct points: sort on a coarse key, then compare neighbours in the torus metric
  std::vector<std::size_t> order(found.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](std::size_t i) {
    std::array<std::int64_t, 4> k{};
    for (int c = 0; c < 4; ++c) {
      k[c] = std::llround(found[i](c) * 1e8) % 100000000;
    }
    return k;
  };
  std::vector<std::array<std::int64_t, 4>> keys(found.size());
  for (std::size_t i = 0; i < found.size(); ++i) keys[i] = key(i);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return keys[x] < keys[y]; });
  std::int64_t distinct = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || torus_distance(found[order[i]], found[order[i - 1]]) > 1e-9) ++distinct;
  }
  rep.found = distinct;
  return rep;
}

std::string to_string(Matcher m) { return m == Matcher::Conjugacy ? "conjugacy" : "continuation"; }

Matcher matcher_from_string(const std::string& s) {
  if (s == "conjugacy") return Matcher::Conjugacy;
  if (s == "continuation") return Matcher::Continuation;
  throw Error(ErrorCode::SchemaError, "unknown matcher '" + s + "'");
}

namespace {

PeriodicOrbit continue_orbit(const DynamicalMap& f, const DynamicalMap& g, const PeriodicOrbit& start) {
  PeriodicOptions quiet;
  quiet.compute_spectrum = false;
  std::vector<Eigen::Vector4d> pts = start.points;
  double t = 0.0;
  double dt = 0.25;
  while (t < 1.0) {
    const double next = std::min(1.0, t + dt);
    try {
      const HomotopyMap h(f, g, next);
      pts = find_periodic_orbit(h, pts, quiet).points;
      t = next;
      dt = std::min(0.25, 2.0 * dt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NewtonDiverged) throw;
      dt *= 0.5;
      if (dt < 1e-6) {
        throw Error(ErrorCode::MatchFailed, "continuation step fell below 1e-6 at t = " +
                                                std::to_string(t));
      }
    }
  }
  return find_periodic_orbit(g, pts);
}

}  // namespace

std::vector<std::vector<RationalTorusPoint>> prime_linear_orbits(const ToralAutomorphism& a,
                                                               const ToralAutomorphism& b, int n) {
  const auto seeds = periodic_points_linear(a, b, n);
  std::vector<bool> covered(seeds.size(), false);
  auto index_of = [&](const RationalTorusPoint& p) {
    const auto it = std::lower_bound(
        seeds.begin(), seeds.end(), p,
        [](const RationalTorusPoint& x, const RationalTorusPoint& y) { return x.numerators < y.numerators; });
    return static_cast<std::size_t>(it - seeds.begin());
  };
  std::vector<std::vector<RationalTorusPoint>> out;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (covered[s]) continue;
    auto orbit = linear_orbit(a, b, seeds[s], n);
    for (const auto& p : orbit) covered[index_of(p)] = true;
    if (minimal_linear_period(a, b, seeds[s], n) == n) out.push_back(std::move(orbit));
  }
  return out;
}

SpectraComparison compare_spectra(const DynamicalMap& f, const DynamicalMap& g, Matcher matcher,
                                  int max_period, const ConjugacyMap* h) {
  if (matcher == Matcher::Conjugacy && h == nullptr) {
    throw Error(ErrorCode::InvalidModel, "conjugacy matcher needs a conjugacy");
  }
  const auto& a = f.base().a();
  const auto& b = f.base().b();
  SpectraComparison cmp;
  for (int n = 1; n <= max_period; ++n) {
    for (const auto& orbit : prime_linear_orbits(a, b, n)) {
      std::vector<Eigen::Vector4d> guess;
      for (const auto& p : orbit) guess.push_back(p.to_real());
      OrbitPair pair;
      pair.orbit_f = find_periodic_orbit(f, guess);
      if (matcher == Matcher::Conjugacy) {
        std::vector<Eigen::Vector4d> image;
        for (const auto& p : pair.orbit_f.points) image.push_back(h->apply(p));
        pair.orbit_g = find_periodic_orbit(g, image);
        if (torus_distance(pair.orbit_g.points[0], image[0]) > 1e-8) {
          throw Error(ErrorCode::MatchFailed, "conjugacy image is not a periodic point of G");
        }
      } else {
        pair.orbit_g = continue_orbit(f, g, pair.orbit_f);
      }
      for (int i = 0; i < 4; ++i) {
        const double gap = std::abs(pair.orbit_f.eigmoduli[i] - pair.orbit_g.eigmoduli[i]) /
                           pair.orbit_f.eigmoduli[i];
        pair.max_relative_eig_gap = std::max(pair.max_relative_eig_gap, gap);
      }
      cmp.max_gap = std::max(cmp.max_gap, pair.max_relative_eig_gap);
      cmp.pairs.push_back(std::move(pair));
    }
    ++cmp.periods_checked;
  }
  return cmp;
}

}  // namespace anosov
