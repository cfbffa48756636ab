#pragma once

#include <cmath>
#include <vector>

#include "torsionlab/error.hpp"
#include "torsionlab/geometry.hpp"
#include "torsionlab/linking.hpp"
#include "torsionlab/systems.hpp"
#include "torsionlab/theorems.hpp"
#include "torsionlab/torsion.hpp"

namespace torsionlab {

struct Atom {
  Vec2 point;
  Vec2 unit_vector;
  double weight;
};

/// Uniform atomic measure on the unit tangent bundle carried by the first n
/// iterates of (z, xi / |xi|).
struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  int horizon_n = 0;
  Vec2 seed_point{};
  Vec2 seed_vector{};

  double total_weight() const {
    double w = 0.0;
    for (const Atom& a : atoms) w += a.weight;
    return w;
  }
};

/// Image of one unit-tangent atom under (F, DF / |DF .|).
inline Atom push_atom(const IsotopySystem& sys, const Atom& a) {
  const IsotopyValue step = sys.step(a.point);
  const Vec2 w = step.jacobian * a.unit_vector;
  if (!(norm(w) >= kDefaultNormFloor)) {
    throw Error(ErrorKind::DegenerateDifferential, "DF(z) xi vanished numerically");
  }
  check_escape(step.image, "empirical_measure");
  return {step.image, normalized(w), a.weight};
}

inline EmpiricalMeasure empirical_measure(const IsotopySystem& sys, Vec2 z, Vec2 xi, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "empirical_measure needs n >= 1");
  EmpiricalMeasure mu;
  mu.horizon_n = n;
  mu.seed_point = z;
  mu.seed_vector = xi;
  mu.atoms.reserve(n);
  Atom a{z, normalized(xi), 1.0 / n};
  for (int i = 0; i < n; ++i) {
    mu.atoms.push_back(a);
    if (i + 1 < n) a = push_atom(sys, a);
  }
  return mu;
}

/// Push-forward of the measure by the time-one map.
inline EmpiricalMeasure push_forward(const IsotopySystem& sys, const EmpiricalMeasure& mu) {
  EmpiricalMeasure out = mu;
  for (Atom& a : out.atoms) a = push_atom(sys, a);
  if (!mu.atoms.empty()) {
    out.seed_point = out.atoms.front().point;
    out.seed_vector = out.atoms.front().unit_vector;
  }
  return out;
}

/// Integral of Torsion_1 against the measure. For an empirical measure this
/// telescopes to Torsion_n of its seed.
inline double measure_torsion(const IsotopySystem& sys, const EmpiricalMeasure& mu,
                              Vec2 field = {1.0, 0.0}, const RefinementPolicy& policy = {}) {
  double sum = 0.0;
  for (const Atom& a : mu.atoms) {
    sum += a.weight * torsion_finite(sys, a.point, a.unit_vector, 1, field, policy).value;
  }
  return sum;
}

/// Linking of (0,0) and (2 pi, 0) must vanish beyond this for a torus lift.
inline constexpr double kTranslateLinkingTolerance = 1e-8;

/// Searches the segment from (0,0) to (2 pi, 0) for a point of null torsion at
/// time n. The located point seeds an empirical measure of null torsion.
inline SegmentScan torus_null_torsion_search(const IsotopySystem& sys, int n,
                                             const ScanOptions& opt = {},
                                             const RefinementPolicy& policy = {}) {
  if (sys.surface != Surface::torus_lift) {
    throw Error(ErrorKind::PeriodicityViolation, "system is not a lift of a torus isotopy");
  }
  const auto sample = uniform_grid(0.0, kTwoPi, 5, 0.0, kTwoPi, 5);
  for (double t : {0.5, 1.0}) {
    if (check_lift_periodicity(sys, t, sample) > kTranslateLinkingTolerance) {
      throw Error(ErrorKind::PeriodicityViolation, "F_t does not commute with deck translations");
    }
  }
  const Vec2 x{0.0, 0.0}, y{kTwoPi, 0.0};
  SegmentScan scan;
  scan.x = x;
  scan.y = y;
  scan.n = n;
  const double linking = linking_finite(sys, x, y, n, {1.0, 0.0}, policy).value;
  if (std::abs(linking) > kTranslateLinkingTolerance) {
    throw Error(ErrorKind::PeriodicityViolation, "linking of deck translates is not zero");
  }
  scan.target_l = 0.0;
  if (opt.scan_count < 16) throw Error(ErrorKind::InvalidArgument, "scan_count must be >= 16");
  detail::locate_on_segment(sys, scan, opt, policy);
  return scan;
}

}  // namespace torsionlab
