#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "torsionlab/error.hpp"
#include "torsionlab/geometry.hpp"
#include "torsionlab/linking.hpp"
#include "torsionlab/parallel.hpp"
#include "torsionlab/systems.hpp"
#include "torsionlab/torsion.hpp"

namespace torsionlab {

// ---------------------------------------------------------------------------
// Torsion point on a segment
// ---------------------------------------------------------------------------

struct ScanSample {
  double s;
  double torsion;
};

/// Scan of s -> Torsion_n(z(s), y - x) along z(s) = s y + (1 - s) x, looking
/// for a point whose torsion equals the linking number l of x and y.
struct SegmentScan {
  Vec2 x{}, y{};
  int n = 0;
  double target_l = 0.0;
  /// Every evaluated grid sample, sorted by s.
  std::vector<ScanSample> samples;
  std::optional<double> located_s;
  /// |Torsion_n(z(located_s)) - l| when located, else the smallest |g| seen.
  double residual = std::numeric_limits<double>::infinity();
  int bisection_iterations = 0;
  /// Number of grid doublings performed after the initial uniform scan.
  int refinement_levels = 0;
  /// Brackets whose bisection reached adjacent doubles with |g| above tolerance.
  int stalled_brackets = 0;

  Vec2 point(double s) const { return s * y + (1.0 - s) * x; }
};

inline constexpr int kMaxBisectionIterations = 200;

struct ScanOptions {
  int scan_count = 64;
  double tolerance = 1e-8;
  /// Grid doublings allowed when a level shows neither a root nor a sign change.
  int max_refinements = 6;
  int jobs = 1;
};

namespace detail {

/// Scan-then-bisect for a zero of g = torsion - target on [0, 1].
///
/// A grid point with |g| <= tolerance counts as a root, which also covers
/// touching roots. Sign changes are bisected in order of s. For large n the
/// torsion can be so steep that adjacent doubles straddle the root with |g|
/// above tolerance; such a bracket is counted as stalled and the next one is
/// tried. When a level yields nothing the grid is doubled, at most
/// `max_refinements` times.
inline void locate_on_segment(const IsotopySystem& sys, SegmentScan& scan, const ScanOptions& opt,
                              const RefinementPolicy& policy) {
  const Vec2 xi = scan.y - scan.x;
  const double l = scan.target_l;
  auto g_at = [&](double s) {
    return torsion_finite(sys, scan.point(s), xi, scan.n, {1.0, 0.0}, policy).value - l;
  };

  std::vector<double> grid(opt.scan_count);
  for (int k = 0; k < opt.scan_count; ++k) grid[k] = static_cast<double>(k) / (opt.scan_count - 1);
  std::vector<double> g(grid.size());
  parallel_for(grid.size(), opt.jobs, [&](std::size_t k) { g[k] = g_at(grid[k]); });

  std::vector<double> stalled_at;
  auto contains_stall = [&](double lo, double hi) {
    return std::any_of(stalled_at.begin(), stalled_at.end(),
                       [&](double s) { return lo <= s && s <= hi; });
  };

  for (int level = 0;; ++level) {
    scan.refinement_levels = level;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      scan.residual = std::min(scan.residual, std::abs(g[k]));
      if (std::abs(g[k]) <= opt.tolerance) {
        scan.located_s = grid[k];
        scan.residual = std::abs(g[k]);
        break;
      }
      if (k + 1 == grid.size() || std::abs(g[k + 1]) <= opt.tolerance) continue;
      if ((g[k] < 0.0) == (g[k + 1] < 0.0) || contains_stall(grid[k], grid[k + 1])) continue;

      double lo = grid[k], hi = grid[k + 1], g_lo = g[k];
      for (int it = 1; it <= kMaxBisectionIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
          ++scan.stalled_brackets;
          stalled_at.push_back(lo);
          break;
        }
        const double g_mid = g_at(mid);
        ++scan.bisection_iterations;
        if (std::abs(g_mid) <= opt.tolerance) {
          scan.located_s = mid;
          scan.residual = std::abs(g_mid);
          break;
        }
        if ((g_mid < 0.0) == (g_lo < 0.0)) {
          lo = mid;
          g_lo = g_mid;
        } else {
          hi = mid;
        }
        if (it == kMaxBisectionIterations) {
          ++scan.stalled_brackets;
          stalled_at.push_back(lo);
        }
      }
      if (scan.located_s) break;
    }
    if (scan.located_s || level >= opt.max_refinements) break;

    // Double the grid: evaluate every midpoint and merge.
    std::vector<double> mids(grid.size() - 1), g_mids(grid.size() - 1);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) mids[k] = 0.5 * (grid[k] + grid[k + 1]);
    parallel_for(mids.size(), opt.jobs, [&](std::size_t k) { g_mids[k] = g_at(mids[k]); });
    std::vector<double> grid2, g2;
    grid2.reserve(grid.size() + mids.size());
    g2.reserve(grid.size() + mids.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      grid2.push_back(grid[k]);
      g2.push_back(g[k]);
      if (k < mids.size()) {
        grid2.push_back(mids[k]);
        g2.push_back(g_mids[k]);
      }
    }
    grid = std::move(grid2);
    g = std::move(g2);
  }

  scan.samples.clear();
  scan.samples.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) scan.samples.push_back({grid[k], g[k] + l});
  if (!scan.located_s && scan.stalled_brackets > 0) {
    throw Error(ErrorKind::BisectionStall,
                "every sign change bracketed the root to adjacent doubles with |g| above tolerance");
  }
}

}  // namespace detail

/// Finds z in [x, y] with Torsion_n(z, y - x) equal to Linking_n(x, y).
///
/// An absent `located_s` means no grid value came within tolerance and no sign
/// change was seen, even after refinement. The full table is returned so the
/// failure can be inspected.
inline SegmentScan locate_torsion_point(const IsotopySystem& sys, Vec2 x, Vec2 y, int n,
                                        const ScanOptions& opt = {},
                                        const RefinementPolicy& policy = {}) {
  if (x == y) throw Error(ErrorKind::DiagonalInput, "segment endpoints must differ");
  if (opt.scan_count < 16) throw Error(ErrorKind::InvalidArgument, "scan_count must be >= 16");
  if (!(opt.tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be > 0");
  SegmentScan scan;
  scan.x = x;
  scan.y = y;
  scan.n = n;
  scan.target_l = linking_finite(sys, x, y, n, {1.0, 0.0}, policy).value;
  detail::locate_on_segment(sys, scan, opt, policy);
  return scan;
}

// ---------------------------------------------------------------------------
// Independence of the isotopy
// ---------------------------------------------------------------------------

struct TangentSample {
  Vec2 point;
  Vec2 vector;
};

/// Max |Torsion_1(A) - Torsion_1(B)| over `sample` for two isotopies ending at
/// the same map. Zero on annulus and torus lifts; on the plane the two may
/// differ by a multiple of 2 pi.
inline double isotopy_independence_check(const IsotopySystem& a, const IsotopySystem& b,
                                         std::span<const TangentSample> sample,
                                         const RefinementPolicy& policy = {}) {
  double worst = 0.0;
  for (const TangentSample& p : sample) {
    const IsotopyValue fa = a.step(p.point), fb = b.step(p.point);
    if (norm(fa.image - fb.image) > 1e-8 || max_abs_diff(fa.jacobian, fb.jacobian) > 1e-8) {
      throw Error(ErrorKind::VariantMismatch, "isotopies disagree at time one");
    }
    const double ta = torsion_finite(a, p.point, p.vector, 1, {1.0, 0.0}, policy).value;
    const double tb = torsion_finite(b, p.point, p.vector, 1, {1.0, 0.0}, policy).value;
    worst = std::max(worst, std::abs(ta - tb));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Crovisier's discrete torsion
// ---------------------------------------------------------------------------

/// Interval-normalized angle measures for one step of a positive twist map,
/// relative to the vertical (0, 1):
///   theta0 in (-2pi, 0]                 angle from (0,1) to xi
///   beta   in (-2pi, 0]                 angle from (0,1) to Df(z)(0,1)
///   theta1 in (beta - 2pi, beta]        angle from (0,1) to Df(z) xi
struct CrovisierAngles {
  double theta0 = 0.0;
  double theta1 = 0.0;
  double beta = 0.0;
  double theta = 0.0;
};

inline CrovisierAngles crovisier_angles(const IsotopySystem& sys, Vec2 z, Vec2 xi) {
  if (sys.surface != Surface::annulus_lift) {
    throw Error(ErrorKind::NotTwist, "Crovisier torsion is defined for twist maps of the annulus");
  }
  const Mat2 df = sys.step(z).jacobian;
  if (!(df.a12 > 0.0)) {
    throw Error(ErrorKind::NotTwist, "d(p1 o F)/dy is not positive along the orbit");
  }
  constexpr Vec2 up{0.0, 1.0};
  CrovisierAngles c;
  c.theta0 = reduce_into(oriented_angle(up, xi), 0.0);
  c.beta = reduce_into(oriented_angle(up, df * up), 0.0);
  c.theta1 = reduce_into(oriented_angle(up, df * xi), c.beta);
  c.theta = c.theta1 - c.theta0;
  return c;
}

/// Per-step angles along the orbit (f^k z, Df^k(z) xi), k = 0..n-1.
inline std::vector<CrovisierAngles> crovisier_summands(const IsotopySystem& sys, Vec2 z, Vec2 xi,
                                                       int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "crovisier_theta_n needs n >= 1");
  Vec2 v = normalized(xi);
  std::vector<CrovisierAngles> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    out.push_back(crovisier_angles(sys, z, v));
    const IsotopyValue step = sys.step(z);
    const Vec2 w = step.jacobian * v;
    if (!(norm(w) >= kDefaultNormFloor)) {
      throw Error(ErrorKind::DegenerateDifferential, "Df^k(z) xi vanished numerically");
    }
    v = normalized(w);
    z = step.image;
    check_escape(z, "crovisier");
  }
  return out;
}

inline double crovisier_theta_n(const IsotopySystem& sys, Vec2 z, Vec2 xi, int n) {
  double sum = 0.0;
  for (const CrovisierAngles& c : crovisier_summands(sys, z, xi, n)) sum += c.theta;
  return sum;
}

/// |n Torsion_n(z, xi) - theta_n(xi)| with the vertical reference field.
inline double crovisier_equivalence_gap(const IsotopySystem& sys, Vec2 z, Vec2 xi, int n,
                                        const RefinementPolicy& policy = {}) {
  const double theta_n = crovisier_theta_n(sys, z, xi, n);
  return std::abs(torsion_finite(sys, z, xi, n, {0.0, 1.0}, policy).total_winding - theta_n);
}

// ---------------------------------------------------------------------------
// Twist bound sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  std::size_t index;
  Vec2 point;
  int n;
  double value;
  bool pass;
};

struct SweepExtrema {
  int n;
  double min;
  double max;
  bool pass;
};

struct TwistSweepReport {
  TwistReport twist;
  std::vector<SweepRow> rows;
  std::vector<SweepExtrema> per_n;
  bool pass = true;
};

/// Torsion_n(z, (0,1)) with the vertical reference field over a point sample;
/// passes iff every value is strictly inside (-pi, 0).
inline TwistSweepReport twist_bound_sweep(const IsotopySystem& sys, std::span<const Vec2> points,
                                          std::span<const int> n_list,
                                          const RefinementPolicy& policy = {}, int jobs = 1) {
  TwistSweepReport report;
  report.twist = check_twist(sys, 1.0, points);
  const std::size_t per_point = n_list.size();
  report.rows.resize(points.size() * per_point);
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    const int n_max = *std::max_element(n_list.begin(), n_list.end());
    const AngleLiftTrace trace =
        detail::tangent_trace(sys, points[i], {0.0, 1.0}, n_max, {0.0, 1.0}, policy);
    const std::vector<double> marks = detail::unit_marks(trace, n_max);
    for (std::size_t j = 0; j < per_point; ++j) {
      const int n = n_list[j];
      const double v = (marks[n] - marks[0]) / n;
      report.rows[i * per_point + j] = {i, points[i], n, v, v > -kPi && v < 0.0};
    }
  });
  for (int n : n_list) {
    SweepExtrema e{n, std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity(), true};
    for (const SweepRow& r : report.rows) {
      if (r.n != n) continue;
      e.min = std::min(e.min, r.value);
      e.max = std::max(e.max, r.value);
      e.pass = e.pass && r.pass;
    }
    report.pass = report.pass && e.pass;
    report.per_n.push_back(e);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Stable branches of hyperbolic fixed points
// ---------------------------------------------------------------------------

struct Eigenpair {
  double value;
  Vec2 vector;
};

/// Real eigenpairs of a 2x2 matrix, ordered by increasing |value|.
inline std::vector<Eigenpair> real_eigenpairs(const Mat2& m) {
  const double tr = m.a11 + m.a22;
  const double disc = tr * tr - 4.0 * m.det();
  if (disc <= 0.0) return {};
  const double root = std::sqrt(disc);
  // Stable quadratic formula: compute the larger-magnitude root first.
  const double big = 0.5 * (tr + std::copysign(root, tr == 0.0 ? 1.0 : tr));
  const double small = m.det() / big;
  std::vector<Eigenpair> out;
  for (double mu : {small, big}) {
    const Vec2 c1{m.a12, mu - m.a11};
    const Vec2 c2{mu - m.a22, m.a21};
    out.push_back({mu, normalized(norm(c1) >= norm(c2) ? c1 : c2)});
  }
  return out;
}

/// Integer-time orbit of length n + 1 starting on the stable branch of the
/// hyperbolic fixed point z0, at distance ~`distance` along the stable
/// eigenvector. Built backwards from a point next to z0 with the inverse map,
/// so it keeps shadowing the branch where forward iteration would not.
inline std::vector<Vec2> stable_branch_orbit(const IsotopySystem& sys, Vec2 z0, double distance,
                                             int n, double branch_sign = 1.0) {
  if (!sys.inverse) throw Error(ErrorKind::InvalidArgument, "system has no inverse map");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
  const IsotopyValue f = sys.step(z0);
  if (norm(f.image - z0) > 1e-12) throw Error(ErrorKind::InvalidArgument, "z0 is not a fixed point");
  const std::vector<Eigenpair> eig = real_eigenpairs(f.jacobian);
  if (eig.empty() || !(std::abs(eig[0].value) < 1.0) || !(std::abs(eig[1].value) > 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "z0 is not a hyperbolic saddle");
  }
  const double mu = std::abs(eig[0].value);
  const Vec2 dir = branch_sign * eig[0].vector;
  std::vector<Vec2> orbit(n + 1);
  orbit[n] = z0 + (distance * std::pow(mu, n)) * dir;
  for (int k = n; k > 0; --k) orbit[k - 1] = sys.inverse(orbit[k]);
  return orbit;
}

}  // namespace torsionlab
