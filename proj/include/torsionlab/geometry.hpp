#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "torsionlab/error.hpp"

namespace torsionlab {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Below this norm a vector has no meaningful direction.
inline constexpr double kDefaultNormFloor = 1e-300;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Counterclockwise quarter turn (the J endomorphism on each tangent plane).
inline constexpr Vec2 quarter_turn(Vec2 a) { return {-a.y, a.x}; }

inline Vec2 normalized(Vec2 a, double floor = kDefaultNormFloor) {
  const double n = norm(a);
  if (!(n >= floor)) throw Error(ErrorKind::ZeroVector, "cannot normalize a vanishing vector");
  return {a.x / n, a.y / n};
}

/// Row-major 2x2 matrix: [[a11, a12], [a21, a22]].
struct Mat2 {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;

  static constexpr Mat2 identity() { return {}; }
  static Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c, -s, s, c};
  }

  constexpr double det() const { return a11 * a22 - a12 * a21; }
  constexpr Vec2 col1() const { return {a11, a21}; }
  constexpr Vec2 col2() const { return {a12, a22}; }

  friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
  }
  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
  return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12), std::abs(a.a21 - b.a21),
                   std::abs(a.a22 - b.a22)});
}

/// Principal measure in (-pi, pi] of the counterclockwise angle from u to v.
inline double oriented_angle(Vec2 u, Vec2 v, double floor = kDefaultNormFloor) {
  if (!(norm(u) >= floor) || !(norm(v) >= floor)) {
    throw Error(ErrorKind::ZeroVector, "oriented_angle needs two non-zero vectors");
  }
  const double a = std::atan2(cross(u, v), dot(u, v));
  return a <= -kPi ? kPi : a;
}

/// Principal argument of v, i.e. the oriented angle from (1,0) to v.
inline double argument(Vec2 v, double floor = kDefaultNormFloor) {
  return oriented_angle({1.0, 0.0}, v, floor);
}

/// Shifts `angle` by a multiple of 2*pi into the half-open interval (upper - 2*pi, upper].
inline double reduce_into(double angle, double upper) {
  const double k = std::ceil((angle - upper) / kTwoPi);
  double r = angle - k * kTwoPi;
  // ceil can land one period off when angle - upper is an exact multiple.
  if (r > upper) r -= kTwoPi;
  if (r <= upper - kTwoPi) r += kTwoPi;
  return r;
}

struct RefinementPolicy {
  double max_step_angle = kPi / 2.0;
  int max_depth = 40;
  double tolerance = 1e-9;
  /// Initial uniform samples per unit of the lifted parameter.
  int steps_per_unit = 64;
  double norm_floor = kDefaultNormFloor;
};

/// Continuous determination of an angle function sampled on a time grid.
struct AngleLiftTrace {
  std::vector<double> times;
  std::vector<double> angles;
  int refinement_depth_max = 0;

  double start() const { return angles.front(); }
  double end() const { return angles.back(); }
  double variation() const { return angles.back() - angles.front(); }

  /// Appends `other`, whose first sample must coincide in time with our last one.
  void append(const AngleLiftTrace& other) {
    if (times.empty()) {
      *this = other;
      return;
    }
    times.insert(times.end(), other.times.begin() + 1, other.times.end());
    angles.insert(angles.end(), other.angles.begin() + 1, other.angles.end());
    refinement_depth_max = std::max(refinement_depth_max, other.refinement_depth_max);
  }
};

namespace detail {

template <typename Sampler>
Vec2 sample_checked(Sampler& sampler, double t, double floor) {
  const Vec2 v = sampler(t);
  if (!(norm(v) >= floor)) throw Error(ErrorKind::ZeroVector, "sampler returned a vanishing vector");
  return v;
}

template <typename Sampler>
void refine_interval(Sampler& sampler, const RefinementPolicy& policy, double ta, Vec2 va,
                     double tb, Vec2 vb, int depth, AngleLiftTrace& out) {
  const double delta = oriented_angle(va, vb, policy.norm_floor);
  if (std::abs(delta) <= policy.max_step_angle) {
    out.times.push_back(tb);
    out.angles.push_back(out.angles.back() + delta);
    out.refinement_depth_max = std::max(out.refinement_depth_max, depth);
    return;
  }
  if (depth >= policy.max_depth) {
    throw Error(ErrorKind::RefinementExhausted,
                "angle step stays above threshold after maximal halving near t=" +
                    std::to_string(ta));
  }
  const double tm = 0.5 * (ta + tb);
  const Vec2 vm = sample_checked(sampler, tm, policy.norm_floor);
  refine_interval(sampler, policy, ta, va, tm, vm, depth + 1, out);
  refine_interval(sampler, policy, tm, vm, tb, vb, depth + 1, out);
}

}  // namespace detail

/// Lifts the argument of `sampler(t)` continuously over [t0, t1].
///
/// Starts from a uniform grid of `steps_per_unit` samples per unit time and
/// halves every interval whose principal angle step exceeds
/// `max_step_angle`. `initial_angle` must be a measure of the argument of
/// `sampler(t0)`; the returned trace starts exactly there.
template <typename Sampler>
AngleLiftTrace lift_angle_path(Sampler&& sampler, double t0, double t1, double initial_angle,
                               const RefinementPolicy& policy = {}) {
  if (!(t0 < t1)) throw Error(ErrorKind::InvalidArgument, "lift_angle_path needs t0 < t1");
  const double span = t1 - t0;
  const auto steps = static_cast<std::size_t>(
      std::max(1.0, std::ceil(span * policy.steps_per_unit - 1e-9)));

  AngleLiftTrace trace;
  trace.times.reserve(steps + 1);
  trace.angles.reserve(steps + 1);
  trace.times.push_back(t0);
  trace.angles.push_back(initial_angle);

  Vec2 prev = detail::sample_checked(sampler, t0, policy.norm_floor);
  double prev_t = t0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = k == steps ? t1 : t0 + span * static_cast<double>(k) / steps;
    const Vec2 cur = detail::sample_checked(sampler, t, policy.norm_floor);
    detail::refine_interval(sampler, policy, prev_t, prev, t, cur, 0, trace);
    prev = cur;
    prev_t = t;
  }
  return trace;
}

/// Lifts over [0, n] one unit interval at a time. `sampler_for(m)` returns the
/// sampler valid on [m, m+1]; it is called once per unit, in increasing order.
/// Consecutive units are joined by the principal angle between the end vector
/// of one unit and the start vector of the next (zero for exact orbits).
template <typename SamplerFactory>
AngleLiftTrace lift_unit_chain(int n, SamplerFactory&& sampler_for, double initial_angle,
                               const RefinementPolicy& policy = {}) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "horizon must be a positive integer");
  AngleLiftTrace trace;
  double start = initial_angle;
  Vec2 prev_end{};
  for (int m = 0; m < n; ++m) {
    auto sampler = sampler_for(m);
    const double t0 = m, t1 = m + 1.0;
    if (m > 0) {
      start = trace.end() + oriented_angle(prev_end, sampler(t0), policy.norm_floor);
    }
    trace.append(lift_angle_path(sampler, t0, t1, start, policy));
    prev_end = sampler(t1);
  }
  return trace;
}

/// Continuous determination of the argument along a discrete list of vectors.
/// Consecutive samples must subtend strictly less than pi.
inline std::vector<double> lift_discrete(std::span<const Vec2> vectors, double initial_angle,
                                         double floor = kDefaultNormFloor) {
  std::vector<double> lifted;
  lifted.reserve(vectors.size());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (!(norm(vectors[k]) >= floor)) {
      throw Error(ErrorKind::ZeroVector, "sample " + std::to_string(k) + " vanishes");
    }
    if (k == 0) {
      lifted.push_back(initial_angle);
      continue;
    }
    const double delta = oriented_angle(vectors[k - 1], vectors[k], floor);
    if (std::abs(delta) >= kPi) {
      throw Error(ErrorKind::JumpTooLarge,
                  "samples " + std::to_string(k - 1) + " and " + std::to_string(k) +
                      " subtend an angle of pi; densify the curve");
    }
    lifted.push_back(lifted.back() + delta);
  }
  return lifted;
}

/// Polar coordinates (r, lifted argument) of a curve avoiding the origin.
struct PolarLift {
  std::vector<double> radii;
  std::vector<double> lifted_angles;
};

inline PolarLift polar_lift(std::span<const Vec2> curve, double initial_angle,
                            double floor = kDefaultNormFloor) {
  PolarLift out;
  out.lifted_angles = lift_discrete(curve, initial_angle, floor);
  out.radii.reserve(curve.size());
  for (const Vec2& p : curve) out.radii.push_back(norm(p));
  return out;
}

/// A sample of a curve drawn in the polar chart (r, theta) together with its
/// chart tangent (dr, dtheta).
struct ChartSample {
  double r;
  double theta;
  double dr;
  double dtheta;
};

/// The two angle lifts compared by the polar-chart property: the angle from
/// the chart's radial direction (1,0) to the chart tangent, and the angle from
/// the radial image vector to the image tangent under P(r,t) = (r cos t, r sin t).
struct ChartAngleLifts {
  std::vector<double> chart;
  std::vector<double> image;
  double max_gap = 0.0;
};

inline ChartAngleLifts polar_chart_angle_lifts(std::span<const ChartSample> samples) {
  std::vector<Vec2> chart_tangents, image_radial, image_tangents;
  chart_tangents.reserve(samples.size());
  image_radial.reserve(samples.size());
  image_tangents.reserve(samples.size());
  for (const ChartSample& c : samples) {
    if (!(c.r > 0.0)) throw Error(ErrorKind::InvalidArgument, "chart samples need r > 0");
    // Differential of the polar chart at (r, theta).
    const Mat2 dp{std::cos(c.theta), -c.r * std::sin(c.theta), std::sin(c.theta),
                  c.r * std::cos(c.theta)};
    chart_tangents.push_back({c.dr, c.dtheta});
    image_radial.push_back(dp * Vec2{1.0, 0.0});
    image_tangents.push_back(dp * Vec2{c.dr, c.dtheta});
  }

  ChartAngleLifts out;
  if (samples.empty()) return out;

  // Lift the relative angles by accumulating principal steps of the angle
  // function itself; the two frames move together so each step is small.
  auto relative_lift = [](std::span<const Vec2> base, std::span<const Vec2> moving,
                          double start) {
    std::vector<double> lifted{start};
    double prev = oriented_angle(base[0], moving[0]);
    for (std::size_t k = 1; k < base.size(); ++k) {
      const double cur = oriented_angle(base[k], moving[k]);
      const double step = reduce_into(cur - prev, kPi);
      if (std::abs(step) >= kPi) {
        throw Error(ErrorKind::JumpTooLarge, "chart curve too coarsely sampled");
      }
      lifted.push_back(lifted.back() + step);
      prev = cur;
    }
    return lifted;
  };

  const std::vector<Vec2> radial(samples.size(), Vec2{1.0, 0.0});
  const double chart0 = oriented_angle(radial[0], chart_tangents[0]);
  const double image0 = oriented_angle(image_radial[0], image_tangents[0]);
  // Anchor the image lift within pi of the chart lift at the first sample.
  const double image_start = reduce_into(image0 - chart0, kPi) + chart0;

  out.chart = relative_lift(radial, chart_tangents, chart0);
  out.image = relative_lift(image_radial, image_tangents, image_start);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    out.max_gap = std::max(out.max_gap, std::abs(out.chart[k] - out.image[k]));
  }
  return out;
}

/// Central-difference Jacobian; a test oracle for the analytic Jacobians.
template <typename Map>
Mat2 finite_difference_jacobian(Map&& map, Vec2 z, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite difference step must be > 0");
  const Vec2 dx = (map(Vec2{z.x + h, z.y}) - map(Vec2{z.x - h, z.y})) * (0.5 / h);
  const Vec2 dy = (map(Vec2{z.x, z.y + h}) - map(Vec2{z.x, z.y - h})) * (0.5 / h);
  return {dx.x, dy.x, dx.y, dy.y};
}

}  // namespace torsionlab
