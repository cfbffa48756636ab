#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "torsionlab/error.hpp"
#include "torsionlab/geometry.hpp"
#include "torsionlab/systems.hpp"

namespace torsionlab {

/// Finite-time torsion: the variation of a continuous determination of the
/// angle from X to DF_t(z) xi over [0, n], divided by n.
struct TorsionResult {
  double value = 0.0;
  int horizon_n = 0;
  Vec2 reference_field{1.0, 0.0};
  AngleLiftTrace trace;
  double total_winding = 0.0;
};

/// Finite-time values for n = 1..n_max and a Cauchy-style spread over the last
/// quartile. Reports only; no claim is made that the limit exists.
struct AsymptoticSeries {
  std::vector<std::pair<int, double>> values;
  double diagnostic = 0.0;
  AngleLiftTrace trace;
};

namespace detail {

inline Vec2 unit_field(Vec2 field) {
  if (!(norm(field) > 0.0)) throw Error(ErrorKind::InvalidArgument, "reference field must be non-zero");
  return normalized(field);
}

/// Coordinates of w in the direct orthonormal frame (X, JX).
inline Vec2 in_frame(Vec2 field, Vec2 w) { return {dot(field, w), cross(field, w)}; }

/// Walks the tangent orbit (F^m z, DF^m z xi / |.|) and hands out the sampler
/// t -> DF_{t-m}(F^m z) v_m, expressed in the frame of X, for each unit m.
class TangentChain {
 public:
  TangentChain(const IsotopySystem& sys, Vec2 z, Vec2 xi, Vec2 field, double floor)
      : sys_(&sys), point_(z), vector_(xi), field_(field), floor_(floor) {}

  auto operator()(int m) {
    while (at_ < m) advance();
    return [sys = sys_, z = point_, v = vector_, field = field_, floor = floor_,
            base = static_cast<double>(m)](double t) {
      const Vec2 w = sys->at(z, t - base).jacobian * v;
      if (!(norm(w) >= floor)) {
        throw Error(ErrorKind::DegenerateDifferential, "DF_t(z) xi vanished numerically");
      }
      return in_frame(field, w);
    };
  }

 private:
  void advance() {
    const IsotopyValue step = sys_->step(point_);
    const Vec2 w = step.jacobian * vector_;
    if (!(norm(w) >= floor_)) {
      throw Error(ErrorKind::DegenerateDifferential, "DF(z) xi vanished numerically");
    }
    vector_ = normalized(w);
    point_ = step.image;
    check_escape(point_, "torsion");
    ++at_;
  }

  const IsotopySystem* sys_;
  Vec2 point_;
  Vec2 vector_;
  Vec2 field_;
  double floor_;
  int at_ = 0;
};

inline AngleLiftTrace tangent_trace(const IsotopySystem& sys, Vec2 z, Vec2 xi, int n, Vec2 field,
                                    const RefinementPolicy& policy) {
  if (!(norm(xi) >= policy.norm_floor)) {
    throw Error(ErrorKind::ZeroVector, "torsion needs a non-zero tangent vector");
  }
  const Vec2 x = unit_field(field);
  TangentChain chain(sys, z, normalized(xi), x, policy.norm_floor);
  return lift_unit_chain(n, chain, oriented_angle(x, xi), policy);
}

/// Values at integer times of a trace built by lift_unit_chain.
inline std::vector<double> unit_marks(const AngleLiftTrace& trace, int n) {
  std::vector<double> marks;
  marks.reserve(n + 1);
  std::size_t k = 0;
  for (int m = 0; m <= n; ++m) {
    while (trace.times[k] < m) ++k;
    marks.push_back(trace.angles[k]);
  }
  return marks;
}

inline AsymptoticSeries series_from_trace(AngleLiftTrace trace, int n_max) {
  const std::vector<double> marks = unit_marks(trace, n_max);
  AsymptoticSeries out;
  out.values.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) out.values.emplace_back(n, (marks[n] - marks[0]) / n);
  const double last = out.values.back().second;
  const int first = std::max(1, n_max - n_max / 4);
  for (int n = first; n <= n_max; ++n) {
    out.diagnostic = std::max(out.diagnostic, std::abs(out.values[n - 1].second - last));
  }
  out.trace = std::move(trace);
  return out;
}

}  // namespace detail

inline TorsionResult torsion_finite(const IsotopySystem& sys, Vec2 z, Vec2 xi, int n,
                                    Vec2 field = {1.0, 0.0}, const RefinementPolicy& policy = {}) {
  TorsionResult r;
  r.trace = detail::tangent_trace(sys, z, xi, n, field, policy);
  r.horizon_n = n;
  r.reference_field = detail::unit_field(field);
  r.total_winding = r.trace.variation();
  r.value = r.total_winding / n;
  return r;
}

inline AsymptoticSeries torsion_asymptotic(const IsotopySystem& sys, Vec2 z, Vec2 xi, int n_max,
                                           Vec2 field = {1.0, 0.0},
                                           const RefinementPolicy& policy = {}) {
  if (n_max < 2) throw Error(ErrorKind::InvalidArgument, "torsion_asymptotic needs n_max >= 2");
  return detail::series_from_trace(detail::tangent_trace(sys, z, xi, n_max, field, policy), n_max);
}

/// |Torsion_n(z, xi) - Torsion_n(z, delta)|, always below pi / n.
inline double vector_independence_gap(const IsotopySystem& sys, Vec2 z, Vec2 xi, Vec2 delta, int n,
                                      Vec2 field = {1.0, 0.0},
                                      const RefinementPolicy& policy = {}) {
  return std::abs(torsion_finite(sys, z, xi, n, field, policy).value -
                  torsion_finite(sys, z, delta, n, field, policy).value);
}

/// Sampled lift W(s, t) of the angle from X to DF_t(z) Pi(s), where
/// Pi(s) = cos(s) X + sin(s) JX, normalized by W(0, 0) = 0.
struct WGrid {
  Vec2 base_point{};
  std::vector<double> s_values;
  std::vector<double> t_values;
  /// W[i][j] ~ W(s_values[i], t_values[j]).
  std::vector<std::vector<double>> W;
};

namespace detail {

/// Lift of sampler over a grid, anchored at grid[anchor] = anchor_value.
template <typename Sampler>
std::vector<double> lift_through_grid(Sampler& sampler, const std::vector<double>& grid,
                                      std::size_t anchor, double anchor_value,
                                      const RefinementPolicy& policy) {
  std::vector<double> out(grid.size());
  out[anchor] = anchor_value;
  for (std::size_t i = anchor + 1; i < grid.size(); ++i) {
    out[i] = lift_angle_path(sampler, grid[i - 1], grid[i], out[i - 1], policy).end();
  }
  auto reversed = [&sampler](double u) { return sampler(-u); };
  for (std::size_t i = anchor; i-- > 0;) {
    out[i] = lift_angle_path(reversed, -grid[i + 1], -grid[i], out[i + 1], policy).end();
  }
  return out;
}

}  // namespace detail

/// s-grid: s_count points spaced 2 pi / s_count over [-pi, pi), so s = 0 and
/// every pair (s, s + pi) with both ends in range lie on the grid.
inline WGrid w_grid(const IsotopySystem& sys, Vec2 z, std::vector<double> t_values, int s_count,
                    Vec2 field = {1.0, 0.0}, const RefinementPolicy& policy = {}) {
  if (s_count < 8 || s_count % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument, "w_grid needs an even s_count >= 8");
  }
  for (double t : t_values) {
    if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "w_grid needs t >= 0");
  }
  const Vec2 x = detail::unit_field(field);
  const Vec2 jx = quarter_turn(x);

  WGrid g;
  g.base_point = z;
  g.t_values = t_values;
  g.s_values.resize(s_count);
  for (int i = 0; i < s_count; ++i) g.s_values[i] = -kPi + kTwoPi * i / s_count;
  const std::size_t s_anchor = static_cast<std::size_t>(s_count / 2);

  // Anchor column: W(0, t) follows DF_t(z) X continuously from W(0, 0) = 0.
  std::vector<std::size_t> order(t_values.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return t_values[a] < t_values[b]; });
  std::vector<double> anchor(t_values.size());
  auto along_t = [&](double t) {
    const Vec2 w = evaluate(sys, z, t).jacobian * x;
    if (!(norm(w) >= policy.norm_floor)) {
      throw Error(ErrorKind::DegenerateDifferential, "DF_t(z) X vanished numerically");
    }
    return detail::in_frame(x, w);
  };
  double t_prev = 0.0, w_prev = 0.0;
  for (std::size_t j : order) {
    if (t_values[j] > t_prev) {
      w_prev = lift_angle_path(along_t, t_prev, t_values[j], w_prev, policy).end();
      t_prev = t_values[j];
    }
    anchor[j] = w_prev;
  }

  g.W.assign(s_count, std::vector<double>(t_values.size()));
  for (std::size_t j = 0; j < t_values.size(); ++j) {
    const Mat2 jac = evaluate(sys, z, t_values[j]).jacobian;
    auto along_s = [&](double s) {
      return detail::in_frame(x, jac * (std::cos(s) * x + std::sin(s) * jx));
    };
    const std::vector<double> column =
        detail::lift_through_grid(along_s, g.s_values, s_anchor, anchor[j], policy);
    for (int i = 0; i < s_count; ++i) g.W[i][j] = column[i];
  }
  return g;
}

/// Deviations of a WGrid from its structural identities.
struct WGridReport {
  /// max |W(s, 0) - s| over columns with t = 0 (0 if none).
  double identity_error = 0.0;
  /// min over columns of W(s_{i+1}, t) - W(s_i, t); positive means strictly increasing.
  double min_increment = 0.0;
  /// max |W(s + pi, t) - W(s, t) - pi|.
  double equivariance_error = 0.0;
};

inline WGridReport check_wgrid(const WGrid& g) {
  WGridReport r;
  r.min_increment = std::numeric_limits<double>::infinity();
  const std::size_t ns = g.s_values.size();
  const std::size_t half = ns / 2;
  for (std::size_t j = 0; j < g.t_values.size(); ++j) {
    for (std::size_t i = 0; i < ns; ++i) {
      if (g.t_values[j] == 0.0) {
        r.identity_error = std::max(r.identity_error, std::abs(g.W[i][j] - g.s_values[i]));
      }
      if (i + 1 < ns) r.min_increment = std::min(r.min_increment, g.W[i + 1][j] - g.W[i][j]);
      if (i + half < ns) {
        r.equivariance_error =
            std::max(r.equivariance_error, std::abs(g.W[i + half][j] - g.W[i][j] - kPi));
      }
    }
  }
  return r;
}

}  // namespace torsionlab
