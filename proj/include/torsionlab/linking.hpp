#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "torsionlab/error.hpp"
#include "torsionlab/geometry.hpp"
#include "torsionlab/systems.hpp"
#include "torsionlab/torsion.hpp"

namespace torsionlab {

/// Separation below this fraction of the points' magnitude means the difference
/// vector has lost its resolution.
inline constexpr double kSeparationFloor = 1e-12;

struct LinkingResult {
  double value = 0.0;
  int horizon_n = 0;
  AngleLiftTrace trace;
  double total_winding = 0.0;
  /// Smallest |F_t(z2) - F_t(z1)| met by the sampler.
  double min_separation = std::numeric_limits<double>::infinity();
};

namespace detail {

/// Per-unit sampler t -> F_{t-m}(b_m) - F_{t-m}(a_m) in the frame of X, where
/// (a_m, b_m) either come from forward iteration or from supplied orbits.
class PairChain {
 public:
  PairChain(const IsotopySystem& sys, Vec2 z1, Vec2 z2, Vec2 field, double floor)
      : sys_(&sys), a_(z1), b_(z2), field_(field), floor_(floor),
        min_sep_(std::make_shared<double>(std::numeric_limits<double>::infinity())) {}

  PairChain(const IsotopySystem& sys, std::span<const Vec2> orbit1, std::span<const Vec2> orbit2,
            Vec2 field, double floor)
      : PairChain(sys, orbit1[0], orbit2[0], field, floor) {
    orbit1_ = orbit1;
    orbit2_ = orbit2;
  }

  auto operator()(int m) {
    if (!orbit1_.empty()) {
      a_ = orbit1_[m];
      b_ = orbit2_[m];
    } else {
      while (at_ < m) {
        a_ = sys_->step(a_).image;
        b_ = sys_->step(b_).image;
        check_escape(a_, "linking");
        check_escape(b_, "linking");
        ++at_;
      }
    }
    return [sys = sys_, a = a_, b = b_, field = field_, floor = floor_, min_sep = min_sep_,
            base = static_cast<double>(m)](double t) {
      const double s = t - base;
      const Vec2 fa = sys->at(a, s).image;
      const Vec2 fb = sys->at(b, s).image;
      const Vec2 d = fb - fa;
      const double sep = norm(d);
      *min_sep = std::min(*min_sep, sep);
      const double scale = std::max(norm(fa), norm(fb));
      if (!(sep >= floor) || sep < kSeparationFloor * scale) {
        throw Error(ErrorKind::SeparationCollapse,
                    "orbits became numerically indistinguishable near t=" + std::to_string(t));
      }
      return in_frame(field, d);
    };
  }

  double min_separation() const { return *min_sep_; }

 private:
  const IsotopySystem* sys_;
  Vec2 a_, b_;
  Vec2 field_;
  double floor_;
  std::shared_ptr<double> min_sep_;
  std::span<const Vec2> orbit1_, orbit2_;
  int at_ = 0;
};

inline LinkingResult finish_linking(AngleLiftTrace trace, int n, double min_sep) {
  LinkingResult r;
  r.horizon_n = n;
  r.total_winding = trace.variation();
  r.value = r.total_winding / n;
  r.min_separation = min_sep;
  r.trace = std::move(trace);
  return r;
}

inline void check_pair(Vec2 z1, Vec2 z2) {
  if (z1 == z2) throw Error(ErrorKind::DiagonalInput, "linking needs two distinct points");
}

inline void check_orbits(std::span<const Vec2> orbit1, std::span<const Vec2> orbit2) {
  if (orbit1.size() != orbit2.size() || orbit1.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "orbits must have equal length n + 1 >= 2");
  }
  check_pair(orbit1[0], orbit2[0]);
}

}  // namespace detail

/// Linking_n(z1, z2): winding of F_t(z2) - F_t(z1) over [0, n], divided by n.
inline LinkingResult linking_finite(const IsotopySystem& sys, Vec2 z1, Vec2 z2, int n,
                                    Vec2 field = {1.0, 0.0}, const RefinementPolicy& policy = {}) {
  detail::check_pair(z1, z2);
  const Vec2 x = detail::unit_field(field);
  detail::PairChain chain(sys, z1, z2, x, policy.norm_floor);
  AngleLiftTrace trace = lift_unit_chain(n, chain, oriented_angle(x, z2 - z1), policy);
  return detail::finish_linking(std::move(trace), n, chain.min_separation());
}

/// Linking over the integer-time orbits supplied by the caller (length n + 1);
/// only the within-unit motion t -> F_t is evaluated. Used when the orbits come
/// from a more stable computation than forward iteration, e.g. stable branches.
inline LinkingResult linking_along_orbits(const IsotopySystem& sys, std::span<const Vec2> orbit1,
                                          std::span<const Vec2> orbit2, Vec2 field = {1.0, 0.0},
                                          const RefinementPolicy& policy = {}) {
  detail::check_orbits(orbit1, orbit2);
  const int n = static_cast<int>(orbit1.size()) - 1;
  const Vec2 x = detail::unit_field(field);
  detail::PairChain chain(sys, orbit1, orbit2, x, policy.norm_floor);
  AngleLiftTrace trace = lift_unit_chain(n, chain, oriented_angle(x, orbit2[0] - orbit1[0]), policy);
  return detail::finish_linking(std::move(trace), n, chain.min_separation());
}

inline AsymptoticSeries linking_asymptotic(const IsotopySystem& sys, Vec2 z1, Vec2 z2, int n_max,
                                           Vec2 field = {1.0, 0.0},
                                           const RefinementPolicy& policy = {}) {
  if (n_max < 2) throw Error(ErrorKind::InvalidArgument, "linking_asymptotic needs n_max >= 2");
  return detail::series_from_trace(linking_finite(sys, z1, z2, n_max, field, policy).trace, n_max);
}

inline AsymptoticSeries linking_asymptotic(const IsotopySystem& sys, std::span<const Vec2> orbit1,
                                           std::span<const Vec2> orbit2, Vec2 field = {1.0, 0.0},
                                           const RefinementPolicy& policy = {}) {
  detail::check_orbits(orbit1, orbit2);
  const int n_max = static_cast<int>(orbit1.size()) - 1;
  if (n_max < 2) throw Error(ErrorKind::InvalidArgument, "linking_asymptotic needs n_max >= 2");
  return detail::series_from_trace(linking_along_orbits(sys, orbit1, orbit2, field, policy).trace,
                                   n_max);
}

struct VerticalPairCheck {
  double value = 0.0;
  bool pass = false;
};

/// For a positive twist lift and z1, z2 on the same vertical, Linking_n lies in (-pi, 0).
inline VerticalPairCheck vertical_pair_bound_check(const IsotopySystem& sys, Vec2 z1, Vec2 z2,
                                                   int n, const RefinementPolicy& policy = {}) {
  if (z1.x != z2.x) {
    throw Error(ErrorKind::InvalidArgument, "vertical pair needs equal first coordinates");
  }
  const double lo = std::min(z1.y, z2.y), hi = std::max(z1.y, z2.y);
  const auto around = uniform_grid(z1.x - 1.0, z1.x + 1.0, 5, lo - 1.0, hi + 1.0, 5);
  if (sys.surface != Surface::annulus_lift || !check_twist(sys, 1.0, around).positive()) {
    throw Error(ErrorKind::NotTwist, "vertical pair bound needs a positive twist lift");
  }
  const double v = linking_finite(sys, z1, z2, n, {1.0, 0.0}, policy).value;
  return {v, v > -kPi && v < 0.0};
}

}  // namespace torsionlab
