#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "torsionlab/error.hpp"
#include "torsionlab/geometry.hpp"

namespace torsionlab {

enum class Surface { plane, annulus_lift, torus_lift };

inline const char* to_string(Surface s) {
  switch (s) {
    case Surface::plane: return "plane";
    case Surface::annulus_lift: return "annulus_lift";
    case Surface::torus_lift: return "torus_lift";
  }
  return "unknown";
}

/// Coordinates beyond this magnitude count as escape to infinity.
inline constexpr double kEscapeCutoff = 1e150;

struct IsotopyValue {
  Vec2 image;
  Mat2 jacobian;
};

/// An isotopy (F_t) from the identity, given on t in [0, 1] and extended to all
/// t >= 0 by F_t = F_{frac t} o F^{floor t}.
///
/// `unit` evaluates F_t and DF_t for t in [0, 1] only. `inverse`, when set, is
/// the inverse of the time-one map.
struct IsotopySystem {
  std::string name;
  std::map<std::string, double> params;
  Surface surface = Surface::plane;
  std::string variant = "default";
  std::function<IsotopyValue(Vec2, double)> unit;
  std::function<Vec2(Vec2)> inverse;

  IsotopyValue at(Vec2 z, double t) const { return unit(z, t); }
  IsotopyValue step(Vec2 z) const { return unit(z, 1.0); }
};

inline void check_escape(Vec2 z, const char* where) {
  if (!(std::abs(z.x) <= kEscapeCutoff && std::abs(z.y) <= kEscapeCutoff)) {
    throw Error(ErrorKind::NumericOverflow, std::string(where) + ": orbit escaped beyond 1e150");
  }
}

/// F_t(z) and DF_t(z) for any t >= 0; the Jacobian follows the chain rule
/// through floor(t) full steps and the fractional tail.
inline IsotopyValue evaluate(const IsotopySystem& sys, Vec2 z, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::InvalidArgument, "evaluate needs a finite t >= 0");
  }
  const double whole = std::floor(t);
  const double frac = t - whole;
  const auto steps = static_cast<long long>(whole);
  Mat2 jac = Mat2::identity();
  for (long long k = 0; k < steps; ++k) {
    const IsotopyValue v = sys.step(z);
    jac = v.jacobian * jac;
    z = v.image;
    check_escape(z, "evaluate");
  }
  if (frac > 0.0) {
    const IsotopyValue v = sys.at(z, frac);
    jac = v.jacobian * jac;
    z = v.image;
    check_escape(z, "evaluate");
  }
  return {z, jac};
}

/// Name, parameters and isotopy variant selecting a registered system.
struct SystemSpec {
  std::string name;
  std::map<std::string, double> params;
  std::string isotopy_variant;
};

class SystemRegistry {
 public:
  using Factory =
      std::function<IsotopySystem(const std::map<std::string, double>&, const std::string&)>;

  struct Entry {
    std::map<std::string, double> defaults;
    std::vector<std::string> variants;
    Factory factory;
  };

  void add(const std::string& name, Entry entry) { entries_[name] = std::move(entry); }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, entry] : entries_) out.push_back(name);
    return out;
  }

  const Entry& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw Error(ErrorKind::UnknownSystem, "no system named '" + name + "'");
    return it->second;
  }

  IsotopySystem make(const SystemSpec& spec) const {
    const Entry& e = entry(spec.name);
    std::map<std::string, double> params = e.defaults;
    for (const auto& [key, value] : spec.params) {
      if (!e.defaults.count(key)) {
        throw Error(ErrorKind::InvalidArgument,
                    "system '" + spec.name + "' has no parameter '" + key + "'");
      }
      if (!std::isfinite(value)) {
        throw Error(ErrorKind::InvalidArgument, "parameter '" + key + "' must be finite");
      }
      params[key] = value;
    }
    const std::string variant = spec.isotopy_variant.empty() ? e.variants.front()
                                                             : spec.isotopy_variant;
    bool known = false;
    for (const auto& v : e.variants) known = known || v == variant;
    if (!known) {
      throw Error(ErrorKind::InvalidArgument,
                  "system '" + spec.name + "' has no isotopy variant '" + variant + "'");
    }
    IsotopySystem sys = e.factory(params, variant);
    sys.name = spec.name;
    sys.params = params;
    sys.variant = variant;
    return sys;
  }

 private:
  std::map<std::string, Entry> entries_;
};

namespace builtin {

inline IsotopySystem identity() {
  IsotopySystem s;
  s.name = "identity";
  s.surface = Surface::plane;
  s.unit = [](Vec2 z, double) { return IsotopyValue{z, Mat2::identity()}; };
  s.inverse = [](Vec2 z) { return z; };
  return s;
}

/// Rigid rotation by omega*t about `center`.
inline IsotopySystem rotation(double omega, Vec2 center = {}) {
  IsotopySystem s;
  s.name = "rotation";
  s.params = {{"omega", omega}, {"cx", center.x}, {"cy", center.y}};
  s.surface = Surface::plane;
  s.unit = [omega, center](Vec2 z, double t) {
    const Mat2 r = Mat2::rotation(omega * t);
    return IsotopyValue{center + r * (z - center), r};
  };
  s.inverse = [omega, center](Vec2 z) { return center + Mat2::rotation(-omega) * (z - center); };
  return s;
}

inline IsotopySystem translation(Vec2 v) {
  IsotopySystem s;
  s.name = "translation";
  s.params = {{"vx", v.x}, {"vy", v.y}};
  s.surface = Surface::plane;
  s.unit = [v](Vec2 z, double t) { return IsotopyValue{z + t * v, Mat2::identity()}; };
  s.inverse = [v](Vec2 z) { return z - v; };
  return s;
}

/// F_t(x, y) = (x + c t y, y): a positive twist for c > 0, negative for c < 0.
inline IsotopySystem shear(double c = 1.0) {
  IsotopySystem s;
  s.name = c > 0 ? "shear" : "negative_shear";
  s.surface = Surface::annulus_lift;
  s.unit = [c](Vec2 z, double t) {
    return IsotopyValue{{z.x + c * t * z.y, z.y}, Mat2{1.0, c * t, 0.0, 1.0}};
  };
  s.inverse = [c](Vec2 z) { return Vec2{z.x - c * z.y, z.y}; };
  return s;
}

/// Lift of the standard map F(x, y) = (x + y - lambda sin x, y - lambda sin x).
///
/// "lecalvez": F_t(x,y) = (x + t(y - t lambda sin x), y - t lambda sin x), a
/// positive twist for every t in (0, 1].
/// "sequential": the fibre map (x, y - 2t lambda sin x) on [0, 1/2], then the
/// shear (x + (2t-1) y, y) on [1/2, 1].
inline IsotopySystem standard_map(double lambda, const std::string& variant = "lecalvez") {
  IsotopySystem s;
  s.name = "standard_map";
  s.params = {{"lambda", lambda}};
  s.surface = Surface::annulus_lift;
  s.variant = variant;
  if (variant == "lecalvez") {
    s.unit = [lambda](Vec2 z, double t) {
      const double sx = std::sin(z.x), cx = std::cos(z.x);
      const double y1 = z.y - t * lambda * sx;
      return IsotopyValue{{z.x + t * y1, y1},
                          Mat2{1.0 - t * t * lambda * cx, t, -t * lambda * cx, 1.0}};
    };
  } else if (variant == "sequential") {
    s.unit = [lambda](Vec2 z, double t) {
      const double sx = std::sin(z.x), cx = std::cos(z.x);
      if (t <= 0.5) {
        const double k = 2.0 * t * lambda;
        return IsotopyValue{{z.x, z.y - k * sx}, Mat2{1.0, 0.0, -k * cx, 1.0}};
      }
      const double y1 = z.y - lambda * sx;
      const double u = 2.0 * t - 1.0;
      return IsotopyValue{{z.x + u * y1, y1}, Mat2{1.0 - u * lambda * cx, u, -lambda * cx, 1.0}};
    };
  } else {
    throw Error(ErrorKind::InvalidArgument, "standard_map has no isotopy variant '" + variant + "'");
  }
  s.inverse = [lambda](Vec2 w) {
    const double x = w.x - w.y;
    return Vec2{x, w.y + lambda * std::sin(x)};
  };
  return s;
}

/// F_t(z) = z + t v on the universal cover of the torus.
inline IsotopySystem torus_translationlike(Vec2 v) {
  IsotopySystem s = translation(v);
  s.name = "torus_translationlike";
  s.surface = Surface::torus_lift;
  return s;
}

/// Doubly periodic perturbation of a translation: F_t = B_t o A_t with
/// A_t(x,y) = (x + t(vx + eps sin y), y) and B_t(x,y) = (x, y + t(vy + eps sin x)).
inline IsotopySystem torus_twisted(Vec2 v, double eps) {
  IsotopySystem s;
  s.name = "torus_twisted";
  s.params = {{"vx", v.x}, {"vy", v.y}, {"eps", eps}};
  s.surface = Surface::torus_lift;
  s.unit = [v, eps](Vec2 z, double t) {
    const double x1 = z.x + t * (v.x + eps * std::sin(z.y));
    const double y1 = z.y + t * (v.y + eps * std::sin(x1));
    const Mat2 ja{1.0, t * eps * std::cos(z.y), 0.0, 1.0};
    const Mat2 jb{1.0, 0.0, t * eps * std::cos(x1), 1.0};
    return IsotopyValue{{x1, y1}, jb * ja};
  };
  s.inverse = [v, eps](Vec2 w) {
    const double y = w.y - (v.y + eps * std::sin(w.x));
    return Vec2{w.x - (v.x + eps * std::sin(y)), y};
  };
  return s;
}

}  // namespace builtin

/// Registry holding every built-in system with its parameter defaults.
inline SystemRegistry register_builtins() {
  SystemRegistry reg;
  const std::vector<std::string> only_default{"default"};
  reg.add("identity", {{}, only_default, [](const auto&, const auto&) { return builtin::identity(); }});
  reg.add("rotation", {{{"omega", 1.0}, {"cx", 0.0}, {"cy", 0.0}},
                       only_default,
                       [](const auto& p, const auto&) {
                         return builtin::rotation(p.at("omega"), {p.at("cx"), p.at("cy")});
                       }});
  reg.add("translation", {{{"vx", 1.0}, {"vy", 0.0}},
                          only_default,
                          [](const auto& p, const auto&) {
                            return builtin::translation({p.at("vx"), p.at("vy")});
                          }});
  reg.add("shear", {{}, only_default, [](const auto&, const auto&) { return builtin::shear(1.0); }});
  reg.add("negative_shear",
          {{}, only_default, [](const auto&, const auto&) { return builtin::shear(-1.0); }});
  reg.add("standard_map", {{{"lambda", 1.0}},
                           {"lecalvez", "sequential"},
                           [](const auto& p, const std::string& variant) {
                             return builtin::standard_map(p.at("lambda"), variant);
                           }});
  reg.add("torus_translationlike", {{{"vx", 1.0}, {"vy", 0.5}},
                                    only_default,
                                    [](const auto& p, const auto&) {
                                      return builtin::torus_translationlike({p.at("vx"), p.at("vy")});
                                    }});
  reg.add("torus_twisted", {{{"vx", 0.3}, {"vy", 0.2}, {"eps", 0.4}},
                            only_default,
                            [](const auto& p, const auto&) {
                              return builtin::torus_twisted({p.at("vx"), p.at("vy")}, p.at("eps"));
                            }});
  return reg;
}

inline IsotopySystem make_system(const SystemSpec& spec) {
  static const SystemRegistry registry = register_builtins();
  return registry.make(spec);
}

/// Row-major nx-by-ny grid over [x0, x1] x [y0, y1], endpoints included.
inline std::vector<Vec2> uniform_grid(double x0, double x1, int nx, double y0, double y1, int ny) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    const double x = nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1);
    for (int j = 0; j < ny; ++j) {
      const double y = ny == 1 ? y0 : y0 + (y1 - y0) * j / (ny - 1);
      pts.push_back({x, y});
    }
  }
  return pts;
}

struct TwistReport {
  double min_dp1_dy = std::numeric_limits<double>::infinity();
  Vec2 argmin{};
  bool positive() const { return min_dp1_dy > 0.0; }
};

/// Minimum over `sample` of d(p1 o F_t)/dy, the a12 entry of DF_t.
/// Report only: the twist property itself is meaningful on annulus lifts.
inline TwistReport check_twist(const IsotopySystem& sys, double t, std::span<const Vec2> sample) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "check_twist needs t > 0");
  TwistReport report;
  for (const Vec2& z : sample) {
    const double a12 = evaluate(sys, z, t).jacobian.a12;
    if (a12 < report.min_dp1_dy) {
      report.min_dp1_dy = a12;
      report.argmin = z;
    }
  }
  return report;
}

/// Largest deviation of F_t from commuting with the deck translations.
inline double check_lift_periodicity(const IsotopySystem& sys, double t,
                                     std::span<const Vec2> sample) {
  if (sys.surface == Surface::plane) {
    throw Error(ErrorKind::InvalidArgument, "plane systems have no deck translations");
  }
  std::vector<Vec2> shifts{{kTwoPi, 0.0}};
  if (sys.surface == Surface::torus_lift) shifts.push_back({0.0, kTwoPi});
  double worst = 0.0;
  for (const Vec2& z : sample) {
    const IsotopyValue base = evaluate(sys, z, t);
    for (const Vec2& d : shifts) {
      const IsotopyValue moved = evaluate(sys, z + d, t);
      worst = std::max(worst, norm(moved.image - base.image - d));
      worst = std::max(worst, max_abs_diff(moved.jacobian, base.jacobian));
    }
  }
  return worst;
}

/// G_s = F_{n s}: compresses n units of the isotopy into one.
inline IsotopySystem reparametrize(const IsotopySystem& sys, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "reparametrize needs n >= 1");
  IsotopySystem g = sys;
  g.name = sys.name + "@x" + std::to_string(n);
  g.unit = [sys, n](Vec2 z, double s) { return evaluate(sys, z, n * s); };
  g.inverse = nullptr;
  if (sys.inverse) {
    g.inverse = [inv = sys.inverse, n](Vec2 z) {
      for (int k = 0; k < n; ++k) z = inv(z);
      return z;
    };
  }
  return g;
}

/// G_s = R(center, 2 pi s) o F_s: same time-one map as F, with a full loop of
/// rotations inserted. On the plane this shifts every torsion by 2 pi.
inline IsotopySystem compose_with_loop(const IsotopySystem& sys, Vec2 center) {
  IsotopySystem g = sys;
  g.name = sys.name + "+loop";
  g.surface = Surface::plane;
  g.unit = [sys, center](Vec2 z, double s) {
    const IsotopyValue v = sys.at(z, s);
    const Mat2 r = Mat2::rotation(kTwoPi * s);
    return IsotopyValue{center + r * (v.image - center), r * v.jacobian};
  };
  return g;
}

}  // namespace torsionlab
