#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "cli/random.hpp"
#include "torsionlab/torsionlab.hpp"

namespace torsionlab::cli {

/// Result of one command: both renderings plus the verification verdict.
struct Outcome {
  Json json;
  CsvTable csv;
  bool verified = true;
  /// Human-readable lines for stderr when verification fails.
  std::vector<std::string> violations;
};

/// Gap allowed by the identity checks (Crovisier, telescoping, W-family).
inline constexpr double kIdentityTolerance = 1e-9;

namespace detail {

inline Json vec(Vec2 v) { return Json::array({v.x, v.y}); }

inline Json header(const RunConfig& cfg, const IsotopySystem& sys) {
  Json params = Json::object();
  for (const auto& [k, v] : sys.params) params[k] = v;
  Json j;
  j["command"] = cfg.command;
  j["system"] = {{"name", sys.name},
                 {"isotopy", sys.variant},
                 {"surface", to_string(sys.surface)},
                 {"params", params}};
  j["steps_per_unit"] = cfg.steps_per_unit;
  return j;
}

inline Json trace_summary(const AngleLiftTrace& t) {
  return {{"samples", t.times.size()}, {"refinement_depth_max", t.refinement_depth_max}};
}

inline void series_rows(CsvTable& csv, const std::vector<double>& marks, int from, int to) {
  csv.header = {"n", "value"};
  for (int n = from; n <= to; ++n) {
    csv.add({std::to_string(n), format_real((marks[n] - marks[0]) / n)});
  }
}

inline Json scan_json(const SegmentScan& scan) {
  Json samples = Json::array();
  for (const ScanSample& s : scan.samples) samples.push_back({{"s", s.s}, {"torsion_n", s.torsion}});
  Json j;
  j["x"] = vec(scan.x);
  j["y"] = vec(scan.y);
  j["n"] = scan.n;
  j["linking_l"] = scan.target_l;
  j["located"] = scan.located_s.has_value();
  j["located_s"] = scan.located_s ? Json(*scan.located_s) : Json(nullptr);
  j["located_point"] = scan.located_s ? vec(scan.point(*scan.located_s)) : Json(nullptr);
  j["residual"] = scan.residual;
  j["bisection_iterations"] = scan.bisection_iterations;
  j["refinement_levels"] = scan.refinement_levels;
  j["stalled_brackets"] = scan.stalled_brackets;
  j["samples"] = std::move(samples);
  return j;
}

/// Locate CSV: one row per scan sample, then the located point when there is one.
inline CsvTable scan_csv(const SegmentScan& scan, double located_torsion) {
  CsvTable csv;
  csv.header = {"s", "torsion_n", "linking_l", "residual"};
  const std::string l = format_real(scan.target_l);
  for (const ScanSample& s : scan.samples) {
    csv.add({format_real(s.s), format_real(s.torsion), l,
             format_real(std::abs(s.torsion - scan.target_l))});
  }
  if (scan.located_s) {
    csv.add({format_real(*scan.located_s), format_real(located_torsion), l,
             format_real(scan.residual)});
  }
  return csv;
}

inline double located_torsion(const IsotopySystem& sys, const SegmentScan& scan,
                              const RefinementPolicy& policy) {
  if (!scan.located_s) return std::nan("");
  return torsion_finite(sys, scan.point(*scan.located_s), scan.y - scan.x, scan.n, {1.0, 0.0},
                        policy)
      .value;
}

}  // namespace detail

inline Outcome run_torsion(const RunConfig& cfg, const IsotopySystem& sys) {
  const int horizon = cfg.n_max.value_or(cfg.n);
  const TorsionResult r = torsion_finite(sys, cfg.point, cfg.vector, horizon, cfg.field, cfg.policy());
  const std::vector<double> marks = torsionlab::detail::unit_marks(r.trace, horizon);
  Outcome o;
  o.json = detail::header(cfg, sys);
  o.json["point"] = detail::vec(cfg.point);
  o.json["vector"] = detail::vec(cfg.vector);
  o.json["field"] = detail::vec(cfg.field);
  o.json["n"] = horizon;
  o.json["value"] = r.value;
  o.json["total_winding"] = r.total_winding;
  o.json["trace"] = detail::trace_summary(r.trace);
  if (cfg.n_max) {
    const AsymptoticSeries s = torsionlab::detail::series_from_trace(r.trace, horizon);
    Json series = Json::array();
    for (const auto& [n, v] : s.values) series.push_back({{"n", n}, {"value", v}});
    o.json["diagnostic"] = s.diagnostic;
    o.json["series"] = std::move(series);
  }
  detail::series_rows(o.csv, marks, cfg.n_max ? 1 : horizon, horizon);
  return o;
}

inline Outcome run_linking(const RunConfig& cfg, const IsotopySystem& sys) {
  const int horizon = cfg.n_max.value_or(cfg.n);
  const LinkingResult r = linking_finite(sys, cfg.x, cfg.y, horizon, cfg.field, cfg.policy());
  const std::vector<double> marks = torsionlab::detail::unit_marks(r.trace, horizon);
  Outcome o;
  o.json = detail::header(cfg, sys);
  o.json["z1"] = detail::vec(cfg.x);
  o.json["z2"] = detail::vec(cfg.y);
  o.json["field"] = detail::vec(cfg.field);
  o.json["n"] = horizon;
  o.json["value"] = r.value;
  o.json["total_winding"] = r.total_winding;
  o.json["min_separation"] = r.min_separation;
  o.json["trace"] = detail::trace_summary(r.trace);
  if (cfg.n_max) {
    const AsymptoticSeries s = torsionlab::detail::series_from_trace(r.trace, horizon);
    Json series = Json::array();
    for (const auto& [n, v] : s.values) series.push_back({{"n", n}, {"value", v}});
    o.json["diagnostic"] = s.diagnostic;
    o.json["series"] = std::move(series);
  }
  detail::series_rows(o.csv, marks, cfg.n_max ? 1 : horizon, horizon);
  return o;
}

inline Outcome run_locate(const RunConfig& cfg, const IsotopySystem& sys) {
  const SegmentScan scan =
      locate_torsion_point(sys, cfg.x, cfg.y, cfg.n, cfg.scan_options(), cfg.policy());
  Outcome o;
  o.json = detail::header(cfg, sys);
  o.json["tolerance"] = cfg.tol;
  o.json.update(detail::scan_json(scan));
  o.csv = detail::scan_csv(scan, detail::located_torsion(sys, scan, cfg.policy()));
  if (!scan.located_s) {
    o.verified = false;
    o.violations.push_back("no point of the segment reached torsion = linking within tolerance; "
                           "smallest |g| = " + format_real(scan.residual));
  }
  return o;
}

inline Outcome run_twist_sweep(const RunConfig& cfg, const IsotopySystem& sys) {
  Rng rng(cfg.seed);
  std::vector<Vec2> points(cfg.points);
  for (Vec2& p : points) p = rng.point(0.0, kTwoPi, -3.0, 3.0);
  const std::vector<int> horizons = cfg.horizons();
  const TwistSweepReport report = twist_bound_sweep(sys, points, horizons, cfg.policy(), cfg.jobs);

  Outcome o;
  o.json = detail::header(cfg, sys);
  o.json["seed"] = cfg.seed;
  o.json["points"] = cfg.points;
  o.json["n_list"] = horizons;
  o.json["twist"] = {{"min_dp1_dy", report.twist.min_dp1_dy},
                     {"argmin", detail::vec(report.twist.argmin)},
                     {"positive", report.twist.positive()}};
  Json per_n = Json::array();
  for (const SweepExtrema& e : report.per_n) {
    per_n.push_back({{"n", e.n}, {"min", e.min}, {"max", e.max}, {"pass", e.pass}});
  }
  o.json["per_n"] = std::move(per_n);
  Json violations = Json::array();
  o.csv.header = {"index", "x", "y", "n", "value", "pass"};
  for (const SweepRow& r : report.rows) {
    o.csv.add({std::to_string(r.index), format_real(r.point.x), format_real(r.point.y),
               std::to_string(r.n), format_real(r.value), r.pass ? "1" : "0"});
    if (!r.pass) {
      violations.push_back({{"index", r.index},
                            {"point", detail::vec(r.point)},
                            {"n", r.n},
                            {"value", r.value}});
      o.violations.push_back("sample " + std::to_string(r.index) + " at (" +
                             format_real(r.point.x) + ", " + format_real(r.point.y) +
                             "), n=" + std::to_string(r.n) + ": Torsion_n = " +
                             format_real(r.value) + " not in (-pi, 0)");
    }
  }
  o.json["pass"] = report.pass;
  o.json["violations"] = std::move(violations);
  o.verified = report.pass;
  return o;
}

inline Outcome run_crovisier(const RunConfig& cfg, const IsotopySystem& sys) {
  const std::vector<CrovisierAngles> terms = crovisier_summands(sys, cfg.point, cfg.vector, cfg.n);
  double theta_n = 0.0;
  bool intervals_ok = true;
  Json summands = Json::array();
  Outcome o;
  o.csv.header = {"k", "theta0", "beta", "theta1", "theta"};
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const CrovisierAngles& c = terms[k];
    theta_n += c.theta;
    intervals_ok = intervals_ok && c.theta0 > -kTwoPi && c.theta0 <= 0.0 && c.beta > -kTwoPi &&
                   c.beta <= 0.0 && c.theta1 > c.beta - kTwoPi && c.theta1 <= c.beta;
    summands.push_back({{"k", k},
                        {"theta0", c.theta0},
                        {"beta", c.beta},
                        {"theta1", c.theta1},
                        {"theta", c.theta}});
    o.csv.add({std::to_string(k), format_real(c.theta0), format_real(c.beta),
               format_real(c.theta1), format_real(c.theta)});
  }
  const TorsionResult t = torsion_finite(sys, cfg.point, cfg.vector, cfg.n, {0.0, 1.0}, cfg.policy());
  const double gap = std::abs(t.total_winding - theta_n);

  o.json = detail::header(cfg, sys);
  o.json["point"] = detail::vec(cfg.point);
  o.json["vector"] = detail::vec(cfg.vector);
  o.json["n"] = cfg.n;
  o.json["theta_n"] = theta_n;
  o.json["n_torsion_n"] = t.total_winding;
  o.json["gap"] = gap;
  o.json["intervals_ok"] = intervals_ok;
  o.json["summands"] = std::move(summands);
  o.verified = gap <= kIdentityTolerance && intervals_ok;
  if (gap > kIdentityTolerance) o.violations.push_back("|n Torsion_n - theta_n| = " + format_real(gap));
  if (!intervals_ok) o.violations.push_back("a summand left its normalization interval");
  return o;
}

inline Outcome run_measure(const RunConfig& cfg, const IsotopySystem& sys) {
  const EmpiricalMeasure mu = empirical_measure(sys, cfg.point, cfg.vector, cfg.n);
  const double mt = measure_torsion(sys, mu, cfg.field, cfg.policy());
  const double tf = torsion_finite(sys, cfg.point, cfg.vector, cfg.n, cfg.field, cfg.policy()).value;
  const double gap = std::abs(mt - tf);

  Outcome o;
  o.json = detail::header(cfg, sys);
  o.json["point"] = detail::vec(cfg.point);
  o.json["vector"] = detail::vec(cfg.vector);
  o.json["field"] = detail::vec(cfg.field);
  o.json["n"] = cfg.n;
  o.json["measure_torsion"] = mt;
  o.json["torsion_n"] = tf;
  o.json["telescoping_gap"] = gap;
  o.json["total_weight"] = mu.total_weight();
  Json atoms = Json::array();
  o.csv.header = {"index", "x", "y", "vx", "vy", "weight"};
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    const Atom& a = mu.atoms[i];
    atoms.push_back({{"index", i},
                     {"point", detail::vec(a.point)},
                     {"vector", detail::vec(a.unit_vector)},
                     {"weight", a.weight}});
    o.csv.add({std::to_string(i), format_real(a.point.x), format_real(a.point.y),
               format_real(a.unit_vector.x), format_real(a.unit_vector.y), format_real(a.weight)});
  }
  o.json["atoms"] = std::move(atoms);
  o.verified = gap <= kIdentityTolerance;
  if (!o.verified) o.violations.push_back("telescoping gap " + format_real(gap));
  return o;
}

inline Outcome run_torus_null(const RunConfig& cfg, const IsotopySystem& sys) {
  const SegmentScan scan = torus_null_torsion_search(sys, cfg.n, cfg.scan_options(), cfg.policy());
  Outcome o;
  o.json = detail::header(cfg, sys);
  o.json["tolerance"] = cfg.tol;
  o.json.update(detail::scan_json(scan));
  o.csv = detail::scan_csv(scan, detail::located_torsion(sys, scan, cfg.policy()));
  if (!scan.located_s) {
    o.json["measure_torsion"] = nullptr;
    o.verified = false;
    o.violations.push_back("no null-torsion point found on [(0,0), (2pi,0)]");
    return o;
  }
  const EmpiricalMeasure mu =
      empirical_measure(sys, scan.point(*scan.located_s), scan.y - scan.x, cfg.n);
  const double mt = measure_torsion(sys, mu, {1.0, 0.0}, cfg.policy());
  o.json["measure_torsion"] = mt;
  o.verified = std::abs(mt) <= cfg.tol;
  if (!o.verified) o.violations.push_back("measure torsion " + format_real(mt) + " exceeds tolerance");
  return o;
}

inline Outcome run_wgrid(const RunConfig& cfg, const IsotopySystem& sys) {
  const WGrid g = w_grid(sys, cfg.point, cfg.t_values, cfg.s_count, cfg.field, cfg.policy());
  const WGridReport rep = check_wgrid(g);
  const bool pass = rep.identity_error <= kIdentityTolerance && rep.min_increment > 0.0 &&
                    rep.equivariance_error <= kIdentityTolerance;
  Outcome o;
  o.json = detail::header(cfg, sys);
  o.json["point"] = detail::vec(cfg.point);
  o.json["field"] = detail::vec(cfg.field);
  o.json["s_values"] = g.s_values;
  o.json["t_values"] = g.t_values;
  o.json["W"] = g.W;
  o.json["report"] = {{"identity_error", rep.identity_error},
                      {"min_increment", rep.min_increment},
                      {"equivariance_error", rep.equivariance_error}};
  o.json["pass"] = pass;
  o.csv.header = {"s", "t", "W"};
  for (std::size_t i = 0; i < g.s_values.size(); ++i) {
    for (std::size_t j = 0; j < g.t_values.size(); ++j) {
      o.csv.add({format_real(g.s_values[i]), format_real(g.t_values[j]), format_real(g.W[i][j])});
    }
  }
  o.verified = pass;
  if (!pass) o.violations.push_back("W-family identities violated");
  return o;
}

/// Dispatches a validated config.
inline Outcome run(const RunConfig& cfg) {
  const IsotopySystem sys = make_system(cfg.system);
  if (cfg.command == "torsion") return run_torsion(cfg, sys);
  if (cfg.command == "linking") return run_linking(cfg, sys);
  if (cfg.command == "locate") return run_locate(cfg, sys);
  if (cfg.command == "twist-sweep") return run_twist_sweep(cfg, sys);
  if (cfg.command == "crovisier") return run_crovisier(cfg, sys);
  if (cfg.command == "measure") return run_measure(cfg, sys);
  if (cfg.command == "torus-null") return run_torus_null(cfg, sys);
  if (cfg.command == "wgrid") return run_wgrid(cfg, sys);
  throw ConfigError("command: unknown command '" + cfg.command + "'");
}

}  // namespace torsionlab::cli
