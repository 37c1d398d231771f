#pragma once

// Experiment driver: JSON run configs -> scenario execution -> plot-ready CSV
// artifacts plus a JSON manifest with hashes, byte lengths and slope
// summaries.  Re-running an identical config reproduces identical CSV bytes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "lsrf/covmodels.hpp"
#include "lsrf/fieldsim.hpp"
#include "lsrf/lsmodel.hpp"
#include "lsrf/polybasis.hpp"
#include "lsrf/stfunctional.hpp"

namespace lsrf {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Thrown when a run config fails validation; carries the full list of
/// violations (the parser never stops at the first problem).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)),
        violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "config validation failed:";
    for (const std::string& m : v) {
      s += "\n  - ";
      s += m;
    }
    return s;
  }

  std::vector<std::string> violations_;
};

enum class Scenario {
  MiCurve,
  RenyiCurve,
  SubordinatedCurve,
  FieldSim,
  StSurface,
  SlopeReport
};

inline std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::MiCurve: return "mi_curve";
    case Scenario::RenyiCurve: return "renyi_curve";
    case Scenario::SubordinatedCurve: return "subordinated_curve";
    case Scenario::FieldSim: return "field_sim";
    case Scenario::StSurface: return "st_surface";
    case Scenario::SlopeReport: return "slope_report";
  }
  throw std::logic_error("scenario_name: unknown scenario");
}

namespace detail {

inline std::uint64_t fnv1a64(const char* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const std::string& raw) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(raw.data(), raw.size())));
  return std::string("fnv1a64:") + buf;
}

/// 12 significant digits; all CSV cells go through here.
inline std::string fmt_g12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config model
// ---------------------------------------------------------------------------

struct ModelConfig {
  MarginalDensity marginal = MarginalDensity::standard_gaussian();
  int truncation = 5;
  int quad_nodes = 200;
  NegativityPolicy policy = NegativityPolicy::ClampFloor;
  std::optional<CorrelationModel> correlation;
};

struct FieldConfig {
  std::vector<int> grid;
  double spacing = 1.0;
  int replicates = 1;
  std::optional<int> n_dof;  // present -> chi-square construction
  SimMethod method = SimMethod::Auto;
  int max_lag = 0;
};

struct StConfig {
  std::optional<GneitingCovariance> gneiting;
  // st_surface
  double t_end = 1.0;
  int basis_count = 20;
  int quad_nodes = 256;
  std::vector<double> mesh;
  std::vector<double> surface_distances;
  // field_sim (space x time draw)
  std::vector<int> space_grid;
  double spacing = 1.0;
  int time_points = 0;
  double time_spacing = 1.0;
};

struct SlopeConfig {
  std::string curve;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::optional<double> expected_order;
  double tolerance = 0.1;  // relative to |expected_order|
};

struct ExperimentConfig {
  Scenario scenario = Scenario::MiCurve;
  ModelConfig model;
  std::vector<double> distances;
  std::vector<double> q;
  std::optional<SubordinationSpec> subordination;
  std::uint64_t seed = 20260814ull;
  std::string output;
  std::optional<std::pair<double, double>> fit_window;
  std::optional<FieldConfig> field;
  std::optional<StConfig> st;
  std::optional<SlopeConfig> slope;
};

namespace detail {

/// Violation accumulator with typed accessors; every getter records a message
/// instead of throwing so one pass reports all problems.
struct ConfigReader {
  std::vector<std::string> viol;

  void fail(std::string m) { viol.push_back(std::move(m)); }

  void keys(const nlohmann::json& o, const std::string& where,
            std::initializer_list<const char*> allowed) {
    for (auto it = o.begin(); it != o.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed)
        if (it.key() == k) {
          ok = true;
          break;
        }
      if (!ok) fail(where + ": unknown key '" + it.key() + "'");
    }
  }

  std::optional<double> number(const nlohmann::json& o,
                               const std::string& where, const char* key,
                               bool required) {
    if (!o.contains(key)) {
      if (required) fail(where + "." + key + ": required");
      return std::nullopt;
    }
    if (!o[key].is_number()) {
      fail(where + "." + key + ": must be a number");
      return std::nullopt;
    }
    const double v = o[key].get<double>();
    if (!std::isfinite(v)) {
      fail(where + "." + key + ": must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::int64_t> integer(const nlohmann::json& o,
                                      const std::string& where,
                                      const char* key, bool required) {
    if (!o.contains(key)) {
      if (required) fail(where + "." + key + ": required");
      return std::nullopt;
    }
    if (!o[key].is_number_integer() && !o[key].is_number_unsigned()) {
      fail(where + "." + key + ": must be an integer");
      return std::nullopt;
    }
    return o[key].get<std::int64_t>();
  }

  std::optional<std::string> str(const nlohmann::json& o,
                                 const std::string& where, const char* key,
                                 bool required) {
    if (!o.contains(key)) {
      if (required) fail(where + "." + key + ": required");
      return std::nullopt;
    }
    if (!o[key].is_string()) {
      fail(where + "." + key + ": must be a string");
      return std::nullopt;
    }
    return o[key].get<std::string>();
  }

  bool object(const nlohmann::json& v, const std::string& where) {
    if (v.is_object()) return true;
    fail(where + ": must be an object");
    return false;
  }
};

inline std::optional<CorrelationModel> parse_correlation(
    ConfigReader& r, const nlohmann::json& o, const std::string& where) {
  if (!r.object(o, where)) return std::nullopt;
  const auto family = r.str(o, where, "family", true);
  if (!family) return std::nullopt;
  try {
    if (*family == "power_law_bg") {
      r.keys(o, where, {"family", "beta", "gamma_exp", "dim"});
      const auto beta = r.number(o, where, "beta", true);
      const auto ge = r.number(o, where, "gamma_exp", true);
      const auto dim = r.integer(o, where, "dim", true);
      if (beta && ge && dim)
        return CorrelationModel::power_law_bg(*beta, *ge,
                                              static_cast<int>(*dim));
    } else if (*family == "pure_power") {
      r.keys(o, where, {"family", "rho", "dim"});
      const auto rho = r.number(o, where, "rho", true);
      const auto dim = r.integer(o, where, "dim", true);
      if (rho && dim)
        return CorrelationModel::pure_power(*rho, static_cast<int>(*dim));
    } else if (*family == "squared") {
      r.keys(o, where, {"family", "base"});
      if (!o.contains("base")) {
        r.fail(where + ".base: required");
        return std::nullopt;
      }
      auto base = parse_correlation(r, o["base"], where + ".base");
      if (base) return CorrelationModel::squared(*base);
    } else {
      r.fail(where + ".family: unknown family '" + *family + "'");
    }
  } catch (const std::exception& e) {
    r.fail(where + ": " + e.what());
  }
  return std::nullopt;
}

inline std::optional<MarginalDensity> parse_marginal(ConfigReader& r,
                                                     const nlohmann::json& v,
                                                     const std::string& where) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "gaussian") return MarginalDensity::standard_gaussian();
    r.fail(where + ": unknown marginal '" + s + "'");
    return std::nullopt;
  }
  if (!r.object(v, where)) return std::nullopt;
  const auto family = r.str(v, where, "family", true);
  if (!family) return std::nullopt;
  if (*family == "gaussian") {
    r.keys(v, where, {"family"});
    return MarginalDensity::standard_gaussian();
  }
  if (*family == "gamma") {
    r.keys(v, where, {"family", "shape", "scale"});
    const auto shape = r.number(v, where, "shape", true);
    const auto scale = r.number(v, where, "scale", true);
    if (shape && scale) {
      try {
        return MarginalDensity::gamma(*shape, *scale);
      } catch (const std::exception& e) {
        r.fail(where + ": " + e.what());
      }
    }
    return std::nullopt;
  }
  r.fail(where + ".family: unknown family '" + *family + "'");
  return std::nullopt;
}

inline std::vector<double> parse_distances(ConfigReader& r,
                                           const nlohmann::json& o) {
  std::vector<double> out;
  const std::string where = "distances";
  if (!r.object(o, where)) return out;
  const auto kind = r.str(o, where, "kind", true);
  if (!kind) return out;
  if (*kind == "explicit") {
    r.keys(o, where, {"kind", "values"});
    if (!o.contains("values") || !o["values"].is_array()) {
      r.fail(where + ".values: required array");
      return out;
    }
    for (const auto& v : o["values"]) {
      if (!v.is_number()) {
        r.fail(where + ".values: entries must be numbers");
        return {};
      }
      out.push_back(v.get<double>());
    }
    if (out.empty()) r.fail(where + ".values: must be non-empty");
  } else if (*kind == "range") {
    r.keys(o, where, {"kind", "start", "stop", "step"});
    const auto start = r.number(o, where, "start", true);
    const auto stop = r.number(o, where, "stop", true);
    const auto step = r.number(o, where, "step", true);
    if (!(start && stop && step)) return out;
    if (!(*start > 0.0)) r.fail(where + ".start: must be > 0");
    if (!(*step > 0.0)) r.fail(where + ".step: must be > 0");
    if (!(*stop >= *start)) r.fail(where + ".stop: must be >= start");
    if (*start > 0.0 && *step > 0.0 && *stop >= *start) {
      const double n_est = (*stop - *start) / *step;
      if (n_est > 2e6) {
        r.fail(where + ": range produces more than 2e6 points");
        return out;
      }
      for (double d = *start; d <= *stop + 1e-9 * *step; d += *step)
        out.push_back(d);
    }
  } else if (*kind == "logspace") {
    r.keys(o, where, {"kind", "start", "stop", "count"});
    const auto start = r.number(o, where, "start", true);
    const auto stop = r.number(o, where, "stop", true);
    const auto count = r.integer(o, where, "count", true);
    if (!(start && stop && count)) return out;
    if (!(*start > 0.0)) r.fail(where + ".start: must be > 0");
    if (!(*stop > *start)) r.fail(where + ".stop: must be > start");
    if (*count < 2 || *count > 1000000) {
      r.fail(where + ".count: must be in [2, 1e6]");
      return out;
    }
    if (*start > 0.0 && *stop > *start) {
      const double la = std::log(*start), lb = std::log(*stop);
      const auto n = static_cast<int>(*count);
      for (int i = 0; i < n; ++i)
        out.push_back(std::exp(la + (lb - la) * i / (n - 1)));
      out.front() = *start;
      out.back() = *stop;
    }
  } else {
    r.fail(where + ".kind: must be one of explicit|range|logspace");
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0)) {
      r.fail(where + ": distances must be > 0");
      return {};
    }
    if (i > 0 && !(out[i] > out[i - 1])) {
      r.fail(where + ": distances must be strictly increasing");
      return {};
    }
  }
  return out;
}

inline std::optional<GneitingCovariance> parse_gneiting(
    ConfigReader& r, const nlohmann::json& o, const std::string& where) {
  if (!r.object(o, where)) return std::nullopt;
  r.keys(o, where, {"sigma2", "c", "gamma_phi", "delta", "a", "alpha",
                    "beta_psi", "dim"});
  const auto s2 = r.number(o, where, "sigma2", true);
  const auto c = r.number(o, where, "c", true);
  const auto gp = r.number(o, where, "gamma_phi", true);
  const auto de = r.number(o, where, "delta", true);
  const auto a = r.number(o, where, "a", true);
  const auto al = r.number(o, where, "alpha", true);
  const auto bp = r.number(o, where, "beta_psi", true);
  const auto dim = r.integer(o, where, "dim", true);
  if (!(s2 && c && gp && de && a && al && bp && dim)) return std::nullopt;
  try {
    return GneitingCovariance(*s2, *c, *gp, *de, *a, *al, *bp,
                              static_cast<int>(*dim));
  } catch (const std::exception& e) {
    r.fail(where + ": " + e.what());
    return std::nullopt;
  }
}

}  // namespace detail

/// Parse + validate a config object; throws ConfigError listing every
/// violation found.  Nothing is written to disk here.
inline ExperimentConfig parse_config(const nlohmann::json& root) {
  detail::ConfigReader r;
  ExperimentConfig cfg;
  if (!root.is_object()) throw ConfigError({"config: must be a JSON object"});

  r.keys(root, "config",
         {"scenario", "model", "distances", "q", "nu", "levels", "seed",
          "output", "fit_window", "field", "st", "slope"});

  static const std::map<std::string, Scenario> kScenarios = {
      {"mi_curve", Scenario::MiCurve},
      {"renyi_curve", Scenario::RenyiCurve},
      {"subordinated_curve", Scenario::SubordinatedCurve},
      {"field_sim", Scenario::FieldSim},
      {"st_surface", Scenario::StSurface},
      {"slope_report", Scenario::SlopeReport}};
  std::string sname = "?";
  if (auto s = r.str(root, "config", "scenario", true)) {
    auto it = kScenarios.find(*s);
    if (it == kScenarios.end()) {
      r.fail("config.scenario: unknown scenario '" + *s + "'");
    } else {
      cfg.scenario = it->second;
      sname = *s;
    }
  }

  if (auto out = r.str(root, "config", "output", true)) {
    if (out->empty())
      r.fail("config.output: must be non-empty");
    else
      cfg.output = *out;
  }

  if (root.contains("seed")) {
    if (root["seed"].is_number_unsigned())
      cfg.seed = root["seed"].get<std::uint64_t>();
    else if (root["seed"].is_number_integer() &&
             root["seed"].get<std::int64_t>() >= 0)
      cfg.seed = static_cast<std::uint64_t>(root["seed"].get<std::int64_t>());
    else
      r.fail("config.seed: must be a non-negative integer");
  }

  // --- model block ----------------------------------------------------
  bool model_present = root.contains("model");
  if (model_present && r.object(root["model"], "model")) {
    const nlohmann::json& m = root["model"];
    r.keys(m, "model",
           {"marginal", "truncation", "quad_nodes", "negativity_policy",
            "correlation"});
    if (m.contains("marginal")) {
      if (auto marg = detail::parse_marginal(r, m["marginal"], "model.marginal"))
        cfg.model.marginal = *marg;
    }
    if (auto t = r.integer(m, "model", "truncation", false)) {
      if (*t < 1)
        r.fail("model.truncation: must be >= 1");
      else
        cfg.model.truncation = static_cast<int>(*t);
    }
    if (auto qn = r.integer(m, "model", "quad_nodes", false)) {
      if (*qn < 2)
        r.fail("model.quad_nodes: must be >= 2");
      else
        cfg.model.quad_nodes = static_cast<int>(*qn);
    }
    if (auto p = r.str(m, "model", "negativity_policy", false)) {
      if (*p == "clamp")
        cfg.model.policy = NegativityPolicy::ClampFloor;
      else if (*p == "reject")
        cfg.model.policy = NegativityPolicy::Reject;
      else
        r.fail("model.negativity_policy: must be clamp|reject");
    }
    if (m.contains("correlation"))
      cfg.model.correlation =
          detail::parse_correlation(r, m["correlation"], "model.correlation");
  }

  // --- optional shared blocks -----------------------------------------
  if (root.contains("distances"))
    cfg.distances = detail::parse_distances(r, root["distances"]);

  if (root.contains("q")) {
    if (!root["q"].is_array() || root["q"].empty()) {
      r.fail("config.q: must be a non-empty array");
    } else {
      for (const auto& v : root["q"]) {
        if (!v.is_number()) {
          r.fail("config.q: entries must be numbers");
          break;
        }
        const double q = v.get<double>();
        if (!(q > 0.0))
          r.fail("config.q: orders must be > 0");
        else if (q == 1.0)
          r.fail("config.q: order 1 is the Shannon limit; use scenario "
                 "mi_curve");
        else
          cfg.q.push_back(q);
      }
    }
  }

  const bool has_nu = root.contains("nu");
  const bool has_levels = root.contains("levels");
  if (has_nu && has_levels)
    r.fail("config: specify at most one of 'nu' and 'levels'");
  if (has_nu) {
    if (auto nu = r.number(root, "config", "nu", false))
      cfg.subordination = SubordinationSpec::indicator(*nu);
  }
  if (has_levels && r.object(root["levels"], "levels")) {
    const nlohmann::json& lv = root["levels"];
    r.keys(lv, "levels", {"breakpoints", "labels"});
    std::vector<double> breaks;
    std::vector<std::string> labels;
    bool ok = true;
    if (!lv.contains("breakpoints") || !lv["breakpoints"].is_array()) {
      r.fail("levels.breakpoints: required array");
      ok = false;
    } else {
      for (const auto& v : lv["breakpoints"]) {
        if (!v.is_number()) {
          r.fail("levels.breakpoints: entries must be numbers");
          ok = false;
          break;
        }
        breaks.push_back(v.get<double>());
      }
    }
    if (!lv.contains("labels") || !lv["labels"].is_array()) {
      r.fail("levels.labels: required array");
      ok = false;
    } else {
      for (const auto& v : lv["labels"]) {
        if (!v.is_string()) {
          r.fail("levels.labels: entries must be strings");
          ok = false;
          break;
        }
        labels.push_back(v.get<std::string>());
      }
    }
    if (ok) {
      try {
        cfg.subordination = SubordinationSpec::finite_levels(breaks, labels);
      } catch (const std::exception& e) {
        r.fail(std::string("levels: ") + e.what());
      }
    }
  }

  if (root.contains("fit_window")) {
    const nlohmann::json& w = root["fit_window"];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() ||
        !w[1].is_number()) {
      r.fail("config.fit_window: must be [lo, hi]");
    } else {
      const double lo = w[0].get<double>(), hi = w[1].get<double>();
      if (!(lo > 0.0 && hi > lo))
        r.fail("config.fit_window: need 0 < lo < hi");
      else
        cfg.fit_window = std::make_pair(lo, hi);
    }
  }

  // --- field block ------------------------------------------------------
  if (root.contains("field") && r.object(root["field"], "field")) {
    const nlohmann::json& f = root["field"];
    r.keys(f, "field",
           {"grid", "spacing", "replicates", "n_dof", "method", "max_lag"});
    FieldConfig fc;
    if (!f.contains("grid") || !f["grid"].is_array() || f["grid"].empty()) {
      r.fail("field.grid: required non-empty array");
    } else {
      for (const auto& v : f["grid"]) {
        if (!v.is_number_integer() && !v.is_number_unsigned()) {
          r.fail("field.grid: entries must be integers");
          fc.grid.clear();
          break;
        }
        fc.grid.push_back(v.get<int>());
      }
      for (int s : fc.grid)
        if (s < 1) {
          r.fail("field.grid: sizes must be >= 1");
          fc.grid.clear();
          break;
        }
    }
    if (auto sp = r.number(f, "field", "spacing", false)) {
      if (!(*sp > 0.0))
        r.fail("field.spacing: must be > 0");
      else
        fc.spacing = *sp;
    }
    if (auto rep = r.integer(f, "field", "replicates", false)) {
      if (*rep < 1)
        r.fail("field.replicates: must be >= 1");
      else
        fc.replicates = static_cast<int>(*rep);
    }
    if (auto nd = r.integer(f, "field", "n_dof", false)) {
      if (*nd < 2 || *nd % 2 != 0)
        r.fail("field.n_dof: must be a positive even integer");
      else
        fc.n_dof = static_cast<int>(*nd);
    }
    if (auto me = r.str(f, "field", "method", false)) {
      if (*me == "auto")
        fc.method = SimMethod::Auto;
      else if (*me == "cholesky")
        fc.method = SimMethod::Cholesky;
      else if (*me == "circulant")
        fc.method = SimMethod::CirculantEmbedding;
      else
        r.fail("field.method: must be auto|cholesky|circulant");
    }
    if (!fc.grid.empty()) {
      const int min_size = *std::min_element(fc.grid.begin(), fc.grid.end());
      fc.max_lag = min_size - 1;
      if (auto ml = r.integer(f, "field", "max_lag", false)) {
        if (*ml < 0 || *ml >= min_size)
          r.fail("field.max_lag: must be in [0, min grid size)");
        else
          fc.max_lag = static_cast<int>(*ml);
      }
    }
    cfg.field = std::move(fc);
  }

  // --- st block ----------------------------------------------------------
  if (root.contains("st") && r.object(root["st"], "st")) {
    const nlohmann::json& s = root["st"];
    StConfig sc;
    if (cfg.scenario == Scenario::FieldSim) {
      r.keys(s, "st",
             {"gneiting", "space_grid", "spacing", "time_points",
              "time_spacing"});
      if (s.contains("gneiting"))
        sc.gneiting = detail::parse_gneiting(r, s["gneiting"], "st.gneiting");
      else
        r.fail("st.gneiting: required");
      if (!s.contains("space_grid") || !s["space_grid"].is_array() ||
          s["space_grid"].empty()) {
        r.fail("st.space_grid: required non-empty array");
      } else {
        for (const auto& v : s["space_grid"]) {
          if ((!v.is_number_integer() && !v.is_number_unsigned()) ||
              v.get<int>() < 1) {
            r.fail("st.space_grid: entries must be integers >= 1");
            sc.space_grid.clear();
            break;
          }
          sc.space_grid.push_back(v.get<int>());
        }
      }
      if (auto sp = r.number(s, "st", "spacing", false)) {
        if (!(*sp > 0.0))
          r.fail("st.spacing: must be > 0");
        else
          sc.spacing = *sp;
      }
      if (auto tp = r.integer(s, "st", "time_points", true)) {
        if (*tp < 1)
          r.fail("st.time_points: must be >= 1");
        else
          sc.time_points = static_cast<int>(*tp);
      }
      if (auto ts = r.number(s, "st", "time_spacing", false)) {
        if (!(*ts > 0.0))
          r.fail("st.time_spacing: must be > 0");
        else
          sc.time_spacing = *ts;
      }
    } else {
      r.keys(s, "st",
             {"gneiting", "t_end", "basis_count", "quad_nodes", "mesh",
              "surface_distances"});
      if (s.contains("gneiting"))
        sc.gneiting = detail::parse_gneiting(r, s["gneiting"], "st.gneiting");
      else
        r.fail("st.gneiting: required");
      if (auto te = r.number(s, "st", "t_end", false)) {
        if (!(*te > 0.0))
          r.fail("st.t_end: must be > 0");
        else
          sc.t_end = *te;
      }
      if (auto bc = r.integer(s, "st", "basis_count", false)) {
        if (*bc < 1)
          r.fail("st.basis_count: must be >= 1");
        else
          sc.basis_count = static_cast<int>(*bc);
      }
      if (auto qn = r.integer(s, "st", "quad_nodes", false)) {
        if (*qn < 2)
          r.fail("st.quad_nodes: must be >= 2");
        else
          sc.quad_nodes = static_cast<int>(*qn);
      }
      if (!s.contains("mesh") || !s["mesh"].is_object()) {
        r.fail("st.mesh: required object");
      } else {
        const nlohmann::json& me = s["mesh"];
        r.keys(me, "st.mesh", {"start", "stop", "count"});
        const auto start = r.number(me, "st.mesh", "start", true);
        const auto stop = r.number(me, "st.mesh", "stop", true);
        const auto count = r.integer(me, "st.mesh", "count", true);
        if (start && stop && count) {
          if (!(*start >= 0.0 && *stop > *start && *stop <= sc.t_end)) {
            r.fail("st.mesh: need 0 <= start < stop <= t_end");
          } else if (*count < 2 || *count > 4096) {
            r.fail("st.mesh.count: must be in [2, 4096]");
          } else {
            const auto n = static_cast<int>(*count);
            for (int i = 0; i < n; ++i)
              sc.mesh.push_back(*start +
                                (*stop - *start) * i / (n - 1));
          }
        }
      }
      if (!s.contains("surface_distances") ||
          !s["surface_distances"].is_array() ||
          s["surface_distances"].empty()) {
        r.fail("st.surface_distances: required non-empty array");
      } else {
        for (const auto& v : s["surface_distances"]) {
          if (!v.is_number()) {
            r.fail("st.surface_distances: entries must be numbers");
            sc.surface_distances.clear();
            break;
          }
          sc.surface_distances.push_back(v.get<double>());
        }
        for (std::size_t i = 0; i < sc.surface_distances.size(); ++i)
          if (!(sc.surface_distances[i] > 0.0) ||
              (i > 0 && !(sc.surface_distances[i] >
                          sc.surface_distances[i - 1]))) {
            r.fail("st.surface_distances: must be positive and strictly "
                   "increasing");
            sc.surface_distances.clear();
            break;
          }
      }
    }
    cfg.st = std::move(sc);
  }

  // --- slope block ---------------------------------------------------------
  if (root.contains("slope") && r.object(root["slope"], "slope")) {
    const nlohmann::json& s = root["slope"];
    r.keys(s, "slope", {"curve", "window", "expected_order", "tolerance"});
    SlopeConfig sl;
    if (auto c = r.str(s, "slope", "curve", true)) {
      if (c->empty())
        r.fail("slope.curve: must be non-empty");
      else
        sl.curve = *c;
    }
    if (!s.contains("window") || !s["window"].is_array() ||
        s["window"].size() != 2 || !s["window"][0].is_number() ||
        !s["window"][1].is_number()) {
      r.fail("slope.window: must be [lo, hi]");
    } else {
      sl.window_lo = s["window"][0].get<double>();
      sl.window_hi = s["window"][1].get<double>();
      if (!(sl.window_lo > 0.0 && sl.window_hi > sl.window_lo))
        r.fail("slope.window: need 0 < lo < hi");
    }
    if (auto eo = r.number(s, "slope", "expected_order", false)) {
      if (*eo == 0.0)
        r.fail("slope.expected_order: must be nonzero");
      else
        sl.expected_order = *eo;
    }
    if (auto tol = r.number(s, "slope", "tolerance", false)) {
      if (!(*tol > 0.0))
        r.fail("slope.tolerance: must be > 0");
      else
        sl.tolerance = *tol;
    }
    cfg.slope = std::move(sl);
  }

  // --- scenario gating -------------------------------------------------
  auto forbid = [&](bool present, const char* key) {
    if (present)
      r.fail("scenario " + sname + " does not accept key '" + key + "'");
  };
  auto need_curve_model = [&]() {
    if (!model_present)
      r.fail("scenario " + sname + " requires a 'model' block");
    else if (root["model"].is_object() &&
             !root["model"].contains("correlation"))
      r.fail("scenario " + sname + " requires model.correlation");
    if (!root.contains("distances"))
      r.fail("scenario " + sname + " requires 'distances'");
  };

  switch (cfg.scenario) {
    case Scenario::MiCurve:
      need_curve_model();
      forbid(root.contains("q"), "q");
      forbid(has_nu, "nu");
      forbid(has_levels, "levels");
      forbid(root.contains("field"), "field");
      forbid(root.contains("st"), "st");
      forbid(root.contains("slope"), "slope");
      break;
    case Scenario::RenyiCurve:
      need_curve_model();
      if (!root.contains("q"))
        r.fail("scenario renyi_curve requires 'q'");
      forbid(root.contains("field"), "field");
      forbid(root.contains("st"), "st");
      forbid(root.contains("slope"), "slope");
      break;
    case Scenario::SubordinatedCurve:
      need_curve_model();
      if (!has_nu && !has_levels)
        r.fail("scenario subordinated_curve requires 'nu' or 'levels'");
      forbid(root.contains("q"), "q");
      forbid(root.contains("field"), "field");
      forbid(root.contains("st"), "st");
      forbid(root.contains("slope"), "slope");
      break;
    case Scenario::FieldSim: {
      const bool f = root.contains("field"), s = root.contains("st");
      if (f == s)
        r.fail("scenario field_sim requires exactly one of 'field' and 'st'");
      if (f) {
        if (!model_present || !root["model"].is_object() ||
            !root["model"].contains("correlation"))
          r.fail("scenario field_sim requires model.correlation");
      } else if (s) {
        forbid(model_present, "model");
      }
      forbid(root.contains("distances"), "distances");
      forbid(root.contains("q"), "q");
      forbid(has_nu, "nu");
      forbid(has_levels, "levels");
      forbid(root.contains("fit_window"), "fit_window");
      forbid(root.contains("slope"), "slope");
      break;
    }
    case Scenario::StSurface:
      if (!root.contains("st"))
        r.fail("scenario st_surface requires 'st'");
      if (model_present && root["model"].is_object() &&
          root["model"].contains("correlation"))
        r.fail("scenario st_surface does not use model.correlation");
      forbid(root.contains("distances"), "distances");
      forbid(root.contains("q"), "q");
      forbid(has_nu, "nu");
      forbid(has_levels, "levels");
      forbid(root.contains("fit_window"), "fit_window");
      forbid(root.contains("field"), "field");
      forbid(root.contains("slope"), "slope");
      break;
    case Scenario::SlopeReport:
      if (!root.contains("slope"))
        r.fail("scenario slope_report requires 'slope'");
      forbid(model_present, "model");
      forbid(root.contains("distances"), "distances");
      forbid(root.contains("q"), "q");
      forbid(has_nu, "nu");
      forbid(has_levels, "levels");
      forbid(root.contains("fit_window"), "fit_window");
      forbid(root.contains("field"), "field");
      forbid(root.contains("st"), "st");
      break;
  }

  if (!r.viol.empty()) throw ConfigError(std::move(r.viol));
  return cfg;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ArtifactRecord {
  std::string path;  // relative to the run's output directory
  std::uint64_t bytes = 0;
};

struct CurveSlopeSummary {
  std::string curve;
  SlopeFit fit;
};

struct RunManifest {
  std::string config_hash;
  std::string library_version = kLibraryVersion;
  std::string scenario;
  double wall_clock_seconds = 0.0;
  std::vector<ArtifactRecord> artifacts;
  std::vector<CurveSlopeSummary> slopes;
  std::vector<std::string> warnings;
  std::string output_dir;
  std::string manifest_path;
};

namespace detail {

inline ArtifactRecord write_text_artifact(const std::filesystem::path& dir,
                                          const std::string& name,
                                          const std::string& content) {
  const std::filesystem::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("experiment: cannot open " + p.string());
  out.write(content.data(),
            static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out)
    throw std::runtime_error("experiment: write failed for " + p.string());
  return {name, static_cast<std::uint64_t>(content.size())};
}

inline ArtifactRecord stat_artifact(const std::filesystem::path& dir,
                                    const std::string& name) {
  return {name,
          static_cast<std::uint64_t>(std::filesystem::file_size(dir / name))};
}

inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["artifacts"] = nlohmann::json::array();
  for (const auto& a : m.artifacts)
    j["artifacts"].push_back({{"bytes", a.bytes}, {"path", a.path}});
  j["config_hash"] = m.config_hash;
  j["library_version"] = m.library_version;
  j["scenario"] = m.scenario;
  j["slopes"] = nlohmann::json::array();
  for (const auto& s : m.slopes) {
    nlohmann::json e;
    e["curve"] = s.curve;
    e["points_used"] = s.fit.points_used;
    e["valid"] = s.fit.valid;
    if (s.fit.valid) {
      e["slope"] = s.fit.slope;
      e["slope_stderr"] = s.fit.slope_stderr;
      e["window"] = {s.fit.window_lo, s.fit.window_hi};
    } else {
      e["slope"] = nullptr;
      e["slope_stderr"] = nullptr;
      e["window"] = nullptr;
    }
    e["warning"] = s.fit.warning;
    j["slopes"].push_back(e);
  }
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["warnings"] = m.warnings;
  return j;
}

}  // namespace detail

/// Check a written manifest against the filesystem; returns a list of
/// problems (missing artifacts, byte-length mismatches), empty when intact.
inline std::vector<std::string> verify_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {"cannot open " + path};
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    return {std::string("manifest parse error: ") + e.what()};
  }
  std::vector<std::string> problems;
  const std::filesystem::path dir =
      std::filesystem::path(path).parent_path();
  for (const auto& a : j.at("artifacts")) {
    const std::string rel = a.at("path").get<std::string>();
    const auto expect = a.at("bytes").get<std::uint64_t>();
    const std::filesystem::path p = dir / rel;
    std::error_code ec;
    const auto sz = std::filesystem::file_size(p, ec);
    if (ec)
      problems.push_back("missing artifact: " + rel);
    else if (sz != expect)
      problems.push_back("byte-length mismatch for " + rel + ": recorded " +
                         std::to_string(expect) + ", found " +
                         std::to_string(sz));
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Slope reports
// ---------------------------------------------------------------------------

struct SlopeReport {
  SlopeFit fit;
  double r_squared = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int positive_points = 0;
  std::optional<double> expected_order;
  double tolerance = 0.1;
  std::optional<bool> pass;  // engaged when expected_order is set

  std::string text() const {
    std::string s;
    s += "slope: " + detail::fmt_g12(fit.slope) + "\n";
    s += "stderr: " + detail::fmt_g12(fit.slope_stderr) + "\n";
    s += "r_squared: " + detail::fmt_g12(r_squared) + "\n";
    s += "window: [" + detail::fmt_g12(window_lo) + ", " +
         detail::fmt_g12(window_hi) + "]\n";
    s += "points: " + std::to_string(fit.points_used) + "\n";
    if (expected_order) {
      s += "expected_order: " + detail::fmt_g12(*expected_order) + "\n";
      s += "tolerance: " + detail::fmt_g12(tolerance) + "\n";
      s += std::string("comparison: ") + (*pass ? "PASS" : "FAIL") + "\n";
    } else {
      s += "comparison: none\n";
    }
    if (!fit.warning.empty()) s += "warning: " + fit.warning + "\n";
    return s;
  }

  std::string csv() const {
    std::string s =
        "slope,stderr,r_squared,window_lo,window_hi,points,expected_order,"
        "tolerance,comparison\n";
    s += detail::fmt_g12(fit.slope) + "," + detail::fmt_g12(fit.slope_stderr) +
         "," + detail::fmt_g12(r_squared) + "," + detail::fmt_g12(window_lo) +
         "," + detail::fmt_g12(window_hi) + "," +
         std::to_string(fit.points_used) + ",";
    if (expected_order) {
      s += detail::fmt_g12(*expected_order) + "," +
           detail::fmt_g12(tolerance) + "," + (*pass ? "PASS" : "FAIL");
    } else {
      s += "nan," + detail::fmt_g12(tolerance) + ",none";
    }
    s += "\n";
    return s;
  }
};

/// Log-log fit of (x, y) over [lo, hi] with a >= 10 positive-point
/// precondition and an R^2 alongside the slope/stderr pair.
inline SlopeReport slope_report(const std::vector<double>& x,
                                const std::vector<double>& y, double lo,
                                double hi,
                                std::optional<double> expected_order =
                                    std::nullopt,
                                double tolerance = 0.1) {
  if (x.size() != y.size())
    throw std::invalid_argument("slope_report: size mismatch");
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("slope_report: need 0 < lo < hi");
  if (x.empty()) throw std::invalid_argument("slope_report: empty curve");
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (hi < *mn || lo > *mx)
    throw std::invalid_argument("slope_report: window [" +
                                detail::fmt_g12(lo) + ", " +
                                detail::fmt_g12(hi) +
                                "] outside data range [" +
                                detail::fmt_g12(*mn) + ", " +
                                detail::fmt_g12(*mx) + "]");

  SlopeReport rep;
  rep.window_lo = lo;
  rep.window_hi = hi;
  rep.expected_order = expected_order;
  rep.tolerance = tolerance;

  // same positivity cut the fit itself applies
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    if (y[i] >= 1e-300 && std::isfinite(y[i])) {
      ++rep.positive_points;
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (rep.positive_points < 10)
    throw std::runtime_error(
        "slope_report: insufficient positive points in window (need >= 10, "
        "found " +
        std::to_string(rep.positive_points) + ")");

  rep.fit = fit_loglog_slope(x, y, lo, hi);

  // R^2 on the same filtered log-log point set the fit used.
  const int n = static_cast<int>(lx.size());
  double mxl = 0.0, myl = 0.0;
  for (int i = 0; i < n; ++i) {
    mxl += lx[i];
    myl += ly[i];
  }
  mxl /= n;
  myl /= n;
  double rss = 0.0, tss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pred = rep.fit.intercept + rep.fit.slope * lx[i];
    rss += (ly[i] - pred) * (ly[i] - pred);
    tss += (ly[i] - myl) * (ly[i] - myl);
  }
  rep.r_squared = tss > 0.0 ? 1.0 - rss / tss : (rss == 0.0 ? 1.0 : 0.0);

  if (expected_order)
    rep.pass = std::abs(rep.fit.slope - *expected_order) <=
               tolerance * std::abs(*expected_order);
  return rep;
}

namespace detail {

/// Minimal CSV reader for slope input: header line, then rows whose first two
/// fields are numeric (x, y).
inline std::pair<std::vector<double>, std::vector<double>> read_curve_csv(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("slope_report: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("slope_report: empty file " + path);
  std::vector<double> x, y;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    if (c1 == std::string::npos)
      throw std::runtime_error("slope_report: " + path + ":" +
                               std::to_string(lineno) +
                               ": expected at least two columns");
    std::size_t c2 = line.find(',', c1 + 1);
    if (c2 == std::string::npos) c2 = line.size();
    try {
      x.push_back(std::stod(line.substr(0, c1)));
      y.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    } catch (const std::exception&) {
      throw std::runtime_error("slope_report: " + path + ":" +
                               std::to_string(lineno) +
                               ": non-numeric value");
    }
  }
  if (x.empty())
    throw std::runtime_error("slope_report: no data rows in " + path);
  return {std::move(x), std::move(y)};
}

}  // namespace detail

inline SlopeReport slope_report_csv(const std::string& path, double lo,
                                    double hi,
                                    std::optional<double> expected_order =
                                        std::nullopt,
                                    double tolerance = 0.1) {
  auto [x, y] = detail::read_curve_csv(path);
  return slope_report(x, y, lo, hi, expected_order, tolerance);
}

// ---------------------------------------------------------------------------
// Scenario runners
// ---------------------------------------------------------------------------

namespace detail {

inline LSModel make_engine(const ModelConfig& m) {
  if (m.correlation)
    return LSModel(m.marginal, *m.correlation, m.truncation, m.quad_nodes,
                   m.policy);
  return LSModel(m.marginal, m.truncation, m.quad_nodes, m.policy);
}

inline void note_correlation_warning(const ModelConfig& m,
                                     std::vector<std::string>& warnings) {
  if (m.correlation) {
    if (auto w = m.correlation->config_warning()) warnings.push_back(*w);
  }
}

inline std::string csv_curve(const MICurve& c, bool with_bounds) {
  std::string s = with_bounds ? "distance,mi,lower_bound,upper_bound\n"
                              : "distance,mi\n";
  for (std::size_t i = 0; i < c.distances.size(); ++i) {
    s += fmt_g12(c.distances[i]) + "," + fmt_g12(c.mi_values[i]);
    if (with_bounds)
      s += "," + fmt_g12(c.lower_bound[i]) + "," + fmt_g12(c.upper_bound[i]);
    s += "\n";
  }
  return s;
}

inline void add_curve(const std::filesystem::path& dir,
                      const std::string& name, const MICurve& c,
                      bool with_bounds, RunManifest& man) {
  man.artifacts.push_back(write_text_artifact(dir, name,
                                              csv_curve(c, with_bounds)));
  man.slopes.push_back({name, c.slope_fit});
  if (!c.slope_fit.warning.empty())
    man.warnings.push_back(name + ": " + c.slope_fit.warning);
}

inline void run_mi_curve(const ExperimentConfig& cfg,
                         const std::filesystem::path& dir, RunManifest& man) {
  note_correlation_warning(cfg.model, man.warnings);
  const LSModel engine = make_engine(cfg.model);
  const MICurve c = engine.mi_curve(cfg.distances, std::nullopt, std::nullopt,
                                    cfg.fit_window);
  add_curve(dir, "curve.csv", c, true, man);
}

inline void run_renyi_curve(const ExperimentConfig& cfg,
                            const std::filesystem::path& dir,
                            RunManifest& man) {
  note_correlation_warning(cfg.model, man.warnings);
  const LSModel engine = make_engine(cfg.model);
  for (double q : cfg.q) {
    const MICurve c =
        engine.mi_curve(cfg.distances, cfg.subordination, q, cfg.fit_window);
    add_curve(dir, "curve_q" + fmt_g12(q) + ".csv", c, false, man);
  }
}

inline void run_subordinated_curve(const ExperimentConfig& cfg,
                                   const std::filesystem::path& dir,
                                   RunManifest& man) {
  note_correlation_warning(cfg.model, man.warnings);
  const LSModel engine = make_engine(cfg.model);
  const MICurve c = engine.mi_curve(cfg.distances, cfg.subordination,
                                    std::nullopt, cfg.fit_window);
  add_curve(dir, "curve.csv", c, false, man);
}

/// Pooled centered axis-lag correlation over replicated fields plus a sample
/// realization and the analytic curve: columns lag, distance, analytic,
/// empirical.
inline void run_field_sim_spatial(const ExperimentConfig& cfg,
                                  const std::filesystem::path& dir,
                                  RunManifest& man) {
  const FieldConfig& fc = *cfg.field;
  note_correlation_warning(cfg.model, man.warnings);
  const CorrelationModel& corr = *cfg.model.correlation;
  const CorrelationModel analytic =
      fc.n_dof ? CorrelationModel::squared(corr) : corr;
  const GridSpec grid(fc.grid, fc.spacing);
  const int L = fc.max_lag;
  const int dim = grid.dim();
  const auto n = grid.total_points();

  // row-major strides, last axis fastest
  std::vector<std::int64_t> stride(dim, 1);
  for (int a = dim - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * grid.sizes[a + 1];

  std::vector<double> s_ab(L + 1, 0.0), s_a(L + 1, 0.0), s_b(L + 1, 0.0),
      s_a2(L + 1, 0.0), s_b2(L + 1, 0.0);
  std::vector<std::uint64_t> cnt(L + 1, 0);
  double total = 0.0;
  std::uint64_t total_n = 0;

  for (int rep = 0; rep < fc.replicates; ++rep) {
    const std::uint64_t seed_r = derive_seed(cfg.seed, rep);
    const FieldRealization f =
        fc.n_dof ? chi_square_field(grid, corr, *fc.n_dof, seed_r, fc.method)
                 : simulate_gaussian(grid, corr, seed_r, fc.method);
    if (rep == 0) {
      write_field_binary(f, (dir / "field_0").string());
      man.artifacts.push_back(stat_artifact(dir, "field_0.bin"));
      man.artifacts.push_back(stat_artifact(dir, "field_0.txt"));
    }
    for (double v : f.values) total += v;
    total_n += f.values.size();
    for (int a = 0; a < dim; ++a) {
      const int size_a = grid.sizes[a];
      for (int lag = 0; lag <= L && lag < size_a; ++lag) {
        for (std::int64_t p = 0; p < n; ++p) {
          const auto coord = (p / stride[a]) % size_a;
          if (coord + lag >= size_a) continue;
          const double u = f.values[p];
          const double v = f.values[p + lag * stride[a]];
          s_ab[lag] += u * v;
          s_a[lag] += u;
          s_b[lag] += v;
          s_a2[lag] += u * u;
          s_b2[lag] += v * v;
          ++cnt[lag];
        }
      }
    }
  }

  const double m = total / static_cast<double>(total_n);
  std::string csv = "lag,distance,analytic,empirical\n";
  for (int lag = 0; lag <= L; ++lag) {
    const double c = static_cast<double>(cnt[lag]);
    const double va = s_a2[lag] - 2.0 * m * s_a[lag] + c * m * m;
    const double vb = s_b2[lag] - 2.0 * m * s_b[lag] + c * m * m;
    const double cov = s_ab[lag] - m * (s_a[lag] + s_b[lag]) + c * m * m;
    const double emp =
        va > 0.0 && vb > 0.0 ? cov / std::sqrt(va * vb)
                             : std::numeric_limits<double>::quiet_NaN();
    const double d = lag * grid.spacing;
    csv += std::to_string(lag) + "," + fmt_g12(d) + "," +
           fmt_g12(analytic(d)) + "," + fmt_g12(emp) + "\n";
  }
  man.artifacts.push_back(write_text_artifact(dir, "covariance.csv", csv));
}

inline void run_field_sim_st(const ExperimentConfig& cfg,
                             const std::filesystem::path& dir,
                             RunManifest& man) {
  const StConfig& sc = *cfg.st;
  const GridSpec space(sc.space_grid, sc.spacing);
  const FieldRealization f = simulate_st_gaussian(
      space, sc.time_points, sc.time_spacing, *sc.gneiting, cfg.seed);
  write_field_binary(f, (dir / "field").string());
  man.artifacts.push_back(stat_artifact(dir, "field.bin"));
  man.artifacts.push_back(stat_artifact(dir, "field.txt"));
}

inline void run_st_surface(const ExperimentConfig& cfg,
                           const std::filesystem::path& dir,
                           RunManifest& man) {
  const StConfig& sc = *cfg.st;
  const TimeBasis basis(TimeBasis::Kind::CosineOrthonormal, sc.t_end,
                        sc.basis_count);
  const LSModel scalar(cfg.model.marginal, cfg.model.truncation,
                       cfg.model.quad_nodes, cfg.model.policy);
  nlohmann::json params;
  params["basis"] = {{"count", sc.basis_count},
                     {"kind", "cosine_orthonormal"},
                     {"t_end", sc.t_end}};
  const GneitingCovariance& gc = *sc.gneiting;
  params["gneiting"] = {{"sigma2", gc.sigma2()},
                        {"descriptor", gc.descriptor()}};
  params["mesh"] = {{"count", sc.mesh.size()},
                    {"start", sc.mesh.front()},
                    {"stop", sc.mesh.back()}};
  params["operator_quad_nodes"] = sc.quad_nodes;
  params["scalar_engine"] = {{"marginal", cfg.model.marginal.descriptor()},
                             {"quad_nodes", cfg.model.quad_nodes},
                             {"truncation", cfg.model.truncation}};
  params["surface_distances"] = sc.surface_distances;
  params["mean_levels"] = nlohmann::json::array();

  for (double r : sc.surface_distances) {
    const MIOperatorSurface s =
        mi_surface(gc, basis, scalar, r, sc.mesh, sc.quad_nodes);
    std::string csv = "t,s,k\n";
    for (std::size_t i = 0; i < sc.mesh.size(); ++i)
      for (std::size_t j = 0; j < sc.mesh.size(); ++j)
        csv += fmt_g12(sc.mesh[i]) + "," + fmt_g12(sc.mesh[j]) + "," +
               fmt_g12(s.k_values(static_cast<int>(i),
                                  static_cast<int>(j))) +
               "\n";
    man.artifacts.push_back(
        write_text_artifact(dir, "surface_r" + fmt_g12(r) + ".csv", csv));
    params["mean_levels"].push_back({{"mean", s.mean_level()}, {"r", r}});
  }
  man.artifacts.push_back(
      write_text_artifact(dir, "params.json", params.dump(2) + "\n"));
}

inline void run_slope_report(const ExperimentConfig& cfg,
                             const std::filesystem::path& dir,
                             RunManifest& man) {
  const SlopeConfig& sl = *cfg.slope;
  const SlopeReport rep =
      slope_report_csv(sl.curve, sl.window_lo, sl.window_hi,
                       sl.expected_order, sl.tolerance);
  man.artifacts.push_back(write_text_artifact(dir, "slope.csv", rep.csv()));
  man.artifacts.push_back(write_text_artifact(dir, "slope.txt", rep.text()));
  man.slopes.push_back({"slope.csv", rep.fit});
  if (rep.pass && !*rep.pass)
    man.warnings.push_back("slope comparison FAIL: fitted " +
                           fmt_g12(rep.fit.slope) + " vs expected " +
                           fmt_g12(*rep.expected_order) + " (tolerance " +
                           fmt_g12(rep.tolerance) + ")");
}

}  // namespace detail

/// Resolve the run's output directory: absolute paths pass through, relative
/// ones land under $LSRF_OUTPUT_ROOT (or the working directory if unset).
inline std::filesystem::path resolve_output_dir(
    const std::string& output, const std::string& root_override = "") {
  const std::filesystem::path p(output);
  if (p.is_absolute()) return p;
  if (!root_override.empty())
    return std::filesystem::path(root_override) / p;
  if (const char* env = std::getenv("LSRF_OUTPUT_ROOT"))
    if (*env) return std::filesystem::path(env) / p;
  return p;
}

/// Execute a parsed config.  `raw_text` is hashed into the manifest;
/// `root_override` (when non-empty) wins over $LSRF_OUTPUT_ROOT.
inline RunManifest run_config(const ExperimentConfig& cfg,
                              const std::string& raw_text,
                              const std::string& root_override = "") {
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path dir =
      resolve_output_dir(cfg.output, root_override);
  std::filesystem::create_directories(dir);

  RunManifest man;
  man.config_hash = detail::config_hash(raw_text);
  man.scenario = scenario_name(cfg.scenario);
  man.output_dir = dir.string();

  switch (cfg.scenario) {
    case Scenario::MiCurve:
      detail::run_mi_curve(cfg, dir, man);
      break;
    case Scenario::RenyiCurve:
      detail::run_renyi_curve(cfg, dir, man);
      break;
    case Scenario::SubordinatedCurve:
      detail::run_subordinated_curve(cfg, dir, man);
      break;
    case Scenario::FieldSim:
      if (cfg.st)
        detail::run_field_sim_st(cfg, dir, man);
      else
        detail::run_field_sim_spatial(cfg, dir, man);
      break;
    case Scenario::StSurface:
      detail::run_st_surface(cfg, dir, man);
      break;
    case Scenario::SlopeReport:
      detail::run_slope_report(cfg, dir, man);
      break;
  }

  man.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const std::filesystem::path mp = dir / "manifest.json";
  detail::write_text_artifact(dir, "manifest.json",
                              detail::manifest_json(man).dump(2) + "\n");
  man.manifest_path = mp.string();

  // enforce the manifest invariant before handing it back
  for (const auto& a : man.artifacts) {
    std::error_code ec;
    const auto sz = std::filesystem::file_size(dir / a.path, ec);
    if (ec || sz != a.bytes)
      throw std::runtime_error("experiment: artifact " + a.path +
                               " does not match its manifest record");
  }
  return man;
}

inline RunManifest run_config_text(const std::string& text,
                                   const std::string& root_override = "") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("invalid JSON: ") + e.what()});
  }
  return run_config(parse_config(j), text, root_override);
}

inline RunManifest run_config_file(const std::string& path,
                                   const std::string& root_override = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_text(ss.str(), root_override);
}

// ---------------------------------------------------------------------------
// Presets (one per shipped figure recipe)
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::pair<std::string, std::string>>&
preset_table() {
  static const std::vector<std::pair<std::string, std::string>> kPresets = {
      {"fig1-covariance", R"json({
  "scenario": "field_sim",
  "model": {
    "correlation": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}
  },
  "field": {"grid": [20, 20], "spacing": 1.0, "replicates": 500, "max_lag": 19},
  "seed": 20260814,
  "output": "fig1-covariance"
})json"},
      {"fig2-gaussian", R"json({
  "scenario": "mi_curve",
  "model": {
    "marginal": "gaussian",
    "truncation": 5,
    "correlation": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "fit_window": [100.0, 1000.0],
  "output": "fig2-gaussian"
})json"},
      {"fig2-chisq", R"json({
  "scenario": "mi_curve",
  "model": {
    "marginal": {"family": "gamma", "shape": 5.0, "scale": 1.0},
    "truncation": 5,
    "correlation": {"family": "squared",
                    "base": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "fit_window": [100.0, 1000.0],
  "output": "fig2-chisq"
})json"},
      {"fig2-gaussian-indicator", R"json({
  "scenario": "subordinated_curve",
  "model": {
    "marginal": "gaussian",
    "truncation": 5,
    "correlation": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "nu": 0.95,
  "fit_window": [100.0, 1000.0],
  "output": "fig2-gaussian-indicator"
})json"},
      {"fig2-chisq-indicator", R"json({
  "scenario": "subordinated_curve",
  "model": {
    "marginal": {"family": "gamma", "shape": 5.0, "scale": 1.0},
    "truncation": 5,
    "correlation": {"family": "squared",
                    "base": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "nu": 0.95,
  "fit_window": [100.0, 1000.0],
  "output": "fig2-chisq-indicator"
})json"},
      {"fig3-renyi-gaussian", R"json({
  "scenario": "renyi_curve",
  "model": {
    "marginal": "gaussian",
    "truncation": 5,
    "correlation": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "q": [1.5, 2.10, 2.25],
  "fit_window": [100.0, 1000.0],
  "output": "fig3-renyi-gaussian"
})json"},
      {"fig3-renyi-chisq", R"json({
  "scenario": "renyi_curve",
  "model": {
    "marginal": {"family": "gamma", "shape": 5.0, "scale": 1.0},
    "truncation": 5,
    "correlation": {"family": "squared",
                    "base": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "q": [2.0, 2.05, 2.10],
  "fit_window": [100.0, 1000.0],
  "output": "fig3-renyi-chisq"
})json"},
      {"fig3-renyi-gaussian-indicator", R"json({
  "scenario": "renyi_curve",
  "model": {
    "marginal": "gaussian",
    "truncation": 5,
    "correlation": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "q": [1.5, 1.75, 1.95],
  "nu": 0.95,
  "fit_window": [100.0, 1000.0],
  "output": "fig3-renyi-gaussian-indicator"
})json"},
      {"fig3-renyi-chisq-indicator", R"json({
  "scenario": "renyi_curve",
  "model": {
    "marginal": {"family": "gamma", "shape": 5.0, "scale": 1.0},
    "truncation": 5,
    "correlation": {"family": "squared",
                    "base": {"family": "power_law_bg", "beta": 0.2, "gamma_exp": 0.2, "dim": 2}}
  },
  "distances": {"kind": "range", "start": 1, "stop": 1000, "step": 1},
  "q": [1.75, 1.85, 1.95],
  "nu": 0.95,
  "fit_window": [100.0, 1000.0],
  "output": "fig3-renyi-chisq-indicator"
})json"},
      {"fig4-st-field", R"json({
  "scenario": "field_sim",
  "st": {
    "gneiting": {"sigma2": 1.0, "c": 1.0, "gamma_phi": 0.2, "delta": 0.35,
                 "a": 1.0, "alpha": 0.3, "beta_psi": 0.7, "dim": 2},
    "space_grid": [10, 10],
    "spacing": 1.0,
    "time_points": 50,
    "time_spacing": 1.0
  },
  "seed": 20260814,
  "output": "fig4-st-field"
})json"},
      {"fig5-mi-surfaces", R"json({
  "scenario": "st_surface",
  "model": {"marginal": "gaussian", "truncation": 10},
  "st": {
    "gneiting": {"sigma2": 1.0, "c": 1.0, "gamma_phi": 0.2, "delta": 0.35,
                 "a": 1.0, "alpha": 0.3, "beta_psi": 0.7, "dim": 2},
    "t_end": 1.0,
    "basis_count": 20,
    "mesh": {"start": 0.59, "stop": 0.99, "count": 41},
    "surface_distances": [1.0, 2.0, 4.0]
  },
  "output": "fig5-mi-surfaces"
})json"}};
  return kPresets;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::preset_table()) out.push_back(name);
  return out;
}

inline const std::string* preset_config_text(const std::string& name) {
  for (const auto& [n, text] : detail::preset_table())
    if (n == name) return &text;
  return nullptr;
}

inline RunManifest run_preset(const std::string& name,
                              const std::string& root_override = "") {
  const std::string* text = preset_config_text(name);
  if (!text) throw std::invalid_argument("unknown preset '" + name + "'");
  return run_config_text(*text, root_override);
}

/// `run` argument resolution: an existing file wins, otherwise a preset name.
inline RunManifest run(const std::string& path_or_preset,
                       const std::string& root_override = "") {
  if (std::filesystem::exists(path_or_preset))
    return run_config_file(path_or_preset, root_override);
  if (preset_config_text(path_or_preset))
    return run_preset(path_or_preset, root_override);
  throw std::runtime_error("no config file or preset named '" +
                           path_or_preset + "'");
}

/// Single-line machine-readable error record for the CLI.
inline std::string error_record_json(
    const std::string& error,
    const std::vector<std::string>& violations = {}) {
  nlohmann::json j;
  j["error"] = error;
  if (!violations.empty()) j["violations"] = violations;
  return j.dump();
}

}  // namespace lsrf
