#pragma once

// Run configuration: JSON schema, defaults, validation, and the resolved
// form echoed into manifests.
//
//   {
//     "domain":   {"shape": "disk"}
//               | {"shape": "fourier", "a0": 1, "cos": [...], "sin": [...]}
//               | {"shape": "ellipse", "a": 1, "b": 0.7},
//     "eps": 0.1, "eps_list": [0.1, 0.05], "k": 1,
//     "mesh":      {"n_theta": 128, "n_s": 64},
//     "minimizer": {"max_iterations": 20000, "tolerance": 1e-6, "armijo": 1e-4,
//                   "init": "vortex" | "random", "centre": [0, 0], "seed": 0},
//     "sweep":     {"cells_per_eps": 4, "min_radial": 64, "warm_start": false, "jobs": 1},
//     "collar":    {"n1": 256, "n2": 32, "samples": 10000},
//     "output_dir": "out"
//   }
//
// Only "domain" is required. Unknown keys are errors.

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gldiv/diagnostics.hpp"
#include "gldiv/error.hpp"
#include "gldiv/geometry.hpp"
#include "gldiv/minimizer.hpp"

namespace gldiv {

struct DomainSpec {
  std::string shape = "disk";
  double a0 = 1.0;
  std::vector<double> cos_coeffs, sin_coeffs;
  double a = 1.0, b = 1.0;  // ellipse semi-axes

  RadialProfile profile() const {
    if (shape == "ellipse") return EllipseRadius{a, b};
    if (shape == "fourier") return FourierRadius{a0, cos_coeffs, sin_coeffs};
    return unit_disk();
  }
};

struct RunConfig {
  DomainSpec domain;
  double eps = 0.1;
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  double k = 1.0;
  int n_theta = 128;
  int n_s = 64;
  MinimizeOptions minimizer;
  std::string init = "vortex";
  Vec2 centre{0.0, 0.0};
  double cells_per_eps = 4.0;
  int min_radial = 64;
  bool warm_start = false;
  int jobs = 1;
  int collar_n1 = 256;
  int collar_n2 = 32;
  int lh_samples = 10000;
  std::string output_dir = "out";

  SweepOptions sweep_options() const {
    SweepOptions o;
    o.k = k;
    o.mesh = MeshPolicy{n_theta, min_radial, cells_per_eps};
    o.minimize = minimizer;
    o.jobs = jobs;
    o.warm_start = warm_start;
    o.vortex_centre = centre;
    return o;
  }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path,
                           const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(path + "/" + key, "unknown key");
  }
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  return j;
}

inline double get_number(const json& obj, const std::string& key, const std::string& path,
                         double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path + "/" + key, "expected a number");
  return v.get<double>();
}

inline int get_int(const json& obj, const std::string& key, const std::string& path, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "/" + key, "expected an integer");
  return v.get<int>();
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& path,
                     bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(path + "/" + key, "expected a boolean");
  return v.get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path,
                              const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> get_numbers(const json& obj, const std::string& key,
                                       const std::string& path, std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(path + "/" + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(path + "/" + key + "/" + std::to_string(i), "expected a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline DomainSpec parse_domain(const json& j) {
  require_object(j, "/domain");
  DomainSpec d;
  d.shape = get_string(j, "shape", "/domain", "");
  if (d.shape.empty()) throw ConfigError("/domain/shape", "missing required key");
  if (d.shape == "disk") {
    reject_unknown(j, "/domain", {"shape"});
  } else if (d.shape == "fourier") {
    reject_unknown(j, "/domain", {"shape", "a0", "cos", "sin"});
    d.a0 = get_number(j, "a0", "/domain", 1.0);
    d.cos_coeffs = get_numbers(j, "cos", "/domain", {});
    d.sin_coeffs = get_numbers(j, "sin", "/domain", {});
  } else if (d.shape == "ellipse") {
    reject_unknown(j, "/domain", {"shape", "a", "b"});
    d.a = get_number(j, "a", "/domain", 1.0);
    d.b = get_number(j, "b", "/domain", 1.0);
  } else {
    throw ConfigError("/domain/shape", "expected \"disk\", \"fourier\" or \"ellipse\"");
  }
  // Let the curve constructor judge star-shapedness and smoothness.
  try {
    BoundaryCurve curve(d.profile());
  } catch (const ConstructionError& e) {
    throw ConfigError("/domain", e.what());
  }
  return d;
}

}  // namespace detail

/// Validate a parsed document into a RunConfig.
inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::get_number, detail::get_int;
  detail::require_object(doc, "");
  detail::reject_unknown(doc, "", {"domain", "eps", "eps_list", "k", "mesh", "minimizer", "sweep",
                                   "collar", "output_dir"});
  if (!doc.contains("domain")) throw ConfigError("/domain", "missing required key");
  RunConfig c;
  c.domain = detail::parse_domain(doc.at("domain"));

  c.eps = get_number(doc, "eps", "", c.eps);
  if (!(c.eps > 0.0)) throw ConfigError("/eps", "must be positive");
  c.eps_list = detail::get_numbers(doc, "eps_list", "", c.eps_list);
  if (c.eps_list.empty()) throw ConfigError("/eps_list", "must not be empty");
  for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
    const std::string p = "/eps_list/" + std::to_string(i);
    if (!(c.eps_list[i] > 0.0)) throw ConfigError(p, "must be positive");
    if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1])) throw ConfigError(p, "must be strictly decreasing");
  }
  c.k = get_number(doc, "k", "", c.k);
  if (!(c.k > 0.0)) throw ConfigError("/k", "must be positive");
  c.output_dir = detail::get_string(doc, "output_dir", "", c.output_dir);

  if (doc.contains("mesh")) {
    const auto& m = detail::require_object(doc.at("mesh"), "/mesh");
    detail::reject_unknown(m, "/mesh", {"n_theta", "n_s"});
    c.n_theta = get_int(m, "n_theta", "/mesh", c.n_theta);
    c.n_s = get_int(m, "n_s", "/mesh", c.n_s);
  }
  if (c.n_theta < InteriorMesh::kMinTheta) throw ConfigError("/mesh/n_theta", "must be at least 16");
  if (c.n_s < InteriorMesh::kMinRadial) throw ConfigError("/mesh/n_s", "must be at least 8");

  if (doc.contains("minimizer")) {
    const auto& m = detail::require_object(doc.at("minimizer"), "/minimizer");
    detail::reject_unknown(m, "/minimizer",
                           {"max_iterations", "tolerance", "armijo", "init", "centre", "seed"});
    c.minimizer.max_iterations = get_int(m, "max_iterations", "/minimizer", c.minimizer.max_iterations);
    c.minimizer.tolerance = get_number(m, "tolerance", "/minimizer", c.minimizer.tolerance);
    c.minimizer.armijo = get_number(m, "armijo", "/minimizer", c.minimizer.armijo);
    c.init = detail::get_string(m, "init", "/minimizer", c.init);
    const auto centre = detail::get_numbers(m, "centre", "/minimizer", {0.0, 0.0});
    if (centre.size() != 2) throw ConfigError("/minimizer/centre", "expected two numbers");
    c.centre = Vec2(centre[0], centre[1]);
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_unsigned()) {
        throw ConfigError("/minimizer/seed", "expected a non-negative integer");
      }
      c.minimizer.seed = m.at("seed").get<std::uint64_t>();
    }
  }
  if (c.minimizer.max_iterations < 0) throw ConfigError("/minimizer/max_iterations", "must be non-negative");
  if (!(c.minimizer.tolerance > 0.0)) throw ConfigError("/minimizer/tolerance", "must be positive");
  if (!(c.minimizer.armijo > 0.0 && c.minimizer.armijo < 1.0)) {
    throw ConfigError("/minimizer/armijo", "must lie in (0, 1)");
  }
  if (c.init != "vortex" && c.init != "random") {
    throw ConfigError("/minimizer/init", "expected \"vortex\" or \"random\"");
  }

  if (doc.contains("sweep")) {
    const auto& s = detail::require_object(doc.at("sweep"), "/sweep");
    detail::reject_unknown(s, "/sweep", {"cells_per_eps", "min_radial", "warm_start", "jobs"});
    c.cells_per_eps = get_number(s, "cells_per_eps", "/sweep", c.cells_per_eps);
    c.min_radial = get_int(s, "min_radial", "/sweep", c.min_radial);
    c.warm_start = detail::get_bool(s, "warm_start", "/sweep", c.warm_start);
    c.jobs = get_int(s, "jobs", "/sweep", c.jobs);
  }
  if (!(c.cells_per_eps > 0.0)) throw ConfigError("/sweep/cells_per_eps", "must be positive");
  if (c.min_radial < InteriorMesh::kMinRadial) throw ConfigError("/sweep/min_radial", "must be at least 8");
  if (c.jobs < 1) throw ConfigError("/sweep/jobs", "must be at least 1");

  if (doc.contains("collar")) {
    const auto& s = detail::require_object(doc.at("collar"), "/collar");
    detail::reject_unknown(s, "/collar", {"n1", "n2", "samples"});
    c.collar_n1 = get_int(s, "n1", "/collar", c.collar_n1);
    c.collar_n2 = get_int(s, "n2", "/collar", c.collar_n2);
    c.lh_samples = get_int(s, "samples", "/collar", c.lh_samples);
  }
  if (c.collar_n1 < 8) throw ConfigError("/collar/n1", "must be at least 8");
  if (c.collar_n2 < 6 || c.collar_n2 % 2 != 0) throw ConfigError("/collar/n2", "must be even and at least 6");
  if (c.lh_samples < 1) throw ConfigError("/collar/samples", "must be positive");
  return c;
}

/// Parse JSON text; an empty (or blank) document counts as {}.
inline RunConfig parse_config_text(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return parse_config(nlohmann::json::object());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// The fully resolved configuration (defaults filled in).
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json d = {{"shape", c.domain.shape}};
  if (c.domain.shape == "fourier") {
    d["a0"] = c.domain.a0;
    d["cos"] = c.domain.cos_coeffs;
    d["sin"] = c.domain.sin_coeffs;
  } else if (c.domain.shape == "ellipse") {
    d["a"] = c.domain.a;
    d["b"] = c.domain.b;
  }
  return {
      {"domain", d},
      {"eps", c.eps},
      {"eps_list", c.eps_list},
      {"k", c.k},
      {"mesh", {{"n_theta", c.n_theta}, {"n_s", c.n_s}}},
      {"minimizer",
       {{"max_iterations", c.minimizer.max_iterations},
        {"tolerance", c.minimizer.tolerance},
        {"armijo", c.minimizer.armijo},
        {"init", c.init},
        {"centre", {c.centre.x(), c.centre.y()}},
        {"seed", c.minimizer.seed}}},
      {"sweep",
       {{"cells_per_eps", c.cells_per_eps},
        {"min_radial", c.min_radial},
        {"warm_start", c.warm_start},
        {"jobs", c.jobs}}},
      {"collar", {{"n1", c.collar_n1}, {"n2", c.collar_n2}, {"samples", c.lh_samples}}},
      {"output_dir", c.output_dir},
  };
}

}  // namespace gldiv
