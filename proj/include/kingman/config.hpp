//
// Copyright 2026 The kingman-condensation Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Run configuration: JSON document, schema version 1.
//
//   {
//     "schema": 1,
//     "model": {
//       "environments": [ {"beta": 0.1, "q": [[0.5, 1.0]]}, ... ],
//       "p0": [[1.0, 1.0]]
//     },
//     "params": { ... }            // optional, see Params
//   }
//
// A measure is either a list of [location, mass] pairs or a grid block
//   {"grid": {"density": {"family": "uniform" | "power" | "beta", ...},
//             "support": [lo, hi], "cells": 1024}}
// expanded by the midpoint discretizer at load time.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kingman/error.hpp"
#include "kingman/measure.hpp"
#include "kingman/model.hpp"
#include "kingman/recursion.hpp"

namespace kingman {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct Params {
  std::optional<std::size_t> horizon;   // default 2000 k
  std::vector<Interval> windows;        // empty: regime default
  std::vector<double> z_grid;           // empty: 101 points on [0, 1/eta0]
  std::vector<double> genfun_z;         // absolute z values
  std::vector<double> genfun_fractions{0.25, 0.5, 0.9};  // of z_c, used when genfun_z is empty
  std::size_t N = 400;
  std::vector<std::string> selection;   // one entry per environment
  std::uint64_t seed = 1;
  double tv_tolerance = 1e-8;
  double atom_tolerance = 1e-6;
};

struct RunConfig {
  ModelInstance model;
  Params params;
  Json canonical;  // normalized document; the hash is taken over its dump

  std::size_t horizon() const { return params.horizon.value_or(2000 * model.k()); }
};

namespace config_detail {

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing field");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

inline std::size_t count(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::function<double(double)> density_family(const Json& d, const std::string& path) {
  const Json& fam = require(d, "family", path);
  if (!fam.is_string()) throw ConfigError(path + ".family", "expected a string");
  const std::string name = fam.get<std::string>();
  if (name == "uniform") return [](double) { return 1.0; };
  if (name == "power") {
    const double e = number(require(d, "exponent", path), path + ".exponent");
    if (!(e > -1.0)) throw ConfigError(path + ".exponent", "must exceed -1");
    return [e](double x) { return std::pow(x, e); };
  }
  if (name == "beta") {
    const double a = number(require(d, "a", path), path + ".a");
    const double b = number(require(d, "b", path), path + ".b");
    if (!(a > 0.0 && b > 0.0)) throw ConfigError(path, "beta parameters must be positive");
    return [a, b](double x) { return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0); };
  }
  throw ConfigError(path + ".family", "unknown density family '" + name + "'");
}

inline Measure measure(const Json& j, const std::string& path) {
  if (j.is_object()) {
    const Json& g = require(j, "grid", path);
    const std::string gp = path + ".grid";
    auto f = density_family(require(g, "density", gp), gp + ".density");
    Interval support{0.0, 1.0};
    if (g.contains("support")) {
      const auto s = numbers(g["support"], gp + ".support");
      if (s.size() != 2) throw ConfigError(gp + ".support", "expected [lo, hi]");
      support = {s[0], s[1]};
    }
    int cells = 1024;
    if (g.contains("cells")) cells = static_cast<int>(count(g["cells"], gp + ".cells"));
    try {
      return discretize_density(f, support, cells);
    } catch (const ModelError& e) {
      throw ConfigError(gp, e.what());
    }
  }
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty list of [location, mass] pairs");
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ap = path + "[" + std::to_string(i) + "]";
    const auto pair = numbers(j[i], ap);
    if (pair.size() != 2) throw ConfigError(ap, "expected [location, mass]");
    atoms.push_back({pair[0], pair[1]});
  }
  try {
    return Measure(std::move(atoms), MeasureKind::probability);
  } catch (const ModelError& e) {
    throw ConfigError(path, e.what());
  }
}

inline Json measure_literal(const Measure& m) {
  Json out = Json::array();
  for (const Atom& a : m.atoms()) out.push_back({a.location, a.mass});
  return out;
}

}  // namespace config_detail

// Parses "identity", "constant:c" or "power:e".
inline SelectionMap parse_selection(const std::string& text, const std::string& path) {
  if (text == "identity") return SelectionMap::identity();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(path, "bad number in selection '" + text + "'");
    }
    try {
      if (head == "power") return SelectionMap::power(v);
      if (head == "constant") return SelectionMap::constant(v);
    } catch (const ModelError& e) {
      throw ConfigError(path, e.what());
    }
  }
  throw ConfigError(path, "unknown selection '" + text + "'");
}

inline SelectionCycle selection_cycle(const RunConfig& cfg) {
  const std::size_t k = cfg.model.k();
  const auto& specs = cfg.params.selection;
  if (specs.empty()) throw ConfigError("params.selection", "missing field");
  if (specs.size() != k && specs.size() != 1) {
    throw ConfigError("params.selection", "expected 1 or k entries");
  }
  SelectionCycle out;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t src = specs.size() == 1 ? 0 : i;
    out.push_back(parse_selection(specs[src], "params.selection[" + std::to_string(src) + "]"));
  }
  return out;
}

inline Params parse_params(const Json& j) {
  Params p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("params", "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = it.key();
    const std::string path = "params." + key;
    const Json& v = it.value();
    if (key == "horizon") {
      p.horizon = config_detail::count(v, path);
    } else if (key == "windows") {
      if (!v.is_array()) throw ConfigError(path, "expected an array of [lo, hi]");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string wp = path + "[" + std::to_string(i) + "]";
        const auto w = config_detail::numbers(v[i], wp);
        if (w.size() != 2 || !Interval{w[0], w[1]}.well_formed()) {
          throw ConfigError(wp, "expected [lo, hi] with 0 <= lo <= hi <= 1");
        }
        p.windows.push_back({w[0], w[1]});
      }
    } else if (key == "z_grid") {
      if (v.is_object()) {
        const double a = config_detail::number(config_detail::require(v, "start", path), path + ".start");
        const double b = config_detail::number(config_detail::require(v, "stop", path), path + ".stop");
        const double h = config_detail::number(config_detail::require(v, "step", path), path + ".step");
        if (!(h > 0.0) || b < a || a < 0.0) throw ConfigError(path, "need 0 <= start <= stop and step > 0");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) p.z_grid.push_back(a + static_cast<double>(i) * h);
      } else {
        p.z_grid = config_detail::numbers(v, path);
      }
      for (double z : p.z_grid)
        if (z < 0.0) throw ConfigError(path, "z must be non-negative");
    } else if (key == "genfun_z") {
      p.genfun_z = config_detail::numbers(v, path);
    } else if (key == "genfun_fractions") {
      p.genfun_fractions = config_detail::numbers(v, path);
      for (double f : p.genfun_fractions)
        if (!(f >= 0.0 && f < 1.0)) throw ConfigError(path, "fractions must lie in [0,1)");
    } else if (key == "N") {
      p.N = config_detail::count(v, path);
    } else if (key == "selection") {
      if (!v.is_array()) throw ConfigError(path, "expected an array of strings");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a string");
        p.selection.push_back(v[i].get<std::string>());
      }
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError(path, "expected a non-negative integer");
      }
      p.seed = v.get<std::uint64_t>();
    } else if (key == "tv_tolerance") {
      p.tv_tolerance = config_detail::number(v, path);
    } else if (key == "atom_tolerance") {
      p.atom_tolerance = config_detail::number(v, path);
    } else {
      throw ConfigError(path, "unknown field");
    }
  }
  return p;
}

inline Json params_to_json(const Params& p) {
  Json j = Json::object();
  if (p.horizon) j["horizon"] = *p.horizon;
  if (!p.windows.empty()) {
    j["windows"] = Json::array();
    for (const Interval& w : p.windows) j["windows"].push_back({w.lo, w.hi});
  }
  if (!p.z_grid.empty()) j["z_grid"] = p.z_grid;
  if (!p.genfun_z.empty()) j["genfun_z"] = p.genfun_z;
  j["genfun_fractions"] = p.genfun_fractions;
  j["N"] = p.N;
  if (!p.selection.empty()) j["selection"] = p.selection;
  j["seed"] = p.seed;
  j["tv_tolerance"] = p.tv_tolerance;
  j["atom_tolerance"] = p.atom_tolerance;
  return j;
}

inline Json model_to_json(const ModelInstance& m) {
  Json envs = Json::array();
  for (const Environment& e : m.cycle().envs()) {
    envs.push_back({{"beta", e.beta}, {"q", config_detail::measure_literal(e.q)}});
  }
  return {{"environments", envs}, {"p0", config_detail::measure_literal(m.p0())}};
}

// Canonical document: atoms expanded, every parameter explicit. Loading it
// again yields the same configuration.
inline Json to_json(const RunConfig& cfg) {
  return {{"schema", kSchemaVersion}, {"model", model_to_json(cfg.model)}, {"params", params_to_json(cfg.params)}};
}

inline ModelInstance parse_model(const Json& j) {
  using namespace config_detail;
  const Json& envs = require(j, "environments", "model");
  if (!envs.is_array() || envs.empty()) throw ConfigError("model.environments", "expected a non-empty array");
  std::vector<Environment> list;
  for (std::size_t i = 0; i < envs.size(); ++i) {
    const std::string ep = "model.environments[" + std::to_string(i) + "]";
    const double beta = number(require(envs[i], "beta", ep), ep + ".beta");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError(ep + ".beta", "beta must lie in (0,1)");
    Measure q = measure(require(envs[i], "q", ep), ep + ".q");
    if (!(support_max(q) > 0.0)) throw ConfigError(ep + ".q", "eta_q must be positive");
    for (auto it = envs[i].begin(); it != envs[i].end(); ++it) {
      if (it.key() != "beta" && it.key() != "q") throw ConfigError(ep + "." + it.key(), "unknown field");
    }
    list.push_back({beta, std::move(q)});
  }
  Measure p0 = measure(require(j, "p0", "model"), "model.p0");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "environments" && it.key() != "p0") throw ConfigError("model." + it.key(), "unknown field");
  }
  try {
    return ModelInstance(EnvironmentCycle(std::move(list)), std::move(p0));
  } catch (const ConfigError&) {
    throw;
  } catch (const ModelError& e) {
    throw ConfigError("model", e.what());
  }
}

inline RunConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("$", "expected a JSON object");
  const Json& schema = config_detail::require(j, "schema", "$");
  if (!schema.is_number_integer() || schema.get<int>() != kSchemaVersion) {
    throw ConfigError("schema", "unsupported schema version (expected 1)");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "schema" && it.key() != "model" && it.key() != "params") {
      throw ConfigError(it.key(), "unknown field");
    }
  }
  RunConfig cfg{parse_model(config_detail::require(j, "model", "$")),
                parse_params(j.contains("params") ? j["params"] : Json()), Json()};
  cfg.canonical = to_json(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

// Refreshes the canonical document after parameters were overridden.
inline void refresh(RunConfig& cfg) { cfg.canonical = to_json(cfg); }

// FNV-1a (64 bit) of the canonical dump, as 16 hex digits.
inline std::string config_hash(const Json& canonical) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const RunConfig& cfg) { return config_hash(cfg.canonical); }

}  // namespace kingman
