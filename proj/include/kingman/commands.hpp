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

// Subcommand implementations shared by the CLI and the tests. Each command
// writes its files under an output directory and returns an exit code.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kingman/config.hpp"
#include "kingman/error.hpp"
#include "kingman/genfun.hpp"
#include "kingman/limits.hpp"
#include "kingman/spectral.hpp"

namespace kingman {

struct CommandResult {
  ExitCode code = ExitCode::ok;
  std::vector<std::filesystem::path> files;
  std::string summary;
};

namespace cmd_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json meta(const RunConfig& cfg, const std::string& command) {
  return {{"artifact", kArtifactName},
          {"version", kArtifactVersion},
          {"command", command},
          {"config_hash", config_hash(cfg)},
          {"report_schema", 1}};
}

// JSON has no infinities; they are written as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json vec(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(finite_or_null(v(i)));
  return out;
}

inline Json vec(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(finite_or_null(x));
  return out;
}

inline Json checks_json(const std::vector<Check>& checks) {
  Json out = Json::object();
  for (const Check& c : checks) {
    out[c.name] = {{"value", finite_or_null(c.value)}, {"tolerance", c.tolerance}, {"pass", c.pass}};
  }
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const RunConfig& cfg, const std::string& header)
      : out_(path) {
    if (!out_) throw ConfigError(path.string(), "cannot write file");
    out_ << "# " << kArtifactName << ' ' << kArtifactVersion << " config_hash=" << config_hash(cfg) << '\n';
    out_ << header << '\n';
  }
  template <typename... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ofstream out_;
};

inline std::filesystem::path prepare(const std::filesystem::path& dir, const char* file) {
  std::filesystem::create_directories(dir);
  return dir / file;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string(), "cannot write file");
  out << j.dump(2) << '\n';
}

inline Json measure_json(const Measure& m) {
  Json out = Json::array();
  for (const Atom& a : m.atoms()) out.push_back({a.location, a.mass});
  return out;
}

}  // namespace cmd_detail

// Critical solution, limit laws and all checks.
inline Json analyze_report(const RunConfig& cfg) {
  using namespace cmd_detail;
  const ModelInstance& m = cfg.model;
  CondensationReport rep = limit_laws(m);
  const CriticalSolution& sol = rep.critical;

  Json minors = nullptr;
  try {
    const MinorsSolution ms = minors_solution(m.cycle(), sol.z_c);
    const double du = (ms.U - sol.U).cwiseAbs().maxCoeff();
    const double da = std::abs(ms.alpha - sol.alpha);
    rep.checks.push_back(make_check("minors_agree", std::max(du, da), 1e-9));
    minors = {{"N", vec(ms.N)}, {"U", vec(ms.U)}, {"alpha", ms.alpha}};
  } catch (const NumericError& e) {
    rep.checks.push_back({"minors_agree", kInfinity, 1e-9, false});
    minors = {{"error", e.what()}};
  }
  const FixedPointGap fp = fixed_point_gap(m, rep);
  rep.checks.push_back(make_check("fixed_point_body_tv", fp.body_tv, 1e-9));
  rep.checks.push_back(make_check("fixed_point_atom", fp.atom, 1e-9));

  Json pis = Json::array();
  for (const Measure& pi : rep.pis) pis.push_back(measure_json(pi));
  Json j = meta(cfg, "analyze");
  j["k"] = m.k();
  j["eta0"] = m.eta0();
  j["eta_q"] = m.eta_q();
  j["z_c"] = sol.z_c;
  j["z_top"] = sol.z_top;
  j["rho_top"] = finite_or_null(sol.rho_top);
  j["regime"] = to_string(sol.regime);
  j["alpha"] = sol.alpha;
  j["U"] = vec(sol.U);
  j["wbar"] = vec(rep.wbars);
  j["z"] = vec(rep.z);
  j["zbar"] = rep.zbar;
  j["zbar_eta0"] = rep.zbar_check;
  j["atom_mass"] = vec(rep.atom_masses);
  j["pi"] = pis;
  j["minors"] = minors;
  j["checks"] = checks_json(rep.checks);
  bool pass = true;
  for (const Check& c : rep.checks) pass = pass && c.pass;
  j["pass"] = pass;
  return j;
}

inline CommandResult run_analyze(const RunConfig& cfg, const std::filesystem::path& out) {
  const Json j = analyze_report(cfg);
  const auto path = cmd_detail::prepare(out, "analyze.json");
  cmd_detail::write_json(path, j);
  CommandResult r;
  r.files.push_back(path);
  r.code = j["pass"].get<bool>() ? ExitCode::ok : ExitCode::property;
  r.summary = "regime " + j["regime"].get<std::string>() + ", z_c " + cmd_detail::num(j["z_c"].get<double>()) +
              ", alpha " + cmd_detail::num(j["alpha"].get<double>());
  return r;
}

inline CommandResult run_simulate(const RunConfig& cfg, const std::filesystem::path& out) {
  using namespace cmd_detail;
  const ModelInstance& m = cfg.model;
  std::optional<CondensationReport> lim;
  Interval window;
  try {
    lim = limit_laws(m);
    window = default_window(m, lim->critical.regime);
  } catch (const NumericError&) {
    lim.reset();
  }
  const auto path = prepare(out, "trajectory.csv");
  std::vector<double> tv(cfg.horizon() + 1, std::nan(""));
  IterateOptions opts;
  opts.geometric_snapshots = false;
  opts.tail_snapshots = 1;
  if (lim) {
    opts.observer = [&](std::size_t n, const Measure& p) {
      tv[n] = tv_distance(p, lim->pis[n % m.k()], window);
    };
  }
  const Trajectory traj = iterate(m, cfg.horizon(), opts);
  {
    CsvWriter csv(path, cfg, "n,i,w_n,log_W_n,mass_at_eta0,tv_to_limit_if_available");
    for (const TrajectoryStep& s : traj.steps()) {
      csv.row(s.n, s.residue, s.w, s.log_W, s.mass_at_eta0, std::isnan(tv[s.n]) ? std::string() : num(tv[s.n]));
    }
  }
  CommandResult r;
  r.files.push_back(path);
  r.summary = std::to_string(traj.horizon()) + " generations";
  if (traj.converged_at()) r.summary += ", tail converged at n=" + std::to_string(*traj.converged_at());
  return r;
}

inline CommandResult run_verify(const RunConfig& cfg, const std::filesystem::path& out) {
  using namespace cmd_detail;
  const ModelInstance& m = cfg.model;
  if (cfg.horizon() % m.k() != 0) throw ConfigError("params.horizon", "must be a multiple of k");
  const ConvergenceReport rep = verify_convergence(m, cfg.horizon(), cfg.params.windows);

  const auto csv_path = prepare(out, "verify.csv");
  {
    CsvWriter csv(csv_path, cfg, "n,i,window,lo,hi,tv,atom_gap_at_eta0");
    for (const GapSample& s : rep.samples) {
      for (std::size_t w = 0; w < rep.windows.size(); ++w) {
        csv.row(s.n, s.residue, w, rep.windows[w].lo, rep.windows[w].hi, s.tv[w], s.atom_gap);
      }
    }
  }
  const double worst = rep.max_final_tv();
  const bool pass = worst < cfg.params.tv_tolerance;
  Json j = meta(cfg, "verify");
  j["horizon"] = rep.horizon;
  j["regime"] = to_string(rep.limits.critical.regime);
  Json windows = Json::array();
  for (const Interval& w : rep.windows) windows.push_back({w.lo, w.hi});
  j["windows"] = windows;
  Json res = Json::array();
  for (const ResidueSummary& r : rep.residues) {
    Json mono = Json::array();
    for (bool b : r.monotone_tail) mono.push_back(b);
    res.push_back({{"residue", r.residue},
                   {"final_tv", vec(r.final_tv)},
                   {"monotone_tail", mono},
                   {"final_atom_gap", r.final_atom_gap},
                   {"simulated_wbar", r.simulated_wbar},
                   {"predicted_wbar", r.predicted_wbar}});
  }
  j["residues"] = res;
  j["converged_at"] = rep.converged_at ? Json(*rep.converged_at) : Json(nullptr);
  j["max_final_tv"] = worst;
  j["max_final_atom_gap"] = rep.max_final_atom_gap();
  j["tv_tolerance"] = cfg.params.tv_tolerance;
  j["pass"] = pass;
  const auto json_path = out / "verify.json";
  write_json(json_path, j);

  CommandResult r;
  r.files = {csv_path, json_path};
  r.code = pass ? ExitCode::ok : ExitCode::property;
  r.summary = std::string(pass ? "pass" : "fail") + ", max final TV " + num(worst);
  return r;
}

inline std::vector<double> sweep_grid(const RunConfig& cfg) {
  if (!cfg.params.z_grid.empty()) return cfg.params.z_grid;
  std::vector<double> z;
  const double top = 1.0 / cfg.model.eta0();
  for (int i = 0; i <= 100; ++i) z.push_back(top * i / 100.0);
  return z;
}

inline CommandResult run_sweep(const RunConfig& cfg, const std::filesystem::path& out) {
  const std::vector<double> zs = sweep_grid(cfg);
  const auto rows = spectral_sweep(cfg.model.cycle(), zs);
  const auto path = cmd_detail::prepare(out, "sweep.csv");
  {
    cmd_detail::CsvWriter csv(path, cfg, "z,rho,psi,gamma2_if_k2,min_rhoj,max_rhoj");
    for (const SweepRow& r : rows) {
      csv.row(r.z, r.rho, r.psi, cfg.model.k() == 2 ? cmd_detail::num(r.gamma2) : std::string(), r.min_rho_j,
              r.max_rho_j);
    }
  }
  CommandResult r;
  r.files.push_back(path);
  r.summary = std::to_string(rows.size()) + " probes";
  return r;
}

inline CommandResult run_genfun(const RunConfig& cfg, const std::filesystem::path& out) {
  const ModelInstance& m = cfg.model;
  const double z_c = find_zc(m).z_c;
  std::vector<double> zs = cfg.params.genfun_z;
  if (zs.empty()) {
    for (double f : cfg.params.genfun_fractions) zs.push_back(f * z_c);
  }
  const auto path = cmd_detail::prepare(out, "genfun.csv");
  bool within = true;
  {
    cmd_detail::CsvWriter csv(path, cfg, "z,residue,series_value,closed_value,tail_bound,recurrence_residual");
    for (double z : zs) {
      const WeightGenFun g = evaluate_genfun(m, z, cfg.params.N, z_c);
      for (std::size_t i = 0; i < m.k(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        csv.row(z, i, g.series.value(ii), g.closed(ii), g.series.tail_bound(ii), g.recurrence(ii));
        within = within && std::abs(g.series.value(ii) - g.closed(ii)) <= g.series.tail_bound(ii);
      }
    }
  }
  CommandResult r;
  r.files.push_back(path);
  r.code = within ? ExitCode::ok : ExitCode::property;
  r.summary = within ? "series within tail bound at every z" : "series outside tail bound";
  return r;
}

inline CommandResult run_conjecture(const RunConfig& cfg, const std::filesystem::path& out) {
  using namespace cmd_detail;
  const ModelInstance& m = cfg.model;
  const SelectionCycle s = selection_cycle(cfg);
  const ConjectureReport rep = conjecture_experiment(m, s, cfg.horizon());
  Json j = meta(cfg, "conjecture");
  j["label"] = rep.label;
  Json names = Json::array();
  bool identity = true;
  for (const SelectionMap& f : s) {
    names.push_back(f.name());
    identity = identity && f.is_identity();
  }
  j["selection"] = names;
  j["x0"] = rep.x0;
  j["s_at_x0"] = rep.s_at_x0;
  j["z_c"] = rep.critical.z_c;
  j["regime"] = to_string(rep.critical.regime);
  j["alpha"] = rep.critical.alpha;
  j["U"] = vec(rep.critical.U);
  Json pis = Json::array();
  for (const Measure& pi : rep.pis) pis.push_back(measure_json(pi));
  j["pi"] = pis;
  j["horizon"] = rep.horizon;
  j["final_tv_body"] = vec(rep.final_tv);
  j["final_atom_gap"] = vec(rep.final_atom_gap);
  j["simulated_mass_at_x0"] = vec(rep.simulated_mass_at_x0);
  if (identity) {
    const CondensationReport lim = limit_laws(m);
    double gap = 0.0;
    for (std::size_t i = 0; i < m.k(); ++i) gap = std::max(gap, tv_distance(lim.pis[i], rep.pis[i], {0.0, 1.0}));
    j["identity_reduction_tv"] = gap;
  }
  const auto path = prepare(out, "conjecture.json");
  write_json(path, j);
  CommandResult r;
  r.files.push_back(path);
  r.summary = "report written (" + rep.label + ")";
  return r;
}

}  // namespace kingman
