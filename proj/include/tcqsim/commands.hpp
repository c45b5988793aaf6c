// Copyright 2026 The tcqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Subcommands of the tcqsim front end. Each reads one JSON config, writes its
// artifacts plus manifest.json into the output directory and returns a
// process exit code:
//
//   0 success, 1 other failure, 2 config error, 3 synthesis error,
//   4 integration error (partial CSV kept, ending in an error marker row).

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "tcqsim/config.hpp"
#include "tcqsim/io.hpp"

#ifndef TCQSIM_VERSION
#define TCQSIM_VERSION "0.0.0"
#endif

namespace tcq {

enum ExitCode : int { kExitOk = 0, kExitOther = 1, kExitConfig = 2, kExitSynthesis = 3, kExitIntegration = 4 };

struct CommandContext {
  std::filesystem::path config;
  std::filesystem::path out;
  std::size_t threads = default_thread_count();
  std::ostream* log = nullptr;
};

/// Error raised inside a command that maps to a specific exit code.
class CommandError : public Error {
 public:
  CommandError(int code, const std::string& what) : Error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

namespace detail {

class RunRecord {
 public:
  RunRecord(std::string command, const CommandContext& ctx)
      : command_(std::move(command)), ctx_(ctx), start_(std::chrono::steady_clock::now()) {}

  std::filesystem::path file(const std::string& name) {
    outputs_.push_back(name);
    return ctx_.out / name;
  }

  void write_manifest(const std::string& status, const Json& extra = Json::object()) const {
    Json m;
    m["command"] = command_;
    m["config"] = ctx_.config.string();
    m["output_dir"] = ctx_.out.string();
    m["seed"] = nullptr;  // no command draws random numbers
    m["version"] = TCQSIM_VERSION;
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["outputs"] = outputs_;
    m["status"] = status;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    auto os = open_output(ctx_.out / "manifest.json");
    os << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  const CommandContext& ctx_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

inline void prepare_output(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error("cannot create output directory " + out.string() + ": " + ec.message());
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

inline void note(const CommandContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << '\n';
}

}  // namespace detail

inline int cmd_scan_spectrum(const CommandContext& ctx) {
  const auto cfg = parse_scan_spectrum(load_json_file(ctx.config));
  detail::prepare_output(ctx.out);
  detail::RunRecord rec("scan-spectrum", ctx);
  const auto spectra = scan_flux_plane(cfg.device, cfg.grid, ctx.threads);
  {
    auto os = open_output(rec.file("spectrum_grid.csv"));
    write_spectrum_csv(os, spectra);
  }
  rec.write_manifest("ok", {{"rows", spectra.size()}});
  detail::note(ctx, "wrote " + std::to_string(spectra.size()) + " grid points");
  return kExitOk;
}

inline Json validity_json(const ValidityReport& v) {
  return {{"stark_shift_mhz", v.stark_shift}, {"xi_mhz", v.xi}, {"ratio", v.ratio}, {"pass", v.pass},
          {"warn", v.warn}};
}

inline int cmd_synthesize(const CommandContext& ctx) {
  const auto cfg = parse_synthesize(load_json_file(ctx.config));
  CouplingCurve curve;
  FluxTrajectory traj;
  double dt = 0.0;
  try {
    curve = tabulate_coupling_curve(cfg.device, cfg.curve.phi_minus, cfg.curve.n_samples, cfg.curve.g_max,
                                    cfg.curve.phi_plus_max);
    dt = cfg.dt ? *cfg.dt : trajectory_step(cfg.schedule, cfg.duration);
    traj = invert_coupling(curve, cfg.schedule, cfg.duration, dt);
  } catch (const SynthesisError& e) {
    throw CommandError(kExitSynthesis, e.what());
  } catch (const RangeError& e) {
    throw CommandError(kExitSynthesis, e.what());
  }
  const auto g = induced_couplings(curve, traj);
  const auto validity = validity_check(cfg.schedule, cfg.omega_r - cfg.omega_plus);

  detail::prepare_output(ctx.out);
  detail::RunRecord rec("synthesize", ctx);
  {
    auto os = open_output(rec.file("trajectory.csv"));
    write_trajectory_csv(os, traj, g);
  }
  {
    auto os = open_output(rec.file("couplings.csv"));
    os << "t_ns,g_plus_target_mhz,g_plus_mhz,g_minus_mhz\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
      os << format_shortest(traj.t[k]) << ',' << format_shortest(cfg.schedule.target(traj.t[k])) << ','
         << format_shortest(g.g_plus[k]) << ',' << format_shortest(g.g_minus[k]) << '\n';
  }
  Json spectra = Json::object();
  if (traj.size() >= 4096) {
    const auto sp = power_spectrum(g.g_plus, dt);
    const auto sm = power_spectrum(g.g_minus, dt);
    const auto sf = power_spectrum(traj.phi_plus, dt);
    for (const auto& [name, ps] : {std::pair{"spectrum_g_plus.csv", &sp}, std::pair{"spectrum_g_minus.csv", &sm},
                                   std::pair{"spectrum_phi_plus.csv", &sf}}) {
      auto os = open_output(rec.file(name));
      write_spectrum_db_csv(os, *ps);
    }
    Json peaks = Json::array();
    for (const auto& p : spectral_peaks(sp, -20.0)) peaks.push_back({{"freq_ghz", p.freq}, {"power_db_dc", to_db(p.power / sp.power[0])}});
    spectra["g_plus_peaks"] = peaks;
    const double lo = cfg.omega_r - cfg.omega_minus, hi = cfg.omega_r + cfg.omega_minus;
    spectra["g_minus_band_db"] = {{"low_ghz", lo},
                                  {"low_db", to_db(band_power(sm, std::abs(lo), 0.2) / sm.power[0])},
                                  {"high_ghz", hi},
                                  {"high_db", to_db(band_power(sm, hi, 0.2) / sm.power[0])}};
    spectra["resolution_ghz"] = sp.resolution;
  } else {
    spectra["note"] = "spectra need at least 4096 samples; lengthen duration_ns";
  }
  Json report = validity_json(validity);
  report["g_plus_static_mhz"] = g.g_plus_static;
  report["g_minus_static_mhz"] = g.g_minus_static;
  report["beta_scale_mhz"] = curve.beta_scale();
  report["samples"] = traj.size();
  report["dt_ns"] = dt;
  report["spectra"] = spectra;
  detail::write_json(rec.file("validity.json"), report);
  rec.write_manifest("ok");
  detail::note(ctx, "synthesized " + std::to_string(traj.size()) + " samples, ratio " + format_sig(validity.ratio, 4) +
                        (validity.warn ? " (warn)" : ""));
  return kExitOk;
}

inline int cmd_evolve(const CommandContext& ctx) {
  auto cfg = parse_evolve(load_json_file(ctx.config));
  try {
    resolve_minus_coupling(cfg);
  } catch (const SynthesisError& e) {
    throw CommandError(kExitSynthesis, e.what());
  } catch (const RangeError& e) {
    throw CommandError(kExitSynthesis, e.what());
  }
  // Surfaces cutoff/config problems before anything is written.
  detail::validated("frame_cutoff", [&] { (void)build_hamiltonian_terms(cfg.system); });

  detail::prepare_output(ctx.out);
  detail::RunRecord rec("evolve", ctx);
  const auto csv_path = rec.file("evolution.csv");
  try {
    const auto result = integrate(cfg.system, cfg.t_end, cfg.options);
    {
      auto os = open_output(csv_path);
      write_evolution_csv(os, result);
    }
    for (const auto& [t, rho] : result.snapshots) {
      auto os = open_output(rec.file("snapshot_t" + format_shortest(t) + ".csv"));
      os << "row,col,re,im\n";
      for (Eigen::Index i = 0; i < rho.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.matrix.cols(); ++j)
          if (rho.matrix(i, j) != cplx{0.0, 0.0})
            os << i << ',' << j << ',' << format_shortest(rho.matrix(i, j).real()) << ','
               << format_shortest(rho.matrix(i, j).imag()) << '\n';
    }
    rec.write_manifest("ok", {{"steps", result.steps}, {"dt_ns", result.dt}});
    detail::note(ctx, "integrated " + std::to_string(result.steps) + " RK4 steps");
  } catch (const IntegrationError& e) {
    {
      auto os = open_output(csv_path);
      write_evolution_csv(os, e.partial());
      os << "#error," << e.what() << '\n';
    }
    rec.write_manifest("integration_error", {{"error", e.what()}});
    throw CommandError(kExitIntegration, e.what());
  }
  return kExitOk;
}

inline Json report_json(const VerificationReport& r, const Prediction& p) {
  Json j = {{"prediction", p.pauli.str()}, {"case", p.case_label}, {"skipped", r.skipped}};
  if (r.skipped) {
    j["note"] = r.note;
  } else {
    j["norm"] = r.norm;
    j["phase"] = r.phase;
    j["pass"] = r.pass;
    if (!r.note.empty()) j["note"] = r.note;
  }
  return j;
}

inline Json sequence_json(const GateSequence& seq) {
  Json arr = Json::array();
  for (const auto& g : seq.gates) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, CollectiveMS>) {
            std::vector<std::size_t> q = x.qubits.empty() ? detail::all_qubits(seq.n_qubits) : x.qubits;
            arr.push_back({{"gate", "collective_ms"},
                           {"params", {{"phi", x.phi}, {"axis", std::string(1, axis_letter(x.axis))}}},
                           {"qubits", q}});
          } else {
            arr.push_back({{"gate", "local_z"}, {"params", {{"theta", x.theta}}}, {"qubits", {x.qubit}}});
          }
        },
        g);
  }
  return arr;
}

inline int cmd_compile(const CommandContext& ctx) {
  const auto cfg = parse_compile(load_json_file(ctx.config));
  const auto compiled = compile_stabilizer(cfg.axis, cfg.n_qubits, cfg.theta);
  const auto table = verify_sequence(compiled.sequence, compiled.table.pauli, cfg.theta, compiled.table.case_label);
  const auto derived =
      verify_sequence(compiled.sequence, compiled.derived.pauli, cfg.theta, compiled.derived.case_label);

  detail::prepare_output(ctx.out);
  detail::RunRecord rec("compile", ctx);
  detail::write_json(rec.file("sequence.json"), sequence_json(compiled.sequence));
  Json report = {{"n_qubits", cfg.n_qubits},
                 {"axis", std::string(1, axis_letter(cfg.axis))},
                 {"theta", cfg.theta},
                 {"table", report_json(table, compiled.table)},
                 {"derived", report_json(derived, compiled.derived)}};
  report["pass"] = table.skipped ? Json(nullptr) : Json(table.pass);
  if (table.skipped) report["note"] = table.note;
  detail::write_json(rec.file("verification.json"), report);
  rec.write_manifest("ok");
  detail::note(ctx, table.skipped ? table.note
                                  : std::string("table prediction ") + (table.pass ? "verified" : "FAILED") +
                                        ", norm " + format_sig(table.norm, 3));
  return kExitOk;
}

/// Runs one subcommand and converts failures into exit codes, with the
/// message on `err`.
inline int run_command(const std::string& name, const CommandContext& ctx, std::ostream& err) {
  try {
    if (name == "scan-spectrum") return cmd_scan_spectrum(ctx);
    if (name == "synthesize") return cmd_synthesize(ctx);
    if (name == "evolve") return cmd_evolve(ctx);
    if (name == "compile") return cmd_compile(ctx);
    err << "unknown command " << name << '\n';
    return kExitOther;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CommandError& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const SynthesisError& e) {
    err << "synthesis error: " << e.what() << '\n';
    return kExitSynthesis;
  } catch (const IntegrationError& e) {
    err << "integration error: " << e.what() << '\n';
    return kExitIntegration;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOther;
  }
}

}  // namespace tcq
