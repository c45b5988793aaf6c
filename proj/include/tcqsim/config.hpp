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

// JSON run configurations for the command-line front end. Every document
// carries "schema_version": 1; unknown keys are rejected and every failure is
// reported as a ConfigError naming the offending field path.

#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tcqsim/errors.hpp"
#include "tcqsim/ideal_gates.hpp"
#include "tcqsim/lindblad.hpp"
#include "tcqsim/pulse_synth.hpp"
#include "tcqsim/tcq_model.hpp"

namespace tcq {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

inline Json load_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", "cannot read config file " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

/// Typed access to one JSON object; `finish()` rejects keys never read.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a JSON object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(field(key), "missing required field");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(field(key), "expected a nonnegative integer");
    return v.get<std::size_t>();
  }
  std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : fallback; }

  std::string text(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  /// A number broadcast to n entries, or an array of exactly n numbers.
  std::vector<double> per_qubit(const std::string& key, std::size_t n) {
    const Json& v = raw(key);
    if (v.is_number()) return std::vector<double>(n, v.get<double>());
    auto out = numbers(key);
    if (out.size() != n)
      throw ConfigError(field(key), "expected " + std::to_string(n) + " values, got " + std::to_string(out.size()));
    return out;
  }

  ObjectReader object(const std::string& key) { return ObjectReader(raw(key), field(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

namespace detail {

inline void check_schema(ObjectReader& r) {
  const Json& v = r.raw("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw ConfigError("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
}

/// Runs a domain validator and re-labels its error with a field path.
template <class F>
void validated(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace detail

inline TcqParams read_device(ObjectReader r) {
  TcqParams p;
  p.ec_plus = r.number("ec_plus", p.ec_plus);
  p.ec_minus = r.number("ec_minus", p.ec_minus);
  p.e_int = r.number("e_int", p.e_int);
  p.ejmax_plus = r.number("ejmax_plus", p.ejmax_plus);
  p.ejmax_minus = r.number("ejmax_minus", p.ejmax_minus);
  p.ng_plus = r.number("ng_plus", p.ng_plus);
  p.ng_minus = r.number("ng_minus", p.ng_minus);
  p.charge_cutoff = static_cast<int>(r.count("charge_cutoff", static_cast<std::size_t>(p.charge_cutoff)));
  r.finish();
  detail::validated(r.field("device"), [&] { p.validate(); });
  return p;
}

struct CurveSpec {
  double phi_minus = 0.4;
  std::size_t n_samples = 129;
  double g_max = 80.0;  // MHz
  double phi_plus_max = 0.4;
};

inline CurveSpec read_curve(ObjectReader r) {
  CurveSpec c;
  c.phi_minus = r.number("phi_minus", c.phi_minus);
  c.n_samples = r.count("n_samples", c.n_samples);
  c.g_max = r.number("g_max_mhz", c.g_max);
  c.phi_plus_max = r.number("phi_plus_max", c.phi_plus_max);
  r.finish();
  if (c.n_samples < 64) throw ConfigError(r.field("n_samples"), "must be at least 64");
  if (!(c.g_max > 0.0)) throw ConfigError(r.field("g_max_mhz"), "must be positive");
  if (!(c.phi_minus >= 0.0 && c.phi_minus <= 0.5)) throw ConfigError(r.field("phi_minus"), "must lie in [0, 0.5]");
  if (!(c.phi_plus_max > 0.0 && c.phi_plus_max <= 0.5))
    throw ConfigError(r.field("phi_plus_max"), "must lie in (0, 0.5]");
  return c;
}

/// Schedule keys: g_s, g_d, delta (MHz), g_minus_s, phase; tone frequencies
/// either explicit (omega_g, omega_g_prime) or from omega_r and omega_plus.
inline CouplingSchedule read_schedule(ObjectReader r, std::optional<double> omega_r = std::nullopt,
                                      std::optional<double> omega_plus = std::nullopt) {
  const double g_s = r.number("g_s");
  const double g_d = r.number("g_d");
  const double delta = r.number("delta");
  const double g_minus_s = r.number("g_minus_s", 0.0);
  const double phase = r.number("phase", 0.0);
  CouplingSchedule s;
  if (r.has("omega_g") || r.has("omega_g_prime")) {
    s = {g_s, g_d, r.number("omega_g"), r.number("omega_g_prime"), delta, g_minus_s, phase};
  } else {
    const double wr = omega_r ? *omega_r : r.number("omega_r");
    const double wp = omega_plus ? *omega_plus : r.number("omega_plus");
    s = CouplingSchedule::detuned_sidebands(g_s, g_d, delta, wr, wp, g_minus_s, phase);
  }
  r.finish();
  if (g_s < 0.0) throw ConfigError(r.field("g_s"), "must be nonnegative");
  if (g_d < 0.0) throw ConfigError(r.field("g_d"), "must be nonnegative");
  if (g_minus_s < 0.0) throw ConfigError(r.field("g_minus_s"), "must be nonnegative");
  return s;
}

struct ScanSpectrumConfig {
  TcqParams device;
  FluxGrid grid;
};

inline ScanSpectrumConfig parse_scan_spectrum(const Json& j) {
  ObjectReader r(j, "");
  detail::check_schema(r);
  ScanSpectrumConfig c;
  c.device = read_device(r.object("device"));
  ObjectReader g = r.object("grid");
  c.grid.phi_plus_min = g.number("phi_plus_min", 0.0);
  c.grid.phi_plus_max = g.number("phi_plus_max", 0.5);
  c.grid.n_plus = g.count("n_plus", 64);
  c.grid.phi_minus_min = g.number("phi_minus_min", 0.0);
  c.grid.phi_minus_max = g.number("phi_minus_max", 0.5);
  c.grid.n_minus = g.count("n_minus", 64);
  g.finish();
  r.finish();
  if (c.grid.n_plus < 16) throw ConfigError("grid.n_plus", "must be at least 16");
  if (c.grid.n_minus < 16) throw ConfigError("grid.n_minus", "must be at least 16");
  auto in_range = [](double lo, double hi) { return lo >= 0.0 && hi <= 0.5 && lo < hi; };
  if (!in_range(c.grid.phi_plus_min, c.grid.phi_plus_max))
    throw ConfigError("grid.phi_plus_min", "flux range must satisfy 0 <= min < max <= 0.5");
  if (!in_range(c.grid.phi_minus_min, c.grid.phi_minus_max))
    throw ConfigError("grid.phi_minus_min", "flux range must satisfy 0 <= min < max <= 0.5");
  return c;
}

struct SynthesizeConfig {
  TcqParams device;
  CurveSpec curve;
  CouplingSchedule schedule;
  double omega_r = 10.0;     // GHz, for the validity report
  double omega_plus = 4.5;   // GHz
  double omega_minus = 7.0;  // GHz, for the leakage bands
  double duration = 100.0;   // ns
  std::optional<double> dt;  // ns
};

inline SynthesizeConfig parse_synthesize(const Json& j) {
  ObjectReader r(j, "");
  detail::check_schema(r);
  SynthesizeConfig c;
  c.device = r.has("device") ? read_device(r.object("device")) : TcqParams{};
  c.curve = r.has("curve") ? read_curve(r.object("curve")) : CurveSpec{};
  c.omega_r = r.number("omega_r", c.omega_r);
  c.omega_plus = r.number("omega_plus", c.omega_plus);
  c.omega_minus = r.number("omega_minus", c.omega_minus);
  c.schedule = read_schedule(r.object("schedule"), c.omega_r, c.omega_plus);
  c.duration = r.number("duration_ns", c.duration);
  if (r.has("dt_ns")) c.dt = r.number("dt_ns");
  r.finish();
  if (!(c.duration > 0.0)) throw ConfigError("duration_ns", "must be positive");
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt_ns", "must be positive");
  if (!(c.omega_r > 0.0)) throw ConfigError("omega_r", "must be positive");
  if (c.schedule.delta == 0.0) throw ConfigError("schedule.delta", "must be nonzero");
  return c;
}

/// How g_-(t) enters an evolution: "synthesized" from the device model and
/// the flux pulse, "static" (DC term only) or "none".
struct MinusCouplingSpec {
  std::string source = "synthesized";
  double prune = 0.5;  // MHz
  TcqParams device;
  CurveSpec curve;
};

struct EvolveConfig {
  SystemConfig system;
  MinusCouplingSpec minus;
  double t_end = 45.0;  // ns
  IntegrateOptions options;
};

inline EvolveConfig parse_evolve(const Json& j) {
  ObjectReader r(j, "");
  detail::check_schema(r);
  EvolveConfig c;
  SystemConfig& s = c.system;
  s.n_qubits = r.count("n_qubits");
  if (s.n_qubits == 0 || s.n_qubits > kMaxDenseQubits)
    throw ConfigError("n_qubits", "must be between 1 and " + std::to_string(kMaxDenseQubits));
  s.omega_r = r.number("omega_r");
  s.omega_plus = r.per_qubit("omega_plus", s.n_qubits);
  s.omega_minus = r.per_qubit("omega_minus", s.n_qubits);
  s.photon_cutoff = r.count("photon_cutoff", s.photon_cutoff);
  s.kappa = r.number("kappa", 0.0);
  s.gamma_phi = r.number("gamma_phi", 0.0);
  s.gamma_minus = r.number("gamma_minus", 0.0);
  if (r.has("frame_cutoff")) {
    const Json& fc = r.raw("frame_cutoff");
    if (fc.is_string() && fc.get<std::string>() == "full")
      s.frame_cutoff.reset();
    else if (fc.is_number())
      s.frame_cutoff = fc.get<double>();
    else
      throw ConfigError("frame_cutoff", "expected a frequency in GHz or \"full\"");
  }

  // One schedule per qubit; qubits outside active_qubits get g_+ = 0.
  std::vector<CouplingSchedule> schedules;
  if (r.has("schedules")) {
    const Json& arr = r.raw("schedules");
    if (!arr.is_array() || arr.size() != s.n_qubits)
      throw ConfigError("schedules", "expected an array of " + std::to_string(s.n_qubits) + " schedules");
    for (std::size_t q = 0; q < s.n_qubits; ++q)
      schedules.push_back(
          read_schedule(ObjectReader(arr[q], "schedules[" + std::to_string(q) + "]"), s.omega_r, s.omega_plus[q]));
  } else {
    const Json& one = r.raw("schedule");
    for (std::size_t q = 0; q < s.n_qubits; ++q)
      schedules.push_back(read_schedule(ObjectReader(one, "schedule"), s.omega_r, s.omega_plus[q]));
  }
  if (r.has("active_qubits")) {
    std::vector<bool> active(s.n_qubits, false);
    for (double q : r.numbers("active_qubits")) {
      if (q < 0 || q >= static_cast<double>(s.n_qubits) || q != std::floor(q))
        throw ConfigError("active_qubits", "qubit index out of range");
      active[static_cast<std::size_t>(q)] = true;
    }
    for (std::size_t q = 0; q < s.n_qubits; ++q)
      if (!active[q]) schedules[q].g_s = schedules[q].g_d = 0.0;
  }
  s.schedules = std::move(schedules);

  if (r.has("minus_coupling")) {
    ObjectReader m = r.object("minus_coupling");
    c.minus.source = m.text("source", c.minus.source);
    c.minus.prune = m.number("prune_mhz", c.minus.prune);
    if (m.has("device")) c.minus.device = read_device(m.object("device"));
    if (m.has("curve")) c.minus.curve = read_curve(m.object("curve"));
    m.finish();
    if (c.minus.source != "synthesized" && c.minus.source != "static" && c.minus.source != "none")
      throw ConfigError("minus_coupling.source", "expected \"synthesized\", \"static\" or \"none\"");
    if (c.minus.prune < 0.0) throw ConfigError("minus_coupling.prune_mhz", "must be nonnegative");
  }

  c.t_end = r.number("t_end", c.t_end);
  c.options.sample_dt = r.number("sample_dt", c.options.sample_dt);
  c.options.step_fraction = r.number("step_fraction", c.options.step_fraction);
  if (r.has("max_dt")) c.options.max_dt = r.number("max_dt");
  if (r.has("snapshot_times")) c.options.snapshot_times = r.numbers("snapshot_times");
  r.finish();
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end", "must be nonnegative");
  if (!(c.options.sample_dt > 0.0)) throw ConfigError("sample_dt", "must be positive");
  if (!(c.options.step_fraction > 0.0)) throw ConfigError("step_fraction", "must be positive");
  if (c.options.max_dt && !(*c.options.max_dt > 0.0)) throw ConfigError("max_dt", "must be positive");
  s.minus_coupling.assign(s.n_qubits, {});
  s.validate();
  return c;
}

/// Fills system.minus_coupling according to the spec (synthesis may throw
/// SynthesisError or RangeError).
inline void resolve_minus_coupling(EvolveConfig& c) {
  auto& s = c.system;
  std::optional<CouplingCurve> curve;
  for (std::size_t q = 0; q < s.n_qubits; ++q) {
    const auto& sched = s.schedules[q];
    if (c.minus.source == "none" || sched.g_minus_s == 0.0) {
      s.minus_coupling[q].clear();
    } else if (c.minus.source == "static") {
      s.minus_coupling[q] = {{0.0, sched.g_minus_s}};
    } else {
      if (!curve)
        curve = tabulate_coupling_curve(c.minus.device, c.minus.curve.phi_minus, c.minus.curve.n_samples,
                                        c.minus.curve.g_max, c.minus.curve.phi_plus_max);
      s.minus_coupling[q] = minus_components(*curve, sched, c.minus.prune);
    }
  }
}

struct CompileConfig {
  Axis axis = Axis::y;
  std::size_t n_qubits = 4;
  double theta = 0.0;
};

inline CompileConfig parse_compile(const Json& j) {
  ObjectReader r(j, "");
  detail::check_schema(r);
  CompileConfig c;
  const std::string axis = r.text("axis");
  if (axis == "x")
    c.axis = Axis::x;
  else if (axis == "y")
    c.axis = Axis::y;
  else
    throw ConfigError("axis", "expected \"x\" or \"y\"");
  c.n_qubits = r.count("n_qubits");
  c.theta = r.number("theta");
  r.finish();
  if (c.n_qubits < 2) throw ConfigError("n_qubits", "must be at least 2");
  if (c.n_qubits > kMaxDenseQubits) throw ConfigError("n_qubits", "must not exceed " + std::to_string(kMaxDenseQubits));
  return c;
}

}  // namespace tcq
