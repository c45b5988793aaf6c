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

// Flux-pulse synthesis: calibrated coupling curve g_+(Phi_+) along a fixed
// Phi_-, exact inversion of a two-tone coupling target into a flux
// trajectory, the induced third-level coupling and power spectra.
//
// Couplings in MHz, tone frequencies in GHz, times in ns.

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tcqsim/io.hpp"
#include "tcqsim/pchip.hpp"
#include "tcqsim/tcq_model.hpp"

namespace tcq {

/// g_+(t) = g_s + g_d [cos(2 pi omega_g t - phase) + cos(2 pi omega_g' t + phase)].
///
/// phase = 0 yields the sigma^y gate axis, phase = pi/2 the sigma^x axis.
struct CouplingSchedule {
  double g_s = 0.0;            // MHz
  double g_d = 0.0;            // MHz
  double omega_g = 0.0;        // GHz
  double omega_g_prime = 0.0;  // GHz
  double delta = 0.0;          // MHz
  double g_minus_s = 0.0;      // MHz
  double phase = 0.0;          // rad

  /// Tones detuned by delta below the blue (omega_r + omega_+) and red
  /// (omega_r - omega_+) sidebands.
  static CouplingSchedule detuned_sidebands(double g_s, double g_d, double delta_mhz, double omega_r,
                                            double omega_plus, double g_minus_s = 0.0, double phase = 0.0) {
    const double d = delta_mhz * 1e-3;
    return {g_s, g_d, omega_r + omega_plus - d, omega_r - omega_plus - d, delta_mhz, g_minus_s, phase};
  }

  double target(double t) const {
    return g_s + g_d * (std::cos(kTwoPi * omega_g * t - phase) + std::cos(kTwoPi * omega_g_prime * t + phase));
  }

  double max_tone() const { return std::max(std::abs(omega_g), std::abs(omega_g_prime)); }
  double lowest() const { return g_s - 2.0 * std::abs(g_d); }
  double highest() const { return g_s + 2.0 * std::abs(g_d); }
};

/// (g_max + g_min)/2 and (g_max - g_min)/4: the static part and tone amplitude
/// that sweep the full range [g_min, g_max] when both tones align.
inline std::pair<double, double> full_range_amplitudes(double g_min, double g_max) {
  return {0.5 * (g_max + g_min), 0.25 * (g_max - g_min)};
}

/// Complex Fourier component: contributes amplitude * exp(i 2 pi freq t).
struct FourierComponent {
  double freq = 0.0;  // GHz
  cplx amplitude;     // MHz
};

/// Exact two-sided decomposition of the schedule's g_+(t).
inline std::vector<FourierComponent> plus_components(const CouplingSchedule& s) {
  std::vector<FourierComponent> c;
  if (s.g_s != 0.0) c.push_back({0.0, s.g_s});
  if (s.g_d != 0.0) {
    const cplx e = std::polar(0.5 * s.g_d, s.phase);
    c.push_back({s.omega_g, std::conj(e)});
    c.push_back({-s.omega_g, e});
    c.push_back({s.omega_g_prime, e});
    c.push_back({-s.omega_g_prime, std::conj(e)});
  }
  return c;
}

/// Tabulated g_+(Phi_+) and g_-(Phi_+) at fixed Phi_-, monotone-cubic interpolated.
class CouplingCurve {
 public:
  struct Sample {
    double phi_plus;
    double g_plus;   // MHz
    double g_minus;  // MHz
  };

  CouplingCurve() = default;

  /// `n01`, `n02`: matrix elements at increasing `phi_plus`; couplings are
  /// beta_scale times these.
  CouplingCurve(double phi_minus, std::vector<double> phi_plus, std::vector<double> n01, std::vector<double> n02,
                double beta_scale)
      : phi_minus_(phi_minus), phi_(std::move(phi_plus)), n01_(std::move(n01)), n02_(std::move(n02)), beta_(beta_scale) {
    if (phi_.size() != n01_.size() || phi_.size() != n02_.size())
      throw ShapeError("CouplingCurve: sample columns differ in length");
    if (!(beta_ > 0.0)) throw RangeError("CouplingCurve: beta_scale must be positive");
    check_monotone();
    rebuild();
  }

  double phi_minus() const { return phi_minus_; }
  double beta_scale() const { return beta_; }
  double phi_min() const { return phi_.front(); }
  double phi_max() const { return phi_.back(); }
  std::size_t size() const { return phi_.size(); }

  Sample sample(std::size_t i) const { return {phi_.at(i), beta_ * n01_.at(i), beta_ * n02_.at(i)}; }

  double g_plus(double phi) const { return beta_ * n01_fit_(phi); }
  double g_minus(double phi) const { return beta_ * n02_fit_(phi); }

  /// Realizable range of g_+.
  double g_max() const { return beta_ * *std::max_element(n01_.begin(), n01_.end()); }
  double g_min() const { return beta_ * *std::min_element(n01_.begin(), n01_.end()); }

  /// Same samples with beta_scale chosen so that max g_+ equals `g_max_target`.
  CouplingCurve recalibrated(double g_max_target) const {
    if (!(g_max_target > 0.0)) throw RangeError("CouplingCurve: target maximum coupling must be positive");
    CouplingCurve c = *this;
    c.beta_ = g_max_target / *std::max_element(n01_.begin(), n01_.end());
    return c;
  }

  /// Phi_+ with g_plus(Phi_+) = g. g_+ decreases with Phi_+; targets within
  /// 1e-9 g_max outside the range are clamped to the nearest end.
  double invert(double g) const {
    const double gmax = g_max();
    const double slack = 1e-9 * gmax;
    if (g > gmax + slack || g < g_min() - slack)
      throw RangeError("CouplingCurve::invert: " + std::to_string(g) + " MHz outside [" + std::to_string(g_min()) +
                       ", " + std::to_string(gmax) + "]");
    double lo = phi_.front(), hi = phi_.back();
    if (g >= g_plus(lo)) return lo;
    if (g <= g_plus(hi)) return hi;
    // Bisection keeps g_plus(lo) > g > g_plus(hi).
    for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon(); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g_plus(mid) > g)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  void check_monotone() const {
    if (phi_.size() < 2) throw SynthesisError("CouplingCurve: need at least two samples");
    for (std::size_t i = 1; i < phi_.size(); ++i)
      if (!(n01_[i] < n01_[i - 1]))
        throw SynthesisError("CouplingCurve: g_plus is not strictly decreasing on Phi_+ in [" +
                             format_shortest(phi_[i - 1]) + ", " + format_shortest(phi_[i]) + "]");
  }

  void rebuild() {
    n01_fit_ = MonotoneCubic(phi_, n01_);
    n02_fit_ = MonotoneCubic(phi_, n02_);
  }

  double phi_minus_ = 0.0;
  std::vector<double> phi_, n01_, n02_;
  double beta_ = 1.0;
  MonotoneCubic n01_fit_, n02_fit_;
};

/// Samples Phi_+ uniformly on [0, phi_plus_max] at fixed `phi_minus` and scales
/// so that the largest g_+ equals `g_max_target`. g_- follows the second
/// single-excitation mode (see TcqSpectrum::n0_mode2).
inline CouplingCurve tabulate_coupling_curve(const TcqParams& params, double phi_minus, std::size_t n_samples,
                                             double g_max_target, double phi_plus_max = 0.4) {
  if (n_samples < 64) throw RangeError("tabulate_coupling_curve: need at least 64 samples");
  if (!(g_max_target > 0.0)) throw RangeError("tabulate_coupling_curve: g_max_target must be positive");
  const auto spectra = scan_segment(params, phi_minus, 0.0, phi_plus_max, n_samples);
  std::vector<double> phi, n01, n02;
  for (const auto& s : spectra) {
    phi.push_back(s.flux.phi_plus);
    n01.push_back(s.n01);
    n02.push_back(s.n0_mode2);
  }
  const double peak = *std::max_element(n01.begin(), n01.end());
  return CouplingCurve(phi_minus, std::move(phi), std::move(n01), std::move(n02), g_max_target / peak);
}

struct FluxTrajectory {
  std::vector<double> t;  // ns
  std::vector<double> phi_plus;
  double phi_minus = 0.0;
  double dt = 0.0;

  std::size_t size() const { return t.size(); }
};

/// Largest step <= 1/(8 f_max) that divides t_span into whole samples.
inline double trajectory_step(const CouplingSchedule& schedule, double t_span) {
  if (!(t_span > 0.0)) throw RangeError("trajectory_step: t_span must be positive");
  const double f = schedule.max_tone();
  if (f == 0.0) return t_span / 4096.0;
  return t_span / std::ceil(8.0 * f * t_span - 1e-9);
}

/// Flux samples at t_k = k dt, k = 0 .. t_span/dt - 1 (periodic window).
inline FluxTrajectory invert_coupling(const CouplingCurve& curve, const CouplingSchedule& schedule, double t_span,
                                      double dt) {
  if (!(t_span > 0.0) || !(dt > 0.0)) throw RangeError("invert_coupling: t_span and dt must be positive");
  const double steps = t_span / dt;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (n == 0 || std::abs(steps - static_cast<double>(n)) > 1e-9 * steps)
    throw RangeError("invert_coupling: t_span must be an integer multiple of dt");
  if (8.0 * schedule.max_tone() * dt > 1.0 + 1e-9)
    throw RangeError("invert_coupling: dt " + format_shortest(dt) + " ns is coarser than 1/(8 f_max)");
  FluxTrajectory traj;
  traj.phi_minus = curve.phi_minus();
  traj.dt = dt;
  traj.t.reserve(n);
  traj.phi_plus.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double g = schedule.target(t);
    const double slack = 1e-9 * curve.g_max();
    if (g > curve.g_max() + slack || g < curve.g_min() - slack)
      throw RangeError("invert_coupling: target g_+ = " + format_shortest(g) + " MHz at t = " + format_shortest(t) +
                       " ns is outside the realizable range [" + format_shortest(curve.g_min()) + ", " +
                       format_shortest(curve.g_max()) + "]");
    traj.t.push_back(t);
    traj.phi_plus.push_back(curve.invert(g));
  }
  return traj;
}

struct InducedCouplings {
  std::vector<double> g_plus;   // MHz
  std::vector<double> g_minus;  // MHz
  double g_plus_static = 0.0;   // time average
  double g_minus_static = 0.0;
};

inline InducedCouplings induced_couplings(const CouplingCurve& curve, const FluxTrajectory& traj) {
  InducedCouplings out;
  out.g_plus.reserve(traj.size());
  out.g_minus.reserve(traj.size());
  for (double p : traj.phi_plus) {
    out.g_plus.push_back(curve.g_plus(p));
    out.g_minus.push_back(curve.g_minus(p));
  }
  if (!traj.phi_plus.empty()) {
    const auto n = static_cast<double>(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
      out.g_plus_static += out.g_plus[k] / n;
      out.g_minus_static += out.g_minus[k] / n;
    }
  }
  return out;
}

struct PowerSpectrum {
  std::vector<double> freqs;  // GHz, 0 .. Nyquist
  std::vector<double> power;  // one-sided; sums to the mean square of the signal
  double resolution = 0.0;    // GHz per bin
};

namespace detail {

// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// X_k = sum_j x_j exp(-2 pi i jk/N) for k = 0 .. N/2.
inline std::vector<cplx> real_dft(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x.begin(), x.end());
  std::vector<cplx> out(x.size() / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  if (!plan) throw NumericalError("FFTW plan creation failed for length " + std::to_string(n));
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace detail

/// Rectangular-window periodogram. The window should span a whole number of
/// periods of every tone for leakage-free peaks.
inline PowerSpectrum power_spectrum(std::span<const double> signal, double dt) {
  if (signal.size() < 4096) throw RangeError("power_spectrum: need at least 4096 samples");
  if (!(dt > 0.0)) throw RangeError("power_spectrum: dt must be positive");
  const auto x = detail::real_dft(signal);
  const auto n = static_cast<double>(signal.size());
  PowerSpectrum ps;
  ps.resolution = 1.0 / (n * dt);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const bool unpaired = k == 0 || (signal.size() % 2 == 0 && k == x.size() - 1);
    ps.freqs.push_back(static_cast<double>(k) * ps.resolution);
    ps.power.push_back((unpaired ? 1.0 : 2.0) * std::norm(x[k]) / (n * n));
  }
  return ps;
}

/// As above, taking explicit sample times that must be uniformly spaced.
inline PowerSpectrum power_spectrum(std::span<const double> t, std::span<const double> signal) {
  if (t.size() != signal.size()) throw ShapeError("power_spectrum: time and signal lengths differ");
  if (t.size() < 2) throw RangeError("power_spectrum: need at least 4096 samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-9 * std::max(dt, 1.0))
      throw RangeError("power_spectrum: non-uniform sampling at index " + std::to_string(k));
  return power_spectrum(signal, dt);
}

inline double mean_square(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

struct SpectralPeak {
  std::size_t bin;
  double freq;
  double power;
};

/// Local maxima away from DC with power >= max non-DC power * 10^(rel_db/10),
/// strongest first.
inline std::vector<SpectralPeak> spectral_peaks(const PowerSpectrum& ps, double rel_db) {
  std::vector<SpectralPeak> out;
  if (ps.power.size() < 2) return out;
  const double top = *std::max_element(ps.power.begin() + 1, ps.power.end());
  if (top <= 0.0) return out;
  const double floor = top * std::pow(10.0, rel_db / 10.0);
  for (std::size_t k = 1; k < ps.power.size(); ++k) {
    const double p = ps.power[k];
    const bool left = ps.power[k - 1] <= p || k == 1;
    const bool right = k + 1 == ps.power.size() || ps.power[k + 1] <= p;
    if (p >= floor && left && right) out.push_back({k, ps.freqs[k], p});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.power > b.power; });
  return out;
}

/// Total power in bins with |f - center| <= half_width.
inline double band_power(const PowerSpectrum& ps, double center, double half_width) {
  double s = 0.0;
  for (std::size_t k = 0; k < ps.freqs.size(); ++k)
    if (std::abs(ps.freqs[k] - center) <= half_width + 1e-12) s += ps.power[k];
  return s;
}

inline double to_db(double ratio) { return 10.0 * std::log10(std::max(ratio, 1e-30)); }

/// Two-sided components of a periodic real signal sampled over one period,
/// keeping |amplitude| >= prune (MHz). Frequencies in (-Nyquist, Nyquist].
inline std::vector<FourierComponent> fourier_components(std::span<const double> signal, double dt, double prune) {
  if (signal.empty()) return {};
  const auto x = detail::real_dft(signal);
  const auto n = static_cast<double>(signal.size());
  const double df = 1.0 / (n * dt);
  std::vector<FourierComponent> out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const cplx c = x[k] / n;
    if (std::abs(c) < prune) continue;
    out.push_back({static_cast<double>(k) * df, c});
    const bool paired = k != 0 && !(signal.size() % 2 == 0 && k == x.size() - 1);
    if (paired) out.push_back({-static_cast<double>(k) * df, std::conj(c)});
  }
  return out;
}

/// Fourier components of g_-(t) induced by the schedule's flux pulse over one
/// detuning period (1/delta), with the overall magnitude fixed by g_minus_s:
/// the shape comes from the curve, the DC term is set to schedule.g_minus_s.
inline std::vector<FourierComponent> minus_components(const CouplingCurve& curve, const CouplingSchedule& schedule,
                                                      double prune = 0.5) {
  if (schedule.g_minus_s == 0.0) return {};
  if (schedule.delta == 0.0) throw SingularityError("minus_components: zero detuning has no finite period");
  const double window = 1e3 / std::abs(schedule.delta);
  const double dt = trajectory_step(schedule, window);
  const auto traj = invert_coupling(curve, schedule, window, dt);
  const auto g = induced_couplings(curve, traj);
  if (g.g_minus_static <= 0.0) throw SynthesisError("minus_components: induced g_- has no static part");
  std::vector<double> shape(g.g_minus);
  for (double& v : shape) v *= schedule.g_minus_s / g.g_minus_static;
  return fourier_components(shape, dt, prune);
}

struct ValidityReport {
  double stark_shift = 0.0;  // g_s^2 / Delta_+, MHz
  double xi = 0.0;           // g_d^2 / (4 delta), MHz
  double ratio = 0.0;        // Delta_+ / delta
  bool pass = false;
  bool warn = false;
};

/// Dominance of the detuned sidebands over the static Jaynes-Cummings term;
/// warns below Delta_+/delta = 16.
inline ValidityReport validity_check(const CouplingSchedule& schedule, double delta_plus) {
  if (schedule.delta == 0.0) throw SingularityError("validity_check: zero sideband detuning");
  if (delta_plus == 0.0) throw SingularityError("validity_check: zero qubit-resonator detuning");
  const double dp = delta_plus * 1e3;
  ValidityReport r;
  r.stark_shift = schedule.g_s * schedule.g_s / dp;
  r.xi = schedule.g_d * schedule.g_d / (4.0 * schedule.delta);
  r.ratio = dp / schedule.delta;
  r.pass = std::abs(r.ratio) >= 16.0;
  r.warn = !r.pass;
  return r;
}

inline void write_trajectory_csv(std::ostream& os, const FluxTrajectory& traj, const InducedCouplings& g) {
  if (g.g_plus.size() != traj.size() || g.g_minus.size() != traj.size())
    throw ShapeError("write_trajectory_csv: coupling series do not match the trajectory");
  os << "t_ns,phi_plus,g_plus_mhz,g_minus_mhz\n";
  for (std::size_t k = 0; k < traj.size(); ++k)
    os << format_shortest(traj.t[k]) << ',' << format_shortest(traj.phi_plus[k]) << ','
       << format_shortest(g.g_plus[k]) << ',' << format_shortest(g.g_minus[k]) << '\n';
}

/// Power in dB relative to the strongest bin.
inline void write_spectrum_db_csv(std::ostream& os, const PowerSpectrum& ps) {
  const double top = ps.power.empty() ? 0.0 : *std::max_element(ps.power.begin(), ps.power.end());
  os << "freq_ghz,power_db\n";
  for (std::size_t k = 0; k < ps.freqs.size(); ++k)
    os << format_shortest(ps.freqs[k]) << ',' << format_shortest(top > 0.0 ? to_db(ps.power[k] / top) : -300.0)
       << '\n';
}

}  // namespace tcq
