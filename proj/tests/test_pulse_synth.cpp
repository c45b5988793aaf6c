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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "tcqsim/pulse_synth.hpp"

using namespace tcq;

namespace {

const CouplingCurve& reference_curve() {
  static const CouplingCurve c = tabulate_coupling_curve(TcqParams{}, 0.4, 129, 80.0);
  return c;
}

CouplingSchedule reference_schedule() { return CouplingSchedule::detuned_sidebands(40.0, 20.0, 50.0, 10.0, 4.5, 60.0); }

struct Synth {
  FluxTrajectory traj;
  InducedCouplings g;
};

// Five detuning periods.
const Synth& reference_synth() {
  static const Synth s = [] {
    const auto sched = reference_schedule();
    const double span = 100.0;
    Synth out;
    out.traj = invert_coupling(reference_curve(), sched, span, trajectory_step(sched, span));
    out.g = induced_couplings(reference_curve(), out.traj);
    return out;
  }();
  return s;
}

}  // namespace

TEST(MonotoneCubic, MatchesReferenceValues) {
  const std::vector<double> x{0, 0.5, 1.5, 2, 3.5, 4}, y{3, 2.5, 1.0, 0.9, 0.2, 0.0};
  const MonotoneCubic f(x, y);
  // Reference: an independent PCHIP implementation with the same slope rules.
  const std::vector<std::pair<double, double>> ref{{0.1, 2.9134492753623187},
                                                   {0.7, 2.2041487689889996},
                                                   {1.9, 0.9219951807228917},
                                                   {2.6, 0.6581455696202532},
                                                   {3.9, 0.03852827004219414}};
  for (const auto& [q, v] : ref) EXPECT_NEAR(f(q), v, 1e-13) << "x = " << q;
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(f(x[i]), y[i]);
}

TEST(MonotoneCubic, ReproducesLinearData) {
  const std::vector<double> x{0, 0.3, 1, 1.1, 2}, y{1, 1.6, 3, 3.2, 5};
  const MonotoneCubic f(x, y);
  for (double q = 0.0; q <= 2.0; q += 0.01) EXPECT_NEAR(f(q), 1.0 + 2.0 * q, 1e-13);
}

TEST(MonotoneCubic, MonotoneWithoutOvershoot) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x{0.0}, y{10.0};
    for (int i = 0; i < 12; ++i) {
      x.push_back(x.back() + u(rng));
      y.push_back(y.back() - u(rng) * (i % 3 == 0 ? 0.01 : 1.0));
    }
    const MonotoneCubic f(x, y);
    double prev = f(x.front());
    for (double q = x.front(); q <= x.back(); q += (x.back() - x.front()) / 2000) {
      const double v = f(q);
      EXPECT_LE(v, prev + 1e-12);
      EXPECT_LE(v, y.front() + 1e-12);
      EXPECT_GE(v, y.back() - 1e-12);
      prev = v;
    }
  }
}

TEST(MonotoneCubic, Errors) {
  const std::vector<double> x{0, 1, 1}, y{0, 1, 2};
  EXPECT_THROW(MonotoneCubic(x, y), RangeError);
  const std::vector<double> x2{0, 1}, y2{0};
  EXPECT_THROW(MonotoneCubic(x2, y2), ShapeError);
  const std::vector<double> y3{0, 1};
  EXPECT_THROW(MonotoneCubic(x2, y3)(1.5), RangeError);
}

TEST(CouplingCurve, CalibratedToTargetMaximum) {
  const auto& c = reference_curve();
  EXPECT_NEAR(c.g_plus(0.0), 80.0, 1e-12);
  EXPECT_NEAR(c.g_max(), 80.0, 1e-12);
  EXPECT_LT(c.g_plus(0.4), 0.01 * c.g_plus(0.0));
  EXPECT_NEAR(c.beta_scale() * spectrum(TcqParams{}, {0.0, 0.4}).n01, 80.0, 1e-9);
}

TEST(CouplingCurve, FullRangeScheduleValues) {
  const auto [gs, gd] = full_range_amplitudes(0.0, 80.0);
  EXPECT_EQ(gs, 40.0);
  EXPECT_EQ(gd, 20.0);
  const auto [gs2, gd2] = full_range_amplitudes(reference_curve().g_min(), reference_curve().g_max());
  EXPECT_NEAR(gs2, 40.0, 1e-6);
  EXPECT_NEAR(gd2, 20.0, 1e-6);
}

TEST(CouplingCurve, LinearInCalibration) {
  const auto& c = reference_curve();
  const auto d = c.recalibrated(160.0);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(d.sample(i).g_plus, 2.0 * c.sample(i).g_plus, 1e-12);
  EXPECT_NEAR(d.g_plus(0.173), 2.0 * c.g_plus(0.173), 1e-12);
}

TEST(CouplingCurve, RecalibrationIsIdempotent) {
  const auto& c = reference_curve();
  EXPECT_NEAR(c.recalibrated(80.0).beta_scale() / c.beta_scale(), 1.0, 1e-12);
}

TEST(CouplingCurve, NonMonotoneNamesInterval) {
  try {
    CouplingCurve(0.4, {0.0, 0.1, 0.2, 0.3}, {0.4, 0.3, 0.35, 0.1}, {0, 0, 0, 0}, 1.0);
    FAIL() << "expected SynthesisError";
  } catch (const SynthesisError& e) {
    EXPECT_NE(std::string(e.what()).find("[0.1, 0.2]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(tabulate_coupling_curve(TcqParams{}, 0.4, 32, 80.0), RangeError);
}

TEST(CouplingCurve, InvertRoundTrip) {
  const auto& c = reference_curve();
  for (double g = 0.5; g < 80.0; g += 0.37) EXPECT_LT(std::abs(c.g_plus(c.invert(g)) - g), 1e-6 * c.g_max());
  EXPECT_EQ(c.invert(80.0), 0.0);
  EXPECT_THROW(c.invert(81.0), RangeError);
}

TEST(Schedule, DetunedSidebandTones) {
  const auto s = reference_schedule();
  EXPECT_NEAR(s.omega_g, 14.45, 1e-12);
  EXPECT_NEAR(s.omega_g_prime, 5.45, 1e-12);
  EXPECT_EQ(s.target(0.0), 80.0);
  EXPECT_EQ(s.lowest(), 0.0);
  EXPECT_EQ(s.highest(), 80.0);
}

TEST(Schedule, FourierComponentsReconstructSignal) {
  auto s = reference_schedule();
  s.phase = 0.3;
  const auto comps = plus_components(s);
  ASSERT_EQ(comps.size(), 5u);
  for (double t = 0.0; t < 3.0; t += 0.0137) {
    cplx sum = 0.0;
    for (const auto& c : comps) sum += c.amplitude * std::exp(kI * kTwoPi * c.freq * t);
    EXPECT_NEAR(sum.real(), s.target(t), 1e-10);
    EXPECT_NEAR(sum.imag(), 0.0, 1e-10);
  }
}

TEST(Invert, ConstantTargetGivesConstantFlux) {
  CouplingSchedule s;
  s.g_s = 33.0;
  const auto traj = invert_coupling(reference_curve(), s, 10.0, 0.01);
  for (double p : traj.phi_plus) EXPECT_EQ(p, traj.phi_plus.front());
  const auto g = induced_couplings(reference_curve(), traj);
  for (double v : g.g_minus) EXPECT_EQ(v, g.g_minus.front());
}

TEST(Invert, ReferenceScheduleRoundTrip) {
  const auto& [traj, g] = reference_synth();
  const auto s = reference_schedule();
  double err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) err = std::max(err, std::abs(g.g_plus[k] - s.target(traj.t[k])));
  EXPECT_LT(err, 1e-3 * 80.0);
  // The interpolant itself is checked against fresh diagonalizations.
  for (std::size_t k = 0; k < traj.size(); k += 97) {
    const double direct = reference_curve().beta_scale() * spectrum(TcqParams{}, {traj.phi_plus[k], 0.4}).n01;
    EXPECT_NEAR(direct, s.target(traj.t[k]), 1e-3 * 80.0) << "t = " << traj.t[k];
  }
  const auto [lo, hi] = std::minmax_element(traj.phi_plus.begin(), traj.phi_plus.end());
  EXPECT_GE(*lo, 0.0);
  EXPECT_LE(*hi, 0.4);
  EXPECT_LT(*lo, 1e-3);
  EXPECT_GT(*hi, 0.39);
}

TEST(Invert, StepRules) {
  const auto s = reference_schedule();
  const double dt = trajectory_step(s, 100.0);
  EXPECT_LE(dt, 1.0 / (8.0 * 14.45));
  EXPECT_NEAR(100.0 / dt, std::round(100.0 / dt), 1e-9);
  EXPECT_THROW(invert_coupling(reference_curve(), s, 100.0, 0.01), RangeError);   // too coarse
  EXPECT_THROW(invert_coupling(reference_curve(), s, 100.0, 0.003), RangeError);  // not a divisor
}

TEST(Invert, OutOfRangeReportsTime) {
  auto s = reference_schedule();
  s.g_s = 50.0;  // peaks at 90 MHz
  try {
    invert_coupling(reference_curve(), s, 20.0, trajectory_step(s, 20.0));
    FAIL() << "expected RangeError";
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("t = 0 ns"), std::string::npos) << e.what();
  }
}

TEST(Induced, StaticMinusCouplingMatchesDirectDiagonalization) {
  const auto s = reference_schedule();
  const double span = 20.0, dt = trajectory_step(s, span);
  const auto traj = invert_coupling(reference_curve(), s, span, dt);
  const auto g = induced_couplings(reference_curve(), traj);
  // Oracle: fresh diagonalization at every 3rd sample. A stride of 8 would
  // alias the 1/(8 dt) carrier onto DC.
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < traj.size(); k += 3, ++n)
    sum += reference_curve().beta_scale() * spectrum(TcqParams{}, {traj.phi_plus[k], 0.4}).n0_mode2;
  double sub = 0.0;
  for (std::size_t k = 0; k < traj.size(); k += 3) sub += g.g_minus[k];
  EXPECT_NEAR(sub / static_cast<double>(n), sum / static_cast<double>(n), 1e-3 * sum / static_cast<double>(n));
  EXPECT_NEAR(g.g_minus_static, sum / static_cast<double>(n), 0.01 * g.g_minus_static);
  EXPECT_NEAR(g.g_plus_static, 40.0, 1e-3);
}

TEST(PowerSpectrum, PureToneSingleBin) {
  const std::size_t n = 8000;
  const double dt = 0.01;  // 80 ns window, 5 GHz lands on bin 400
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::cos(kTwoPi * 5.0 * static_cast<double>(k) * dt);
  const auto ps = power_spectrum(x, dt);
  const auto peaks = spectral_peaks(ps, -40.0);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_NEAR(peaks[0].freq, 5.0, 1e-12);
  EXPECT_NEAR(peaks[0].power, 0.5, 1e-12);
  double outside = 0.0;
  for (std::size_t k = 0; k < ps.power.size(); ++k)
    if (k + 2 < peaks[0].bin || k > peaks[0].bin + 2) outside += ps.power[k];
  EXPECT_LT(to_db(outside / peaks[0].power), -40.0);
}

TEST(PowerSpectrum, ParsevalOnRandomSignals) {
  std::mt19937 rng(21);
  std::normal_distribution<double> nd(0.3, 1.0);
  for (std::size_t n : {4096u, 4097u, 5000u}) {
    std::vector<double> x(n);
    for (double& v : x) v = nd(rng);
    const auto ps = power_spectrum(x, 0.1);
    double sum = 0.0;
    for (double p : ps.power) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum / mean_square(x), 1.0, 1e-6);
  }
}

TEST(PowerSpectrum, InputChecks) {
  std::vector<double> x(100, 1.0);
  EXPECT_THROW(power_spectrum(x, 0.1), RangeError);
  std::vector<double> t(5000), y(5000, 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = 0.1 * static_cast<double>(k);
  EXPECT_NO_THROW(power_spectrum(t, y));
  t[2500] += 0.01;
  EXPECT_THROW(power_spectrum(t, y), RangeError);
}

TEST(PowerSpectrum, ReferencePlusCouplingPeaks) {
  const auto& [traj, g] = reference_synth();
  const auto ps = power_spectrum(g.g_plus, traj.dt);
  const auto peaks = spectral_peaks(ps, -20.0);
  ASSERT_EQ(peaks.size(), 2u);
  std::vector<double> f{peaks[0].freq, peaks[1].freq};
  std::sort(f.begin(), f.end());
  EXPECT_NEAR(f[0], 5.45, ps.resolution);
  EXPECT_NEAR(f[1], 14.45, ps.resolution);
}

TEST(PowerSpectrum, ReferenceMinusCouplingAvoidsThirdLevelSidebands) {
  const auto& [traj, g] = reference_synth();
  const auto ps = power_spectrum(g.g_minus, traj.dt);
  EXPECT_LT(to_db(band_power(ps, 3.0, 0.2) / ps.power[0]), -30.0);
  EXPECT_LT(to_db(band_power(ps, 17.0, 0.2) / ps.power[0]), -30.0);
}

TEST(PowerSpectrum, ZeroToneAmplitudeGivesDcOnly) {
  auto s = reference_schedule();
  s.g_d = 0.0;
  s.g_s = 25.0;
  const double dt = 1.0 / (8.0 * 14.45);
  const double span = dt * 5000;
  const auto traj = invert_coupling(reference_curve(), s, span, dt);
  const auto g = induced_couplings(reference_curve(), traj);
  const auto ps = power_spectrum(g.g_plus, dt);
  for (std::size_t k = 1; k < ps.power.size(); ++k) EXPECT_LT(ps.power[k], 1e-20 * ps.power[0]);
}

TEST(FourierComponents, MinusCouplingRescaledAndPruned) {
  const auto comps = minus_components(reference_curve(), reference_schedule());
  ASSERT_FALSE(comps.empty());
  EXPECT_EQ(comps.front().freq, 0.0);
  EXPECT_NEAR(comps.front().amplitude.real(), 60.0, 1e-9);
  for (const auto& c : comps) EXPECT_GE(std::abs(c.amplitude), 0.5);
  auto none = reference_schedule();
  none.g_minus_s = 0.0;
  EXPECT_TRUE(minus_components(reference_curve(), none).empty());
}

TEST(FourierComponents, ReconstructPeriodicSignal) {
  const std::size_t n = 64;
  const double dt = 1.0 / n;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    x[k] = 2.0 + 3.0 * std::cos(kTwoPi * 5.0 * t) - std::sin(kTwoPi * 9.0 * t);
  }
  const auto comps = fourier_components(x, dt, 1e-9);
  ASSERT_EQ(comps.size(), 5u);
  for (std::size_t k = 0; k < n; ++k) {
    cplx s = 0.0;
    for (const auto& c : comps) s += c.amplitude * std::exp(kI * kTwoPi * c.freq * static_cast<double>(k) * dt);
    EXPECT_NEAR(s.real(), x[k], 1e-12);
  }
}

TEST(Validity, ReferenceConfiguration) {
  const auto r = validity_check(reference_schedule(), 5.5);
  EXPECT_NEAR(r.ratio, 110.0, 1e-9);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.warn);
  EXPECT_NEAR(r.xi, 2.0, 1e-12);
  EXPECT_NEAR(r.stark_shift, 1600.0 / 5500.0, 1e-12);
}

TEST(Validity, ThresholdAndErrors) {
  auto s = reference_schedule();
  EXPECT_TRUE(validity_check(s, 0.5).warn);  // ratio 10
  s.delta = 0.0;
  EXPECT_THROW(validity_check(s, 5.5), SingularityError);
}

TEST(Csv, TrajectoryAndSpectrumFormats) {
  const auto& [traj, g] = reference_synth();
  std::ostringstream a;
  write_trajectory_csv(a, traj, g);
  const std::string text = a.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t_ns,phi_plus,g_plus_mhz,g_minus_mhz");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(traj.size() + 1));
  std::ostringstream b;
  write_spectrum_db_csv(b, power_spectrum(g.g_plus, traj.dt));
  std::istringstream is(b.str());
  std::string header, dc;
  std::getline(is, header);
  std::getline(is, dc);
  EXPECT_EQ(header, "freq_ghz,power_db");
  EXPECT_EQ(dc, "0,0");  // DC is the strongest bin
}
