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

#include "tcqsim/lindblad.hpp"

using namespace tcq;

namespace {

CouplingSchedule reference_schedule(double omega_r = 10.0) {
  return CouplingSchedule::detuned_sidebands(40.0, 20.0, 50.0, omega_r, 4.5, 60.0);
}

SystemConfig small_config() {
  auto c = SystemConfig::uniform(2, 10.0, 4.5, 7.0, reference_schedule(), {{0.0, 60.0}, {2.1, {3.0, -1.0}}, {-2.1, {3.0, 1.0}}});
  c.photon_cutoff = 4;
  c.kappa = 0.1;
  c.gamma_phi = 0.02;
  c.gamma_minus = 0.03;
  c.frame_cutoff.reset();
  return c;
}

DensityMatrix random_density(std::mt19937& rng, const HilbertSpace& s) {
  std::normal_distribution<double> nd;
  const auto d = static_cast<Eigen::Index>(s.dim());
  ComplexMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = {nd(rng), nd(rng)};
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return {s, rho};
}

ComplexMatrix dissipator(const ComplexMatrix& a, const ComplexMatrix& rho) {
  const ComplexMatrix ad = a.adjoint();
  return a * rho * ad - 0.5 * (ad * a * rho + rho * ad * a);
}

// Product of single-qutrit states on the register, resonator in vacuum.
DensityMatrix product_state(const std::vector<ComplexVector>& qutrits, std::size_t nc) {
  ComplexVector psi = ComplexVector::Ones(1);
  for (const auto& q : qutrits) psi = kron(psi, q);
  ComplexVector vac = ComplexVector::Zero(static_cast<Eigen::Index>(nc));
  vac(0) = 1.0;
  psi = kron(psi, vac);
  std::vector<std::size_t> dims(qutrits.size(), kQutritDim);
  dims.push_back(nc);
  return DensityMatrix::pure(HilbertSpace(dims), psi);
}

ComplexVector level(std::size_t k) {
  ComplexVector v = ComplexVector::Zero(3);
  v(static_cast<Eigen::Index>(k)) = 1.0;
  return v;
}

SystemConfig zero_coupling(std::size_t n) {
  auto c = SystemConfig::uniform(n, 10.0, 4.5, 7.0, CouplingSchedule{});
  c.photon_cutoff = 4;
  return c;
}

}  // namespace

TEST(Terms, SidebandOnlyCutoffGivesDetunedSidebandHamiltonian) {
  auto c = SystemConfig::uniform(1, 10.0, 4.5, 7.0, reference_schedule());
  c.frame_cutoff = 0.06;
  const MasterEquation eq(c);
  ASSERT_EQ(eq.terms().size(), 4u);
  for (const auto& t : eq.terms()) EXPECT_NEAR(std::abs(t.freq), 0.05, 1e-12);
  // i (g_d/2) s^y (a^dag e^{i delta t} - a e^{-i delta t}), s^y on levels {0,1}
  const HilbertSpace s = c.space();
  ComplexMatrix sy = ComplexMatrix::Zero(3, 3);
  sy(0, 1) = -kI;
  sy(1, 0) = kI;
  const ComplexMatrix syf = tensor_embed(sy, 0, s).to_dense();
  const ComplexMatrix a = tensor_embed(destroy(6), 1, s).to_dense();
  for (double t : {0.0, 1.3, 7.7}) {
    const double dd = kTwoPi * 0.05 * t;
    const ComplexMatrix expected =
        angular_mhz(1.0) * kI * 10.0 * syf * (std::exp(kI * dd) * a.adjoint() - std::exp(-kI * dd) * a);
    EXPECT_LT((eq.hamiltonian_dense(t) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Terms, DefaultCutoffAddsJaynesCummings) {
  auto c = SystemConfig::uniform(1, 10.0, 4.5, 7.0, reference_schedule());
  const auto terms = build_hamiltonian_terms(c);
  ASSERT_EQ(terms.size(), 6u);
  std::size_t jc = 0;
  for (const auto& t : terms)
    if (t.label.ends_with("@0")) {
      ++jc;
      EXPECT_NEAR(std::abs(t.freq), 5.5, 1e-12);
      EXPECT_EQ(t.amplitude, cplx(40.0));
    }
  EXPECT_EQ(jc, 2u);
  c.frame_cutoff.reset();
  EXPECT_EQ(build_hamiltonian_terms(c).size(), 20u);
}

TEST(Terms, ReferenceConfigurationTermCount) {
  const auto curve = tabulate_coupling_curve(TcqParams{}, 0.4, 129, 80.0);
  const auto s = reference_schedule();
  const auto c = SystemConfig::uniform(4, 10.0, 4.5, 7.0, s, minus_components(curve, s));
  const MasterEquation eq(c);
  EXPECT_EQ(eq.terms().size(), 48u);
  EXPECT_LE(eq.max_frequency(), 7.0 + 1e-9);
}

TEST(Terms, ZeroCouplingsGiveEmptyList) {
  EXPECT_TRUE(build_hamiltonian_terms(zero_coupling(2)).empty());
  auto c = SystemConfig::uniform(1, 10.0, 4.5, 7.0, reference_schedule());
  c.frame_cutoff = 0.01;
  EXPECT_THROW(build_hamiltonian_terms(c), ConfigError);
}

TEST(Terms, HamiltonianIsHermitian) {
  const MasterEquation eq(small_config());
  for (double t : {0.0, 0.37, 11.1}) EXPECT_LT(hermiticity_error(eq.hamiltonian_dense(t)), 1e-12);
}

TEST(Config, ValidationNamesField) {
  auto c = small_config();
  c.photon_cutoff = 3;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "photon_cutoff");
  }
  c = small_config();
  c.omega_plus.pop_back();
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.kappa = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Rhs, MatchesDenseOracle) {
  const auto c = small_config();
  const MasterEquation eq(c);
  std::mt19937 rng(3);
  const HilbertSpace s = c.space();
  const ComplexMatrix a = tensor_embed(destroy(c.photon_cutoff), 2, s).to_dense();
  ComplexMatrix z = ComplexMatrix::Zero(3, 3);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  for (double t : {0.0, 2.71}) {
    const auto rho = random_density(rng, s);
    const ComplexMatrix h = eq.hamiltonian_dense(t);
    ComplexMatrix expected = -kI * (h * rho.matrix - rho.matrix * h);
    expected += angular_mhz(c.kappa) * dissipator(a, rho.matrix);
    for (std::size_t j = 0; j < 2; ++j) {
      expected += angular_mhz(c.gamma_phi) * dissipator(tensor_embed(z, j, s).to_dense(), rho.matrix);
      expected += angular_mhz(c.gamma_minus) * dissipator(tensor_embed(transition(0, 1, 3), j, s).to_dense(), rho.matrix);
    }
    const auto out = lindblad_rhs(rho, t, eq);
    EXPECT_LT((out.matrix - expected).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
  }
}

TEST(Rhs, TraceFree) {
  const MasterEquation eq(small_config());
  std::mt19937 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const auto rho = random_density(rng, eq.space());
    EXPECT_LT(std::abs(lindblad_rhs(rho, 0.3 * rep, eq).trace()), 1e-12);
  }
}

TEST(Rhs, CavityDecay) {
  auto c = zero_coupling(1);
  c.kappa = 0.1;
  const MasterEquation eq(c);
  auto rho = product_state({level(0)}, 4);
  rho.matrix.setZero();
  rho.matrix(1, 1) = 1.0;  // one photon
  const auto d = lindblad_rhs(rho, 0.0, eq);
  EXPECT_NEAR(photon_number({rho.space, d.matrix}), -angular_mhz(0.1), 1e-15);
}

TEST(Rhs, QubitRelaxation) {
  auto c = zero_coupling(1);
  c.gamma_minus = 0.02;
  const MasterEquation eq(c);
  const auto rho = product_state({level(1)}, 4);
  const auto d = lindblad_rhs(rho, 0.0, eq);
  EXPECT_NEAR(d.matrix(4, 4).real(), -angular_mhz(0.02), 1e-15);
  EXPECT_NEAR(d.matrix(0, 0).real(), angular_mhz(0.02), 1e-15);
}

TEST(Rhs, DimensionMismatch) {
  const MasterEquation eq(small_config());
  const DensityMatrix rho(HilbertSpace({3, 3, 5}), ComplexMatrix::Identity(45, 45) / 45.0);
  EXPECT_THROW(lindblad_rhs(rho, 0.0, eq), ShapeError);
}

TEST(Observables, FidelityExamples) {
  ComplexVector psi = ComplexVector::Zero(4);
  psi(1) = 0.6;
  psi(2) = 0.8 * kI;
  ComplexVector full = ComplexVector::Zero(9);
  full(1) = 0.6;  // |0,1>
  full(3) = 0.8 * kI;  // |1,0>
  ComplexVector vac = ComplexVector::Zero(5);
  vac(0) = 1.0;
  const auto rho = DensityMatrix::pure(HilbertSpace({3, 3, 5}), kron(full, vac));
  EXPECT_NEAR(fidelity_observable(rho, psi), 1.0, 1e-15);
  EXPECT_NEAR(fidelity_observable(product_state({level(2), level(2)}, 5), psi), 0.0, 1e-15);
  EXPECT_THROW(fidelity_observable(rho, ComplexVector::Zero(8)), ShapeError);
}

TEST(Observables, FidelityOfRandomProductStates) {
  std::mt19937 rng(8);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<ComplexVector> qubits, qutrits;
    ComplexVector reg = ComplexVector::Ones(1);
    for (int q = 0; q < 3; ++q) {
      ComplexVector v(2);
      v << cplx{nd(rng), nd(rng)}, cplx{nd(rng), nd(rng)};
      v.normalize();
      reg = kron(reg, v);
      ComplexVector t = ComplexVector::Zero(3);
      t.head(2) = v;
      qutrits.push_back(t);
    }
    ComplexVector ideal(8);
    for (auto& x : ideal) x = {nd(rng), nd(rng)};
    ideal.normalize();
    const double oracle = std::norm(ideal.dot(reg));
    EXPECT_NEAR(fidelity_observable(product_state(qutrits, 4), ideal), oracle, 1e-14);
  }
}

TEST(Observables, FidelityCountsResonatorPopulation) {
  // Tracing the resonator out: qubit state with the photon in |1> still counts.
  ComplexVector q = ComplexVector::Zero(3);
  q(0) = 1.0;
  ComplexVector one = ComplexVector::Zero(4);
  one(1) = 1.0;
  const auto rho = DensityMatrix::pure(HilbertSpace({3, 4}), kron(q, one));
  ComplexVector psi = ComplexVector::Zero(2);
  psi(0) = 1.0;
  EXPECT_NEAR(fidelity_observable(rho, psi), 1.0, 1e-15);
  EXPECT_NEAR(photon_number(rho), 1.0, 1e-15);
}

TEST(Observables, CollectiveSpin) {
  EXPECT_NEAR(collective_jz(product_state({level(0), level(0), level(0), level(0)}, 4)), 1.0, 1e-15);
  EXPECT_NEAR(collective_jz(product_state({level(1), level(1), level(1), level(1)}, 4)), -1.0, 1e-15);
  EXPECT_NEAR(collective_jz(product_state({level(2), level(0)}, 4)), 0.5, 1e-15);
  ComplexVector ghz = ComplexVector::Zero(16);
  ghz(0) = ghz(15) = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(collective_jz(ghz), 0.0, 1e-15);
  ComplexVector ground = ComplexVector::Zero(16);
  ground(0) = 1.0;
  EXPECT_NEAR(collective_jz(ground), 1.0, 1e-15);
  EXPECT_THROW(collective_jz(ComplexVector::Zero(6)), ShapeError);
}

TEST(Observables, Leakage) {
  EXPECT_NEAR(third_level_population(product_state({level(2), level(2), level(0)}, 4)), 2.0, 1e-15);
}

TEST(DispersiveShift, Values) {
  EXPECT_NEAR(dispersive_shift_estimate(40.0, 5.5), 0.291, 1e-3);
  EXPECT_EQ(dispersive_shift_estimate(0.0, 5.5), 0.0);
  EXPECT_NEAR(dispersive_shift_estimate(80.0, 5.5), 4.0 * dispersive_shift_estimate(40.0, 5.5), 1e-12);
  EXPECT_THROW(dispersive_shift_estimate(40.0, 0.0), SingularityError);
  EXPECT_NEAR(dispersive_shift_estimate(small_config()), 1600.0 / 5500.0, 1e-12);
}

TEST(ReferenceGate, AxisFromTonePhase) {
  auto c = small_config();
  const auto y = reference_gate(c);
  EXPECT_EQ(y.axis, Axis::y);
  EXPECT_DOUBLE_EQ(y.xi, 2.0);
  EXPECT_EQ(y.pairs, PairSum::ordered);
  for (auto& s : c.schedules) s.phase = kPi / 2;
  EXPECT_EQ(reference_gate(c).axis, Axis::x);
}

TEST(Integrate, ZeroDurationSingleRow) {
  const auto r = integrate(small_config(), 0.0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.fidelity[0], 1.0);
  EXPECT_EQ(r.jz_sim[0], 1.0);
  EXPECT_EQ(r.photons[0], 0.0);
}

TEST(Integrate, StepBound) {
  const auto r = integrate(small_config(), 0.3);
  const double f_max = MasterEquation(small_config()).max_frequency();
  EXPECT_LE(r.dt, 1.0 / (20.0 * f_max) + 1e-15);
  EXPECT_EQ(r.size(), 4u);
  EXPECT_NEAR(r.t.back(), 0.3, 1e-12);
}

TEST(Integrate, GroundStateStationaryWithoutCoupling) {
  auto c = zero_coupling(2);
  c.kappa = 0.1;
  c.gamma_minus = 5.0;
  c.gamma_phi = 1.0;
  IntegrateOptions opt;
  opt.sample_dt = 1.0;
  const auto r = integrate(c, 3.0, opt);
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_NEAR(r.fidelity[k], 1.0, 1e-14);
    EXPECT_NEAR(r.jz_sim[k], 1.0, 1e-14);
  }
}

TEST(Integrate, ClosedSystemSidebandsReachIdealGate) {
  auto c = SystemConfig::uniform(4, 10.0, 4.5, 7.0, reference_schedule());
  c.frame_cutoff = 0.1;  // detuned sideband terms only
  c.photon_cutoff = 12;  // |alpha|^2 reaches 2.56 for the m = 4 branch
  IntegrateOptions opt;
  opt.snapshot_times = {20.0};
  const auto r = integrate(c, 20.0, opt);
  EXPECT_GE(r.fidelity.back(), 0.999);
  EXPECT_LT(r.photons.back(), 1e-4);
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_NEAR(r.snapshots[0].first, 20.0, 1e-9);
  for (std::size_t k = 0; k < r.size(); ++k) {
    EXPECT_LT(r.trace_err[k], 1e-10);
    EXPECT_LT(r.hermiticity_err[k], 1e-12);
  }
  EXPECT_GE(r.snapshots[0].second.min_eigenvalue(), -1e-6);
}

TEST(Integrate, PeakLocatorAndCsv) {
  const std::vector<double> t{0, 1, 2, 3, 4}, y{0.1, 0.5, 0.2, 0.9, 0.3};
  EXPECT_EQ(peak_index(t, y, 0.5, 2.5), 1u);
  EXPECT_EQ(peak_index(t, y, 0, 4), 3u);
  EXPECT_FALSE(peak_index(t, y, 5, 6).has_value());
  std::ostringstream os;
  write_evolution_csv(os, integrate(small_config(), 0.2));
  std::istringstream is(os.str());
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  EXPECT_EQ(header, "t_ns,fidelity,photons,jz_sim,jz_ideal,trace_err");
  EXPECT_EQ(first, "0,1,0,1,1,0");
}

TEST(Integrate, TraceGateRaisesWithPartialResult) {
  auto c = small_config();
  IntegrateOptions opt;
  opt.sample_dt = 10.0;
  opt.step_fraction = 1e4;  // 10 ns steps, far outside RK4 stability
  try {
    integrate(c, 2000.0, opt);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.partial().size(), 1u);
    EXPECT_LT(e.partial().size(), 201u);
    EXPECT_LT(e.partial().trace_err.front(), 1e-12);
    EXPECT_NE(std::string(e.what()).find("reduce the time step"), std::string::npos);
  }
}
