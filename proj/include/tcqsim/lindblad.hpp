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

// Open-system dynamics of N three-level TCQs coupled to one resonator, in the
// interaction picture of the bare qutrit and resonator energies:
//
//   H(t) = sum_j sum_{s=+,-} g_s,j(t) (sigma^+_s,j e^{i w_s t} - h.c.)(a e^{-i w_r t} - h.c.)
//   d rho/dt = -i[H, rho] + kappa L(a) + sum_j [G_phi L(sigma^z_j) + G_- L(sigma^-_j)]
//   L(A) rho = A rho A^dag - {A^dag A, rho}/2
//
// Each Fourier component of g_s,j(t) times each ladder/field combination is
// one term with a net rotation frequency; terms above the frame cutoff are
// dropped. Factor order: qutrits 0..N-1, then the resonator. Frequencies in
// GHz, couplings and rates in MHz (linear; multiplied by 2 pi internally),
// times in ns.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tcqsim/ideal_gates.hpp"
#include "tcqsim/io.hpp"
#include "tcqsim/opcore.hpp"
#include "tcqsim/pulse_synth.hpp"

namespace tcq {

inline constexpr std::size_t kQutritDim = 3;

/// Row-major storage of rho used by the integrator (faster sparse products).
using StateMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Frequency (MHz or GHz) to angular rate in rad/ns.
inline constexpr double angular_mhz(double mhz) { return kTwoPi * 1e-3 * mhz; }

struct SystemConfig {
  std::size_t n_qubits = 4;
  double omega_r = 10.0;              // GHz
  std::vector<double> omega_plus;     // GHz, one per qubit
  std::vector<double> omega_minus;    // GHz, one per qubit
  std::size_t photon_cutoff = 6;      // resonator levels
  std::vector<CouplingSchedule> schedules;                   // g_+ tones per qubit
  std::vector<std::vector<FourierComponent>> minus_coupling;  // g_- components per qubit (may be empty)
  double kappa = 0.0;                 // MHz
  double gamma_phi = 0.0;             // MHz
  double gamma_minus = 0.0;           // MHz
  std::optional<double> frame_cutoff = 7.0;  // GHz; nullopt keeps every term

  /// Same frequencies and schedule on every qubit.
  static SystemConfig uniform(std::size_t n, double omega_r, double omega_plus, double omega_minus,
                              const CouplingSchedule& schedule, std::vector<FourierComponent> minus = {}) {
    SystemConfig c;
    c.n_qubits = n;
    c.omega_r = omega_r;
    c.omega_plus.assign(n, omega_plus);
    c.omega_minus.assign(n, omega_minus);
    c.schedules.assign(n, schedule);
    c.minus_coupling.assign(n, std::move(minus));
    return c;
  }

  void validate() const {
    if (n_qubits == 0) throw ConfigError("n_qubits", "must be at least 1");
    if (photon_cutoff < 4) throw ConfigError("photon_cutoff", "must be at least 4");
    if (!(omega_r > 0.0)) throw ConfigError("omega_r", "must be positive");
    auto per_qubit = [&](std::size_t size, const char* field) {
      if (size != n_qubits)
        throw ConfigError(field, "expected " + std::to_string(n_qubits) + " entries, got " + std::to_string(size));
    };
    per_qubit(omega_plus.size(), "omega_plus");
    per_qubit(omega_minus.size(), "omega_minus");
    per_qubit(schedules.size(), "schedules");
    if (!minus_coupling.empty()) per_qubit(minus_coupling.size(), "minus_coupling");
    for (std::size_t j = 0; j < n_qubits; ++j) {
      if (!(omega_plus[j] > 0.0)) throw ConfigError("omega_plus", "frequencies must be positive");
      if (!(omega_minus[j] > 0.0)) throw ConfigError("omega_minus", "frequencies must be positive");
    }
    if (kappa < 0.0) throw ConfigError("kappa", "rates must be nonnegative");
    if (gamma_phi < 0.0) throw ConfigError("gamma_phi", "rates must be nonnegative");
    if (gamma_minus < 0.0) throw ConfigError("gamma_minus", "rates must be nonnegative");
    if (frame_cutoff && !(*frame_cutoff >= 0.0)) throw ConfigError("frame_cutoff", "must be nonnegative");
  }

  HilbertSpace space() const {
    std::vector<std::size_t> dims(n_qubits, kQutritDim);
    dims.push_back(photon_cutoff);
    return HilbertSpace(std::move(dims));
  }
};

/// Contributes 2 pi 1e-3 amplitude exp(i 2 pi freq t) op to H(t).
struct HamiltonianTerm {
  SparseOperator op;
  double freq = 0.0;  // GHz, net rotation
  cplx amplitude;     // MHz
  std::string label;
};

/// Interaction-picture term list; throws ConfigError if nonzero couplings
/// exist but the frame cutoff removes all of them.
inline std::vector<HamiltonianTerm> build_hamiltonian_terms(const SystemConfig& config) {
  config.validate();
  const HilbertSpace space = config.space();
  const std::size_t res = config.n_qubits;
  const SparseOperator a = tensor_embed(destroy(config.photon_cutoff), res, space);
  const SparseOperator ad = a.adjoint();
  const double wr = config.omega_r;

  std::vector<HamiltonianTerm> terms;
  std::size_t candidates = 0;
  for (std::size_t j = 0; j < config.n_qubits; ++j) {
    const std::vector<FourierComponent> plus = plus_components(config.schedules[j]);
    const std::vector<FourierComponent> none;
    const auto& minus = config.minus_coupling.empty() ? none : config.minus_coupling[j];
    for (std::size_t level : {std::size_t{1}, std::size_t{2}}) {
      const double wq = level == 1 ? config.omega_plus[j] : config.omega_minus[j];
      const auto& comps = level == 1 ? plus : minus;
      if (comps.empty()) continue;
      const SparseOperator up = tensor_embed(transition(level, 0, kQutritDim), j, space);
      const SparseOperator down = up.adjoint();
      const std::string tag = std::to_string(j) + (level == 1 ? "+" : "-");
      // (sigma^+ e^{i wq t} - sigma^- e^{-i wq t})(a e^{-i wr t} - a^dag e^{i wr t})
      const struct {
        const SparseOperator* q;
        const SparseOperator* f;
        double qf, ff, sign;
        const char* name;
      } parts[] = {{&up, &a, wq, -wr, 1.0, "s+a"},
                   {&up, &ad, wq, wr, -1.0, "s+a+"},
                   {&down, &a, -wq, -wr, -1.0, "s-a"},
                   {&down, &ad, -wq, wr, 1.0, "s-a+"}};
      for (const auto& p : parts) {
        const SparseOperator op = *p.q * *p.f;
        for (const auto& c : comps) {
          if (c.amplitude == cplx{0.0, 0.0}) continue;
          ++candidates;
          const double net = c.freq + p.qf + p.ff;
          if (config.frame_cutoff && std::abs(net) > *config.frame_cutoff + 1e-9) continue;
          terms.push_back({op, net, p.sign * c.amplitude, tag + p.name + "@" + format_shortest(c.freq)});
        }
      }
    }
  }
  if (candidates > 0 && terms.empty())
    throw ConfigError("frame_cutoff", "cutoff " + format_shortest(*config.frame_cutoff) +
                                          " GHz removes every coupling term");
  return terms;
}

/// Lindblad generator with cached operators. `effective_hamiltonian` fills
/// H(t) - (i/2) sum rate A^dag A over the union sparsity pattern of all terms;
/// `apply` evaluates the generator given that matrix.
class MasterEquation {
 public:
  explicit MasterEquation(const SystemConfig& config) : config_(config), space_(config.space()) {
    terms_ = build_hamiltonian_terms(config_);
    const std::size_t dim = space_.dim();
    const auto d = static_cast<Eigen::Index>(dim);

    for (const auto& t : terms_) max_freq_ = std::max(max_freq_, std::abs(t.freq));

    // Jumps: a (kappa) and sigma^- (gamma_minus) as sparse operators; sigma^z
    // dephasing is diagonal and folded into an elementwise weight matrix.
    const double kap = angular_mhz(config_.kappa);
    const double gm = angular_mhz(config_.gamma_minus);
    const double gp = angular_mhz(config_.gamma_phi);
    RealVector decay = RealVector::Zero(d);  // sum rate A^dag A (diagonal for these jumps)
    if (kap > 0.0) {
      const SparseOperator a = tensor_embed(destroy(config_.photon_cutoff), config_.n_qubits, space_);
      jumps_.push_back({kap, a.entries()});
      add_diagonal(decay, a.adjoint() * a, kap);
    }
    if (gm > 0.0)
      for (std::size_t j = 0; j < config_.n_qubits; ++j) {
        const SparseOperator s = tensor_embed(transition(0, 1, kQutritDim), j, space_);
        jumps_.push_back({gm, s.entries()});
        add_diagonal(decay, s.adjoint() * s, gm);
      }
    dephasing_ = RealMatrix::Zero(d, d);
    if (gp > 0.0) {
      has_dephasing_ = true;
      ComplexMatrix z = ComplexMatrix::Zero(3, 3);
      z(0, 0) = 1.0;
      z(1, 1) = -1.0;
      for (std::size_t j = 0; j < config_.n_qubits; ++j) {
        const ComplexVector zd = tensor_embed(z, j, space_).to_dense().diagonal();
        for (Eigen::Index c = 0; c < d; ++c)
          for (Eigen::Index r = 0; r < d; ++r) {
            const double zr = zd(r).real(), zc = zd(c).real();
            dephasing_(r, c) += gp * (zr * zc - 0.5 * (zr * zr + zc * zc));
          }
      }
    }

    // Union pattern: all term entries plus the diagonal.
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t i = 0; i < dim; ++i) trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), 1.0);
    for (const auto& t : terms_)
      for (const auto& e : t.op.entries())
        trip.emplace_back(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col), 1.0);
    pattern_.resize(d, d);
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    auto slot = [&](std::size_t r, std::size_t c) {
      const auto begin = pattern_.outerIndexPtr()[r], end = pattern_.outerIndexPtr()[r + 1];
      const auto* inner = pattern_.innerIndexPtr();
      const auto* it = std::lower_bound(inner + begin, inner + end, static_cast<int>(c));
      return static_cast<std::size_t>(it - inner);
    };
    slots_.resize(terms_.size());
    for (std::size_t k = 0; k < terms_.size(); ++k)
      for (const auto& e : terms_[k].op.entries()) slots_[k].push_back({slot(e.row, e.col), e.value});
    constant_.assign(static_cast<std::size_t>(pattern_.nonZeros()), cplx{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i)
      constant_[slot(i, i)] = cplx{0.0, -0.5 * decay(static_cast<Eigen::Index>(i))};
  }

  const SystemConfig& config() const { return config_; }
  const HilbertSpace& space() const { return space_; }
  const std::vector<HamiltonianTerm>& terms() const { return terms_; }
  /// Largest |net frequency| among retained terms (GHz).
  double max_frequency() const { return max_freq_; }
  /// Largest angular rate among the dissipators (1/ns).
  double max_rate() const {
    return angular_mhz(std::max({config_.kappa, config_.gamma_minus, config_.gamma_phi}));
  }

  /// H(t) - (i/2) sum rate A^dag A into `out` (pattern reused across calls).
  void effective_hamiltonian(double t, SparseMatrixRM& out) const {
    if (out.nonZeros() != pattern_.nonZeros() || out.rows() != pattern_.rows()) out = pattern_;
    cplx* v = out.valuePtr();
    std::copy(constant_.begin(), constant_.end(), v);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const cplx c = angular_mhz(1.0) * terms_[k].amplitude * std::exp(kI * (kTwoPi * terms_[k].freq * t));
      for (const auto& [s, x] : slots_[k]) v[s] += c * x;
    }
  }

  /// Hermitian part only, dense.
  ComplexMatrix hamiltonian_dense(double t) const {
    const auto d = static_cast<Eigen::Index>(space_.dim());
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (const auto& term : terms_) {
      const cplx c = angular_mhz(1.0) * term.amplitude * std::exp(kI * (kTwoPi * term.freq * t));
      for (const auto& e : term.op.entries())
        h(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += c * e.value;
    }
    return h;
  }

  /// drho = -i (Heff rho - rho Heff^dag) + sum rate A rho A^dag + dephasing.
  void apply(const SparseMatrixRM& heff, const StateMatrix& rho, StateMatrix& drho) const {
    if (rho.rows() != heff.rows() || rho.cols() != heff.rows())
      throw ShapeError("MasterEquation::apply: density matrix does not match the system dimension");
    x_.noalias() = heff * rho;
    drho = -kI * (x_ - x_.adjoint());
    // (A rho A^dag)_{ij} = sum over entries (i,k,u), (j,l,v) of A: u rho_kl v^*
    for (const auto& j : jumps_)
      for (const auto& e : j.entries) {
        const cplx u = j.rate * e.value;
        for (const auto& f : j.entries)
          drho(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(f.row)) +=
              u * rho(static_cast<Eigen::Index>(e.col), static_cast<Eigen::Index>(f.col)) * std::conj(f.value);
      }
    if (has_dephasing_) drho += dephasing_.cwiseProduct(rho);
  }

 private:
  struct Jump {
    double rate;
    std::vector<SparseOperator::Entry> entries;
  };

  static void add_diagonal(RealVector& acc, const SparseOperator& op, double rate) {
    for (const auto& e : op.entries())
      if (e.row == e.col) acc(static_cast<Eigen::Index>(e.row)) += rate * e.value.real();
  }

  SystemConfig config_;
  HilbertSpace space_;
  std::vector<HamiltonianTerm> terms_;
  double max_freq_ = 0.0;
  std::vector<Jump> jumps_;
  bool has_dephasing_ = false;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dephasing_;
  SparseMatrixRM pattern_;
  std::vector<std::vector<std::pair<std::size_t, cplx>>> slots_;
  std::vector<cplx> constant_;
  // Scratch buffers; a MasterEquation must not be shared between threads.
  mutable StateMatrix x_;
};

/// Generator applied to rho at time t.
inline DensityMatrix lindblad_rhs(const DensityMatrix& rho, double t, const MasterEquation& eq) {
  if (!(rho.space == eq.space())) throw ShapeError("lindblad_rhs: density matrix lives on a different space");
  SparseMatrixRM heff;
  eq.effective_hamiltonian(t, heff);
  StateMatrix out;
  eq.apply(heff, StateMatrix(rho.matrix), out);
  return {rho.space, ComplexMatrix(out)};
}

/// All qutrits in level 0, resonator in vacuum.
inline DensityMatrix ground_state(const SystemConfig& config) {
  const HilbertSpace s = config.space();
  ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(s.dim()));
  psi(0) = 1.0;
  return DensityMatrix::pure(s, psi);
}

namespace detail {

/// Index of qubit-register basis state b (bit q of b = level of qutrit q,
/// qubit 0 most significant) in the qutrit register.
inline std::size_t qutrit_index(std::size_t b, std::size_t n) {
  std::size_t idx = 0;
  for (std::size_t q = 0; q < n; ++q) idx = idx * kQutritDim + ((b >> (n - 1 - q)) & 1U);
  return idx;
}

inline void check_layout(const DensityMatrix& rho) {
  const auto& dims = rho.space.factor_dims();
  if (dims.size() < 2) throw ShapeError("expected qutrit factors followed by a resonator");
  for (std::size_t k = 0; k + 1 < dims.size(); ++k)
    if (dims[k] != kQutritDim) throw ShapeError("expected three-level factors before the resonator");
}

}  // namespace detail

/// <Psi| Tr_res rho |Psi> with Psi embedded in the {0,1} levels of each qutrit.
/// Leaked population is not renormalized away.
inline double fidelity_observable(const DensityMatrix& rho, const ComplexVector& psi_ideal) {
  detail::check_layout(rho);
  const std::size_t n = rho.space.num_factors() - 1;
  const std::size_t nc = rho.space.factor_dims().back();
  if (static_cast<std::size_t>(psi_ideal.size()) != (std::size_t{1} << n))
    throw ShapeError("fidelity_observable: ideal state must have 2^N entries");
  std::vector<std::pair<std::size_t, cplx>> support;
  for (std::size_t b = 0; b < static_cast<std::size_t>(psi_ideal.size()); ++b)
    if (psi_ideal(static_cast<Eigen::Index>(b)) != cplx{0.0, 0.0})
      support.push_back({detail::qutrit_index(b, n) * nc, psi_ideal(static_cast<Eigen::Index>(b))});
  cplx f{0.0, 0.0};
  for (std::size_t k = 0; k < nc; ++k)
    for (const auto& [i, ci] : support)
      for (const auto& [j, cj] : support)
        f += std::conj(ci) * rho.matrix(static_cast<Eigen::Index>(i + k), static_cast<Eigen::Index>(j + k)) * cj;
  return f.real();
}

/// (1/N) sum_j <sigma^z_j>, sigma^z = |0><0| - |1><1| on each qutrit.
inline double collective_jz(const DensityMatrix& rho) {
  detail::check_layout(rho);
  const auto& dims = rho.space.factor_dims();
  const std::size_t n = dims.size() - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < rho.space.dim(); ++i) {
    const double p = rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    std::size_t rest = i / dims.back();
    for (std::size_t q = 0; q < n; ++q, rest /= kQutritDim) {
      const std::size_t level = rest % kQutritDim;
      s += level == 0 ? p : (level == 1 ? -p : 0.0);
    }
  }
  return s / static_cast<double>(n);
}

/// Same quantity for a pure qubit-register state.
inline double collective_jz(const ComplexVector& psi) {
  const auto dim = static_cast<std::size_t>(psi.size());
  const auto n = static_cast<std::size_t>(std::countr_zero(dim));
  if (dim == 0 || (std::size_t{1} << n) != dim) throw ShapeError("collective_jz: state size is not a power of two");
  double s = 0.0;
  for (std::size_t b = 0; b < dim; ++b)
    s += std::norm(psi(static_cast<Eigen::Index>(b))) *
         (static_cast<double>(n) - 2.0 * static_cast<double>(std::popcount(b)));
  return s / static_cast<double>(n);
}

inline double photon_number(const DensityMatrix& rho) {
  const std::size_t nc = rho.space.factor_dims().back();
  double s = 0.0;
  for (std::size_t i = 0; i < rho.space.dim(); ++i)
    s += static_cast<double>(i % nc) * rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  return s;
}

/// Total population of the third level summed over qutrits.
inline double third_level_population(const DensityMatrix& rho) {
  detail::check_layout(rho);
  const auto& dims = rho.space.factor_dims();
  const std::size_t n = dims.size() - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < rho.space.dim(); ++i) {
    const double p = rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    std::size_t rest = i / dims.back();
    for (std::size_t q = 0; q < n; ++q, rest /= kQutritDim)
      if (rest % kQutritDim == 2) s += p;
  }
  return s;
}

/// g_s^2 / Delta_+ (MHz), Delta_+ = omega_r - omega_+ in GHz.
inline double dispersive_shift_estimate(double g_s, double delta_plus) {
  if (delta_plus == 0.0) throw SingularityError("dispersive_shift_estimate: zero qubit-resonator detuning");
  return g_s * g_s / (delta_plus * 1e3);
}

/// Largest per-qubit shift magnitude.
inline double dispersive_shift_estimate(const SystemConfig& config) {
  config.validate();
  double best = 0.0;
  for (std::size_t j = 0; j < config.n_qubits; ++j) {
    const double s = dispersive_shift_estimate(config.schedules[j].g_s, config.omega_r - config.omega_plus[j]);
    if (std::abs(s) > std::abs(best)) best = s;
  }
  return best;
}

/// Collective gate the sideband drive implements on the qubit register:
/// xi = g_d^2/(4 delta) per ordered pair, axis y for tone phase 0 and x for
/// phase pi/2 (taken from qubit 0's schedule).
inline MsGateSpec reference_gate(const SystemConfig& config) {
  config.validate();
  const auto& s = config.schedules.front();
  MsGateSpec spec;
  spec.n_qubits = config.n_qubits;
  spec.xi = s.delta == 0.0 ? 0.0 : interaction_strength(s.g_d, s.delta);
  spec.axis = std::abs(std::remainder(s.phase, kPi)) > kPi / 4 ? Axis::x : Axis::y;
  spec.pairs = PairSum::ordered;
  return spec;
}

struct EvolutionResult {
  std::vector<double> t;
  std::vector<double> fidelity;
  std::vector<double> photons;
  std::vector<double> jz_sim;
  std::vector<double> jz_ideal;
  std::vector<double> trace_err;
  std::vector<double> hermiticity_err;
  std::vector<double> leakage;  // third-level population
  std::vector<std::pair<double, DensityMatrix>> snapshots;
  double dt = 0.0;
  std::size_t steps = 0;

  std::size_t size() const { return t.size(); }
};

/// Trace drift beyond tolerance; carries everything emitted before the failure.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, EvolutionResult partial) : Error(what), partial_(std::move(partial)) {}
  const EvolutionResult& partial() const noexcept { return partial_; }

 private:
  EvolutionResult partial_;
};

struct IntegrateOptions {
  double sample_dt = 0.1;             // ns between emitted samples
  double step_fraction = 1.0 / 20.0;  // dt <= step_fraction / f_max
  std::optional<double> max_dt;       // extra cap on the RK4 step
  double trace_tolerance = 1e-6;
  std::vector<double> snapshot_times;                     // ns; nearest emitted sample
  std::optional<MsGateSpec> ideal;                        // default: reference_gate(config)
  std::function<void(double, const DensityMatrix&)> observer;  // called at every emitted sample
};

/// Fixed-step RK4 from the ground state to t_end.
inline EvolutionResult integrate(const SystemConfig& config, double t_end, const IntegrateOptions& opt = {}) {
  if (!(t_end >= 0.0)) throw RangeError("integrate: t_end must be nonnegative");
  if (!(opt.sample_dt > 0.0)) throw RangeError("integrate: sample_dt must be positive");
  const MasterEquation eq(config);
  const MsGateSpec ideal_spec = opt.ideal ? *opt.ideal : reference_gate(config);
  if (ideal_spec.n_qubits != config.n_qubits) throw ShapeError("integrate: ideal gate acts on a different register");
  const IdealDynamics ideal(ideal_spec);

  // Step bound from the fastest retained rotation and the dissipators.
  double dt_max = opt.sample_dt;
  if (eq.max_frequency() > 0.0) dt_max = std::min(dt_max, opt.step_fraction / eq.max_frequency());
  if (eq.max_rate() > 0.0) dt_max = std::min(dt_max, 0.1 / eq.max_rate());
  if (opt.max_dt) dt_max = std::min(dt_max, *opt.max_dt);
  const auto sub = static_cast<std::size_t>(std::ceil(opt.sample_dt / dt_max - 1e-9));

  EvolutionResult out;
  out.dt = opt.sample_dt / static_cast<double>(sub);
  DensityMatrix rho = ground_state(config);
  StateMatrix state = rho.matrix;
  std::vector<bool> snapped(opt.snapshot_times.size(), false);

  auto emit = [&](double t) {
    rho.matrix = state;
    const ComplexVector psi = ideal.state(t);
    out.t.push_back(t);
    out.fidelity.push_back(fidelity_observable(rho, psi));
    out.photons.push_back(photon_number(rho));
    out.jz_sim.push_back(collective_jz(rho));
    out.jz_ideal.push_back(collective_jz(psi));
    out.trace_err.push_back(std::abs(rho.trace() - 1.0));
    out.hermiticity_err.push_back(rho.hermiticity_error());
    out.leakage.push_back(third_level_population(rho));
    for (std::size_t k = 0; k < opt.snapshot_times.size(); ++k)
      if (!snapped[k] && std::abs(opt.snapshot_times[k] - t) <= 0.5 * opt.sample_dt + 1e-12) {
        out.snapshots.emplace_back(t, rho);
        snapped[k] = true;
      }
    if (opt.observer) opt.observer(t, rho);
    if (!(out.trace_err.back() <= opt.trace_tolerance))
      throw IntegrationError("integrate: |Tr rho - 1| = " + format_shortest(out.trace_err.back()) + " at t = " +
                                 format_shortest(t) + " ns exceeds " + format_shortest(opt.trace_tolerance) +
                                 "; reduce the time step (step_fraction or max_dt)",
                             out);
  };

  const auto d = static_cast<Eigen::Index>(eq.space().dim());
  StateMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
  SparseMatrixRM h0, h_mid, h1;
  auto step = [&](double t, double h) {
    eq.effective_hamiltonian(t, h0);
    eq.effective_hamiltonian(t + 0.5 * h, h_mid);
    eq.effective_hamiltonian(t + h, h1);
    eq.apply(h0, state, k1);
    tmp = state + (0.5 * h) * k1;
    eq.apply(h_mid, tmp, k2);
    tmp = state + (0.5 * h) * k2;
    eq.apply(h_mid, tmp, k3);
    tmp = state + h * k3;
    eq.apply(h1, tmp, k4);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ++out.steps;
  };

  emit(0.0);
  const auto n_samples = static_cast<std::size_t>(std::floor(t_end / opt.sample_dt + 1e-9));
  double t = 0.0;
  for (std::size_t s = 1; s <= n_samples; ++s) {
    const double t_next = static_cast<double>(s) * opt.sample_dt;
    for (std::size_t k = 0; k < sub; ++k) step(t + static_cast<double>(k) * out.dt, out.dt);
    t = t_next;
    emit(t);
  }
  if (t_end - t > 1e-9) {
    const double rest = t_end - t;
    const auto m = static_cast<std::size_t>(std::ceil(rest / dt_max - 1e-9));
    const double h = rest / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) step(t + static_cast<double>(k) * h, h);
    emit(t_end);
  }
  return out;
}

/// Index of the largest value of `series` over samples with t in [lo, hi].
inline std::optional<std::size_t> peak_index(const std::vector<double>& t, const std::vector<double>& series,
                                             double lo, double hi) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= lo && t[k] <= hi && (!best || series[k] > series[*best])) best = k;
  return best;
}

inline void write_evolution_csv(std::ostream& os, const EvolutionResult& r) {
  os << "t_ns,fidelity,photons,jz_sim,jz_ideal,trace_err\n";
  for (std::size_t k = 0; k < r.size(); ++k)
    os << format_shortest(r.t[k]) << ',' << format_shortest(r.fidelity[k]) << ',' << format_shortest(r.photons[k])
       << ',' << format_shortest(r.jz_sim[k]) << ',' << format_shortest(r.jz_ideal[k]) << ','
       << format_shortest(r.trace_err[k]) << '\n';
}

}  // namespace tcq
