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

// Closed-form collective-gate layer on N qubits: the effective pairwise
// sigma^a sigma^a Hamiltonian, its ideal evolution and GHZ preparation, the
// exact second-order Magnus propagator of the detuned two-tone sideband
// drive, and a compiler/verifier for many-body Pauli exponentials built
// from collective gates and one local rotation.
//
// Qubit 0 is the most significant bit of the 2^N register index; |0> is the
// sigma^z = +1 state. xi, g_d, delta in MHz, times in ns; evolution
// operators use exp(-i 2 pi 1e-3 H t).

#pragma once

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "tcqsim/opcore.hpp"

namespace tcq {

inline constexpr std::size_t kMaxDenseQubits = 12;
inline constexpr std::size_t kMaxVerifyQubits = 8;

/// Which index pairs enter sum sigma_i sigma_j: each unordered pair once
/// (i < j), or every ordered pair (i != j, i.e. twice the unordered sum).
enum class PairSum { unordered, ordered };

struct MsGateSpec {
  std::size_t n_qubits = 2;
  double xi = 0.0;  // MHz
  Axis axis = Axis::y;
  double time = 0.0;  // ns
  PairSum pairs = PairSum::unordered;
};

/// xi = g_d^2 / (4 delta).
inline double interaction_strength(double g_d, double delta) {
  if (delta == 0.0) throw SingularityError("interaction_strength: zero detuning");
  return g_d * g_d / (4.0 * delta);
}

namespace detail {

inline void check_register(std::size_t n) {
  if (n == 0) throw RangeError("qubit register must not be empty");
  if (n > kMaxDenseQubits)
    throw RangeError("dense 2^N operators are limited to N <= " + std::to_string(kMaxDenseQubits) + ", got " +
                     std::to_string(n));
}

inline std::size_t bit(std::size_t n, std::size_t q) { return std::size_t{1} << (n - 1 - q); }

/// <b ^ flip| s^a_i s^a_j |b> for the two-qubit flip pattern, and the diagonal
/// value for z.
inline cplx pair_element(Axis axis, bool bi, bool bj) {
  switch (axis) {
    case Axis::x:
      return 1.0;
    case Axis::y:
      // s^y|0> = i|1>, s^y|1> = -i|0>
      return bi == bj ? -1.0 : 1.0;
    default:
      return bi == bj ? 1.0 : -1.0;
  }
}

/// sum over pairs within `qubits` of s^a_i s^a_j on n qubits.
inline ComplexMatrix pair_sum(std::size_t n, Axis axis, const std::vector<std::size_t>& qubits) {
  check_register(n);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t a = 0; a < qubits.size(); ++a)
    for (std::size_t b = a + 1; b < qubits.size(); ++b) {
      const std::size_t mi = bit(n, qubits[a]), mj = bit(n, qubits[b]);
      const std::size_t flip = axis == Axis::z ? 0 : (mi | mj);
      for (std::size_t s = 0; s < static_cast<std::size_t>(dim); ++s)
        m(static_cast<Eigen::Index>(s ^ flip), static_cast<Eigen::Index>(s)) +=
            pair_element(axis, (s & mi) != 0, (s & mj) != 0);
    }
  return m;
}

inline std::vector<std::size_t> all_qubits(std::size_t n) {
  std::vector<std::size_t> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = i;
  return q;
}

inline void check_qubits(std::size_t n, const std::vector<std::size_t>& qubits) {
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (qubits[i] >= n) throw RangeError("qubit index " + std::to_string(qubits[i]) + " out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (qubits[j] == qubits[i]) throw RangeError("duplicate qubit index " + std::to_string(qubits[i]));
  }
}

}  // namespace detail

/// Single-qubit operator `op` on qubit q of an n-qubit register.
inline ComplexMatrix qubit_operator(const ComplexMatrix& op, std::size_t q, std::size_t n) {
  detail::check_register(n);
  if (q >= n) throw RangeError("qubit_operator: qubit out of range");
  const auto left = static_cast<Eigen::Index>(std::size_t{1} << q);
  const auto right = static_cast<Eigen::Index>(std::size_t{1} << (n - 1 - q));
  return kron(kron(ComplexMatrix::Identity(left, left), op), ComplexMatrix::Identity(right, right));
}

/// -xi sum s^a_i s^a_j (MHz).
inline ComplexMatrix ms_hamiltonian(const MsGateSpec& spec) {
  ComplexMatrix h = -spec.xi * detail::pair_sum(spec.n_qubits, spec.axis, detail::all_qubits(spec.n_qubits));
  if (spec.pairs == PairSum::ordered) h *= 2.0;
  return h;
}

/// Collective spin S^a = sum_i s^a_i.
inline ComplexMatrix collective_spin(std::size_t n, Axis axis) {
  detail::check_register(n);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix s = ComplexMatrix::Zero(dim, dim);
  for (std::size_t q = 0; q < n; ++q) s += qubit_operator(pauli(axis), q, n);
  return s;
}

/// Evolution under ms_hamiltonian with a cached eigendecomposition.
class IdealDynamics {
 public:
  explicit IdealDynamics(const MsGateSpec& spec) : spec_(spec) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ms_hamiltonian(spec));
    if (es.info() != Eigen::Success) throw NumericalError("IdealDynamics: eigensolver failed");
    vectors_ = es.eigenvectors();
    energies_ = es.eigenvalues();
  }

  const MsGateSpec& spec() const { return spec_; }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.rows()); }

  ComplexVector ground() const {
    ComplexVector v = ComplexVector::Zero(vectors_.rows());
    v(0) = 1.0;
    return v;
  }

  ComplexVector state(double t) const { return state(t, ground()); }

  ComplexVector state(double t, const ComplexVector& psi0) const {
    if (psi0.size() != vectors_.rows()) throw ShapeError("IdealDynamics::state: initial state dimension mismatch");
    if (t == 0.0) return psi0;
    ComplexVector c = vectors_.adjoint() * psi0;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-kI * (kTwoPi * 1e-3 * energies_(k) * t));
    return vectors_ * c;
  }

  ComplexMatrix propagator(double t) const {
    ComplexVector d(energies_.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = std::exp(-kI * (kTwoPi * 1e-3 * energies_(k) * t));
    return vectors_ * d.asDiagonal() * vectors_.adjoint();
  }

 private:
  MsGateSpec spec_;
  ComplexMatrix vectors_;
  RealVector energies_;
};

/// exp(-i 2 pi H t)|psi0>, psi0 = |0...0> by default.
inline ComplexVector ideal_evolution(const MsGateSpec& spec, double t,
                                     const std::optional<ComplexVector>& psi0 = std::nullopt) {
  IdealDynamics dyn(spec);
  return psi0 ? dyn.state(t, *psi0) : dyn.state(t);
}

/// Overlap with the closest (|0...0> + e^{i phi}|1...1>)/sqrt(2).
inline double ghz_fidelity(const ComplexVector& psi) {
  if (psi.size() < 2) throw ShapeError("ghz_fidelity: register too small");
  const double s = std::abs(psi(0)) + std::abs(psi(psi.size() - 1));
  return 0.5 * s * s;
}

struct TimeScan {
  double time = 0.0;  // ns
  double value = 0.0;
};

namespace detail {

/// Grid scan of f on (0, t_max] and Brent refinement around the best node.
template <class F>
TimeScan maximize_on(F&& f, double t_max, std::size_t grid, double accept = -1.0) {
  double best_t = 0.0, best = -1.0;
  const double h = t_max / static_cast<double>(grid);
  for (std::size_t k = 1; k <= grid; ++k) {
    const double t = h * static_cast<double>(k);
    const double v = f(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
    if (accept >= 0.0 && v >= accept) break;
  }
  const double lo = std::max(0.0, best_t - h), hi = std::min(t_max, best_t + h);
  auto [t, neg] = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, lo, hi, 52);
  if (-neg > best) return {t, -neg};
  return {best_t, best};
}

}  // namespace detail

/// Best GHZ fidelity for t in (0, 1/(4 xi)] starting from |0...0>.
inline TimeScan scan_ghz(const MsGateSpec& spec, std::size_t grid = 2000) {
  if (spec.xi == 0.0) throw SingularityError("scan_ghz: zero interaction strength");
  IdealDynamics dyn(spec);
  return detail::maximize_on([&](double t) { return ghz_fidelity(dyn.state(t)); }, 1e3 / (4.0 * std::abs(spec.xi)),
                             grid);
}

/// First t > 0 at which |<0...0|psi(t)>|^2 returns to 1 (within 1e-9),
/// searched up to `t_max` ns.
inline std::optional<TimeScan> first_recurrence(const MsGateSpec& spec, double t_max, std::size_t grid = 20000) {
  IdealDynamics dyn(spec);
  auto f = [&](double t) { return std::norm(dyn.state(t)(0)); };
  // Skip the neighbourhood of t = 0, then look for the first local maximum
  // close enough to 1.
  const double h = t_max / static_cast<double>(grid);
  double prev = f(0.0);
  bool left_start = false;
  for (std::size_t k = 1; k <= grid; ++k) {
    const double t = h * static_cast<double>(k);
    const double v = f(t);
    if (v < 0.5) left_start = true;
    if (left_start && v > 1.0 - 1e-3 && v >= prev) {
      const double nxt = f(t + h);
      if (nxt <= v) {
        auto [tt, neg] = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, t - h, t + h, 52);
        if (-neg >= 1.0 - 1e-9) return TimeScan{tt, -neg};
      }
    }
    prev = v;
  }
  return std::nullopt;
}

/// Dense exp(S^y (alpha a^dag - alpha^* a)) exp(i phi (S^y)^2) on qubits (x)
/// resonator for the sideband Hamiltonian
///
///   H(t) = i (g_d/2) S^y (a^dag e^{i delta t} - a e^{-i delta t})
///
/// with alpha = -i (g_d / 2 delta)(e^{i delta t} - 1) and
/// phi = (g_d / 2 delta)^2 (delta t - sin delta t), rates angular (2 pi MHz).
/// Displacements are built in a padded Fock space and projected onto the
/// first `photon_cutoff` levels, i.e. this is the photon_cutoff block of the
/// untruncated propagator.
inline ComplexMatrix magnus_propagator(std::size_t n_qubits, double g_d, double delta, double t,
                                       std::size_t photon_cutoff) {
  detail::check_register(n_qubits);
  if (photon_cutoff < 2) throw RangeError("magnus_propagator: photon_cutoff must be at least 2");
  if (delta == 0.0) throw SingularityError("magnus_propagator: zero detuning");
  const double g = kTwoPi * 1e-3 * g_d;
  const double d = kTwoPi * 1e-3 * delta;
  const double r = g / (2.0 * d);
  const cplx alpha = -kI * r * (std::exp(kI * (d * t)) - 1.0);
  const double phase = r * r * (d * t - std::sin(d * t));

  const double m_max = static_cast<double>(n_qubits);
  const double reach = std::norm(alpha) * m_max * m_max;
  if (reach >= static_cast<double>(photon_cutoff) / 4.0)
    throw CutoffError("magnus_propagator: displacement |alpha m|^2 = " + std::to_string(reach) +
                      " reaches photon_cutoff/4 = " + std::to_string(photon_cutoff / 4.0));

  const auto nc = static_cast<Eigen::Index>(photon_cutoff);
  const auto pad = static_cast<std::size_t>(photon_cutoff + 40 + static_cast<std::size_t>(8.0 * reach));
  const ComplexMatrix a = destroy(pad);

  // sigma^y eigenbasis: columns |+y>, |-y> with eigenvalues +1, -1.
  ComplexMatrix vy(2, 2);
  vy << 1.0, 1.0, kI, -kI;
  vy /= std::sqrt(2.0);
  ComplexMatrix basis = ComplexMatrix::Identity(1, 1);
  for (std::size_t q = 0; q < n_qubits; ++q) basis = kron(basis, vy);

  const auto dq = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  std::vector<std::optional<ComplexMatrix>> disp(n_qubits + 1);  // indexed by (m + N)/2
  ComplexMatrix block_diag = ComplexMatrix::Zero(dq * nc, dq * nc);
  for (Eigen::Index s = 0; s < dq; ++s) {
    const int ones = std::popcount(static_cast<std::uint64_t>(s));
    const int m = static_cast<int>(n_qubits) - 2 * ones;  // S^y eigenvalue
    auto& dm = disp[static_cast<std::size_t>((m + static_cast<int>(n_qubits)) / 2)];
    if (!dm) {
      const cplx beta = static_cast<double>(m) * alpha;
      const ComplexMatrix gen = beta * a.adjoint() - std::conj(beta) * a;
      const cplx ph = std::exp(kI * (phase * m * m));
      dm = ph * expm(gen).topLeftCorner(nc, nc);
    }
    block_diag.block(s * nc, s * nc, nc, nc) = *dm;
  }
  const ComplexMatrix full = kron(basis, ComplexMatrix::Identity(nc, nc));
  return full * block_diag * full.adjoint();
}

/// Signed Pauli product, e.g. "-XYYY".
struct PauliString {
  std::string letters;  // I, X, Y, Z per qubit
  cplx phase{1.0, 0.0};

  static PauliString parse(std::string_view s) {
    PauliString p;
    std::size_t i = 0;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
      p.phase = s[0] == '-' ? -1.0 : 1.0;
      i = 1;
    }
    if (s.size() > i + 1 && s[i] == 'i') {
      p.phase *= kI;
      ++i;
    }
    p.letters = std::string(s.substr(i));
    p.validate();
    return p;
  }

  std::size_t size() const { return letters.size(); }

  void validate() const {
    if (letters.empty()) throw RangeError("PauliString: empty");
    for (char c : letters)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') throw RangeError(std::string("PauliString: bad letter ") + c);
    const bool unit = std::abs(std::abs(phase.real()) + std::abs(phase.imag()) - 1.0) < 1e-15 &&
                      (phase.real() == 0.0 || phase.imag() == 0.0);
    if (!unit) throw RangeError("PauliString: phase must be one of +-1, +-i");
  }

  std::string str() const {
    std::string s;
    if (phase == cplx{-1.0, 0.0}) s = "-";
    if (phase == cplx{0.0, 1.0}) s = "i";
    if (phase == cplx{0.0, -1.0}) s = "-i";
    return s + letters;
  }

  ComplexMatrix matrix() const {
    validate();
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (char c : letters) {
      switch (c) {
        case 'X':
          m = kron(m, pauli(Axis::x));
          break;
        case 'Y':
          m = kron(m, pauli(Axis::y));
          break;
        case 'Z':
          m = kron(m, pauli(Axis::z));
          break;
        default:
          m = kron(m, identity(2));
      }
    }
    return phase * m;
  }
};

/// exp(i phi/2 sum_{i<j in qubits} s^a_i s^a_j); empty `qubits` means all.
struct CollectiveMS {
  double phi = 0.0;
  Axis axis = Axis::y;
  std::vector<std::size_t> qubits;
};

/// exp(i theta s^z_q).
struct LocalZ {
  double theta = 0.0;
  std::size_t qubit = 0;
};

using Gate = std::variant<CollectiveMS, LocalZ>;

/// Gates in application order: gates[0] acts first.
struct GateSequence {
  std::size_t n_qubits = 0;
  std::vector<Gate> gates;
};

inline ComplexMatrix gate_unitary(const Gate& g, std::size_t n) {
  return std::visit(
      [n](const auto& x) -> ComplexMatrix {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CollectiveMS>) {
          const auto q = x.qubits.empty() ? detail::all_qubits(n) : x.qubits;
          detail::check_qubits(n, q);
          return expm((kI * (0.5 * x.phi)) * detail::pair_sum(n, x.axis, q));
        } else {
          return expm((kI * x.theta) * qubit_operator(pauli(Axis::z), x.qubit, n));
        }
      },
      g);
}

inline ComplexMatrix sequence_unitary(const GateSequence& seq) {
  detail::check_register(seq.n_qubits);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << seq.n_qubits);
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (const auto& g : seq.gates) u = gate_unitary(g, seq.n_qubits) * u;
  return u;
}

/// Target exp(i theta P) predicted for a compiled sequence.
struct Prediction {
  PauliString pauli;
  std::string case_label;  // "N=4n-1", "N=4n+1", "N=4n", "N=4n-2"
};

struct CompiledStabilizer {
  GateSequence sequence;
  double theta = 0.0;
  Prediction table;    // N mod 4 case table, verbatim
  Prediction derived;  // from the conjugation algebra; differs for N = 4n-2
};

namespace detail {

inline std::string case_label(std::size_t n) {
  switch (n % 4) {
    case 3:
      return "N=4n-1";
    case 1:
      return "N=4n+1";
    case 0:
      return "N=4n";
    default:
      return "N=4n-2";
  }
}

inline char upper(Axis a) { return static_cast<char>(axis_letter(a) - 'a' + 'A'); }

}  // namespace detail

/// MS(-pi/2) on all qubits, exp(i theta s^z_0), MS(+pi/2): realizes
/// exp(i theta s^b_0 s^a_1 ... s^a_{N-1}) with (sign, s^b) set by N mod 4.
inline CompiledStabilizer compile_stabilizer(Axis axis, std::size_t n_qubits, double theta) {
  if (n_qubits < 2) throw RangeError("compile_stabilizer: need at least two qubits");
  if (axis == Axis::z) throw RangeError("compile_stabilizer: collective axis must be x or y");
  CompiledStabilizer out;
  out.theta = theta;
  out.sequence.n_qubits = n_qubits;
  out.sequence.gates = {CollectiveMS{-kPi / 2, axis, {}}, LocalZ{theta, 0}, CollectiveMS{kPi / 2, axis, {}}};

  const std::string tail(n_qubits - 1, detail::upper(axis));
  const std::string label = detail::case_label(n_qubits);
  PauliString p;
  switch (n_qubits % 4) {
    case 3:
      p = {"Z" + tail, -1.0};
      break;
    case 1:
      p = {"Z" + tail, 1.0};
      break;
    default:  // 0 and 2 share a row in the table
      p = axis == Axis::x ? PauliString{"Y" + tail, -1.0} : PauliString{"X" + tail, 1.0};
  }
  out.table = {p, label};
  out.derived = out.table;
  if (n_qubits % 4 == 2) out.derived.pauli.phase = -out.derived.pauli.phase;
  return out;
}

struct VerificationReport {
  bool skipped = false;
  bool pass = false;
  double norm = 0.0;   // || U - e^{i chi} V ||_2
  double phase = 0.0;  // chi
  std::string case_label;
  std::string note;
};

/// Spectral-norm distance up to the global phase chi = arg Tr[V^dag U].
inline double distance_up_to_phase(const ComplexMatrix& u, const ComplexMatrix& v, double* chi = nullptr) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw ShapeError("distance_up_to_phase: shape mismatch");
  const cplx tr = (v.adjoint() * u).trace();
  const double c = std::abs(tr) > 0.0 ? std::arg(tr) : 0.0;
  if (chi) *chi = c;
  return operator_norm(u - std::exp(kI * c) * v);
}

/// Composes the sequence densely and compares with exp(i theta P).
inline VerificationReport verify_sequence(const GateSequence& seq, const PauliString& predicted, double theta,
                                          std::string case_label = {}, double tol = 1e-10) {
  VerificationReport r;
  r.case_label = std::move(case_label);
  if (predicted.size() != seq.n_qubits) throw ShapeError("verify_sequence: Pauli string length differs from N");
  if (seq.n_qubits > kMaxVerifyQubits) {
    r.skipped = true;
    r.note = "size limit: dense verification supports N <= " + std::to_string(kMaxVerifyQubits);
    return r;
  }
  const ComplexMatrix u = sequence_unitary(seq);
  const ComplexMatrix v = expm((kI * theta) * predicted.matrix());
  r.norm = distance_up_to_phase(u, v, &r.phase);
  r.pass = r.norm < tol;
  if (!r.pass) r.note = "mismatch for case " + r.case_label + " against " + predicted.str();
  return r;
}

}  // namespace tcq
