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

// Charge-basis model of a three-island tunable-coupling transmon.
//
//   H = sum_{s=+,-} 4 E_Cs (n_s - n_gs)^2 - E_Js(Phi_s) cos(gamma_s) + 4 E_I n_+ n_-
//   E_Js(Phi_s) = E_Js^max cos(pi Phi_s / Phi_0)
//
// on |n_+, n_-> with n_s in [-N_c, N_c]; index = (n_+ + N_c)(2N_c+1) + (n_- + N_c).
// Energies in GHz, fluxes in units of Phi_0.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tcqsim/io.hpp"
#include "tcqsim/opcore.hpp"

namespace tcq {

struct TcqParams {
  double ec_plus = 0.5;
  double ec_minus = 0.5;
  double e_int = 0.35;
  double ejmax_plus = 25.0;
  double ejmax_minus = 25.0;
  double ng_plus = 0.0;
  double ng_minus = 0.0;
  int charge_cutoff = 7;

  void validate() const {
    if (!(ec_plus > 0 && ec_minus > 0 && ejmax_plus > 0 && ejmax_minus > 0))
      throw RangeError("TcqParams: charging and Josephson energies must be positive");
    if (!(e_int >= 0)) throw RangeError("TcqParams: e_int must be nonnegative");
    if (charge_cutoff < 5) throw RangeError("TcqParams: charge_cutoff must be at least 5");
  }

  std::size_t island_dim() const { return static_cast<std::size_t>(2 * charge_cutoff + 1); }
  std::size_t dim() const { return island_dim() * island_dim(); }
};

struct FluxBias {
  double phi_plus = 0.0;
  double phi_minus = 0.0;

  void validate() const {
    auto ok = [](double p) { return p >= 0.0 && p <= 0.5; };
    if (!ok(phi_plus) || !ok(phi_minus))
      throw RangeError("FluxBias: fluxes must lie in [0, 0.5] Phi_0, got (" + std::to_string(phi_plus) + ", " +
                       std::to_string(phi_minus) + ")");
  }
};

/// Transitions out of the ground state and charge matrix elements.
///
/// `omega_minus`/`n02` follow energy order (third eigenstate). `omega_mode2`/
/// `n0_mode2` refer to the second excited state of odd charge parity, i.e. the
/// second single-excitation mode; the two coincide except where an even
/// two-excitation level drops below that mode.
struct TcqSpectrum {
  FluxBias flux;
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double n01 = 0.0;
  double n02 = 0.0;
  double omega_mode2 = 0.0;
  double n0_mode2 = 0.0;
  std::vector<double> anharm_diag;  // E3-E0, E4-E0, E5-E0
};

/// (E_J+, E_J-) in GHz.
inline std::pair<double, double> effective_josephson(const TcqParams& params, const FluxBias& flux) {
  flux.validate();
  // cos(pi/2) is 6e-17 in floating point; clamp so E_J stays nonnegative.
  auto ej = [](double emax, double phi) { return std::max(0.0, emax * std::cos(kPi * phi)); };
  return {ej(params.ejmax_plus, flux.phi_plus), ej(params.ejmax_minus, flux.phi_minus)};
}

/// min(E_J+/E_C+, E_J-/E_C-); the model assumes this stays >= 10.
inline double transmon_ratio(const TcqParams& params, const FluxBias& flux) {
  const auto [ejp, ejm] = effective_josephson(params, flux);
  return std::min(ejp / params.ec_plus, ejm / params.ec_minus);
}

namespace detail {

inline RealMatrix charge_hamiltonian_real(const TcqParams& params, const FluxBias& flux) {
  params.validate();
  const auto [ejp, ejm] = effective_josephson(params, flux);
  const int nc = params.charge_cutoff;
  const auto d = static_cast<Eigen::Index>(params.island_dim());
  RealMatrix h = RealMatrix::Zero(d * d, d * d);
  auto idx = [&](int np, int nm) { return static_cast<Eigen::Index>(np + nc) * d + (nm + nc); };
  for (int np = -nc; np <= nc; ++np)
    for (int nm = -nc; nm <= nc; ++nm) {
      const Eigen::Index i = idx(np, nm);
      h(i, i) = 4.0 * params.ec_plus * std::pow(np - params.ng_plus, 2) +
                4.0 * params.ec_minus * std::pow(nm - params.ng_minus, 2) + 4.0 * params.e_int * np * nm;
      if (np < nc) h(i, idx(np + 1, nm)) = h(idx(np + 1, nm), i) = -0.5 * ejp;
      if (nm < nc) h(i, idx(np, nm + 1)) = h(idx(np, nm + 1), i) = -0.5 * ejm;
    }
  return h;
}

/// Diagonal of n_+ + n_- in the charge basis.
inline RealVector total_charge(const TcqParams& params) {
  const int nc = params.charge_cutoff;
  const auto d = static_cast<Eigen::Index>(params.island_dim());
  RealVector n(d * d);
  for (int np = -nc; np <= nc; ++np)
    for (int nm = -nc; nm <= nc; ++nm) n(static_cast<Eigen::Index>(np + nc) * d + (nm + nc)) = np + nm;
  return n;
}

}  // namespace detail

/// Hermitian matrix of dimension (2N_c+1)^2; cos(gamma) acts as half the
/// nearest-neighbour charge hopping on each island.
inline ComplexMatrix build_charge_hamiltonian(const TcqParams& params, const FluxBias& flux) {
  return detail::charge_hamiltonian_real(params, flux).cast<cplx>();
}

namespace detail {

struct LowSpectrum {
  std::vector<double> energies;     // ascending
  std::vector<RealVector> vectors;  // full charge-basis eigenvectors
  std::vector<bool> odd;            // charge-conjugation parity
};

/// Lowest `count` eigenpairs. With zero offset charges the Hamiltonian
/// commutes with (n_+, n_-) -> (-n_+, -n_-), which reverses the basis order;
/// the even and odd sectors are then diagonalized separately.
inline LowSpectrum low_spectrum(const TcqParams& params, const FluxBias& flux, std::size_t count) {
  const RealMatrix h = charge_hamiltonian_real(params, flux);
  const Eigen::Index dim = h.rows();
  auto fail = [&] {
    return NumericalError("spectrum: eigensolver failed (dim " + std::to_string(dim) + ", max|H| " +
                          std::to_string(h.cwiseAbs().maxCoeff()) + ")");
  };
  LowSpectrum out;
  if (params.ng_plus != 0.0 || params.ng_minus != 0.0) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    if (es.info() != Eigen::Success) throw fail();
    for (std::size_t k = 0; k < count; ++k) {
      const RealVector v = es.eigenvectors().col(static_cast<Eigen::Index>(k));
      double p = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) p += v(i) * v(dim - 1 - i);
      out.energies.push_back(es.eigenvalues()(static_cast<Eigen::Index>(k)));
      out.vectors.push_back(v);
      out.odd.push_back(p < 0.0);
    }
    return out;
  }

  const Eigen::Index half = dim / 2;  // dim is odd; index `half` is n_+ = n_- = 0
  const double r2 = std::sqrt(2.0);
  RealMatrix he(half + 1, half + 1), ho(half, half);
  for (Eigen::Index i = 0; i < half; ++i) {
    for (Eigen::Index j = 0; j < half; ++j) {
      he(i, j) = h(i, j) + h(i, dim - 1 - j);
      ho(i, j) = h(i, j) - h(i, dim - 1 - j);
    }
    he(i, half) = he(half, i) = r2 * h(i, half);
  }
  he(half, half) = h(half, half);
  Eigen::SelfAdjointEigenSolver<RealMatrix> ee(he), eo(ho);
  if (ee.info() != Eigen::Success || eo.info() != Eigen::Success) throw fail();

  auto lift = [&](const RealVector& w, bool odd) {
    RealVector v = RealVector::Zero(dim);
    for (Eigen::Index i = 0; i < half; ++i) {
      v(i) = w(i) / r2;
      v(dim - 1 - i) = (odd ? -w(i) : w(i)) / r2;
    }
    if (!odd) v(half) = w(half);
    return v;
  };
  Eigen::Index ie = 0, io = 0;
  while (out.energies.size() < count && (ie < he.rows() || io < ho.rows())) {
    const bool take_odd = ie >= he.rows() || (io < ho.rows() && eo.eigenvalues()(io) < ee.eigenvalues()(ie));
    if (take_odd) {
      out.energies.push_back(eo.eigenvalues()(io));
      out.vectors.push_back(lift(eo.eigenvectors().col(io), true));
      ++io;
    } else {
      out.energies.push_back(ee.eigenvalues()(ie));
      out.vectors.push_back(lift(ee.eigenvectors().col(ie), false));
      ++ie;
    }
    out.odd.push_back(take_odd);
  }
  return out;
}

}  // namespace detail

/// Exact diagonalization; matrix elements are of n = n_+ + n_- with the
/// eigenvector gauge fixed so <k|n|0> >= 0.
inline TcqSpectrum spectrum(const TcqParams& params, const FluxBias& flux) {
  const auto low = detail::low_spectrum(params, flux, 10);
  const RealVector n = detail::total_charge(params);
  const RealVector n_ground = n.cwiseProduct(low.vectors[0]);
  auto n0 = [&](std::size_t k) { return std::abs(low.vectors[k].dot(n_ground)); };

  TcqSpectrum s;
  s.flux = flux;
  const double e0 = low.energies[0];
  s.omega_plus = low.energies[1] - e0;
  s.omega_minus = low.energies[2] - e0;
  s.n01 = n0(1);
  s.n02 = n0(2);
  int odd_seen = 0;
  for (std::size_t k = 1; k < low.energies.size(); ++k) {
    if (low.odd[k] && ++odd_seen == 2) {
      s.omega_mode2 = low.energies[k] - e0;
      s.n0_mode2 = n0(k);
      break;
    }
  }
  for (std::size_t k = 3; k <= 5; ++k) s.anharm_diag.push_back(low.energies[k] - e0);
  return s;
}

struct FluxGrid {
  double phi_plus_min = 0.0;
  double phi_plus_max = 0.5;
  std::size_t n_plus = 64;
  double phi_minus_min = 0.0;
  double phi_minus_max = 0.5;
  std::size_t n_minus = 64;

  static double node(double lo, double hi, std::size_t n, std::size_t i) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
};

inline std::size_t default_thread_count() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Spectra on a (Phi_+, Phi_-) grid, row-major with Phi_+ as the slow index.
inline std::vector<TcqSpectrum> scan_flux_plane(const TcqParams& params, const FluxGrid& grid,
                                                std::size_t threads = default_thread_count()) {
  if (grid.n_plus < 16 || grid.n_minus < 16) throw RangeError("scan_flux_plane: grid resolution must be at least 16x16");
  params.validate();
  std::vector<TcqSpectrum> out(grid.n_plus * grid.n_minus);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const FluxBias f{FluxGrid::node(grid.phi_plus_min, grid.phi_plus_max, grid.n_plus, k / grid.n_minus),
                       FluxGrid::node(grid.phi_minus_min, grid.phi_minus_max, grid.n_minus, k % grid.n_minus)};
      out[k] = spectrum(params, f);
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, out.size());
  if (threads == 1) {
    work(0, out.size());
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (out.size() + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          work(w * chunk, std::min(out.size(), (w + 1) * chunk));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Spectra along Phi_- = const, Phi_+ in [phi_plus_min, phi_plus_max].
inline std::vector<TcqSpectrum> scan_segment(const TcqParams& params, double phi_minus, double phi_plus_min,
                                             double phi_plus_max, std::size_t n_points) {
  if (n_points < 2) throw RangeError("scan_segment: need at least two points");
  std::vector<TcqSpectrum> out;
  out.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    out.push_back(spectrum(params, {FluxGrid::node(phi_plus_min, phi_plus_max, n_points, i), phi_minus}));
  return out;
}

/// Smallest omega_mode2 - omega_plus along a set of spectra (GHz).
inline double min_mode_gap(const std::vector<TcqSpectrum>& spectra) {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& s : spectra) g = std::min(g, s.omega_mode2 - s.omega_plus);
  return g;
}

/// For each Phi_+ sample, the Phi_- in [lo, hi] where omega_plus equals the
/// target (bisection; omega_plus decreases with Phi_- at fixed Phi_+).
inline std::vector<FluxBias> trace_iso_frequency(const TcqParams& params, double target_omega_plus,
                                                 const std::vector<double>& phi_plus_samples, double lo = 0.0,
                                                 double hi = 0.49) {
  std::vector<FluxBias> out;
  for (double pp : phi_plus_samples) {
    auto f = [&](double pm) { return spectrum(params, {pp, pm}).omega_plus - target_omega_plus; };
    double a = lo, b = hi, fa = f(a), fb = f(b);
    if (fa * fb > 0.0)
      throw RangeError("trace_iso_frequency: no Phi_- in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "] reaches the target at Phi_+ = " + std::to_string(pp));
    for (int it = 0; it < 60 && b - a > 1e-13; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    out.push_back({pp, 0.5 * (a + b)});
  }
  return out;
}

/// Second-order shift of (omega_+, omega_-) from a fast component of the
/// diagonalizing angle with amplitude lambda_d and frequency omega_lambda:
///
///   c = lambda_d^2 omega_lambda^2 (w+ - w-) / (2 [(w+ - w-)^2 - omega_lambda^2])
///
/// Returned as (c, -c): the two modes are pushed apart, so for w+ < w- and
/// omega_lambda below the mode splitting omega_+ drops and omega_- rises.
inline std::pair<double, double> lambda_renormalization(double lambda_d, double omega_lambda, double omega_plus,
                                                        double omega_minus) {
  const double split = omega_plus - omega_minus;
  const double den = 2.0 * (split * split - omega_lambda * omega_lambda);
  if (std::abs(den) < 1e-12 * std::max(1.0, split * split))
    throw SingularityError("lambda_renormalization: |omega_+ - omega_-| equals omega_lambda");
  const double c = lambda_d * lambda_d * omega_lambda * omega_lambda * split / den;
  return {c, -c};
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<TcqSpectrum>& spectra) {
  os << "phi_plus,phi_minus,omega_plus_ghz,omega_minus_ghz,n01,n02\n";
  for (const auto& s : spectra)
    os << format_sig(s.flux.phi_plus, 12) << ',' << format_sig(s.flux.phi_minus, 12) << ','
       << format_sig(s.omega_plus, 12) << ',' << format_sig(s.omega_minus, 12) << ',' << format_sig(s.n01, 12) << ','
       << format_sig(s.n02, 12) << '\n';
}

}  // namespace tcq
