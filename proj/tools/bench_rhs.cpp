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

// Times one Lindblad generator evaluation for growing register and photon
// sizes and prints d, nnz(H), retained terms and ms per evaluation, to check
// the empirical cost against d^2 * terms.

#include <chrono>
#include <iostream>

#include "tcqsim/lindblad.hpp"

int main() {
  using namespace tcq;
  const auto schedule = CouplingSchedule::detuned_sidebands(40, 20, 50, 10, 4.5, 60);
  const std::vector<FourierComponent> minus = {{0.0, 60.0}};
  std::cout << "n_qubits,photon_cutoff,dim,terms,nnz,ms_per_rhs,ms_per_rhs_over_d2k\n";
  for (std::size_t n : {1, 2, 3, 4}) {
    for (std::size_t nc : {4, 6, 8}) {
      auto cfg = SystemConfig::uniform(n, 10, 4.5, 7, schedule, minus);
      cfg.photon_cutoff = nc;
      cfg.kappa = 0.1;
      cfg.gamma_phi = cfg.gamma_minus = 0.02;
      const MasterEquation eq(cfg);
      SparseMatrixRM h;
      eq.effective_hamiltonian(0.37, h);
      const auto d = h.rows();
      StateMatrix rho = StateMatrix::Identity(d, d) / static_cast<double>(d), out;
      const int reps = std::max<int>(3, static_cast<int>(2e8 / (static_cast<double>(d) * d * eq.terms().size())));
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < reps; ++r) {
        eq.effective_hamiltonian(0.01 * r, h);
        eq.apply(h, rho, out);
      }
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
      const double d2k = static_cast<double>(d) * static_cast<double>(d) * static_cast<double>(eq.terms().size());
      std::cout << n << ',' << nc << ',' << d << ',' << eq.terms().size() << ',' << h.nonZeros() << ',' << ms << ','
                << ms / d2k << '\n';
    }
  }
}
