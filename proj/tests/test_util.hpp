#pragma once

#include <random>

#include "radpair/dynamics.hpp"
#include "radpair/hamiltonian.hpp"
#include "radpair/spin_core.hpp"

namespace testutil {

using namespace radpair;

inline SpinSystem pair_with(std::vector<Nucleus> nuclei, double d = 0.0, double j = 0.0) {
  SpinSystem s;
  s.nuclei = std::move(nuclei);
  s.dipolar_d = d;
  s.exchange_j = j;
  return s;
}

inline SpinSystem one_proton(double a) {
  return pair_with({isotropic_nucleus(proton(), Radical::A, a)});
}

inline SpinSystem fad_trp() {
  return pair_with({isotropic_nucleus(nitrogen14(), Radical::A, 11.0),
                    isotropic_nucleus(nitrogen14(), Radical::B, 9.0),
                    isotropic_nucleus(proton(), Radical::B, 45.0)},
                   -8.0);
}

// Random symmetric hyperfine tensors, couplings and g-factors; dim <= 64.
inline SpinSystem random_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> count(0, 3);
  SpinSystem s;
  s.electron_a = electron(2.0023 + 0.002 * u(rng));
  s.electron_b = electron(2.0023 + 0.002 * u(rng));
  std::size_t dim = 4;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    const bool nitrogen = u(rng) > 0.3;
    SpinSpecies sp = nitrogen ? nitrogen14() : proton();
    if (dim * static_cast<std::size_t>(sp.multiplicity()) > 64) break;
    dim *= static_cast<std::size_t>(sp.multiplicity());
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = 15.0 * u(rng);
    Nucleus nuc;
    nuc.species = sp;
    nuc.radical = u(rng) > 0 ? Radical::A : Radical::B;
    nuc.hyperfine = 0.5 * (m + m.transpose());
    s.nuclei.push_back(nuc);
  }
  s.dipolar_d = 10.0 * u(rng);
  s.exchange_j = 3.0 * u(rng);
  s.dipolar_axis = Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
  return s;
}

}  // namespace testutil
