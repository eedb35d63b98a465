#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "radpair/linalg.hpp"

namespace radpair {

inline constexpr double kFreeElectronG = 2.0023;

// A spin-carrying particle. Spin is stored as 2I so that the allowed values
// {1/2, 1, 3/2} stay exact.
struct SpinSpecies {
  int twice_spin = 1;
  double g_factor = kFreeElectronG;
  // Nuclear gyromagnetic ratio in MHz/mT; protons are assumed when unset.
  std::optional<double> gyromagnetic_ratio;
  std::string name;

  double spin() const { return 0.5 * twice_spin; }
  int multiplicity() const { return twice_spin + 1; }
};

SpinSpecies electron(double g = kFreeElectronG);
SpinSpecies proton();
SpinSpecies nitrogen14();

enum class Radical { A, B };

struct Nucleus {
  SpinSpecies species;
  Radical radical = Radical::A;
  Eigen::Matrix3d hyperfine = Eigen::Matrix3d::Zero();  // MHz
};

Nucleus isotropic_nucleus(SpinSpecies species, Radical radical, double a_mhz);

// Two electrons plus nuclei. Basis ordering is fixed as
// electron_a (x) electron_b (x) nuclei[0] (x) nuclei[1] ..., each factor in
// descending m order (+I first).
struct SpinSystem {
  SpinSpecies electron_a = electron();
  SpinSpecies electron_b = electron();
  std::vector<Nucleus> nuclei;
  double dipolar_d = 0.0;   // MHz
  double exchange_j = 0.0;  // MHz
  Eigen::Vector3d dipolar_axis = Eigen::Vector3d::UnitZ();
  bool nuclear_zeeman = false;
  std::string label;
};

// Throws UnsupportedSpin / InvalidTensor / InvalidAxis / InvalidArgument.
void validate(const SpinSystem& system);

std::size_t hilbert_dim(const SpinSystem& system);

// Product of nuclear multiplicities.
std::size_t nuclear_multiplicity(const SpinSystem& system);

// Site 0 is electron_a, site 1 electron_b, site 2+k nucleus k.
std::size_t site_count(const SpinSystem& system);
const SpinSpecies& site_species(const SpinSystem& system, std::size_t site);

// Human-readable description of the tensor-product ordering.
std::string basis_tag(const SpinSystem& system);

struct SpinMatrices {
  Operator x, y, z;
};

// Angular momentum matrices for I in {1/2, 1, 3/2}; anything else throws
// UnsupportedSpin.
SpinMatrices spin_matrices(double spin);
SpinMatrices spin_matrices_twice(int twice_spin);

// Lifts a single-site operator into the full Hilbert space.
Operator embed(const Operator& op, std::size_t site, const SpinSystem& system);

// Embedded spin operators for every site, built once per system.
class SpinBasis {
 public:
  explicit SpinBasis(const SpinSystem& system);

  std::size_t dim() const { return dim_; }
  std::size_t sites() const { return ops_.size(); }
  const SpinMatrices& site(std::size_t index) const { return ops_.at(index); }
  const SpinMatrices& electron_a() const { return ops_[0]; }
  const SpinMatrices& electron_b() const { return ops_[1]; }
  const SpinMatrices& nucleus(std::size_t k) const { return ops_.at(2 + k); }

  // Electron S_a . S_b on the full space.
  Operator electron_dot() const;
  // Electron S_a.n, S_b.n along a unit vector.
  Operator electron_a_along(const Eigen::Vector3d& n) const;
  Operator electron_b_along(const Eigen::Vector3d& n) const;
  Operator identity() const { return Operator::Identity(dim_, dim_); }

  // Total electron S_z eigenvalue (-1, 0, +1) of each product-basis state.
  const std::vector<int>& electron_mz() const { return electron_mz_; }

 private:
  std::size_t dim_ = 0;
  std::vector<SpinMatrices> ops_;
  std::vector<int> electron_mz_;
};

Operator singlet_projector(const SpinSystem& system);
Operator singlet_projector(const SpinBasis& basis);

struct TripletProjectors {
  Operator total;
  Operator zero;
  Operator plus;
  Operator minus;
};

// Triplet manifold split by electron spin projection along `axis`.
// Throws InvalidAxis for a zero-length axis.
TripletProjectors triplet_projectors(
    const SpinSystem& system,
    const Eigen::Vector3d& axis = Eigen::Vector3d::UnitZ());
TripletProjectors triplet_projectors(
    const SpinBasis& basis, const Eigen::Vector3d& axis = Eigen::Vector3d::UnitZ());

// Row-major dump, one row per line, entries written as "re+im i".
void write_operator_dump(std::ostream& os, const Operator& op);

// Rotates every hyperfine tensor and the dipolar axis by R (R A R^T).
SpinSystem rotated(const SpinSystem& system, const Eigen::Matrix3d& rotation);

}  // namespace radpair
