#include "radpair/spin_core.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "radpair/errors.hpp"

namespace radpair {

SpinSpecies electron(double g) {
  SpinSpecies s;
  s.twice_spin = 1;
  s.g_factor = g;
  s.name = "e";
  return s;
}

SpinSpecies proton() {
  SpinSpecies s;
  s.twice_spin = 1;
  s.gyromagnetic_ratio = 0.0425775;
  s.name = "1H";
  return s;
}

SpinSpecies nitrogen14() {
  SpinSpecies s;
  s.twice_spin = 2;
  s.gyromagnetic_ratio = 0.0030777;
  s.name = "14N";
  return s;
}

Nucleus isotropic_nucleus(SpinSpecies species, Radical radical, double a_mhz) {
  Nucleus n;
  n.species = std::move(species);
  n.radical = radical;
  n.hyperfine = a_mhz * Eigen::Matrix3d::Identity();
  return n;
}

namespace {

void check_species(const SpinSpecies& s, const std::string& where) {
  if (s.twice_spin < 1 || s.twice_spin > 3) {
    throw UnsupportedSpin(where + ": spin " + std::to_string(s.spin()) +
                          " outside {1/2, 1, 3/2}");
  }
  if (!(s.g_factor > 0.0) || !std::isfinite(s.g_factor)) {
    throw InvalidArgument(where + ": g factor must be positive");
  }
}

}  // namespace

void validate(const SpinSystem& system) {
  check_species(system.electron_a, "electron_a");
  check_species(system.electron_b, "electron_b");
  if (system.electron_a.twice_spin != 1 || system.electron_b.twice_spin != 1) {
    throw UnsupportedSpin("electrons must be spin 1/2");
  }
  for (std::size_t k = 0; k < system.nuclei.size(); ++k) {
    const auto& n = system.nuclei[k];
    const std::string where = "nuclei[" + std::to_string(k) + "]";
    check_species(n.species, where);
    if (!n.hyperfine.allFinite()) throw InvalidTensor(where + ": non-finite hyperfine");
    if ((n.hyperfine - n.hyperfine.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, n.hyperfine.cwiseAbs().maxCoeff())) {
      throw InvalidTensor(where + ": hyperfine tensor not symmetric");
    }
  }
  if (!std::isfinite(system.dipolar_d) || !std::isfinite(system.exchange_j)) {
    throw InvalidArgument("dipolar/exchange couplings must be finite");
  }
  if (!(system.dipolar_axis.norm() > 0.0)) throw InvalidAxis("dipolar axis has zero length");
}

std::size_t nuclear_multiplicity(const SpinSystem& system) {
  std::size_t m = 1;
  for (const auto& n : system.nuclei) m *= static_cast<std::size_t>(n.species.multiplicity());
  return m;
}

std::size_t hilbert_dim(const SpinSystem& system) { return 4 * nuclear_multiplicity(system); }

std::size_t site_count(const SpinSystem& system) { return 2 + system.nuclei.size(); }

const SpinSpecies& site_species(const SpinSystem& system, std::size_t site) {
  if (site == 0) return system.electron_a;
  if (site == 1) return system.electron_b;
  if (site - 2 >= system.nuclei.size()) throw ShapeError("site index out of range");
  return system.nuclei[site - 2].species;
}

std::string basis_tag(const SpinSystem& system) {
  auto spin_text = [](int twice) {
    return twice % 2 == 0 ? std::to_string(twice / 2) : std::to_string(twice) + "/2";
  };
  std::ostringstream os;
  os << "e_a(1/2) x e_b(1/2)";
  for (const auto& n : system.nuclei) {
    os << " x " << (n.species.name.empty() ? "n" : n.species.name) << "("
       << spin_text(n.species.twice_spin) << ")";
  }
  return os.str();
}

SpinMatrices spin_matrices_twice(int twice_spin) {
  if (twice_spin < 1 || twice_spin > 3) {
    throw UnsupportedSpin("spin " + std::to_string(0.5 * twice_spin) +
                          " outside {1/2, 1, 3/2}");
  }
  const int dim = twice_spin + 1;
  const double s = 0.5 * twice_spin;
  Operator plus = Operator::Zero(dim, dim);
  Operator z = Operator::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    const double m = s - j;
    z(j, j) = m;
    if (j > 0) plus(j - 1, j) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const Operator minus = plus.adjoint();
  SpinMatrices out;
  out.x = 0.5 * (plus + minus);
  out.y = Complex(0, -0.5) * (plus - minus);
  out.z = z;
  return out;
}

SpinMatrices spin_matrices(double spin) {
  const double twice = 2.0 * spin;
  if (std::abs(twice - std::round(twice)) > 1e-12) {
    throw UnsupportedSpin("spin must be a multiple of 1/2");
  }
  return spin_matrices_twice(static_cast<int>(std::lround(twice)));
}

Operator embed(const Operator& op, std::size_t site, const SpinSystem& system) {
  const std::size_t sites = site_count(system);
  if (site >= sites) throw ShapeError("site index out of range");
  const auto site_dim = static_cast<Eigen::Index>(site_species(system, site).multiplicity());
  if (op.rows() != site_dim || op.cols() != site_dim) {
    throw ShapeError("operator dimension " + std::to_string(op.rows()) +
                     " does not match site dimension " + std::to_string(site_dim));
  }
  Eigen::Index left = 1;
  Eigen::Index right = 1;
  for (std::size_t s = 0; s < sites; ++s) {
    const auto d = static_cast<Eigen::Index>(site_species(system, s).multiplicity());
    if (s < site) left *= d;
    if (s > site) right *= d;
  }
  return kron(kron(Operator::Identity(left, left), op), Operator::Identity(right, right));
}

SpinBasis::SpinBasis(const SpinSystem& system) : dim_(hilbert_dim(system)) {
  validate(system);
  const std::size_t sites = site_count(system);
  ops_.reserve(sites);
  for (std::size_t s = 0; s < sites; ++s) {
    const SpinMatrices local = spin_matrices_twice(site_species(system, s).twice_spin);
    ops_.push_back({embed(local.x, s, system), embed(local.y, s, system),
                    embed(local.z, s, system)});
  }
  electron_mz_.resize(dim_);
  const Operator mz = ops_[0].z + ops_[1].z;
  for (std::size_t i = 0; i < dim_; ++i) {
    electron_mz_[i] = static_cast<int>(std::lround(mz(i, i).real()));
  }
}

Operator SpinBasis::electron_dot() const {
  const auto& a = ops_[0];
  const auto& b = ops_[1];
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

Operator SpinBasis::electron_a_along(const Eigen::Vector3d& n) const {
  const auto& a = ops_[0];
  return n.x() * a.x + n.y() * a.y + n.z() * a.z;
}

Operator SpinBasis::electron_b_along(const Eigen::Vector3d& n) const {
  const auto& b = ops_[1];
  return n.x() * b.x + n.y() * b.y + n.z() * b.z;
}

Operator singlet_projector(const SpinBasis& basis) {
  return 0.25 * basis.identity() - basis.electron_dot();
}

Operator singlet_projector(const SpinSystem& system) {
  return singlet_projector(SpinBasis(system));
}

TripletProjectors triplet_projectors(const SpinBasis& basis, const Eigen::Vector3d& axis) {
  const double norm = axis.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidAxis("quantization axis has zero length");
  const Eigen::Vector3d n = axis / norm;
  const Operator id = basis.identity();
  // Total electron projection along n has eigenvalues +1, 0 (T0 and S), -1.
  const Operator sn = basis.electron_a_along(n) + basis.electron_b_along(n);
  TripletProjectors p;
  p.total = 0.75 * id + basis.electron_dot();
  p.plus = 0.5 * sn * (sn + id);
  p.minus = 0.5 * sn * (sn - id);
  p.zero = p.total - p.plus - p.minus;
  return p;
}

TripletProjectors triplet_projectors(const SpinSystem& system, const Eigen::Vector3d& axis) {
  return triplet_projectors(SpinBasis(system), axis);
}

void write_operator_dump(std::ostream& os, const Operator& op) {
  char buf[96];
  for (Eigen::Index i = 0; i < op.rows(); ++i) {
    for (Eigen::Index j = 0; j < op.cols(); ++j) {
      const Complex v = op(i, j);
      std::snprintf(buf, sizeof buf, "%.12g%+.12gi", v.real() == 0.0 ? 0.0 : v.real(),
                    v.imag() == 0.0 ? 0.0 : v.imag());
      if (j > 0) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

SpinSystem rotated(const SpinSystem& system, const Eigen::Matrix3d& rotation) {
  SpinSystem out = system;
  for (auto& n : out.nuclei) n.hyperfine = rotation * n.hyperfine * rotation.transpose();
  out.dipolar_axis = rotation * system.dipolar_axis;
  return out;
}

}  // namespace radpair
