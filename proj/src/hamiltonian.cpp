#include "radpair/hamiltonian.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "radpair/errors.hpp"

namespace radpair {

namespace {

constexpr double kMuBOverH = PhysicalConstants::bohr_magneton_over_h;

double nuclear_gamma(const SpinSpecies& s) {
  return s.gyromagnetic_ratio.value_or(PhysicalConstants::proton_gyromagnetic);
}

}  // namespace

double electron_larmor(double g, double b0_mt) { return g * kMuBOverH * b0_mt; }

void validate(const FieldProtocol& p) {
  if (!(p.b0 >= 0.0) || !std::isfinite(p.b0)) throw InvalidArgument("b0 must be >= 0");
  if (!(p.rf_b1 >= 0.0) || !std::isfinite(p.rf_b1)) throw InvalidArgument("b1 must be >= 0");
  if (p.rf_enabled && !(p.rf_frequency > 0.0)) {
    throw InvalidArgument("rf_frequency must be > 0 when RF is enabled");
  }
}

Operator zeeman(const SpinBasis& basis, const SpinSystem& system, double b0) {
  Operator h = electron_larmor(system.electron_a.g_factor, b0) * basis.electron_a().z +
               electron_larmor(system.electron_b.g_factor, b0) * basis.electron_b().z;
  if (system.nuclear_zeeman) {
    for (std::size_t k = 0; k < system.nuclei.size(); ++k) {
      h -= nuclear_gamma(system.nuclei[k].species) * b0 * basis.nucleus(k).z;
    }
  }
  return h;
}

Operator zeeman(const SpinSystem& system, double b0) {
  return zeeman(SpinBasis(system), system, b0);
}

Operator hyperfine(const SpinBasis& basis, const SpinSystem& system) {
  Operator h = Operator::Zero(basis.dim(), basis.dim());
  for (std::size_t k = 0; k < system.nuclei.size(); ++k) {
    const auto& nuc = system.nuclei[k];
    const Eigen::Matrix3d& a = nuc.hyperfine;
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
      throw InvalidTensor("nuclei[" + std::to_string(k) + "]: hyperfine tensor not symmetric");
    }
    const SpinMatrices& s = nuc.radical == Radical::A ? basis.electron_a() : basis.electron_b();
    const SpinMatrices& i = basis.nucleus(k);
    const Operator* sv[3] = {&s.x, &s.y, &s.z};
    const Operator* iv[3] = {&i.x, &i.y, &i.z};
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) {
        if (a(p, q) != 0.0) h += a(p, q) * (*sv[p]) * (*iv[q]);
      }
    }
  }
  return h;
}

Operator hyperfine(const SpinSystem& system) { return hyperfine(SpinBasis(system), system); }

Operator dipolar(const SpinBasis& basis, const SpinSystem& system) {
  if (system.dipolar_d == 0.0) return Operator::Zero(basis.dim(), basis.dim());
  const double norm = system.dipolar_axis.norm();
  if (!(norm > 0.0)) throw InvalidAxis("dipolar axis has zero length");
  const Eigen::Vector3d n = system.dipolar_axis / norm;
  return system.dipolar_d *
         (3.0 * basis.electron_a_along(n) * basis.electron_b_along(n) - basis.electron_dot());
}

Operator dipolar(const SpinSystem& system) { return dipolar(SpinBasis(system), system); }

Operator exchange(const SpinBasis& basis, const SpinSystem& system) {
  return system.exchange_j * (2.0 * basis.electron_dot() + 0.5 * basis.identity());
}

Operator exchange(const SpinSystem& system) { return exchange(SpinBasis(system), system); }

double point_dipole_coupling(double r_nm, double g_a, double g_b) {
  if (!(r_nm > 0.0)) throw InvalidArgument("distance must be positive");
  constexpr double mu0_over_4pi = 1e-7;         // T m / A
  constexpr double bohr_magneton = 9.2740100783e-24;  // J / T
  constexpr double planck = 6.62607015e-34;     // J s
  const double r = r_nm * 1e-9;
  const double hz = mu0_over_4pi * g_a * g_b * bohr_magneton * bohr_magneton / (planck * r * r * r);
  return hz * 1e-6;
}

Operator rf_drive(const SpinBasis& basis, const SpinSystem& system,
                  const FieldProtocol& protocol, double t) {
  if (!protocol.rf_enabled || protocol.rf_b1 == 0.0) {
    return Operator::Zero(basis.dim(), basis.dim());
  }
  const double carrier =
      std::cos(2.0 * std::numbers::pi * protocol.rf_frequency * t + protocol.rf_phase);
  const double amp = kMuBOverH * protocol.rf_b1 * carrier;
  return amp * (system.electron_a.g_factor * protocol.b1_scale_a * basis.electron_a().x +
                system.electron_b.g_factor * protocol.b1_scale_b * basis.electron_b().x);
}

Operator rf_drive(const SpinSystem& system, const FieldProtocol& protocol, double t) {
  return rf_drive(SpinBasis(system), system, protocol, t);
}

Operator static_hamiltonian(const SpinBasis& basis, const SpinSystem& system, double b0) {
  return zeeman(basis, system, b0) + hyperfine(basis, system) + dipolar(basis, system) +
         exchange(basis, system);
}

Operator static_hamiltonian(const SpinSystem& system, double b0) {
  return static_hamiltonian(SpinBasis(system), system, b0);
}

Operator total_hamiltonian(const SpinBasis& basis, const SpinSystem& system,
                           const FieldProtocol& protocol, double t) {
  return static_hamiltonian(basis, system, protocol.b0) + rf_drive(basis, system, protocol, t);
}

Operator total_hamiltonian(const SpinSystem& system, const FieldProtocol& protocol, double t) {
  return total_hamiltonian(SpinBasis(system), system, protocol, t);
}

Operator RotatingFrameResult::to_frame(const Operator& op) const {
  if (labels.empty()) return op;
  return basis_change.adjoint() * op * basis_change;
}

Operator RotatingFrameResult::secular(const Operator& op) const {
  Operator out = to_frame(op);
  if (labels.empty()) return out;
  const auto n = out.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (labels[i] != labels[j]) out(i, j) = 0.0;
    }
  }
  return 0.5 * (out + out.adjoint()).eval();
}

RotatingFrameResult rotating_frame(const SpinBasis& basis, const SpinSystem& system,
                                   const Operator& h_static, const FieldProtocol& protocol) {
  const Eigen::Index n = h_static.rows();
  if (n != static_cast<Eigen::Index>(basis.dim()) || h_static.cols() != n) {
    throw ShapeError("Hamiltonian dimension does not match the spin system");
  }
  RotatingFrameResult out;
  if (!protocol.rf_enabled) {
    out.hamiltonian = h_static;
    out.basis_change = Operator::Identity(n, n);
    return out;
  }

  const Eigen::SelfAdjointEigenSolver<Operator> eig(0.5 * (h_static + h_static.adjoint()));
  if (eig.info() != Eigen::Success) throw NumericalError("static eigendecomposition failed");
  out.basis_change = eig.eigenvectors();
  const Operator& v = out.basis_change;
  const Operator sz = basis.electron_a().z + basis.electron_b().z;
  const Operator sz_frame = v.adjoint() * sz * v;
  out.labels.resize(static_cast<std::size_t>(n));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = sz_frame(i, i).real();
    out.labels[i] = static_cast<int>(std::lround(m));
    worst = std::max(worst, std::abs(m - out.labels[i]));
  }

  const double nu = protocol.rf_frequency;
  const double half = 0.5 * kMuBOverH * protocol.rf_b1;
  const double c = std::cos(protocol.rf_phase);
  const double s = std::sin(protocol.rf_phase);
  const double wa = half * system.electron_a.g_factor * protocol.b1_scale_a;
  const double wb = half * system.electron_b.g_factor * protocol.b1_scale_b;
  const Operator drive = wa * (c * basis.electron_a().x + s * basis.electron_a().y) +
                         wb * (c * basis.electron_b().x + s * basis.electron_b().y);
  Operator d = v.adjoint() * drive * v;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(out.labels[i] - out.labels[j]) != 1) d(i, j) = 0.0;
    }
  }
  out.hamiltonian = 0.5 * (d + d.adjoint());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.hamiltonian(i, i) += eig.eigenvalues()(i) - nu * out.labels[i];
  }
  out.drive_to_carrier = nu > 0.0 ? 2.0 * std::max(wa, wb) / nu : 0.0;
  out.secular_valid = out.drive_to_carrier < 0.05 && worst < 0.25;
  return out;
}

RotatingFrameResult rotating_frame(const SpinSystem& system, const Operator& h_static,
                                   const FieldProtocol& protocol) {
  return rotating_frame(SpinBasis(system), system, h_static, protocol);
}

}  // namespace radpair
