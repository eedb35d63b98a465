#include "radpair/reference_oracle.hpp"

#include <cmath>
#include <numbers>

#include "radpair/errors.hpp"

namespace radpair::oracle {

namespace {

class MasterEquation {
 public:
  MasterEquation(const SpinSystem& system, const FieldProtocol& protocol,
                 const KineticModel& kinetics)
      : basis_(system), system_(system), protocol_(protocol) {
    if (basis_.dim() > kMaxOracleDim) {
      throw OracleScopeError("oracle limited to dim <= 32, got " + std::to_string(basis_.dim()));
    }
    h0_ = static_hamiltonian(basis_, system_, protocol_.b0);
    ps_ = singlet_projector(basis_);
    pt_ = triplet_projectors(basis_).total;
    sink_ = kinetics.k_singlet * ps_ + kinetics.k_triplet * pt_;
    k_singlet_ = kinetics.k_singlet;
  }

  Operator rhs(double t, const Operator& rho) const {
    const Operator h = h0_ + rf_drive(basis_, system_, protocol_, t);
    const Operator comm = h * rho - rho * h;
    const Operator anti = sink_ * rho + rho * sink_;
    return Complex(0.0, -2.0 * std::numbers::pi) * comm - 0.5 * anti;
  }

  Operator step(double t, const Operator& rho, double dt) const {
    const Operator k1 = rhs(t, rho);
    const Operator k2 = rhs(t + 0.5 * dt, rho + 0.5 * dt * k1);
    const Operator k3 = rhs(t + 0.5 * dt, rho + 0.5 * dt * k2);
    const Operator k4 = rhs(t + dt, rho + dt * k3);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  double singlet_rate(const Operator& rho) const {
    return k_singlet_ * (ps_ * rho).trace().real();
  }

 private:
  SpinBasis basis_;
  SpinSystem system_;
  FieldProtocol protocol_;
  Operator h0_, ps_, pt_, sink_;
  double k_singlet_ = 0.0;
};

std::size_t step_count(double dt, double t_end) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw InvalidArgument("dt and t_end must be positive");
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

}  // namespace

Trajectory reference_oracle(const DensityMatrix& rho0, const SpinSystem& system,
                            const FieldProtocol& protocol, const KineticModel& kinetics,
                            double dt, double t_end, std::size_t output_every) {
  const MasterEquation eq(system, protocol, kinetics);
  if (output_every == 0) output_every = 1;
  const std::size_t n = step_count(dt, t_end);
  const double h = t_end / static_cast<double>(n);

  Trajectory out;
  out.states.push_back(rho0);
  Operator coarse = rho0.matrix;
  Operator fine = rho0.matrix;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = rho0.time + static_cast<double>(k) * h;
    coarse = eq.step(t, coarse, h);
    fine = eq.step(t, fine, 0.5 * h);
    fine = eq.step(t + 0.5 * h, fine, 0.5 * h);
    if ((k + 1) % output_every == 0 || k + 1 == n) {
      out.richardson_error =
          std::max(out.richardson_error, max_abs(coarse - fine) * 16.0 / 15.0);
      out.states.push_back({fine, rho0.time + static_cast<double>(k + 1) * h});
    }
  }
  return out;
}

double reference_singlet_yield(const DensityMatrix& rho0, const SpinSystem& system,
                               const FieldProtocol& protocol, const KineticModel& kinetics,
                               double dt, double t_end) {
  const MasterEquation eq(system, protocol, kinetics);
  std::size_t n = step_count(dt, t_end);
  if (n % 2 == 1) ++n;
  const double h = t_end / static_cast<double>(n);
  Operator rho = rho0.matrix;
  double sum = eq.singlet_rate(rho);
  for (std::size_t k = 1; k <= n; ++k) {
    rho = eq.step(rho0.time + static_cast<double>(k - 1) * h, rho, h);
    const double w = (k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * eq.singlet_rate(rho);
  }
  return sum * h / 3.0;
}

}  // namespace radpair::oracle
