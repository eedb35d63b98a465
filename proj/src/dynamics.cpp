#include "radpair/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "radpair/errors.hpp"

namespace radpair {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double real_trace(const Operator& m) { return m.trace().real(); }

// tr(X rho) for Hermitian rho.
double expectation(const Operator& x, const Operator& rho) {
  return (x.cwiseProduct(rho.transpose())).sum().real();
}

double min_positive_rate(const KineticModel& k) {
  double r = 0.0;
  if (k.k_singlet > 0.0) r = k.k_singlet;
  if (k.k_triplet > 0.0) r = r > 0.0 ? std::min(r, k.k_triplet) : k.k_triplet;
  return r;
}

void require_decay(const KineticModel& k) {
  if (!(k.k_singlet + k.k_triplet > 0.0)) {
    throw NoConvergence("kS = kT = 0: radical pair never decays, yields undefined");
  }
}

}  // namespace

double KineticModel::rp_lifetime_proxy() const {
  const double k = std::max(k_singlet, k_triplet);
  return k > 0.0 ? 1.0 / k : std::numeric_limits<double>::infinity();
}

void validate(const KineticModel& k) {
  if (!(k.k_singlet >= 0.0) || !(k.k_triplet >= 0.0) || !std::isfinite(k.k_singlet) ||
      !std::isfinite(k.k_triplet)) {
    throw InvalidArgument("recombination rates must be finite and >= 0");
  }
}

InitialStateKind parse_initial_state(std::string_view name) {
  if (name == "singlet_born") return InitialStateKind::SingletBorn;
  if (name == "triplet_born") return InitialStateKind::TripletBorn;
  if (name == "mixed") return InitialStateKind::Mixed;
  throw InvalidArgument("unknown initial state '" + std::string(name) + "'");
}

std::string to_string(InitialStateKind kind) {
  switch (kind) {
    case InitialStateKind::SingletBorn: return "singlet_born";
    case InitialStateKind::TripletBorn: return "triplet_born";
    case InitialStateKind::Mixed: return "mixed";
  }
  return "?";
}

DensityMatrix initial_state(const SpinBasis& basis, InitialStateKind kind) {
  DensityMatrix rho;
  switch (kind) {
    case InitialStateKind::SingletBorn: rho.matrix = singlet_projector(basis); break;
    case InitialStateKind::TripletBorn: rho.matrix = triplet_projectors(basis).total; break;
    case InitialStateKind::Mixed: rho.matrix = basis.identity(); break;
  }
  rho.matrix /= real_trace(rho.matrix);
  return rho;
}

DensityMatrix initial_state(const SpinSystem& system, InitialStateKind kind) {
  return initial_state(SpinBasis(system), kind);
}

Liouvillian::Liouvillian(Operator hamiltonian, Operator singlet, Operator triplet,
                         KineticModel kinetics)
    : hamiltonian_(std::move(hamiltonian)),
      singlet_(std::move(singlet)),
      triplet_(std::move(triplet)),
      kinetics_(kinetics) {
  validate(kinetics_);
  if (hamiltonian_.rows() != hamiltonian_.cols() || singlet_.rows() != hamiltonian_.rows() ||
      triplet_.rows() != hamiltonian_.rows()) {
    throw ShapeError("Hamiltonian and projectors differ in dimension");
  }
  const double scale = std::max(1.0, max_abs(hamiltonian_));
  if (hermiticity_defect(hamiltonian_) > 1e-12 * scale) {
    throw InvalidHamiltonian("Hamiltonian is not Hermitian");
  }
  generator_ = Complex(0.0, -kTwoPi) * hamiltonian_ -
               0.5 * (kinetics_.k_singlet * singlet_ + kinetics_.k_triplet * triplet_);
}

Operator Liouvillian::apply(const Operator& rho) const {
  return generator_ * rho + rho * generator_.adjoint();
}

Eigen::MatrixXcd Liouvillian::superoperator() const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (n > 128) throw ShapeError("superoperator form limited to dim <= 128");
  const Operator id = Operator::Identity(n, n);
  return kron(id, generator_) + kron(generator_.conjugate(), id);
}

Liouvillian haberkorn_step_generator(const Operator& hamiltonian, const SpinBasis& basis,
                                     const KineticModel& kinetics) {
  if (hamiltonian.rows() != static_cast<Eigen::Index>(basis.dim())) {
    throw ShapeError("Hamiltonian dimension does not match the spin system");
  }
  return Liouvillian(hamiltonian, singlet_projector(basis), triplet_projectors(basis).total,
                     kinetics);
}

Liouvillian haberkorn_step_generator(const Operator& hamiltonian, const SpinSystem& system,
                                     const KineticModel& kinetics) {
  return haberkorn_step_generator(hamiltonian, SpinBasis(system), kinetics);
}

std::vector<DensityMatrix> propagate_static(const DensityMatrix& rho0,
                                            const Liouvillian& generator,
                                            std::span<const double> t_grid) {
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= t_grid[i - 1])) throw InvalidArgument("time grid must be ascending");
  }
  const Operator& a = generator.generator();
  Eigen::ComplexEigenSolver<Operator> eig(a);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the generator failed");
  }
  const Operator& r = eig.eigenvectors();
  const Eigen::VectorXcd& lambda = eig.eigenvalues();
  Eigen::JacobiSVD<Operator> svd(r);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();

  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  if (cond > 1e8) {
    // Near-defective generator: exponentiate directly at every time point.
    for (double t : t_grid) {
      if (t == 0.0) {
        out.push_back(rho0);
        continue;
      }
      const Operator u = expm(a * t);
      const Operator m = u * rho0.matrix * u.adjoint();
      if (!m.allFinite()) {
        std::ostringstream msg;
        msg << "propagation produced non-finite values (eigenvector condition " << cond << ")";
        throw NumericalError(msg.str());
      }
      out.push_back({m, rho0.time + t});
    }
    return out;
  }

  const Eigen::PartialPivLU<Operator> lu(r);
  const Operator m0 = lu.solve(lu.solve(rho0.matrix).adjoint()).adjoint();
  const auto n = a.rows();
  for (double t : t_grid) {
    if (t == 0.0) {
      out.push_back(rho0);
      continue;
    }
    Eigen::VectorXcd e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = std::exp(lambda(i) * t);
    const Operator mt = e.asDiagonal() * m0 * e.conjugate().asDiagonal();
    Operator rho = r * mt * r.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    out.push_back({std::move(rho), rho0.time + t});
  }
  return out;
}

namespace {

// Pieces of the lab-frame generator A(t) = B + c(t) E where
// c(t) = cos(2 pi nu t + phi).
struct DrivenGenerator {
  Operator base;       // B = -2 pi i H0 - K
  Operator drive;      // E = -2 pi i D
  Operator drive_comm; // [E, B]
  double nu = 0.0;
  double phase = 0.0;

  double carrier(double t) const { return std::cos(kTwoPi * nu * t + phase); }

  // Fourth-order Magnus exponent over [t, t + dt].
  Operator magnus(double t, double dt) const {
    constexpr double offset = 0.28867513459481287;  // sqrt(3) / 6
    const double c1 = carrier(t + (0.5 - offset) * dt);
    const double c2 = carrier(t + (0.5 + offset) * dt);
    return dt * (base + (0.5 * (c1 + c2)) * drive) +
           (std::sqrt(3.0) / 12.0 * dt * dt * (c2 - c1)) * drive_comm;
  }
};

DrivenGenerator make_driven_generator(const SpinBasis& basis, const SpinSystem& system,
                                      const FieldProtocol& protocol,
                                      const KineticModel& kinetics, const Operator& ps,
                                      const Operator& pt) {
  DrivenGenerator g;
  const Operator h0 = static_hamiltonian(basis, system, protocol.b0);
  FieldProtocol unit = protocol;
  unit.rf_phase = 0.0;
  // rf_drive at t = 0 with zero phase is the drive operator at unit carrier.
  const Operator d = rf_drive(basis, system, unit, 0.0);
  g.base = Complex(0.0, -kTwoPi) * h0 - 0.5 * (kinetics.k_singlet * ps + kinetics.k_triplet * pt);
  g.drive = Complex(0.0, -kTwoPi) * d;
  g.drive_comm = commutator(g.drive, g.base);
  g.nu = protocol.rf_frequency;
  g.phase = protocol.rf_phase;
  return g;
}

void check_driven_step(const FieldProtocol& protocol, double dt) {
  validate(protocol);
  if (!(dt > 0.0)) throw StepSizeError("dt must be positive");
  if (protocol.rf_enabled && protocol.rf_frequency > 0.0 &&
      dt > 1.0 / (20.0 * protocol.rf_frequency) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " us does not resolve the " << protocol.rf_frequency
        << " MHz carrier; need dt <= " << 1.0 / (20.0 * protocol.rf_frequency);
    throw StepSizeError(msg.str());
  }
}

}  // namespace

std::vector<DensityMatrix> propagate_driven(const DensityMatrix& rho0,
                                            const SpinSystem& system,
                                            const FieldProtocol& protocol,
                                            const KineticModel& kinetics, double dt,
                                            double t_end, std::size_t output_stride) {
  check_driven_step(protocol, dt);
  validate(kinetics);
  if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  if (output_stride == 0) output_stride = 1;
  const SpinBasis basis(system);
  if (rho0.matrix.rows() != static_cast<Eigen::Index>(basis.dim())) {
    throw ShapeError("density matrix dimension does not match the spin system");
  }
  const Operator ps = singlet_projector(basis);
  const Operator pt = triplet_projectors(basis).total;
  const DrivenGenerator gen = make_driven_generator(basis, system, protocol, kinetics, ps, pt);

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);
  std::vector<DensityMatrix> out;
  out.reserve(steps / output_stride + 2);
  out.push_back(rho0);
  Operator rho = rho0.matrix;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = rho0.time + static_cast<double>(k) * h;
    const Operator v = expm(gen.magnus(t, h));
    rho = v * rho * v.adjoint();
    if ((k + 1) % output_stride == 0 || k + 1 == steps) {
      out.push_back({0.5 * (rho + rho.adjoint()), rho0.time + static_cast<double>(k + 1) * h});
    }
  }
  return out;
}

YieldResult singlet_yield_resolvent(const DensityMatrix& rho0, const Liouvillian& generator) {
  const auto start = Clock::now();
  const KineticModel& k = generator.kinetics();
  require_decay(k);
  const Operator& a = generator.generator();
  const double gap = 1e-8 * (k.k_singlet + k.k_triplet);
  YieldResult y;
  const LyapunovSolver solver(a, gap);
  if (k.k_singlet > 0.0) {
    y.phi_singlet = k.k_singlet * expectation(solver.solve(generator.singlet_projector()), rho0.matrix);
  }
  if (k.k_triplet > 0.0) {
    y.phi_triplet = k.k_triplet * expectation(solver.solve(generator.triplet_projector()), rho0.matrix);
  }
  y.truncation_residual = 0.0;
  y.wall_time = seconds_since(start);
  return y;
}

YieldResult singlet_yield_time_domain(const DensityMatrix& rho0, const Liouvillian& generator,
                                      double eps_trunc) {
  const auto start = Clock::now();
  const KineticModel& k = generator.kinetics();
  require_decay(k);
  if (!(eps_trunc > 0.0 && eps_trunc <= 1e-3)) {
    throw InvalidArgument("eps_trunc must lie in (0, 1e-3]");
  }
  const double t_max = 100.0 / min_positive_rate(k);
  const double dt = 0.25 / (k.k_singlet + k.k_triplet);
  const StepIntegral s = integrate_step(generator.generator(), generator.singlet_projector(), dt);
  const StepIntegral t = integrate_step(generator.generator(), generator.triplet_projector(), dt);
  const Operator& v = s.propagator;

  Operator rho = rho0.matrix;
  double int_s = 0.0;
  double int_t = 0.0;
  double trace = real_trace(rho);
  double elapsed = 0.0;
  while (trace >= eps_trunc) {
    if (elapsed >= t_max) {
      std::ostringstream msg;
      msg << "trace " << trace << " still above " << eps_trunc << " at T_max = " << t_max
          << " us";
      throw NoConvergence(msg.str());
    }
    int_s += expectation(s.integral, rho);
    int_t += expectation(t.integral, rho);
    rho = v * rho * v.adjoint();
    trace = real_trace(rho);
    elapsed += dt;
  }
  YieldResult y;
  y.phi_singlet = k.k_singlet * int_s;
  y.phi_triplet = k.k_triplet * int_t;
  y.truncation_residual = trace;
  y.wall_time = seconds_since(start);
  return y;
}

YieldResult singlet_yield(const DensityMatrix& rho0, const Liouvillian& generator,
                          double eps_trunc) {
  require_decay(generator.kinetics());
  try {
    return singlet_yield_resolvent(rho0, generator);
  } catch (const NumericalError&) {
    return singlet_yield_time_domain(rho0, generator, eps_trunc);
  }
}

YieldResult driven_singlet_yield(const DensityMatrix& rho0, const SpinSystem& system,
                                 const FieldProtocol& protocol,
                                 const KineticModel& kinetics, double dt) {
  const auto start = Clock::now();
  check_driven_step(protocol, dt);
  validate(kinetics);
  require_decay(kinetics);
  const SpinBasis basis(system);
  if (!protocol.rf_enabled || protocol.rf_b1 == 0.0) {
    const Liouvillian gen =
        haberkorn_step_generator(static_hamiltonian(basis, system, protocol.b0), basis, kinetics);
    return singlet_yield(rho0, gen);
  }
  const Operator ps = singlet_projector(basis);
  const Operator pt = triplet_projectors(basis).total;
  const DrivenGenerator gen = make_driven_generator(basis, system, protocol, kinetics, ps, pt);

  const double period = 1.0 / protocol.rf_frequency;
  const auto steps = static_cast<std::size_t>(std::ceil(period / dt - 1e-9));
  const double h = period / static_cast<double>(steps);

  std::vector<Operator> props(steps);
  std::vector<Operator> int_s(steps);
  std::vector<Operator> int_t(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const Operator omega = gen.magnus(static_cast<double>(k) * h, h);
    const Operator mean_gen = omega / h;
    StepIntegral si = integrate_step(mean_gen, ps, h);
    int_t[k] = integrate_step(mean_gen, pt, h).integral;
    props[k] = std::move(si.propagator);
    int_s[k] = std::move(si.integral);
  }
  // Period functional W = sum_k U_{k-1}^dagger J_k U_{k-1}, U_{k-1} the
  // product of the first k-1 step propagators (Horner form).
  Operator ws = int_s[steps - 1];
  Operator wt = int_t[steps - 1];
  for (std::size_t k = steps - 1; k-- > 0;) {
    ws = int_s[k] + props[k].adjoint() * ws * props[k];
    wt = int_t[k] + props[k].adjoint() * wt * props[k];
  }
  Operator period_map = props[0];
  for (std::size_t k = 1; k < steps; ++k) period_map = props[k] * period_map;

  YieldResult y;
  y.phi_singlet = kinetics.k_singlet * expectation(stein_sum(period_map, ws), rho0.matrix);
  y.phi_triplet = kinetics.k_triplet * expectation(stein_sum(period_map, wt), rho0.matrix);
  y.truncation_residual = 0.0;
  y.wall_time = seconds_since(start);
  return y;
}

}  // namespace radpair
