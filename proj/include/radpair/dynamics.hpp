#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radpair/hamiltonian.hpp"
#include "radpair/spin_core.hpp"

namespace radpair {

// Rates in 1/us. Spin relaxation is not modelled.
struct KineticModel {
  double k_singlet = 1.0;
  double k_triplet = 1.0;

  // 1 / max(kS, kT); reporting only.
  double rp_lifetime_proxy() const;
};

void validate(const KineticModel& kinetics);

enum class InitialStateKind { SingletBorn, TripletBorn, Mixed };

InitialStateKind parse_initial_state(std::string_view name);
std::string to_string(InitialStateKind kind);

struct DensityMatrix {
  Operator matrix;
  double time = 0.0;  // us
};

// singlet_born: P_S / tr(P_S); triplet_born: P_T / tr(P_T); mixed: 1 / dim.
DensityMatrix initial_state(const SpinBasis& basis,
                            InitialStateKind kind = InitialStateKind::SingletBorn);
DensityMatrix initial_state(const SpinSystem& system,
                            InitialStateKind kind = InitialStateKind::SingletBorn);

struct YieldResult {
  double phi_singlet = 0.0;
  double phi_triplet = 0.0;
  double truncation_residual = 0.0;
  double wall_time = 0.0;  // s
};

// Haberkorn master equation
//   d rho/dt = -2 pi i [H, rho] - (kS/2){P_S, rho} - (kT/2){P_T, rho}
// with H in MHz and t in us. Stored in the factored form
//   d rho/dt = A rho + rho A^dagger,  A = -2 pi i H - (kS P_S + kT P_T)/2.
class Liouvillian {
 public:
  Liouvillian(Operator hamiltonian, Operator singlet, Operator triplet,
              KineticModel kinetics);

  std::size_t dim() const { return static_cast<std::size_t>(generator_.rows()); }
  const Operator& hamiltonian() const { return hamiltonian_; }
  const Operator& generator() const { return generator_; }
  const Operator& singlet_projector() const { return singlet_; }
  const Operator& triplet_projector() const { return triplet_; }
  const KineticModel& kinetics() const { return kinetics_; }

  Operator apply(const Operator& rho) const;

  // Dense dim^2 x dim^2 matrix acting on column-stacked rho. Only for
  // dim <= 128.
  Eigen::MatrixXcd superoperator() const;

  bool trace_preserving() const {
    return kinetics_.k_singlet == 0.0 && kinetics_.k_triplet == 0.0;
  }

 private:
  Operator hamiltonian_;
  Operator singlet_;
  Operator triplet_;
  KineticModel kinetics_;
  Operator generator_;
};

// Throws InvalidHamiltonian when H is not Hermitian.
Liouvillian haberkorn_step_generator(const Operator& hamiltonian, const SpinBasis& basis,
                                     const KineticModel& kinetics);
Liouvillian haberkorn_step_generator(const Operator& hamiltonian, const SpinSystem& system,
                                     const KineticModel& kinetics);

// rho(t) for each t (measured from rho0.time) under a time-independent
// generator, from one eigendecomposition of A.
std::vector<DensityMatrix> propagate_static(const DensityMatrix& rho0,
                                            const Liouvillian& generator,
                                            std::span<const double> t_grid);

// Lab-frame propagation with the RF carrier resolved: fourth-order Magnus
// exponential steps of the time-dependent generator. dt must satisfy
// dt <= 1 / (20 nu_RF), otherwise StepSizeError. Returns every
// `output_stride`-th state including t = 0 and t_end.
std::vector<DensityMatrix> propagate_driven(const DensityMatrix& rho0,
                                            const SpinSystem& system,
                                            const FieldProtocol& protocol,
                                            const KineticModel& kinetics, double dt,
                                            double t_end, std::size_t output_stride = 1);

inline constexpr double kDefaultTruncation = 1e-6;

// Phi_S = kS int_0^inf tr(P_S rho) dt. Uses the closed-form resolvent
// (Lyapunov solve) when the generator is strictly decaying, otherwise the
// time-domain route. Throws NoConvergence if the pair never decays.
YieldResult singlet_yield(const DensityMatrix& rho0, const Liouvillian& generator,
                          double eps_trunc = kDefaultTruncation);

YieldResult singlet_yield_resolvent(const DensityMatrix& rho0, const Liouvillian& generator);

// Exact per-step exponentials, stopping when tr(rho) < eps_trunc or at
// T_max = 100 / min positive rate.
YieldResult singlet_yield_time_domain(const DensityMatrix& rho0,
                                      const Liouvillian& generator,
                                      double eps_trunc = kDefaultTruncation);

// Lab-frame yield with the RF on for the whole radical-pair lifetime. Steps
// of at most dt (rounded so an integer number fits one carrier period) build
// the one-period map, and the infinite sum over periods is taken in closed
// form. Falls back to the static path when RF is off.
YieldResult driven_singlet_yield(const DensityMatrix& rho0, const SpinSystem& system,
                                 const FieldProtocol& protocol,
                                 const KineticModel& kinetics, double dt);

}  // namespace radpair
