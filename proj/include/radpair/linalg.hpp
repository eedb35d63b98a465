#pragma once

#include <Eigen/Dense>
#include <complex>

namespace radpair {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;

Operator kron(const Operator& a, const Operator& b);

Operator commutator(const Operator& a, const Operator& b);

// Largest absolute entry.
double max_abs(const Operator& m);

// ||M - M^dagger||_inf (entrywise).
double hermiticity_defect(const Operator& m);

Operator expm(const Operator& m);

// Solves A^dagger X + X A = -Q by complex Schur reduction (Bartels-Stewart).
// The Schur form is computed once so several right-hand sides are cheap.
// Throws NumericalError unless every eigenvalue of A has real part below
// -min_gap / 2, i.e. unless the generator strictly decays.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const Operator& a, double min_gap = 1e-12);
  Operator solve(const Operator& q) const;

 private:
  Operator t_;
  Operator u_;
};

Operator solve_lyapunov(const Operator& a, const Operator& q, double min_gap = 1e-12);

// Van Loan block exponential for a constant generator A over [0, dt]:
//   propagator = exp(A dt)
//   integral   = int_0^dt exp(A^dagger s) Q exp(A s) ds
struct StepIntegral {
  Operator propagator;
  Operator integral;
};
StepIntegral integrate_step(const Operator& a, const Operator& q, double dt);

// X = sum_{m>=0} (V^dagger)^m W V^m by repeated squaring. Throws
// NoConvergence if V is not a contraction within `max_doublings`.
Operator stein_sum(const Operator& v, const Operator& w, int max_doublings = 80);

}  // namespace radpair
