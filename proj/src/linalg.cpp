#include "radpair/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "radpair/errors.hpp"

namespace radpair {

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

double max_abs(const Operator& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Operator& m) { return max_abs(m - m.adjoint()); }

Operator expm(const Operator& m) { return m.exp(); }

LyapunovSolver::LyapunovSolver(const Operator& a, double min_gap) {
  Eigen::ComplexSchur<Operator> schur(a);
  if (schur.info() != Eigen::Success) {
    throw NumericalError("complex Schur decomposition failed");
  }
  t_ = schur.matrixT();
  u_ = schur.matrixU();
  double slowest = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < t_.rows(); ++i) slowest = std::max(slowest, t_(i, i).real());
  if (!(slowest < -0.5 * min_gap)) {
    std::ostringstream msg;
    msg << "generator does not strictly decay: max Re(lambda) = " << slowest;
    throw NumericalError(msg.str());
  }
}

Operator LyapunovSolver::solve(const Operator& q) const {
  const Eigen::Index n = t_.rows();
  // T^dagger Y + Y T = -U^dagger Q U with T upper triangular.
  const Operator c = -(u_.adjoint() * q * u_);
  Operator y = Operator::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex rhs = c(i, j);
      for (Eigen::Index k = 0; k < i; ++k) rhs -= std::conj(t_(k, i)) * y(k, j);
      for (Eigen::Index k = 0; k < j; ++k) rhs -= y(i, k) * t_(k, j);
      y(i, j) = rhs / (std::conj(t_(i, i)) + t_(j, j));
    }
  }
  return u_ * y * u_.adjoint();
}

Operator solve_lyapunov(const Operator& a, const Operator& q, double min_gap) {
  return LyapunovSolver(a, min_gap).solve(q);
}

StepIntegral integrate_step(const Operator& a, const Operator& q, double dt) {
  const Eigen::Index n = a.rows();
  Operator block = Operator::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -a.adjoint();
  block.topRightCorner(n, n) = q;
  block.bottomRightCorner(n, n) = a;
  const Operator e = (block * dt).exp();
  StepIntegral out;
  out.propagator = e.bottomRightCorner(n, n);
  out.integral = out.propagator.adjoint() * e.topRightCorner(n, n);
  return out;
}

Operator stein_sum(const Operator& v, const Operator& w, int max_doublings) {
  Operator x = w;
  Operator p = v;
  for (int it = 0; it < max_doublings; ++it) {
    const double pn = p.norm();
    if (pn * pn < 1e-16) return x;
    x += p.adjoint() * x * p;
    p = p * p;
  }
  throw NoConvergence("period map is not contracting; yield sum diverges");
}

}  // namespace radpair
