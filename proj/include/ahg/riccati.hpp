#pragma once

#include "ahg/numerics.hpp"

namespace ahg {

// ---------------------------------------------------------------------------
// Matrix Riccati initial value problem
//     dX/drho = -X^2 - A X - X A^* + S(rho),   X Hermitian when S is,
// with either an explicit Hermitian start or the singular comparison start
// X(rho0) = I/rho0 + (rho0/3) S(0) at rho0 = 1e-4 (the I/rho pole of the
// distance Hessian plus its first regular Taylor term).
// ---------------------------------------------------------------------------

struct RiccatiProblem {
  int n = 1;
  std::function<CMatX(double)> A;  // empty -> 0
  std::function<CMatX(double)> S;  // empty -> 0
  double rho0 = 1e-4;
  double rho1 = 3.0;
  std::optional<CMatX> X0;  // explicit start; otherwise singular start at rho0
};

struct RiccatiSolution {
  std::vector<double> rho;
  std::vector<CMatX> X;
  bool escaped = false;
  double escape_rho = std::numeric_limits<double>::infinity();

  const CMatX& at(size_t k) const { return X[k]; }
};

namespace detail {
inline CMatX riccati_rhs(const RiccatiProblem& prob, double r, const CMatX& X) {
  CMatX rhs = -X * X;
  if (prob.A) {
    CMatX Ar = prob.A(r);
    rhs -= Ar * X + X * Ar.adjoint();
  }
  if (prob.S) rhs += prob.S(r);
  return rhs;
}
}  // namespace detail

// Integrate and report values on the given grid (ascending, >= rho0).
// Adaptive sub-stepping keeps h * ||X|| small, which also carries the
// solution off the singular start; finite escape is reported, not thrown.
inline RiccatiSolution riccati_solve(const RiccatiProblem& prob,
                                     const std::vector<double>& grid, double base_step = 1e-3) {
  if (grid.empty()) throw DomainError("riccati_solve: empty grid");
  const int n = prob.n;
  double r = prob.rho0;
  CMatX X;
  if (prob.X0) {
    X = *prob.X0;
  } else {
    X = CMatX::Identity(n, n) / prob.rho0;
    if (prob.S) X += (prob.rho0 / 3.0) * prob.S(prob.rho0);
  }

  RiccatiSolution sol;
  size_t gi = 0;
  // pick up grid points at (or before) the start
  while (gi < grid.size() && grid[gi] <= r + 1e-15) {
    sol.rho.push_back(grid[gi]);
    sol.X.push_back(X);
    ++gi;
  }
  const double blowup = 1e8;
  while (gi < grid.size()) {
    double target = grid[gi];
    while (r < target - 1e-14) {
      double nx = X.cwiseAbs().maxCoeff();
      if (!std::isfinite(nx) || nx > blowup) {
        sol.escaped = true;
        sol.escape_rho = r;
        return sol;
      }
      double h = std::min({base_step, 0.01 / std::max(nx, 1.0), target - r});
      CMatX k1 = detail::riccati_rhs(prob, r, X);
      CMatX k2 = detail::riccati_rhs(prob, r + h / 2, X + (h / 2) * k1);
      CMatX k3 = detail::riccati_rhs(prob, r + h / 2, X + (h / 2) * k2);
      CMatX k4 = detail::riccati_rhs(prob, r + h, X + h * k3);
      X += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
      r += h;
    }
    sol.rho.push_back(target);
    sol.X.push_back(X);
    ++gi;
  }
  return sol;
}

inline std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> v(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<size_t>(i)] = a + (b - a) * i / (count - 1);
  return v;
}

// Smallest eigenvalue of the Hermitian part of M.
inline double min_eig_hermitian(const CMatX& M) {
  Eigen::SelfAdjointEigenSolver<CMatX> es(0.5 * (M + M.adjoint()));
  return es.eigenvalues().minCoeff();
}

}  // namespace ahg
