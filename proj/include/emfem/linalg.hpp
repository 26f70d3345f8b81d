#pragma once

#include "emfem/forms.hpp"

namespace emfem {

struct SolveReport {
  std::string method;        // "direct" or "gmres"
  int iterations = 0;        // 0 for direct
  double rel_residual = 0;   // ||Ax - b|| / ||b||, recomputed from the input matrix
  bool converged = true;
  double factor_seconds = 0;
  double solve_seconds = 0;
};

// Sparse LU. Uses UMFPACK (symmetric-pattern strategy, nested-dissection
// ordering) when available at configure time, otherwise Eigen SparseLU with
// COLAMD ordering and threshold partial pivoting (threshold 0.1). Singular
// matrices raise std::runtime_error; residuals above 1e-10 raise a stderr
// warning.
Eigen::VectorXcd solve_direct(const SparseComplexMatrix& A,
                              const Eigen::VectorXcd& b,
                              SolveReport* report = nullptr);

struct GmresOptions {
  double tol = 1e-10;
  int restart = 100;
  int max_iterations = 2000;
};

// Right-preconditioned restarted GMRES with an ILU(0) preconditioner built
// on the matrix pattern. Non-convergence is reported via the SolveReport
// (and stderr), never silently accepted; an Arnoldi breakdown without
// convergence raises std::runtime_error.
Eigen::VectorXcd solve_gmres(const SparseComplexMatrix& A,
                             const Eigen::VectorXcd& b,
                             const GmresOptions& opts = {},
                             SolveReport* report = nullptr);

}  // namespace emfem
