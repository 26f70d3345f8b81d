#include "emfem/linalg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef EMFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <chrono>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace emfem {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double rel_residual(const SparseComplexMatrix& A, const Eigen::VectorXcd& x,
                    const Eigen::VectorXcd& b) {
  const double nb = b.norm();
  const double nr = (A.multiply(x) - b).norm();
  return nb > 0 ? nr / nb : nr;
}

}  // namespace

Eigen::VectorXcd solve_direct(const SparseComplexMatrix& A,
                              const Eigen::VectorXcd& b, SolveReport* report) {
  if (A.rows != A.cols || A.rows != b.size())
    throw std::invalid_argument("solve_direct: dimension mismatch");

  SolveReport rep;
  rep.method = "direct";

  Eigen::SparseMatrix<Complex> M(A.rows, A.cols);
  {
    std::vector<Eigen::Triplet<Complex>> ts;
    ts.reserve(A.val.size());
    for (int r = 0; r < A.rows; ++r)
      for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
        ts.emplace_back(r, A.col_idx[k], A.val[k]);
    M.setFromTriplets(ts.begin(), ts.end());
    M.makeCompressed();
  }

  const auto t0 = std::chrono::steady_clock::now();
#ifdef EMFEM_HAVE_UMFPACK
  Eigen::UmfPackLU<Eigen::SparseMatrix<Complex>> lu;
  // The assembled pattern is symmetric; nested-dissection ordering keeps the
  // fill of the 3D problem well below the AMD/COLAMD defaults.
  lu.umfpackControl()[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  lu.umfpackControl()[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  lu.compute(M);
  if (lu.info() != Eigen::Success || lu.umfpackFactorizeReturncode() != 0)
    throw std::runtime_error(
        "solve_direct: factorization failed (umfpack status " +
        std::to_string(lu.umfpackFactorizeReturncode()) + ")");
#else
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>> lu;
  lu.setPivotThreshold(0.1);
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_direct: factorization failed: " +
                             lu.lastErrorMessage());
#endif
  rep.factor_seconds = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  Eigen::VectorXcd x = lu.solve(b);
  rep.solve_seconds = seconds_since(t1);

  rep.rel_residual = rel_residual(A, x, b);
  if (rep.rel_residual > 1e-10)
    std::cerr << "warning: solve_direct residual " << rep.rel_residual
              << " exceeds 1e-10\n";
  if (report) *report = rep;
  return x;
}

namespace {

// ILU(0): incomplete LU on the existing sparsity pattern. L has unit
// diagonal; both factors overwrite a copy of the matrix values.
struct Ilu0 {
  const SparseComplexMatrix* A;
  std::vector<Complex> lu;
  std::vector<int> diag;  // offset of the diagonal entry per row

  explicit Ilu0(const SparseComplexMatrix& mat) : A(&mat), lu(mat.val) {
    const int n = mat.rows;
    diag.assign(n, -1);
    for (int r = 0; r < n; ++r)
      for (int k = mat.row_ptr[r]; k < mat.row_ptr[r + 1]; ++k)
        if (mat.col_idx[k] == r) diag[r] = k;
    for (int r = 0; r < n; ++r)
      if (diag[r] < 0)
        throw std::runtime_error("ilu0: missing diagonal entry in row " +
                                 std::to_string(r));

    std::vector<int> pos(n, -1);  // column -> offset in the current row
    double scale = 0;
    for (const Complex& v : mat.val) scale = std::max(scale, std::abs(v));
    const double pivot_floor = 1e-14 * scale;

    for (int i = 0; i < n; ++i) {
      for (int k = mat.row_ptr[i]; k < mat.row_ptr[i + 1]; ++k)
        pos[mat.col_idx[k]] = k;
      for (int k = mat.row_ptr[i]; k < mat.row_ptr[i + 1]; ++k) {
        const int c = mat.col_idx[k];
        if (c >= i) break;  // columns are sorted within the row
        Complex piv = lu[diag[c]];
        if (std::abs(piv) < pivot_floor)
          piv = piv == Complex(0) ? Complex(pivot_floor)
                                  : piv * (pivot_floor / std::abs(piv));
        const Complex lik = lu[k] / piv;
        lu[k] = lik;
        for (int kk = diag[c] + 1; kk < mat.row_ptr[c + 1]; ++kk) {
          const int j = mat.col_idx[kk];
          const int p = pos[j];
          if (p >= 0 && j > c) lu[p] -= lik * lu[kk];
        }
      }
      for (int k = mat.row_ptr[i]; k < mat.row_ptr[i + 1]; ++k)
        pos[mat.col_idx[k]] = -1;
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& r) const {
    const int n = A->rows;
    Eigen::VectorXcd y(n);
    for (int i = 0; i < n; ++i) {
      Complex s = r[i];
      for (int k = A->row_ptr[i]; k < A->row_ptr[i + 1]; ++k) {
        const int c = A->col_idx[k];
        if (c >= i) break;
        s -= lu[k] * y[c];
      }
      y[i] = s;
    }
    Eigen::VectorXcd x(n);
    for (int i = n - 1; i >= 0; --i) {
      Complex s = y[i];
      for (int k = diag[i] + 1; k < A->row_ptr[i + 1]; ++k)
        s -= lu[k] * x[A->col_idx[k]];
      Complex piv = lu[diag[i]];
      if (piv == Complex(0)) piv = 1;
      x[i] = s / piv;
    }
    return x;
  }
};

}  // namespace

Eigen::VectorXcd solve_gmres(const SparseComplexMatrix& A,
                             const Eigen::VectorXcd& b,
                             const GmresOptions& opts, SolveReport* report) {
  if (A.rows != A.cols || A.rows != b.size())
    throw std::invalid_argument("solve_gmres: dimension mismatch");

  SolveReport rep;
  rep.method = "gmres";
  const int n = A.rows;
  const double nb = b.norm();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  if (nb == 0) {
    if (report) *report = rep;
    return x;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Ilu0 precond(A);
  rep.factor_seconds = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const int m = std::max(1, opts.restart);
  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
  Eigen::VectorXcd cs(m), g(m + 1);
  Eigen::VectorXd sn_c(m);  // Givens cosines (real)

  int total_it = 0;
  bool converged = false;
  while (total_it < opts.max_iterations && !converged) {
    Eigen::VectorXcd r = b - A.multiply(x);
    const double beta = r.norm();
    if (beta / nb <= opts.tol) {
      converged = true;
      break;
    }
    V.col(0) = r / beta;
    g.setZero();
    g[0] = beta;

    int j = 0;
    bool breakdown = false;
    for (; j < m && total_it < opts.max_iterations; ++j, ++total_it) {
      Eigen::VectorXcd w = A.multiply(precond.apply(V.col(j)));
      for (int i = 0; i <= j; ++i) {
        const Complex hij = V.col(i).dot(w);  // conjugates V
        H(i, j) = hij;
        w -= hij * V.col(i);
      }
      const double hnext = w.norm();
      H(j + 1, j) = hnext;

      if (hnext > 1e-14 * beta) {
        V.col(j + 1) = w / hnext;
      } else {
        breakdown = true;  // happy breakdown: subspace is invariant
      }

      for (int i = 0; i < j; ++i) {
        const Complex t = sn_c[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i + 1, j) = -std::conj(cs[i]) * H(i, j) + sn_c[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const Complex a = H(j, j);
      const Complex bb = H(j + 1, j);
      const double t = std::sqrt(std::norm(a) + std::norm(bb));
      if (std::abs(a) > 0) {
        sn_c[j] = std::abs(a) / t;
        cs[j] = (a / std::abs(a)) * std::conj(bb) / t;
      } else {
        sn_c[j] = 0;
        cs[j] = 1;
      }
      H(j, j) = sn_c[j] * a + cs[j] * bb;
      H(j + 1, j) = 0;
      g[j + 1] = -std::conj(cs[j]) * g[j];
      g[j] *= sn_c[j];

      if (std::abs(g[j + 1]) / nb <= opts.tol || breakdown) {
        ++j;
        ++total_it;
        break;
      }
    }

    // Back-substitute y and apply the correction x += M^{-1} (V y).
    Eigen::VectorXcd y(j);
    for (int i = j - 1; i >= 0; --i) {
      Complex s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      if (H(i, i) == Complex(0))
        throw std::runtime_error("solve_gmres: singular Hessenberg diagonal");
      y[i] = s / H(i, i);
    }
    x += precond.apply(V.leftCols(j) * y);

    const double res = rel_residual(A, x, b);
    if (res <= opts.tol) converged = true;
    if (breakdown && !converged)
      throw std::runtime_error(
          "solve_gmres: Arnoldi breakdown without convergence");
  }
  rep.solve_seconds = seconds_since(t1);
  rep.iterations = total_it;
  rep.converged = converged;
  rep.rel_residual = rel_residual(A, x, b);
  if (!converged)
    std::cerr << "warning: solve_gmres did not reach tol " << opts.tol
              << " within " << opts.max_iterations
              << " iterations (residual " << rep.rel_residual << ")\n";
  if (report) *report = rep;
  return x;
}

}  // namespace emfem
