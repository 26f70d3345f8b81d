#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "emfem/edge_fem.hpp"

namespace emfem {

using BoundaryField = std::function<CVec3(const Vec3&, const Vec3&)>;

struct ProblemParams {
  double kappa = 1.0;
  double lambda = 1.0;
  std::array<Complex, 3> gamma{};  // penalty value per FaceClass

  bool penalty_active() const {
    return gamma[0] != Complex(0) || gamma[1] != Complex(0) ||
           gamma[2] != Complex(0);
  }
  void validate() const;  // kappa > 0, lambda > 0
  // Admissibility notes (never errors): Re gamma < 0 is admissible only above
  // a mesh-dependent -alpha_0; Im gamma > 0 breaks the stability theory.
  std::vector<std::string> diagnostics() const;
};

// Reference penalty preset: gamma_1 = -sqrt(2)/24 - 0.01i,
// gamma_2 = -sqrt(6)/72 - 0.01i, gamma_3 = -sqrt(2)/48 - 0.01i.
std::array<Complex, 3> reference_penalty_gammas();

struct Triplet {
  int r, c;
  Complex v;
};

// Compressed-row complex matrix; assembled deterministically (stable sort of
// the triplet stream, in-order duplicate summation).
struct SparseComplexMatrix {
  int rows = 0, cols = 0;
  std::vector<int> row_ptr;  // size rows + 1
  std::vector<int> col_idx;
  std::vector<Complex> val;

  static SparseComplexMatrix from_triplets(int rows, int cols,
                                           const std::vector<Triplet>& ts);

  int nnz() const { return static_cast<int>(val.size()); }
  Eigen::VectorXcd multiply(const Eigen::VectorXcd& x) const;
  double max_abs() const;
  // max |A_ij - A_ji| over the union pattern.
  double symmetry_error() const;
  // Identical structure and bitwise-identical values.
  bool exactly_equal(const SparseComplexMatrix& other) const;
  void write_matrix_market(std::ostream& os) const;
};

// Building blocks (real symmetric bilinear forms, no scalar factors):
// (curl u, curl v), (u, v), and <u_T, v_T> over the boundary.
SparseComplexMatrix assemble_curl_curl(const Mesh& m, const DofMap& dm);
SparseComplexMatrix assemble_mass(const Mesh& m, const DofMap& dm);
SparseComplexMatrix assemble_boundary_mass(const Mesh& m, const DofMap& dm);

// J[i][j] = sum_f gamma_f h_f <[curl phi_j], [curl phi_i]>_f over interior
// faces; exact (curls are constant per tet). All-zero gammas produce an
// empty matrix so the EEM and gamma=0 CIP paths are bit-identical.
SparseComplexMatrix assemble_penalty(const Mesh& m, const DofMap& dm,
                                     const ProblemParams& params);
SparseComplexMatrix assemble_penalty_weights(const Mesh& m, const DofMap& dm,
                                             const std::array<Complex, 3>& gamma);

// A[i][j] = (curl phi_j, curl phi_i) - kappa^2 (phi_j, phi_i)
//           - i kappa lambda <phi_jT, phi_iT>_Gamma.
SparseComplexMatrix assemble_a(const Mesh& m, const DofMap& dm,
                               const ProblemParams& params);
// a + penalty.
SparseComplexMatrix assemble_a_gamma(const Mesh& m, const DofMap& dm,
                                     const ProblemParams& params);
// a + penalty + 2 kappa^2 (u, v): the coercive shifted form.
SparseComplexMatrix assemble_hat_a(const Mesh& m, const DofMap& dm,
                                   const ProblemParams& params);

// b[i] = (f, phi_i) + <g, phi_iT>_Gamma; g is projected tangentially at the
// quadrature points.
Eigen::VectorXcd assemble_rhs(const Mesh& m, const DofMap& dm,
                              const ProblemParams& params,
                              const VectorField& f, const BoundaryField& g,
                              int quad_degree = 6);

}  // namespace emfem
