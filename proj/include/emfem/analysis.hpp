#pragma once

#include <memory>

#include "emfem/analytic.hpp"
#include "emfem/forms.hpp"

namespace emfem {

struct ErrorReport {
  double l2_abs = 0, l2_rel = 0;
  double hcurl_abs = 0, hcurl_rel = 0;      // (||e||^2 + ||curl e||^2)^1/2
  double energy_abs = 0, energy_rel = 0;    // (||curl e||^2 + k^2||e||^2 + k l ||e_T||^2)^1/2
  double triple_abs = 0, triple_rel = 0;    // energy norm + penalty jump seminorm
  double btang_abs = 0, btang_rel = 0;      // boundary tangential L2
  double jump_sq = 0;                       // sum |gamma_f| h_f ||[curl e]||_f^2
};

// All volume/boundary norms by quadrature of the given degree; the jump
// seminorm is exact (constant curls). Relative errors are normalized by the
// same norms of the exact solution.
ErrorReport compute_errors(const Mesh& m, const DofMap& dm,
                           const FeFunction& Eh,
                           const ManufacturedSolution& exact,
                           const ProblemParams& params, int quad_degree = 6);

enum class ProjectionSign { Plus, Minus };

// RHS of the shifted-form projection systems: Plus gives r_i = hat_a(u, phi_i),
// Minus gives s_i = hat_a(phi_i, u); jump terms vanish for smooth u.
Eigen::VectorXcd hat_a_rhs(const Mesh& m, const DofMap& dm,
                           const ProblemParams& params,
                           const ManufacturedSolution& u, ProjectionSign sign,
                           int quad_degree = 6);

// Projections onto the discrete space through the coercive shifted form:
// P+ solves hat_a(u - P+u, v_h) = 0, P- solves hat_a(v_h, u - P-u) = 0.
// Since hat_A = hat_A^T, the minus sign is realized by conjugation on the
// same factorization.
class EllipticProjector {
 public:
  EllipticProjector(const Mesh& m, const DofMap& dm,
                    const ProblemParams& params, int quad_degree = 6);
  ~EllipticProjector();
  EllipticProjector(EllipticProjector&&) noexcept;

  FeFunction project(const ManufacturedSolution& u, ProjectionSign sign) const;
  FeFunction project(const FeFunction& u, ProjectionSign sign) const;
  const SparseComplexMatrix& matrix() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

FeFunction elliptic_projection(const Mesh& m, const DofMap& dm,
                               const ProblemParams& params,
                               const ManufacturedSolution& u,
                               ProjectionSign sign, int quad_degree = 6);

struct StabilityReport {
  double lhs = 0;    // ||curl E_h|| + k||E_h|| + k||E_hT||_Gamma (+ CIP jump seminorm)
  double rhs = 0;    // ||f|| + ||g||_Gamma
  double ratio = 0;  // lhs / rhs
};

StabilityReport stability_metrics(const Mesh& m, const DofMap& dm,
                                  const FeFunction& Eh,
                                  const ManufacturedSolution& sol,
                                  const ProblemParams& params,
                                  int quad_degree = 6);

// Max over random discrete v_h of |a_gamma(E - E_h, v_h)| normalized by the
// jump-augmented norms. a_gamma(E, v_h) by quadrature of the given degree,
// a_gamma(E_h, v_h) through the assembled matrix.
double galerkin_orthogonality_check(const Mesh& m, const DofMap& dm,
                                    const FeFunction& Eh,
                                    const ManufacturedSolution& exact,
                                    const ProblemParams& params,
                                    int trials = 20, int quad_degree = 6,
                                    uint64_t seed = 20240817);

}  // namespace emfem
