#pragma once

#include <complex>
#include <functional>

#include "emfem/mesh.hpp"

namespace emfem {

using Complex = std::complex<double>;
using CVec3 = Eigen::Vector3cd;
using VectorField = std::function<CVec3(const Vec3&)>;

// Plain (unconjugated) dot products; Eigen's .dot() conjugates its first
// argument for complex types, which is never what the bilinear forms need.
inline Complex cdot(const CVec3& a, const Vec3& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}
inline Complex cdot(const CVec3& a, const CVec3& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

// Two DOFs per global edge: the Whitney moment and the gradient moment.
struct DofMap {
  int edge_count = 0;
  std::vector<uint8_t> edge_on_boundary;

  int size() const { return 2 * edge_count; }
  static int whitney_dof(int edge) { return 2 * edge; }
  static int gradient_dof(int edge) { return 2 * edge + 1; }
  static int dof_edge(int dof) { return dof / 2; }
  static bool dof_is_gradient(int dof) { return (dof & 1) != 0; }
  bool dof_on_boundary(int dof) const {
    return edge_on_boundary[static_cast<size_t>(dof / 2)] != 0;
  }
  int n_boundary_edges() const;
};

DofMap build_dofmap(const Mesh& m);

// Constant per-tet data reused across evaluation points. Local edge k holds
// endpoint slots ev[k] ordered so the global vertex ids run low -> high; the
// shapes below are therefore already in global orientation.
struct TetFrame {
  int tet = -1;
  std::array<Vec3, 4> vert;
  std::array<Vec3, 4> grad_lambda;
  double volume = 0;
  std::array<int, 6> edge_ids;
  std::array<std::array<int, 2>, 6> ev;
  std::array<Vec3, 6> whitney_curl;  // 2 grad(l_a) x grad(l_b), constant

  std::array<double, 4> barycentric(const Vec3& p) const;
};

TetFrame tet_frame(const Mesh& m, int t);

struct ShapeValue {
  Vec3 value;
  Vec3 curl;
};

// 12 shapes per tet: slot 2k is the Whitney function of local edge k,
// slot 2k+1 the gradient function grad(l_a l_b). Curls of gradient shapes
// are exactly zero.
std::array<ShapeValue, 12> local_basis_eval(const TetFrame& fr, const Vec3& p);

inline int local_dof_to_global(const TetFrame& fr, int local) {
  const int edge = fr.edge_ids[static_cast<size_t>(local / 2)];
  return 2 * edge + (local & 1);
}

struct FeFunction {
  const Mesh* mesh = nullptr;
  Eigen::VectorXcd coeff;
};

// Edge-moment interpolation: per edge, c1 = int_e v.t ds and
// c2 = 3 int_e (v.t) q ds with q = l_lo - l_hi (+1 at the low-index
// endpoint), by 4-point Gauss. The factor 3 makes the moments dual to the
// shapes (the 12x12 functional/shape matrix is the identity).
FeFunction interpolate(const Mesh& m, const DofMap& dm, const VectorField& F);

FeFunction zero_boundary_dofs(const DofMap& dm, const FeFunction& u);

struct FieldValue {
  CVec3 value;
  CVec3 curl;
};

FieldValue evaluate(const FeFunction& u, const TetFrame& fr, const Vec3& p);

// Point evaluation with structured-grid cell lookup; throws if p lies
// outside the mesh beyond a relative tolerance.
FieldValue evaluate_at(const FeFunction& u, const Vec3& p);

}  // namespace emfem
