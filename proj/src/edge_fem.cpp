#include "emfem/edge_fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emfem/quadrature.hpp"

namespace emfem {

int DofMap::n_boundary_edges() const {
  int c = 0;
  for (uint8_t b : edge_on_boundary) c += b != 0;
  return c;
}

DofMap build_dofmap(const Mesh& m) {
  DofMap dm;
  dm.edge_count = m.n_edges();
  dm.edge_on_boundary.assign(static_cast<size_t>(m.n_edges()), 0);
  // An edge lies on Gamma iff it is an edge of a boundary face.
  for (int f : m.boundary_faces) {
    const auto& fv = m.faces[f].v;
    const int t = m.faces[f].tet[0];
    for (int k = 0; k < 6; ++k) {
      const int e = m.tet_edges[t][k];
      const int a = m.edges[e][0], b = m.edges[e][1];
      int hits = 0;
      for (int v : fv) hits += (v == a || v == b);
      if (hits == 2) dm.edge_on_boundary[e] = 1;
    }
  }
  return dm;
}

TetFrame tet_frame(const Mesh& m, int t) {
  TetFrame fr;
  fr.tet = t;
  fr.vert = m.tet_vertices(t);

  Eigen::Matrix3d A;
  A.col(0) = fr.vert[1] - fr.vert[0];
  A.col(1) = fr.vert[2] - fr.vert[0];
  A.col(2) = fr.vert[3] - fr.vert[0];
  const double det = A.determinant();
  fr.volume = det / 6.0;
  if (!(fr.volume > 0))
    throw std::invalid_argument("tet_frame: degenerate or inverted tet");

  const Eigen::Matrix3d Ainv = A.inverse();
  for (int i = 1; i < 4; ++i) fr.grad_lambda[i] = Ainv.row(i - 1).transpose();
  fr.grad_lambda[0] = -(fr.grad_lambda[1] + fr.grad_lambda[2] + fr.grad_lambda[3]);

  constexpr std::array<std::array<int, 2>, 6> kLocalEdges = {
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (int k = 0; k < 6; ++k) {
    fr.edge_ids[k] = m.tet_edges[t][k];
    int a = kLocalEdges[k][0], b = kLocalEdges[k][1];
    if (m.tets[t][a] > m.tets[t][b]) std::swap(a, b);
    fr.ev[k] = {a, b};
    fr.whitney_curl[k] = 2.0 * fr.grad_lambda[a].cross(fr.grad_lambda[b]);
  }
  return fr;
}

std::array<double, 4> TetFrame::barycentric(const Vec3& p) const {
  std::array<double, 4> l;
  for (int i = 0; i < 4; ++i)
    l[i] = grad_lambda[i].dot(p - vert[0]) + (i == 0 ? 1.0 : 0.0);
  return l;
}

std::array<ShapeValue, 12> local_basis_eval(const TetFrame& fr, const Vec3& p) {
  const auto l = fr.barycentric(p);
  std::array<ShapeValue, 12> out;
  for (int k = 0; k < 6; ++k) {
    const int a = fr.ev[k][0], b = fr.ev[k][1];
    out[2 * k].value = l[a] * fr.grad_lambda[b] - l[b] * fr.grad_lambda[a];
    out[2 * k].curl = fr.whitney_curl[k];
    out[2 * k + 1].value = l[a] * fr.grad_lambda[b] + l[b] * fr.grad_lambda[a];
    out[2 * k + 1].curl = Vec3::Zero();
  }
  return out;
}

FeFunction interpolate(const Mesh& m, const DofMap& dm, const VectorField& F) {
  FeFunction u;
  u.mesh = &m;
  u.coeff = Eigen::VectorXcd::Zero(dm.size());

  const auto rule = gauss_rule_1d(4);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Vec3 a = m.vertices[m.edges[e][0]];
    const Vec3 b = m.vertices[m.edges[e][1]];
    const Vec3 d = b - a;
    const double len = d.norm();
    const Vec3 t = d / len;
    Complex c1 = 0, c2 = 0;
    for (const auto& q : rule) {
      const Complex vt = cdot(F(a + q.x * d), t);
      c1 += q.w * vt;
      c2 += q.w * vt * (1.0 - 2.0 * q.x);  // q2 = l_lo - l_hi along the edge
    }
    u.coeff[DofMap::whitney_dof(e)] = c1 * len;
    u.coeff[DofMap::gradient_dof(e)] = 3.0 * c2 * len;
  }
  return u;
}

FeFunction zero_boundary_dofs(const DofMap& dm, const FeFunction& u) {
  FeFunction v = u;
  for (int e = 0; e < dm.edge_count; ++e)
    if (dm.edge_on_boundary[e]) {
      v.coeff[DofMap::whitney_dof(e)] = 0;
      v.coeff[DofMap::gradient_dof(e)] = 0;
    }
  return v;
}

FieldValue evaluate(const FeFunction& u, const TetFrame& fr, const Vec3& p) {
  {
    const auto l = fr.barycentric(p);
    const double tol = 1e-10;
    for (double li : l)
      if (li < -tol || li > 1 + tol)
        throw std::invalid_argument("evaluate: point outside tet");
  }
  const auto shapes = local_basis_eval(fr, p);
  FieldValue r{CVec3::Zero(), CVec3::Zero()};
  for (int k = 0; k < 12; ++k) {
    const Complex c = u.coeff[local_dof_to_global(fr, k)];
    r.value += c * shapes[k].value.cast<Complex>();
    r.curl += c * shapes[k].curl.cast<Complex>();
  }
  return r;
}

FieldValue evaluate_at(const FeFunction& u, const Vec3& p) {
  const Mesh& m = *u.mesh;
  auto cell_index = [&](double x, int axis) {
    int i = static_cast<int>(std::floor((x - m.box.lo[axis]) / m.h0));
    return std::clamp(i, 0, m.n - 1);
  };
  const int ix = cell_index(p[0], 0), iy = cell_index(p[1], 1),
            iz = cell_index(p[2], 2);
  const int cell = ix + m.n * (iy + m.n * iz);

  int best = -1;
  double best_min = -1e30;
  for (int k = 0; k < 6; ++k) {
    const int t = 6 * cell + k;
    const auto l = tet_frame(m, t).barycentric(p);
    const double mn = std::min({l[0], l[1], l[2], l[3]});
    if (mn > best_min) {
      best_min = mn;
      best = t;
    }
  }
  if (best_min < -1e-10)
    throw std::invalid_argument("evaluate_at: point outside mesh");
  return evaluate(u, tet_frame(m, best), p);
}

}  // namespace emfem
