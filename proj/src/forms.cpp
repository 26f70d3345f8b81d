#include "emfem/forms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "emfem/quadrature.hpp"

namespace emfem {

namespace {
const Complex kI{0.0, 1.0};
}

void ProblemParams::validate() const {
  if (!(kappa > 0)) throw std::invalid_argument("ProblemParams: kappa must be > 0");
  if (!(lambda > 0)) throw std::invalid_argument("ProblemParams: lambda must be > 0");
}

std::vector<std::string> ProblemParams::diagnostics() const {
  std::vector<std::string> notes;
  for (int c = 0; c < 3; ++c) {
    if (gamma[c] == Complex(0)) continue;
    std::ostringstream os;
    if (gamma[c].real() < 0) {
      os << "gamma[" << c << "] has Re < 0: admissible only while above the "
         << "mesh-dependent coercivity bound -alpha_0";
      notes.push_back(os.str());
      os.str("");
    }
    if (gamma[c].imag() > 0) {
      os << "gamma[" << c << "] has Im > 0: outside the stability conditions "
         << "(Im gamma <= 0 expected)";
      notes.push_back(os.str());
    }
  }
  return notes;
}

std::array<Complex, 3> reference_penalty_gammas() {
  return {Complex(-std::sqrt(2.0) / 24.0, -0.01),
          Complex(-std::sqrt(6.0) / 72.0, -0.01),
          Complex(-std::sqrt(2.0) / 48.0, -0.01)};
}

SparseComplexMatrix SparseComplexMatrix::from_triplets(
    int rows, int cols, const std::vector<Triplet>& ts) {
  std::vector<int> order(ts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&ts](int a, int b) {
    return ts[a].r != ts[b].r ? ts[a].r < ts[b].r : ts[a].c < ts[b].c;
  });

  SparseComplexMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (size_t i = 0; i < order.size();) {
    const int r = ts[order[i]].r, c = ts[order[i]].c;
    Complex sum = 0;
    for (; i < order.size() && ts[order[i]].r == r && ts[order[i]].c == c; ++i)
      sum += ts[order[i]].v;
    m.col_idx.push_back(c);
    m.val.push_back(sum);
    ++m.row_ptr[r + 1];
  }
  for (int r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

Eigen::VectorXcd SparseComplexMatrix::multiply(const Eigen::VectorXcd& x) const {
  if (x.size() != cols)
    throw std::invalid_argument("SparseComplexMatrix::multiply: size mismatch");
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(rows);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      y[r] += val[k] * x[col_idx[k]];
  return y;
}

double SparseComplexMatrix::max_abs() const {
  double m = 0;
  for (const Complex& v : val) m = std::max(m, std::abs(v));
  return m;
}

double SparseComplexMatrix::symmetry_error() const {
  // Merge-walk the sorted COO form against its transpose.
  struct Entry {
    int r, c;
    Complex v;
  };
  std::vector<Entry> a, b;
  a.reserve(val.size());
  b.reserve(val.size());
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      a.push_back({r, col_idx[k], val[k]});
      b.push_back({col_idx[k], r, val[k]});
    }
  auto less = [](const Entry& x, const Entry& y) {
    return x.r != y.r ? x.r < y.r : x.c < y.c;
  };
  std::sort(b.begin(), b.end(), less);

  double worst = 0;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && less(a[i], b[j]))) {
      worst = std::max(worst, std::abs(a[i].v));
      ++i;
    } else if (i >= a.size() || less(b[j], a[i])) {
      worst = std::max(worst, std::abs(b[j].v));
      ++j;
    } else {
      worst = std::max(worst, std::abs(a[i].v - b[j].v));
      ++i;
      ++j;
    }
  }
  return worst;
}

bool SparseComplexMatrix::exactly_equal(const SparseComplexMatrix& other) const {
  return rows == other.rows && cols == other.cols &&
         row_ptr == other.row_ptr && col_idx == other.col_idx &&
         val.size() == other.val.size() &&
         (val.empty() ||
          std::memcmp(val.data(), other.val.data(),
                      val.size() * sizeof(Complex)) == 0);
}

void SparseComplexMatrix::write_matrix_market(std::ostream& os) const {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << rows << " " << cols << " " << nnz() << "\n";
  os.precision(17);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      os << r + 1 << " " << col_idx[k] + 1 << " " << val[k].real() << " "
         << val[k].imag() << "\n";
}

namespace {

// Local 12x12 volume matrices: scale_c * (curl, curl) + scale_m * (mass).
void volume_triplets(const Mesh& m, const DofMap&, Complex scale_c,
                     Complex scale_m, std::vector<Triplet>& out) {
  const auto rule = tet_rule(2);
  for (int t = 0; t < m.n_tets(); ++t) {
    const TetFrame fr = tet_frame(m, t);
    std::array<std::array<double, 12>, 12> local{};

    if (scale_m != Complex(0)) {
      for (const auto& q : rule) {
        const Vec3 p = q.l0 * fr.vert[0] + q.l1 * fr.vert[1] +
                       q.l2 * fr.vert[2] + q.l3 * fr.vert[3];
        const auto sh = local_basis_eval(fr, p);
        for (int i = 0; i < 12; ++i)
          for (int j = 0; j <= i; ++j)
            local[i][j] += q.w * sh[i].value.dot(sh[j].value);
      }
    }

    for (int i = 0; i < 12; ++i) {
      const int gi = local_dof_to_global(fr, i);
      for (int j = 0; j < 12; ++j) {
        const int gj = local_dof_to_global(fr, j);
        const double mass = (j <= i ? local[i][j] : local[j][i]) * fr.volume;
        Complex v = scale_m * mass;
        if (scale_c != Complex(0) && (i % 2 == 0) && (j % 2 == 0))
          v += scale_c * fr.whitney_curl[i / 2].dot(fr.whitney_curl[j / 2]) *
               fr.volume;
        out.push_back({gi, gj, v});
      }
    }
  }
}

// Local boundary matrices: scale * <u_T, v_T> over all boundary faces.
// Tangential traces of shapes whose edge is not contained in the face vanish
// identically (the opposite-vertex barycentric factor is zero on the face),
// so only the 6 dofs of the face's own 3 edges are assembled.
void boundary_triplets(const Mesh& m, const DofMap& dm, Complex scale,
                       std::vector<Triplet>& out) {
  const auto rule = triangle_rule(2);
  for (int f : m.boundary_faces) {
    const FaceGeometry geo = face_geometry(m, f);
    const int t = m.faces[f].tet[0];
    const TetFrame fr = tet_frame(m, t);
    const Vec3 a = m.vertices[m.faces[f].v[0]];
    const Vec3 b = m.vertices[m.faces[f].v[1]];
    const Vec3 c = m.vertices[m.faces[f].v[2]];

    const auto on_face = [&](int gv) {
      return gv == m.faces[f].v[0] || gv == m.faces[f].v[1] ||
             gv == m.faces[f].v[2];
    };
    int face_dofs[6];
    int nd = 0;
    for (int k = 0; k < 6; ++k) {
      const int g0 = m.tets[t][static_cast<size_t>(fr.ev[k][0])];
      const int g1 = m.tets[t][static_cast<size_t>(fr.ev[k][1])];
      if (on_face(g0) && on_face(g1)) {
        face_dofs[nd++] = 2 * k;
        face_dofs[nd++] = 2 * k + 1;
      }
    }

    std::array<std::array<double, 6>, 6> local{};
    for (const auto& q : rule) {
      const Vec3 p = q.l0 * a + q.l1 * b + q.l2 * c;
      const auto sh = local_basis_eval(fr, p);
      std::array<Vec3, 6> tang;
      for (int i = 0; i < nd; ++i) {
        const Vec3& v = sh[face_dofs[i]].value;
        tang[i] = v - v.dot(geo.normal) * geo.normal;
      }
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j <= i; ++j)
          local[i][j] += q.w * tang[i].dot(tang[j]);
    }
    for (int i = 0; i < nd; ++i) {
      const int gi = local_dof_to_global(fr, face_dofs[i]);
      for (int j = 0; j < nd; ++j) {
        const int gj = local_dof_to_global(fr, face_dofs[j]);
        const double v = (j <= i ? local[i][j] : local[j][i]) * geo.area;
        out.push_back({gi, gj, scale * v});
      }
    }
  }
  (void)dm;
}

// Penalty triplets over interior faces. Per face, the jump vector of a
// global Whitney basis function is the sum of curl x (outward normal)
// contributions from the incident tets that carry the function; gradient
// shapes have zero curl and drop out.
void penalty_triplets(const Mesh& m, const DofMap& dm,
                      const std::array<Complex, 3>& gamma,
                      std::vector<Triplet>& out) {
  if (gamma[0] == Complex(0) && gamma[1] == Complex(0) &&
      gamma[2] == Complex(0))
    return;
  const auto cls = classify_interior_faces(m);
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.face_is_boundary(f)) continue;
    const Complex g = gamma[static_cast<int>(cls[f])];
    if (g == Complex(0)) continue;
    const FaceGeometry geo = face_geometry(m, f);

    int dofs[12];
    Vec3 jump[12];
    int count = 0;
    for (int side = 0; side < 2; ++side) {
      const int t = m.faces[f].tet[side];
      const Vec3 nu = side == 0 ? geo.normal : Vec3(-geo.normal);
      const TetFrame fr = tet_frame(m, t);
      for (int k = 0; k < 6; ++k) {
        const int dof = DofMap::whitney_dof(fr.edge_ids[k]);
        const Vec3 contrib = fr.whitney_curl[k].cross(nu);
        int slot = -1;
        for (int s = 0; s < count; ++s)
          if (dofs[s] == dof) slot = s;
        if (slot < 0) {
          slot = count++;
          dofs[slot] = dof;
          jump[slot] = Vec3::Zero();
        }
        jump[slot] += contrib;
      }
    }

    const Complex w = g * geo.h_f * geo.area;
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j)
        out.push_back({dofs[i], dofs[j], w * jump[i].dot(jump[j])});
  }
  (void)dm;
}

}  // namespace

SparseComplexMatrix assemble_curl_curl(const Mesh& m, const DofMap& dm) {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(m.n_tets()) * 144);
  volume_triplets(m, dm, Complex(1), Complex(0), ts);
  return SparseComplexMatrix::from_triplets(dm.size(), dm.size(), ts);
}

SparseComplexMatrix assemble_mass(const Mesh& m, const DofMap& dm) {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(m.n_tets()) * 144);
  volume_triplets(m, dm, Complex(0), Complex(1), ts);
  return SparseComplexMatrix::from_triplets(dm.size(), dm.size(), ts);
}

SparseComplexMatrix assemble_boundary_mass(const Mesh& m, const DofMap& dm) {
  std::vector<Triplet> ts;
  boundary_triplets(m, dm, Complex(1), ts);
  return SparseComplexMatrix::from_triplets(dm.size(), dm.size(), ts);
}

SparseComplexMatrix assemble_penalty(const Mesh& m, const DofMap& dm,
                                     const ProblemParams& params) {
  return assemble_penalty_weights(m, dm, params.gamma);
}

SparseComplexMatrix assemble_penalty_weights(
    const Mesh& m, const DofMap& dm, const std::array<Complex, 3>& gamma) {
  std::vector<Triplet> ts;
  penalty_triplets(m, dm, gamma, ts);
  return SparseComplexMatrix::from_triplets(dm.size(), dm.size(), ts);
}

namespace {

SparseComplexMatrix assemble_system(const Mesh& m, const DofMap& dm,
                                    const ProblemParams& params,
                                    Complex mass_scale, bool with_penalty) {
  params.validate();
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(m.n_tets()) * 144 +
             m.boundary_faces.size() * 144);
  volume_triplets(m, dm, Complex(1), mass_scale, ts);
  boundary_triplets(m, dm, -kI * params.kappa * params.lambda, ts);
  if (with_penalty) penalty_triplets(m, dm, params.gamma, ts);
  return SparseComplexMatrix::from_triplets(dm.size(), dm.size(), ts);
}

}  // namespace

SparseComplexMatrix assemble_a(const Mesh& m, const DofMap& dm,
                               const ProblemParams& params) {
  return assemble_system(m, dm, params, -params.kappa * params.kappa, false);
}

SparseComplexMatrix assemble_a_gamma(const Mesh& m, const DofMap& dm,
                                     const ProblemParams& params) {
  return assemble_system(m, dm, params, -params.kappa * params.kappa, true);
}

SparseComplexMatrix assemble_hat_a(const Mesh& m, const DofMap& dm,
                                   const ProblemParams& params) {
  return assemble_system(m, dm, params, params.kappa * params.kappa, true);
}

Eigen::VectorXcd assemble_rhs(const Mesh& m, const DofMap& dm,
                              const ProblemParams& params,
                              const VectorField& f, const BoundaryField& g,
                              int quad_degree) {
  params.validate();
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(dm.size());

  const auto vrule = tet_rule(quad_degree);
  for (int t = 0; t < m.n_tets(); ++t) {
    const TetFrame fr = tet_frame(m, t);
    for (const auto& q : vrule) {
      const Vec3 p = q.l0 * fr.vert[0] + q.l1 * fr.vert[1] +
                     q.l2 * fr.vert[2] + q.l3 * fr.vert[3];
      const CVec3 fv = f(p);
      const auto sh = local_basis_eval(fr, p);
      const double w = q.w * fr.volume;
      for (int i = 0; i < 12; ++i)
        b[local_dof_to_global(fr, i)] += w * cdot(fv, sh[i].value);
    }
  }

  // As in the boundary mass, only the face's own edge dofs have nonzero
  // tangential traces on the face.
  const auto srule = triangle_rule(quad_degree);
  for (int fid : m.boundary_faces) {
    const FaceGeometry geo = face_geometry(m, fid);
    const int t = m.faces[fid].tet[0];
    const TetFrame fr = tet_frame(m, t);
    const Vec3 a = m.vertices[m.faces[fid].v[0]];
    const Vec3 bb = m.vertices[m.faces[fid].v[1]];
    const Vec3 c = m.vertices[m.faces[fid].v[2]];
    const auto on_face = [&](int gv) {
      return gv == m.faces[fid].v[0] || gv == m.faces[fid].v[1] ||
             gv == m.faces[fid].v[2];
    };
    int face_dofs[6];
    int nd = 0;
    for (int k = 0; k < 6; ++k) {
      const int g0 = m.tets[t][static_cast<size_t>(fr.ev[k][0])];
      const int g1 = m.tets[t][static_cast<size_t>(fr.ev[k][1])];
      if (on_face(g0) && on_face(g1)) {
        face_dofs[nd++] = 2 * k;
        face_dofs[nd++] = 2 * k + 1;
      }
    }
    for (const auto& q : srule) {
      const Vec3 p = q.l0 * a + q.l1 * bb + q.l2 * c;
      CVec3 gv = g(p, geo.normal);
      gv -= cdot(gv, geo.normal) * geo.normal.cast<Complex>();
      const auto sh = local_basis_eval(fr, p);
      const double w = q.w * geo.area;
      for (int i = 0; i < nd; ++i) {
        const Vec3& v = sh[face_dofs[i]].value;
        const Vec3 tang = v - v.dot(geo.normal) * geo.normal;
        b[local_dof_to_global(fr, face_dofs[i])] += w * cdot(gv, tang);
      }
    }
  }
  return b;
}

}  // namespace emfem
