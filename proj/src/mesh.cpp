#include "emfem/mesh.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace emfem {

void Box::validate() const {
  const Vec3 d = hi - lo;
  if (!(d[0] > 0 && d[1] > 0 && d[2] > 0))
    throw std::invalid_argument("Box: hi must exceed lo in every coordinate");
  const double s = d[0];
  if (std::abs(d[1] - s) > 1e-12 * s || std::abs(d[2] - s) > 1e-12 * s)
    throw std::invalid_argument("Box: domain must be a cube");
}

std::array<Vec3, 4> Mesh::tet_vertices(int t) const {
  const auto& tv = tets[t];
  return {vertices[tv[0]], vertices[tv[1]], vertices[tv[2]], vertices[tv[3]]};
}

double Mesh::tet_volume(int t) const {
  const auto v = tet_vertices(t);
  return (v[1] - v[0]).cross(v[2] - v[0]).dot(v[3] - v[0]) / 6.0;
}

double Mesh::edge_length(int e) const {
  return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
}

namespace {

constexpr std::array<std::array<int, 2>, 6> kLocalEdges = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

uint64_t pair_key(int a, int b, uint64_t nv) {
  return static_cast<uint64_t>(a) * nv + static_cast<uint64_t>(b);
}

uint64_t triple_key(int a, int b, int c, uint64_t nv) {
  return (static_cast<uint64_t>(a) * nv + static_cast<uint64_t>(b)) * nv +
         static_cast<uint64_t>(c);
}

}  // namespace

Mesh build_cub6_mesh(int n, const Box& box) {
  if (n < 1) throw std::invalid_argument("build_cub6_mesh: n must be >= 1");
  box.validate();

  Mesh m;
  m.box = box;
  m.n = n;
  m.h0 = box.side() / n;

  const int np = n + 1;
  auto vid = [np](int ix, int iy, int iz) {
    return ix + np * (iy + np * iz);
  };

  m.vertices.resize(static_cast<size_t>(np) * np * np);
  for (int iz = 0; iz < np; ++iz)
    for (int iy = 0; iy < np; ++iy)
      for (int ix = 0; ix < np; ++ix)
        m.vertices[vid(ix, iy, iz)] =
            box.lo + m.h0 * Vec3(ix, iy, iz);

  // 6 tets per cell: paths 0 -> e_{p0} -> e_{p0}+e_{p1} -> (1,1,1) over the
  // permutations p of the axes, i.e. the coordinate-sorting subdivision. All
  // tets contain the cell's main diagonal.
  constexpr std::array<std::array<int, 3>, 6> kPerms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  m.tets.reserve(static_cast<size_t>(6) * n * n * n);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        for (const auto& p : kPerms) {
          std::array<int, 3> c0 = {ix, iy, iz};
          std::array<int, 3> c1 = c0;
          c1[p[0]] += 1;
          std::array<int, 3> c2 = c1;
          c2[p[1]] += 1;
          std::array<int, 4> tet = {vid(c0[0], c0[1], c0[2]),
                                    vid(c1[0], c1[1], c1[2]),
                                    vid(c2[0], c2[1], c2[2]),
                                    vid(ix + 1, iy + 1, iz + 1)};
          const Vec3 a = m.vertices[tet[1]] - m.vertices[tet[0]];
          const Vec3 b = m.vertices[tet[2]] - m.vertices[tet[0]];
          const Vec3 c = m.vertices[tet[3]] - m.vertices[tet[0]];
          if (a.cross(b).dot(c) < 0) std::swap(tet[2], tet[3]);
          m.tets.push_back(tet);
        }

  const uint64_t nv = m.vertices.size();

  // Edges: canonical low->high pairs, ids in lexicographic order.
  {
    std::vector<uint64_t> keys;
    keys.reserve(m.tets.size() * 6);
    for (const auto& tet : m.tets)
      for (const auto& le : kLocalEdges) {
        const int a = tet[le[0]], b = tet[le[1]];
        keys.push_back(pair_key(std::min(a, b), std::max(a, b), nv));
      }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::unordered_map<uint64_t, int> edge_id;
    edge_id.reserve(keys.size() * 2);
    m.edges.reserve(keys.size());
    for (uint64_t k : keys) {
      edge_id.emplace(k, static_cast<int>(m.edges.size()));
      m.edges.push_back({static_cast<int>(k / nv), static_cast<int>(k % nv)});
    }

    m.tet_edges.resize(m.tets.size());
    m.tet_edge_sign.resize(m.tets.size());
    for (size_t t = 0; t < m.tets.size(); ++t)
      for (int k = 0; k < 6; ++k) {
        const int a = m.tets[t][kLocalEdges[k][0]];
        const int b = m.tets[t][kLocalEdges[k][1]];
        m.tet_edges[t][k] =
            edge_id.at(pair_key(std::min(a, b), std::max(a, b), nv));
        m.tet_edge_sign[t][k] = a < b ? 1 : -1;
      }
  }

  // Faces: canonical sorted triples, ids in lexicographic order; incident
  // tets recorded in ascending tet order.
  {
    std::vector<uint64_t> keys;
    keys.reserve(m.tets.size() * 4);
    auto face_of = [](const std::array<int, 4>& tet, int k) {
      std::array<int, 3> f;
      int j = 0;
      for (int i = 0; i < 4; ++i)
        if (i != k) f[j++] = tet[i];
      std::sort(f.begin(), f.end());
      return f;
    };
    for (const auto& tet : m.tets)
      for (int k = 0; k < 4; ++k) {
        const auto f = face_of(tet, k);
        keys.push_back(triple_key(f[0], f[1], f[2], nv));
      }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::unordered_map<uint64_t, int> face_id;
    face_id.reserve(keys.size() * 2);
    m.faces.reserve(keys.size());
    for (uint64_t k : keys) {
      face_id.emplace(k, static_cast<int>(m.faces.size()));
      Face f;
      f.v = {static_cast<int>(k / (nv * nv)),
             static_cast<int>((k / nv) % nv),
             static_cast<int>(k % nv)};
      f.tet = {-1, -1};
      m.faces.push_back(f);
    }

    m.tet_faces.resize(m.tets.size());
    for (size_t t = 0; t < m.tets.size(); ++t)
      for (int k = 0; k < 4; ++k) {
        const auto f = face_of(m.tets[t], k);
        const int id = face_id.at(triple_key(f[0], f[1], f[2], nv));
        m.tet_faces[t][k] = id;
        if (m.faces[id].tet[0] < 0)
          m.faces[id].tet[0] = static_cast<int>(t);
        else {
          assert(m.faces[id].tet[1] < 0);
          m.faces[id].tet[1] = static_cast<int>(t);
        }
      }

    for (int f = 0; f < m.n_faces(); ++f)
      if (m.face_is_boundary(f)) m.boundary_faces.push_back(f);
  }

  m.h = 0;
  for (int t = 0; t < m.n_tets(); ++t) {
    const auto v = m.tet_vertices(t);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        m.h = std::max(m.h, (v[j] - v[i]).norm());
  }
  return m;
}

FaceGeometry face_geometry(const Mesh& m, int face_id) {
  if (face_id < 0 || face_id >= m.n_faces())
    throw std::invalid_argument("face_geometry: invalid face index");
  const Face& f = m.faces[face_id];
  const Vec3 a = m.vertices[f.v[0]];
  const Vec3 b = m.vertices[f.v[1]];
  const Vec3 c = m.vertices[f.v[2]];

  FaceGeometry g;
  const Vec3 cr = (b - a).cross(c - a);
  g.area = 0.5 * cr.norm();
  g.normal = cr.normalized();
  g.h_f = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
  g.centroid = (a + b + c) / 3.0;

  // Orient away from the first incident tet (outward from Omega on boundary).
  const auto& tv = m.tets[f.tet[0]];
  Vec3 opposite{0, 0, 0};
  for (int i = 0; i < 4; ++i)
    if (tv[i] != f.v[0] && tv[i] != f.v[1] && tv[i] != f.v[2])
      opposite = m.vertices[tv[i]];
  if (g.normal.dot(g.centroid - opposite) < 0) g.normal = -g.normal;
  return g;
}

std::vector<FaceClass> classify_interior_faces(const Mesh& m) {
  constexpr double tol = 1e-9;
  std::vector<FaceClass> cls(m.n_faces(), FaceClass::AxisAligned);
  for (int f = 0; f < m.n_faces(); ++f) {
    const Vec3 nrm = face_geometry(m, f).normal;
    double ax = std::abs(nrm[0]), ay = std::abs(nrm[1]), az = std::abs(nrm[2]);
    std::array<double, 3> s = {ax, ay, az};
    std::sort(s.begin(), s.end(), std::greater<>());
    if (s[1] <= tol) {
      cls[f] = FaceClass::AxisAligned;
    } else if (s[2] <= tol && std::abs(s[0] - s[1]) <= tol) {
      // Two equal-magnitude components: mixed signs span the main-diagonal
      // plane (normal orthogonal to (1,1,1)), same signs do not.
      cls[f] = std::abs(nrm.sum()) <= tol ? FaceClass::Diagonal2D
                                          : FaceClass::Diagonal3D;
    } else if (std::abs(s[0] - s[1]) <= tol && std::abs(s[1] - s[2]) <= tol) {
      cls[f] = FaceClass::Diagonal3D;
    } else if (!m.face_is_boundary(f)) {
      std::ostringstream os;
      os << "classify_interior_faces: face " << f << " has normal ("
         << nrm.transpose() << ") outside every class (non-cub6 mesh?)";
      throw std::runtime_error(os.str());
    }
  }
  return cls;
}

std::string mesh_stats(const Mesh& m) {
  double vol = 0;
  for (int t = 0; t < m.n_tets(); ++t) vol += m.tet_volume(t);
  double barea = 0;
  for (int f : m.boundary_faces) barea += face_geometry(m, f).area;

  const auto cls = classify_interior_faces(m);
  int n_axis = 0, n_diag2 = 0, n_diag3 = 0, n_interior = 0;
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.face_is_boundary(f)) continue;
    ++n_interior;
    if (cls[f] == FaceClass::AxisAligned) ++n_axis;
    else if (cls[f] == FaceClass::Diagonal2D) ++n_diag2;
    else ++n_diag3;
  }

  std::ostringstream os;
  os.precision(15);
  os << "n: " << m.n << "\n"
     << "vertices: " << m.n_vertices() << "\n"
     << "edges: " << m.n_edges() << "\n"
     << "faces: " << m.n_faces() << "\n"
     << "tets: " << m.n_tets() << "\n"
     << "boundary_faces: " << m.boundary_faces.size() << "\n"
     << "interior_faces: " << n_interior << "\n"
     << "interior_faces_axis_aligned: " << n_axis << "\n"
     << "interior_faces_diagonal_2d: " << n_diag2 << "\n"
     << "interior_faces_diagonal_3d: " << n_diag3 << "\n"
     << "euler_V_minus_E_plus_F_minus_T: "
     << m.n_vertices() - m.n_edges() + m.n_faces() - m.n_tets() << "\n"
     << "h0: " << m.h0 << "\n"
     << "h: " << m.h << "\n"
     << "tet_volume_sum: " << vol << "\n"
     << "boundary_area_sum: " << barea << "\n";
  return os.str();
}

}  // namespace emfem
