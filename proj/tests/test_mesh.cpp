#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "emfem/mesh.hpp"

using namespace emfem;

namespace {

Box unit_box() {
  Box b;
  b.lo = Vec3(1, 1, 1);
  b.hi = Vec3(2, 2, 2);
  return b;
}

Vec3 tet_centroid(const Mesh& m, int t) {
  const auto v = m.tet_vertices(t);
  return 0.25 * (v[0] + v[1] + v[2] + v[3]);
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("n=1 entity counts") {
  const Mesh m = build_cub6_mesh(1, unit_box());
  CHECK(m.n_vertices() == 8);
  CHECK(m.n_edges() == 19);
  CHECK(m.n_faces() == 18);
  CHECK(m.n_tets() == 6);
  CHECK(m.boundary_faces.size() == 12);
  CHECK(m.h0 == doctest::Approx(1.0));
  CHECK(m.h == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("n=1 interior faces all contain the cell diagonal and are 2d-diagonal") {
  const Mesh m = build_cub6_mesh(1, unit_box());
  const auto cls = classify_interior_faces(m);
  int interior = 0;
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.face_is_boundary(f)) continue;
    ++interior;
    CHECK(cls[f] == FaceClass::Diagonal2D);
    // vertex 0 = lo corner, vertex 7 = hi corner: the shared diagonal.
    const auto& v = m.faces[f].v;
    CHECK(std::count(v.begin(), v.end(), 0) == 1);
    CHECK(std::count(v.begin(), v.end(), 7) == 1);
    const Vec3 nrm = face_geometry(m, f).normal;
    CHECK(std::abs(nrm.dot(Vec3(1, 1, 1))) < 1e-12);
  }
  CHECK(interior == 6);
}

TEST_CASE("tet counts and euler characteristic for n=1..4") {
  for (int n = 1; n <= 4; ++n) {
    const Mesh m = build_cub6_mesh(n, unit_box());
    CHECK(m.n_tets() == 6 * n * n * n);
    CHECK(m.n_vertices() == (n + 1) * (n + 1) * (n + 1));
    CHECK(m.boundary_faces.size() == static_cast<size_t>(12 * n * n));
    const long euler = m.n_vertices() - m.n_edges() + m.n_faces() - m.n_tets();
    CHECK(euler == 1);
  }
}

TEST_CASE("all tets positively oriented, volumes sum to the box volume") {
  const Mesh m = build_cub6_mesh(3, unit_box());
  double vol = 0;
  for (int t = 0; t < m.n_tets(); ++t) {
    const double v = m.tet_volume(t);
    CHECK(v > 0);
    vol += v;
  }
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary areas sum to the surface area, normals point outward") {
  const Box box = unit_box();
  const Mesh m = build_cub6_mesh(2, box);
  double area = 0;
  for (int f : m.boundary_faces) {
    const FaceGeometry g = face_geometry(m, f);
    area += g.area;
    // outward: the normal is axis-aligned and the centroid sits on that wall
    int axis = -1;
    for (int a = 0; a < 3; ++a)
      if (std::abs(std::abs(g.normal[a]) - 1.0) < 1e-12) axis = a;
    REQUIRE(axis >= 0);
    const double wall = g.normal[axis] > 0 ? box.hi[axis] : box.lo[axis];
    CHECK(g.centroid[axis] == doctest::Approx(wall).epsilon(1e-13));
    // and it points away from the incident tet
    const Vec3 c = tet_centroid(m, m.faces[f].tet[0]);
    CHECK(g.normal.dot(g.centroid - c) > 0);
  }
  CHECK(area == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("interior face normals point out of tet[0]") {
  const Mesh m = build_cub6_mesh(2, unit_box());
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.face_is_boundary(f)) continue;
    const FaceGeometry g = face_geometry(m, f);
    CHECK(g.normal.norm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(g.normal.dot(g.centroid - tet_centroid(m, m.faces[f].tet[0])) > 0);
    CHECK(g.normal.dot(g.centroid - tet_centroid(m, m.faces[f].tet[1])) < 0);
  }
}

TEST_CASE("axis-aligned interior face on n=2 has h_f = sqrt(2)/2") {
  const Mesh m = build_cub6_mesh(2, unit_box());
  const auto cls = classify_interior_faces(m);
  bool found = false;
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.face_is_boundary(f) || cls[f] != FaceClass::AxisAligned) continue;
    found = true;
    CHECK(face_geometry(m, f).h_f ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-13));
  }
  CHECK(found);
}

TEST_CASE("face classification is translation invariant") {
  auto counts = [](const Mesh& m) {
    const auto cls = classify_interior_faces(m);
    std::array<int, 3> c{0, 0, 0};
    for (int f = 0; f < m.n_faces(); ++f)
      if (!m.face_is_boundary(f)) c[static_cast<int>(cls[f])]++;
    return c;
  };
  Box shifted;
  shifted.lo = Vec3(-3.5, 0.25, 10.0);
  shifted.hi = shifted.lo + Vec3(2.0, 2.0, 2.0);
  const auto c1 = counts(build_cub6_mesh(2, unit_box()));
  const auto c2 = counts(build_cub6_mesh(2, shifted));
  CHECK(c1 == c2);
  CHECK(c1[0] > 0);  // cell-interface faces
  CHECK(c1[1] > 0);  // in-cell faces around the main diagonal
  CHECK(c1[2] == 0); // 3d-diagonal normals never occur on this mesh family
}

TEST_CASE("every face is conforming: shared by at most two tets") {
  const Mesh m = build_cub6_mesh(3, unit_box());
  // 4 faces per tet, each interior face counted twice.
  const int half_faces = 4 * m.n_tets();
  const int interior = m.n_faces() - static_cast<int>(m.boundary_faces.size());
  CHECK(half_faces == 2 * interior + static_cast<int>(m.boundary_faces.size()));
  for (const Face& f : m.faces) {
    CHECK(f.v[0] < f.v[1]);
    CHECK(f.v[1] < f.v[2]);
    if (f.tet[1] >= 0) CHECK(f.tet[0] < f.tet[1]);
  }
}

TEST_CASE("edges are stored low to high and tet connectivity is consistent") {
  const Mesh m = build_cub6_mesh(2, unit_box());
  for (const auto& e : m.edges) CHECK(e[0] < e[1]);
  constexpr std::array<std::array<int, 2>, 6> kLocal = {
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (int t = 0; t < m.n_tets(); ++t)
    for (int k = 0; k < 6; ++k) {
      const int e = m.tet_edges[t][k];
      const int a = m.tets[t][kLocal[k][0]], b = m.tets[t][kLocal[k][1]];
      const int lo = std::min(a, b), hi = std::max(a, b);
      CHECK(m.edges[e][0] == lo);
      CHECK(m.edges[e][1] == hi);
      CHECK(m.tet_edge_sign[t][k] == (a < b ? 1 : -1));
    }
}

TEST_CASE("mesh_stats reports the headline numbers") {
  const Mesh m = build_cub6_mesh(1, unit_box());
  const std::string s = mesh_stats(m);
  CHECK(s.find("vertices: 8") != std::string::npos);
  CHECK(s.find("edges: 19") != std::string::npos);
  CHECK(s.find("faces: 18") != std::string::npos);
  CHECK(s.find("tets: 6") != std::string::npos);
  CHECK(s.find("euler_V_minus_E_plus_F_minus_T: 1") != std::string::npos);
}

TEST_CASE("degenerate inputs are rejected") {
  Box bad;
  bad.lo = Vec3(0, 0, 0);
  bad.hi = Vec3(1, 1, 2);  // not a cube
  CHECK_THROWS_AS(build_cub6_mesh(1, bad), std::invalid_argument);
  Box flipped;
  flipped.lo = Vec3(1, 1, 1);
  flipped.hi = Vec3(0, 0, 0);
  CHECK_THROWS_AS(build_cub6_mesh(1, flipped), std::invalid_argument);
  CHECK_THROWS_AS(build_cub6_mesh(0, unit_box()), std::invalid_argument);
  CHECK_THROWS_AS(build_cub6_mesh(-2, unit_box()), std::invalid_argument);
}

}  // TEST_SUITE
