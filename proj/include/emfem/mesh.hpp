#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace emfem {

using Vec3 = Eigen::Vector3d;

// Axis-aligned cube domain.
struct Box {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{1.0, 1.0, 1.0};

  double side() const { return hi[0] - lo[0]; }
  void validate() const;  // throws std::invalid_argument on a degenerate box
};

enum class FaceClass { AxisAligned = 0, Diagonal2D = 1, Diagonal3D = 2 };

struct Face {
  std::array<int, 3> v;    // vertex ids, ascending
  std::array<int, 2> tet;  // incident tets ascending; tet[1] = -1 on boundary
};

// Conforming tetrahedral mesh of a cube, each grid cell split into 6 tets
// sharing the cell's main diagonal (coordinate-sorting subdivision).
struct Mesh {
  Box box;
  int n = 0;      // grid cells per axis
  double h0 = 0;  // cell size = side / n
  double h = 0;   // max tet diameter

  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;  // vertex ids, positive orientation
  std::vector<std::array<int, 2>> edges; // vertex ids, low < high
  std::vector<Face> faces;

  // Per-tet connectivity in local edge order (01)(02)(03)(12)(13)(23) and
  // local face order (face k opposite local vertex k).
  std::vector<std::array<int, 6>> tet_edges;
  std::vector<std::array<int, 6>> tet_edge_sign;  // +1 if local pair runs low->high
  std::vector<std::array<int, 4>> tet_faces;
  std::vector<int> boundary_faces;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_tets() const { return static_cast<int>(tets.size()); }
  bool face_is_boundary(int f) const { return faces[f].tet[1] < 0; }

  std::array<Vec3, 4> tet_vertices(int t) const;
  double tet_volume(int t) const;
  double edge_length(int e) const;
};

struct FaceGeometry {
  double area = 0;
  Vec3 normal{0, 0, 0};  // unit; outward from Omega on boundary faces,
                         // outward from face.tet[0] on interior faces
  double h_f = 0;        // longest edge of the triangle
  Vec3 centroid{0, 0, 0};
};

Mesh build_cub6_mesh(int n, const Box& box);

FaceGeometry face_geometry(const Mesh& m, int face_id);

// Classification of face normals into the three penalty classes. Boundary
// faces of the box classify as AxisAligned. An interior face whose normal is
// not within tolerance 1e-9 of an axis, (1,±1,0)-type, or (±1,±1,±1)-type
// direction is a hard error.
std::vector<FaceClass> classify_interior_faces(const Mesh& m);

std::string mesh_stats(const Mesh& m);

}  // namespace emfem
