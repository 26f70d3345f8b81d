#pragma once

#include <vector>

namespace emfem {

// Quadrature rules on reference domains. All weights are normalized so they
// sum to 1; a physical integral is measure(domain) * sum(w_i * f(p_i)).

struct QuadPoint1D {
  double x;  // position in [0,1]
  double w;
};

struct TriQuadPoint {
  double l0, l1, l2;  // barycentric coordinates
  double w;
};

struct TetQuadPoint {
  double l0, l1, l2, l3;  // barycentric coordinates
  double w;
};

// n-point Gauss-Legendre on [0,1]; exact for polynomials of degree <= 2n-1.
std::vector<QuadPoint1D> gauss_rule_1d(int npoints);

// Conical-product rules, exact for total polynomial degree <= degree.
std::vector<TriQuadPoint> triangle_rule(int degree);
std::vector<TetQuadPoint> tet_rule(int degree);

}  // namespace emfem
