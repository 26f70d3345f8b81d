#pragma once

#include <string>
#include <vector>

#include "emfem/edge_fem.hpp"

namespace emfem {

// Spherical Hankel function of the first kind, order 1.
// Closed form -e^{iz}(z + i)/z^2; equals j1(z) + i y1(z).
Complex spherical_hankel_1(Complex z);
Complex spherical_hankel_1_trig(Complex z);  // j1 + i y1 from sin/cos, for cross-checks
Complex spherical_hankel_0(Complex z);       // -i e^{iz}/z

// Exact solution of curl curl E - kappa^2 E = f with impedance data
// g = curl E x nu - i kappa lambda E_T on the boundary.
struct ManufacturedSolution {
  std::string name;
  double kappa = 0;
  double lambda = 1;
  VectorField E;
  VectorField curl_E;
  VectorField f;

  CVec3 g(const Vec3& x, const Vec3& unit_normal) const;
};

// Multipole + sine field: E = kappa sum_m h1(kappa r) grad_S Y_1^m x r_hat
// + kappa^{-1} (sin kz, sin ky, sin kx), with real-valued harmonics
// Y_1^m, m = -1,0,1 -> (y, z, x)/r up to the common normalization. The
// multipole part solves the homogeneous equation, so f = (0, -k sin(ky), 0).
ManufacturedSolution multipole_sine_solution(double kappa);

// E = p e^{i kappa d.x} with p.d = 0; f = 0.
ManufacturedSolution plane_wave_solution(double kappa, const Vec3& direction,
                                         const Vec3& polarization);

// Max over points of |FD(curl curl E) - kappa^2 E - f| with nested 4th-order
// centered first-derivative stencils. Points must stay >= 5*step away from
// the domain boundary so every stencil point is evaluable.
double residual_oracle(const ManufacturedSolution& s,
                       const std::vector<Vec3>& points, double step = 1e-3);

CVec3 curl_fd(const VectorField& F, const Vec3& p, double step = 1e-3);
Complex divergence_fd(const VectorField& F, const Vec3& p, double step = 1e-3);

}  // namespace emfem
