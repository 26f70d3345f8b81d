#include "emfem/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace emfem {

namespace {
const Complex kI{0.0, 1.0};
}

Complex spherical_hankel_1(Complex z) {
  if (z == Complex(0)) throw std::domain_error("spherical_hankel_1: z = 0");
  return -std::exp(kI * z) * (z + kI) / (z * z);
}

Complex spherical_hankel_1_trig(Complex z) {
  if (z == Complex(0)) throw std::domain_error("spherical_hankel_1: z = 0");
  const Complex j1 = std::sin(z) / (z * z) - std::cos(z) / z;
  const Complex y1 = -std::cos(z) / (z * z) - std::sin(z) / z;
  return j1 + kI * y1;
}

Complex spherical_hankel_0(Complex z) {
  if (z == Complex(0)) throw std::domain_error("spherical_hankel_0: z = 0");
  return -kI * std::exp(kI * z) / z;
}

CVec3 ManufacturedSolution::g(const Vec3& x, const Vec3& nu) const {
  const CVec3 c = curl_E(x);
  const CVec3 e = E(x);
  CVec3 curl_cross_nu;
  curl_cross_nu << c(1) * nu(2) - c(2) * nu(1), c(2) * nu(0) - c(0) * nu(2),
      c(0) * nu(1) - c(1) * nu(0);
  const CVec3 e_t = e - cdot(e, nu) * nu.cast<Complex>();
  return curl_cross_nu - kI * kappa * lambda * e_t;
}

ManufacturedSolution multipole_sine_solution(double kappa) {
  if (!(kappa > 0))
    throw std::invalid_argument("multipole_sine_solution: kappa must be > 0");

  ManufacturedSolution s;
  s.name = "multipole-sine";
  s.kappa = kappa;
  s.lambda = 1.0;

  const double c1 = std::sqrt(3.0 / (4.0 * M_PI));
  const double k = kappa;

  // Summing the m = -1, 0, 1 multipoles gives
  //   E_mp = k c1 h1(kr) (z-y, x-z, y-x)/r,
  //   curl E_mp = k c1 [ (2 h1 - psi) (x+y+z)/r^3 * x + (psi/r)(1,1,1) ],
  // with psi(z) = z h0(z) - h1(z) = h1 + z h1'.
  s.E = [k, c1](const Vec3& x) -> CVec3 {
    const double r = x.norm();
    const Complex h1 = spherical_hankel_1(Complex(k * r));
    const Vec3 w(x[2] - x[1], x[0] - x[2], x[1] - x[0]);
    CVec3 out = (k * c1 * h1 / r) * w.cast<Complex>();
    out += (CVec3() << std::sin(k * x[2]), std::sin(k * x[1]),
            std::sin(k * x[0]))
               .finished() /
           k;
    return out;
  };

  s.curl_E = [k, c1](const Vec3& x) -> CVec3 {
    const double r = x.norm();
    const Complex z(k * r);
    const Complex h1 = spherical_hankel_1(z);
    const Complex psi = z * spherical_hankel_0(z) - h1;
    const double sum = x[0] + x[1] + x[2];
    CVec3 out = (k * c1 * (2.0 * h1 - psi) * sum / (r * r * r)) *
                    x.cast<Complex>() +
                (k * c1 * psi / r) * CVec3::Ones();
    out(1) += std::cos(k * x[2]) - std::cos(k * x[0]);
    return out;
  };

  s.f = [k](const Vec3& x) -> CVec3 {
    return (CVec3() << 0.0, -k * std::sin(k * x[1]), 0.0).finished();
  };
  return s;
}

ManufacturedSolution plane_wave_solution(double kappa, const Vec3& direction,
                                         const Vec3& polarization) {
  if (!(kappa > 0))
    throw std::invalid_argument("plane_wave_solution: kappa must be > 0");
  if (std::abs(direction.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("plane_wave_solution: |direction| != 1");
  if (std::abs(direction.dot(polarization)) >
      1e-12 * std::max(1.0, polarization.norm()))
    throw std::invalid_argument(
        "plane_wave_solution: polarization not orthogonal to direction");

  ManufacturedSolution s;
  s.name = "plane-wave";
  s.kappa = kappa;
  s.lambda = 1.0;
  const Vec3 d = direction, p = polarization;
  const double k = kappa;
  s.E = [k, d, p](const Vec3& x) -> CVec3 {
    return std::exp(kI * Complex(k * d.dot(x))) * p.cast<Complex>();
  };
  s.curl_E = [k, d, p](const Vec3& x) -> CVec3 {
    return kI * k * std::exp(kI * Complex(k * d.dot(x))) *
           d.cross(p).cast<Complex>();
  };
  s.f = [](const Vec3&) -> CVec3 { return CVec3::Zero(); };
  return s;
}

namespace {

// 4th-order centered first derivative along axis.
CVec3 fd_partial(const VectorField& F, const Vec3& p, int axis, double h) {
  Vec3 e = Vec3::Zero();
  e[axis] = h;
  return (-F(p + 2 * e) + 8.0 * F(p + e) - 8.0 * F(p - e) + F(p - 2 * e)) /
         (12.0 * h);
}

}  // namespace

CVec3 curl_fd(const VectorField& F, const Vec3& p, double step) {
  const CVec3 dx = fd_partial(F, p, 0, step);
  const CVec3 dy = fd_partial(F, p, 1, step);
  const CVec3 dz = fd_partial(F, p, 2, step);
  return (CVec3() << dy(2) - dz(1), dz(0) - dx(2), dx(1) - dy(0)).finished();
}

Complex divergence_fd(const VectorField& F, const Vec3& p, double step) {
  return fd_partial(F, p, 0, step)(0) + fd_partial(F, p, 1, step)(1) +
         fd_partial(F, p, 2, step)(2);
}

double residual_oracle(const ManufacturedSolution& s,
                       const std::vector<Vec3>& points, double step) {
  const VectorField curl_outer = [&s, step](const Vec3& q) {
    return curl_fd(s.E, q, step);
  };
  double worst = 0;
  for (const Vec3& p : points) {
    const CVec3 cc = curl_fd(curl_outer, p, step);
    const CVec3 res = cc - s.kappa * s.kappa * s.E(p) - s.f(p);
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace emfem
