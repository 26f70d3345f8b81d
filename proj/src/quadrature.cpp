#include "emfem/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace emfem {
namespace {

struct Node1D {
  double x;  // in [0,1]
  double w;
};

// Gauss nodes for the weight (1-x)^alpha on [0,1] via Golub-Welsch on the
// Jacobi (alpha, 0) recurrence. Weights sum to 1/(alpha+1) = integral of the
// weight function.
std::vector<Node1D> gauss_jacobi(int npoints, int alpha) {
  if (npoints < 1) throw std::invalid_argument("gauss_jacobi: npoints < 1");
  const double a = static_cast<double>(alpha);
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(npoints, npoints);
  for (int k = 0; k < npoints; ++k) {
    const double dk = static_cast<double>(k);
    T(k, k) = (k == 0) ? -a / (a + 2.0)
                       : -a * a / ((2.0 * dk + a) * (2.0 * dk + a + 2.0));
    if (k >= 1) {
      const double beta =
          (k == 1) ? 4.0 * (a + 1.0) / ((a + 2.0) * (a + 2.0) * (a + 3.0))
                   : 4.0 * dk * dk * (dk + a) * (dk + a) /
                         ((2.0 * dk + a) * (2.0 * dk + a) *
                          (2.0 * dk + a + 1.0) * (2.0 * dk + a - 1.0));
      const double off = std::sqrt(beta);
      T(k, k - 1) = off;
      T(k - 1, k) = off;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss_jacobi: eigen decomposition failed");

  std::vector<Node1D> nodes(npoints);
  const double scale = std::pow(2.0, -a - 1.0);
  for (int i = 0; i < npoints; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    nodes[i].x = 0.5 * (es.eigenvalues()(i) + 1.0);
    nodes[i].w = scale * mu0 * v0 * v0;
  }
  return nodes;
}

int points_for_degree(int degree) {
  if (degree < 0) throw std::invalid_argument("quadrature: negative degree");
  return degree / 2 + 1;  // n points are exact through degree 2n-1
}

}  // namespace

std::vector<QuadPoint1D> gauss_rule_1d(int npoints) {
  auto nodes = gauss_jacobi(npoints, 0);
  std::vector<QuadPoint1D> rule(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) rule[i] = {nodes[i].x, nodes[i].w};
  return rule;
}

std::vector<TriQuadPoint> triangle_rule(int degree) {
  const int n = points_for_degree(degree);
  const auto gj1 = gauss_jacobi(n, 1);
  const auto gl = gauss_jacobi(n, 0);
  // x = xi, y = (1-xi) eta over the reference triangle x,y >= 0, x+y <= 1;
  // the (1-xi) Jacobian is absorbed by the alpha=1 Jacobi weight.
  std::vector<TriQuadPoint> rule;
  rule.reserve(static_cast<size_t>(n) * n);
  for (const auto& pi : gj1)
    for (const auto& pj : gl) {
      const double x = pi.x;
      const double y = (1.0 - pi.x) * pj.x;
      rule.push_back({1.0 - x - y, x, y, 2.0 * pi.w * pj.w});
    }
  return rule;
}

std::vector<TetQuadPoint> tet_rule(int degree) {
  const int n = points_for_degree(degree);
  const auto gj2 = gauss_jacobi(n, 2);
  const auto gj1 = gauss_jacobi(n, 1);
  const auto gl = gauss_jacobi(n, 0);
  // x = xi, y = (1-xi) eta, z = (1-xi)(1-eta) zeta; Jacobian (1-xi)^2 (1-eta)
  // is absorbed by the alpha=2 and alpha=1 Jacobi weights.
  std::vector<TetQuadPoint> rule;
  rule.reserve(static_cast<size_t>(n) * n * n);
  for (const auto& pi : gj2)
    for (const auto& pj : gj1)
      for (const auto& pk : gl) {
        const double x = pi.x;
        const double y = (1.0 - pi.x) * pj.x;
        const double z = (1.0 - pi.x) * (1.0 - pj.x) * pk.x;
        rule.push_back({1.0 - x - y - z, x, y, z, 6.0 * pi.w * pj.w * pk.w});
      }
  return rule;
}

}  // namespace emfem
