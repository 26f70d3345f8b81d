#include <cmath>
#include <random>

#include "doctest.h"
#include "emfem/analytic.hpp"
#include "emfem/linalg.hpp"

using namespace emfem;

namespace {

SparseComplexMatrix identity(int n) {
  std::vector<Triplet> ts;
  for (int i = 0; i < n; ++i) ts.push_back({i, i, Complex(1.0)});
  return SparseComplexMatrix::from_triplets(n, n, ts);
}

Eigen::VectorXcd random_complex(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Eigen::VectorXcd x(n);
  for (int i = 0; i < n; ++i) x[i] = Complex(d(rng), d(rng));
  return x;
}

// Complex-symmetric, diagonally dominant random test matrix.
SparseComplexMatrix random_symmetric(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<Triplet> ts;
  std::vector<double> rowsum(n, 0.0);
  for (int k = 0; k < 4 * n; ++k) {
    const int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const Complex v(d(rng), d(rng));
    ts.push_back({i, j, v});
    ts.push_back({j, i, v});
    rowsum[i] += std::abs(v);
    rowsum[j] += std::abs(v);
  }
  for (int i = 0; i < n; ++i)
    ts.push_back({i, i, Complex(rowsum[i] + 1.0, d(rng))});
  return SparseComplexMatrix::from_triplets(n, n, ts);
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("direct solver on the identity and a diagonal matrix") {
  const int n = 10;
  const Eigen::VectorXcd b = random_complex(n, 1);
  SolveReport rep;
  const Eigen::VectorXcd x = solve_direct(identity(n), b, &rep);
  CHECK((x - b).norm() <= 1e-14 * b.norm());
  CHECK(rep.method == "direct");
  CHECK(rep.iterations == 0);
  CHECK(rep.converged);
  CHECK(rep.rel_residual <= 1e-14);

  std::vector<Triplet> ts;
  for (int i = 0; i < n; ++i) ts.push_back({i, i, Complex(0, 2.0)});
  const SparseComplexMatrix D = SparseComplexMatrix::from_triplets(n, n, ts);
  const Eigen::VectorXcd xd = solve_direct(D, b);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(xd[i] - b[i] / Complex(0, 2.0)) <= 1e-14 * std::abs(b[i]));
}

TEST_CASE("direct solver on a random complex-symmetric system") {
  const int n = 200;
  const SparseComplexMatrix A = random_symmetric(n, 7);
  const Eigen::VectorXcd b = random_complex(n, 8);
  SolveReport rep;
  const Eigen::VectorXcd x = solve_direct(A, b, &rep);
  CHECK((A.multiply(x) - b).norm() <= 1e-10 * b.norm());
  CHECK(rep.rel_residual <= 1e-10);
}

TEST_CASE("direct solver names the offending pivot for singular input") {
  // Column 2 is structurally empty.
  std::vector<Triplet> ts = {{0, 0, Complex(1)},
                             {1, 1, Complex(1)},
                             {3, 3, Complex(1)},
                             {2, 0, Complex(1)}};
  const SparseComplexMatrix A = SparseComplexMatrix::from_triplets(4, 4, ts);
  const Eigen::VectorXcd b = random_complex(4, 9);
  bool threw = false;
  try {
    solve_direct(A, b);
  } catch (const std::runtime_error& e) {
    threw = true;
    const std::string msg = e.what();
    CHECK(msg.find_first_of("0123456789") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("dimension mismatches are rejected") {
  const SparseComplexMatrix A = identity(4);
  const Eigen::VectorXcd b = random_complex(3, 10);
  CHECK_THROWS_AS(solve_direct(A, b), std::invalid_argument);
  CHECK_THROWS_AS(solve_gmres(A, b), std::invalid_argument);
}

TEST_CASE("gmres solves the identity immediately") {
  const int n = 25;
  const Eigen::VectorXcd b = random_complex(n, 11);
  SolveReport rep;
  const Eigen::VectorXcd x = solve_gmres(identity(n), b, {}, &rep);
  CHECK((x - b).norm() <= 1e-12 * b.norm());
  CHECK(rep.method == "gmres");
  CHECK(rep.converged);
  CHECK(rep.iterations <= 2);
}

TEST_CASE("gmres matches the direct solver on a random system") {
  const int n = 200;
  const SparseComplexMatrix A = random_symmetric(n, 12);
  const Eigen::VectorXcd b = random_complex(n, 13);
  SolveReport rep;
  const Eigen::VectorXcd xg = solve_gmres(A, b, {}, &rep);
  const Eigen::VectorXcd xd = solve_direct(A, b);
  CHECK(rep.converged);
  CHECK(rep.rel_residual <= 1e-10);
  CHECK((xg - xd).norm() <= 1e-8 * xd.norm());
}

TEST_CASE("gmres honors the iteration budget and reports non-convergence") {
  const int n = 120;
  const SparseComplexMatrix A = random_symmetric(n, 14);
  const Eigen::VectorXcd b = random_complex(n, 15);
  GmresOptions opts;
  opts.tol = 1e-30;  // unreachable
  opts.restart = 5;
  opts.max_iterations = 10;
  SolveReport rep;
  const Eigen::VectorXcd x = solve_gmres(A, b, opts, &rep);
  CHECK(rep.iterations <= opts.max_iterations);
  CHECK(!rep.converged);
  CHECK(x.size() == n);  // best iterate still returned
}

TEST_CASE("gmres requires the ilu0 diagonal") {
  std::vector<Triplet> ts = {{0, 1, Complex(1)}, {1, 0, Complex(1)}};
  const SparseComplexMatrix A = SparseComplexMatrix::from_triplets(2, 2, ts);
  const Eigen::VectorXcd b = random_complex(2, 16);
  CHECK_THROWS_AS(solve_gmres(A, b), std::runtime_error);
}

TEST_CASE("both solvers agree on an assembled impedance system") {
  const double kappa = 2.0;
  Box box;
  box.lo = Vec3(1, 1, 1);
  box.hi = Vec3(2, 2, 2);
  const Mesh m = build_cub6_mesh(4, box);
  const DofMap dm = build_dofmap(m);
  ProblemParams p;
  p.kappa = kappa;
  const ManufacturedSolution sol = multipole_sine_solution(kappa);
  const SparseComplexMatrix A = assemble_a(m, dm, p);
  const BoundaryField g = [&sol](const Vec3& x, const Vec3& nu) {
    return sol.g(x, nu);
  };
  const Eigen::VectorXcd b = assemble_rhs(m, dm, p, sol.f, g, 4);

  SolveReport rd, rg;
  const Eigen::VectorXcd xd = solve_direct(A, b, &rd);
  const Eigen::VectorXcd xg = solve_gmres(A, b, {}, &rg);
  CHECK(rd.rel_residual <= 1e-10);
  CHECK(rg.converged);
  CHECK(rg.rel_residual <= 1e-10);
  CHECK((xd - xg).norm() <= 1e-8 * xd.norm());
}

}  // TEST_SUITE
