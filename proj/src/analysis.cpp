#include "emfem/analysis.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef EMFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <cmath>
#include <random>
#include <stdexcept>

#include "emfem/linalg.hpp"
#include "emfem/quadrature.hpp"

namespace emfem {

namespace {

const Complex kI{0.0, 1.0};

double sq(double x) { return x * x; }

double cnorm_sq(const CVec3& v) {
  return std::norm(v(0)) + std::norm(v(1)) + std::norm(v(2));
}

// Jump seminorm weights sum |gamma_f| h_f ||[curl v]||_f^2 for a discrete v.
double jump_seminorm_sq(const Mesh& m, const FeFunction& v,
                        const std::array<Complex, 3>& gamma) {
  if (gamma[0] == Complex(0) && gamma[1] == Complex(0) &&
      gamma[2] == Complex(0))
    return 0.0;
  const auto cls = classify_interior_faces(m);
  double total = 0;
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.face_is_boundary(f)) continue;
    const double w = std::abs(gamma[static_cast<int>(cls[f])]);
    if (w == 0) continue;
    const FaceGeometry geo = face_geometry(m, f);
    CVec3 jump = CVec3::Zero();
    for (int side = 0; side < 2; ++side) {
      const int t = m.faces[f].tet[side];
      const Vec3 nu = side == 0 ? geo.normal : Vec3(-geo.normal);
      const TetFrame fr = tet_frame(m, t);
      CVec3 curl = CVec3::Zero();
      for (int k = 0; k < 6; ++k)
        curl += v.coeff[DofMap::whitney_dof(fr.edge_ids[k])] *
                fr.whitney_curl[k].cast<Complex>();
      jump += curl.cross(nu.cast<Complex>());
    }
    total += w * geo.h_f * geo.area * cnorm_sq(jump);
  }
  return total;
}

}  // namespace

ErrorReport compute_errors(const Mesh& m, const DofMap& dm,
                           const FeFunction& Eh,
                           const ManufacturedSolution& exact,
                           const ProblemParams& params, int quad_degree) {
  (void)dm;
  const double k = params.kappa, lam = params.lambda;
  double e_l2 = 0, e_curl = 0, e_bt = 0;
  double x_l2 = 0, x_curl = 0, x_bt = 0;

  const auto vrule = tet_rule(quad_degree);
  for (int t = 0; t < m.n_tets(); ++t) {
    const TetFrame fr = tet_frame(m, t);
    for (const auto& q : vrule) {
      const Vec3 p = q.l0 * fr.vert[0] + q.l1 * fr.vert[1] +
                     q.l2 * fr.vert[2] + q.l3 * fr.vert[3];
      const FieldValue fv = evaluate(Eh, fr, p);
      const CVec3 ex = exact.E(p), exc = exact.curl_E(p);
      const double w = q.w * fr.volume;
      e_l2 += w * cnorm_sq(ex - fv.value);
      e_curl += w * cnorm_sq(exc - fv.curl);
      x_l2 += w * cnorm_sq(ex);
      x_curl += w * cnorm_sq(exc);
    }
  }

  const auto srule = triangle_rule(quad_degree);
  for (int fid : m.boundary_faces) {
    const FaceGeometry geo = face_geometry(m, fid);
    const TetFrame fr = tet_frame(m, m.faces[fid].tet[0]);
    const Vec3 a = m.vertices[m.faces[fid].v[0]];
    const Vec3 b = m.vertices[m.faces[fid].v[1]];
    const Vec3 c = m.vertices[m.faces[fid].v[2]];
    const CVec3 nu = geo.normal.cast<Complex>();
    for (const auto& q : srule) {
      const Vec3 p = q.l0 * a + q.l1 * b + q.l2 * c;
      const CVec3 diff = exact.E(p) - evaluate(Eh, fr, p).value;
      const CVec3 diff_t = diff - cdot(diff, geo.normal) * nu;
      const CVec3 ex = exact.E(p);
      const CVec3 ex_t = ex - cdot(ex, geo.normal) * nu;
      const double w = q.w * geo.area;
      e_bt += w * cnorm_sq(diff_t);
      x_bt += w * cnorm_sq(ex_t);
    }
  }

  // E is smooth, so the jump of curl(E - E_h) is the jump of -curl E_h.
  const double e_jump = jump_seminorm_sq(m, Eh, params.gamma);

  ErrorReport r;
  r.l2_abs = std::sqrt(e_l2);
  r.hcurl_abs = std::sqrt(e_l2 + e_curl);
  r.energy_abs = std::sqrt(e_curl + k * k * e_l2 + k * lam * e_bt);
  r.triple_abs = std::sqrt(sq(r.energy_abs) + e_jump);
  r.btang_abs = std::sqrt(e_bt);
  r.jump_sq = e_jump;

  const double x_l2n = std::sqrt(x_l2);
  const double x_hcurl = std::sqrt(x_l2 + x_curl);
  const double x_energy = std::sqrt(x_curl + k * k * x_l2 + k * lam * x_bt);
  const double x_bt_n = std::sqrt(x_bt);
  r.l2_rel = x_l2n > 0 ? r.l2_abs / x_l2n : r.l2_abs;
  r.hcurl_rel = x_hcurl > 0 ? r.hcurl_abs / x_hcurl : r.hcurl_abs;
  r.energy_rel = x_energy > 0 ? r.energy_abs / x_energy : r.energy_abs;
  r.triple_rel = x_energy > 0 ? r.triple_abs / x_energy : r.triple_abs;
  r.btang_rel = x_bt_n > 0 ? r.btang_abs / x_bt_n : r.btang_abs;
  return r;
}

namespace {

// vec[i] = (curl u, curl phi_i) + mass_coef (u, phi_i) + bnd_coef <u_T, phi_iT>
// by quadrature; the building block for projection RHS and the orthogonality
// defect.
Eigen::VectorXcd field_form_rhs(const Mesh& m, const DofMap& dm,
                                const VectorField& u, const VectorField& curl_u,
                                Complex mass_coef, Complex bnd_coef,
                                int quad_degree) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dm.size());

  const auto vrule = tet_rule(quad_degree);
  for (int t = 0; t < m.n_tets(); ++t) {
    const TetFrame fr = tet_frame(m, t);
    for (const auto& q : vrule) {
      const Vec3 p = q.l0 * fr.vert[0] + q.l1 * fr.vert[1] +
                     q.l2 * fr.vert[2] + q.l3 * fr.vert[3];
      const CVec3 uv = u(p);
      const CVec3 cv = curl_u(p);
      const auto sh = local_basis_eval(fr, p);
      const double w = q.w * fr.volume;
      for (int i = 0; i < 12; ++i) {
        Complex v = cdot(cv, sh[i].curl) + mass_coef * cdot(uv, sh[i].value);
        out[local_dof_to_global(fr, i)] += w * v;
      }
    }
  }

  const auto srule = triangle_rule(quad_degree);
  for (int fid : m.boundary_faces) {
    const FaceGeometry geo = face_geometry(m, fid);
    const TetFrame fr = tet_frame(m, m.faces[fid].tet[0]);
    const Vec3 a = m.vertices[m.faces[fid].v[0]];
    const Vec3 b = m.vertices[m.faces[fid].v[1]];
    const Vec3 c = m.vertices[m.faces[fid].v[2]];
    for (const auto& q : srule) {
      const Vec3 p = q.l0 * a + q.l1 * b + q.l2 * c;
      CVec3 ut = u(p);
      ut -= cdot(ut, geo.normal) * geo.normal.cast<Complex>();
      const auto sh = local_basis_eval(fr, p);
      const double w = q.w * geo.area;
      for (int i = 0; i < 12; ++i) {
        const Vec3 tang =
            sh[i].value - sh[i].value.dot(geo.normal) * geo.normal;
        out[local_dof_to_global(fr, i)] += w * bnd_coef * cdot(ut, tang);
      }
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXcd hat_a_rhs(const Mesh& m, const DofMap& dm,
                           const ProblemParams& params,
                           const ManufacturedSolution& u, ProjectionSign sign,
                           int quad_degree) {
  const double k = params.kappa, lam = params.lambda;
  // Plus: r_i = hat_a(u, phi_i) = (curl u, curl phi) + k^2 (u, phi)
  //       - i k lam <u_T, phi_T>.
  // Minus: s_i = hat_a(phi_i, u) = conj(r_i with +i k lam boundary sign).
  if (sign == ProjectionSign::Plus)
    return field_form_rhs(m, dm, u.E, u.curl_E, Complex(k * k),
                          -kI * k * lam, quad_degree);
  return field_form_rhs(m, dm, u.E, u.curl_E, Complex(k * k), kI * k * lam,
                        quad_degree)
      .conjugate();
}

struct EllipticProjector::Impl {
  const Mesh* mesh;
  const DofMap* dm;
  ProblemParams params;
  int quad_degree;
  SparseComplexMatrix Ahat;
  Eigen::SparseMatrix<Complex> M;
#ifdef EMFEM_HAVE_UMFPACK
  Eigen::UmfPackLU<Eigen::SparseMatrix<Complex>> lu;
#else
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>> lu;
#endif
};

EllipticProjector::EllipticProjector(const Mesh& m, const DofMap& dm,
                                     const ProblemParams& params,
                                     int quad_degree)
    : impl_(std::make_unique<Impl>()) {
  impl_->mesh = &m;
  impl_->dm = &dm;
  impl_->params = params;
  impl_->quad_degree = quad_degree;
  impl_->Ahat = assemble_hat_a(m, dm, params);

  std::vector<Eigen::Triplet<Complex>> ts;
  ts.reserve(impl_->Ahat.val.size());
  for (int r = 0; r < impl_->Ahat.rows; ++r)
    for (int k = impl_->Ahat.row_ptr[r]; k < impl_->Ahat.row_ptr[r + 1]; ++k)
      ts.emplace_back(r, impl_->Ahat.col_idx[k], impl_->Ahat.val[k]);
  impl_->M.resize(impl_->Ahat.rows, impl_->Ahat.cols);
  impl_->M.setFromTriplets(ts.begin(), ts.end());
  impl_->M.makeCompressed();
#ifdef EMFEM_HAVE_UMFPACK
  impl_->lu.umfpackControl()[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  impl_->lu.umfpackControl()[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  impl_->lu.compute(impl_->M);
  if (impl_->lu.info() != Eigen::Success ||
      impl_->lu.umfpackFactorizeReturncode() != 0)
    throw std::runtime_error(
        "EllipticProjector: shifted form is singular (umfpack status " +
        std::to_string(impl_->lu.umfpackFactorizeReturncode()) + ")");
#else
  impl_->lu.setPivotThreshold(0.1);
  impl_->lu.analyzePattern(impl_->M);
  impl_->lu.factorize(impl_->M);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error(
        "EllipticProjector: shifted form is singular: " +
        impl_->lu.lastErrorMessage());
#endif
}

EllipticProjector::~EllipticProjector() = default;
EllipticProjector::EllipticProjector(EllipticProjector&&) noexcept = default;

const SparseComplexMatrix& EllipticProjector::matrix() const {
  return impl_->Ahat;
}

FeFunction EllipticProjector::project(const ManufacturedSolution& u,
                                      ProjectionSign sign) const {
  const Eigen::VectorXcd rhs = hat_a_rhs(*impl_->mesh, *impl_->dm,
                                         impl_->params, u, sign,
                                         impl_->quad_degree);
  FeFunction out;
  out.mesh = impl_->mesh;
  Eigen::VectorXcd sol = impl_->lu.solve(rhs);
  out.coeff = sign == ProjectionSign::Plus ? sol : sol.conjugate().eval();
  return out;
}

FeFunction EllipticProjector::project(const FeFunction& u,
                                      ProjectionSign sign) const {
  // Discrete input: the RHS entries hat_a(u, phi_i) / hat_a(phi_i, u) are
  // exact matrix products.
  Eigen::VectorXcd rhs =
      sign == ProjectionSign::Plus
          ? impl_->Ahat.multiply(u.coeff)
          : impl_->Ahat.multiply(u.coeff.conjugate()).eval();
  FeFunction out;
  out.mesh = impl_->mesh;
  Eigen::VectorXcd sol = impl_->lu.solve(rhs);
  out.coeff = sign == ProjectionSign::Plus ? sol : sol.conjugate().eval();
  return out;
}

FeFunction elliptic_projection(const Mesh& m, const DofMap& dm,
                               const ProblemParams& params,
                               const ManufacturedSolution& u,
                               ProjectionSign sign, int quad_degree) {
  return EllipticProjector(m, dm, params, quad_degree).project(u, sign);
}

StabilityReport stability_metrics(const Mesh& m, const DofMap& dm,
                                  const FeFunction& Eh,
                                  const ManufacturedSolution& sol,
                                  const ProblemParams& params,
                                  int quad_degree) {
  (void)dm;
  const double k = params.kappa;

  // Discrete-side norms: curls are exact (constant per tet), values by
  // degree-2 quadrature (quadratic integrands).
  double curl_sq = 0, l2_sq = 0, bt_sq = 0;
  const auto vrule2 = tet_rule(2);
  for (int t = 0; t < m.n_tets(); ++t) {
    const TetFrame fr = tet_frame(m, t);
    CVec3 curl = CVec3::Zero();
    for (int kk = 0; kk < 6; ++kk)
      curl += Eh.coeff[DofMap::whitney_dof(fr.edge_ids[kk])] *
              fr.whitney_curl[kk].cast<Complex>();
    curl_sq += fr.volume * cnorm_sq(curl);
    for (const auto& q : vrule2) {
      const Vec3 p = q.l0 * fr.vert[0] + q.l1 * fr.vert[1] +
                     q.l2 * fr.vert[2] + q.l3 * fr.vert[3];
      l2_sq += q.w * fr.volume * cnorm_sq(evaluate(Eh, fr, p).value);
    }
  }
  const auto srule2 = triangle_rule(2);
  for (int fid : m.boundary_faces) {
    const FaceGeometry geo = face_geometry(m, fid);
    const TetFrame fr = tet_frame(m, m.faces[fid].tet[0]);
    const Vec3 a = m.vertices[m.faces[fid].v[0]];
    const Vec3 b = m.vertices[m.faces[fid].v[1]];
    const Vec3 c = m.vertices[m.faces[fid].v[2]];
    for (const auto& q : srule2) {
      const Vec3 p = q.l0 * a + q.l1 * b + q.l2 * c;
      CVec3 v = evaluate(Eh, fr, p).value;
      v -= cdot(v, geo.normal) * geo.normal.cast<Complex>();
      bt_sq += q.w * geo.area * cnorm_sq(v);
    }
  }

  StabilityReport rep;
  rep.lhs = std::sqrt(curl_sq) + k * std::sqrt(l2_sq) + k * std::sqrt(bt_sq);
  if (params.penalty_active())
    rep.lhs += std::sqrt(jump_seminorm_sq(m, Eh, params.gamma));

  // Data norms by quadrature of the configured degree.
  double f_sq = 0, g_sq = 0;
  const auto vrule = tet_rule(quad_degree);
  for (int t = 0; t < m.n_tets(); ++t) {
    const TetFrame fr = tet_frame(m, t);
    for (const auto& q : vrule) {
      const Vec3 p = q.l0 * fr.vert[0] + q.l1 * fr.vert[1] +
                     q.l2 * fr.vert[2] + q.l3 * fr.vert[3];
      f_sq += q.w * fr.volume * cnorm_sq(sol.f(p));
    }
  }
  const auto srule = triangle_rule(quad_degree);
  for (int fid : m.boundary_faces) {
    const FaceGeometry geo = face_geometry(m, fid);
    const Vec3 a = m.vertices[m.faces[fid].v[0]];
    const Vec3 b = m.vertices[m.faces[fid].v[1]];
    const Vec3 c = m.vertices[m.faces[fid].v[2]];
    for (const auto& q : srule) {
      const Vec3 p = q.l0 * a + q.l1 * b + q.l2 * c;
      g_sq += q.w * geo.area * cnorm_sq(sol.g(p, geo.normal));
    }
  }
  rep.rhs = std::sqrt(f_sq) + std::sqrt(g_sq);
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

double galerkin_orthogonality_check(const Mesh& m, const DofMap& dm,
                                    const FeFunction& Eh,
                                    const ManufacturedSolution& exact,
                                    const ProblemParams& params, int trials,
                                    int quad_degree, uint64_t seed) {
  const double k = params.kappa, lam = params.lambda;

  // a_gamma(E, phi_i) by quadrature; the jump terms of the smooth E vanish.
  const Eigen::VectorXcd r = field_form_rhs(
      m, dm, exact.E, exact.curl_E, Complex(-k * k), -kI * k * lam,
      quad_degree);
  const SparseComplexMatrix A = assemble_a_gamma(m, dm, params);
  const Eigen::VectorXcd defect = r - A.multiply(Eh.coeff);

  const double err_triple =
      compute_errors(m, dm, Eh, exact, params, quad_degree).triple_abs;

  // Jump-augmented norm of random v_h through the structural matrices.
  const SparseComplexMatrix C = assemble_curl_curl(m, dm);
  const SparseComplexMatrix Mm = assemble_mass(m, dm);
  const SparseComplexMatrix B = assemble_boundary_mass(m, dm);
  std::array<Complex, 3> absg;
  for (int i = 0; i < 3; ++i) absg[i] = std::abs(params.gamma[i]);
  const SparseComplexMatrix Jabs = assemble_penalty_weights(m, dm, absg);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  double worst = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXcd y(dm.size());
    for (int i = 0; i < y.size(); ++i) y[i] = Complex(dist(rng), dist(rng));
    const double norm_sq =
        (y.dot(C.multiply(y)) + k * k * y.dot(Mm.multiply(y)) +
         k * lam * y.dot(B.multiply(y)) + y.dot(Jabs.multiply(y)))
            .real();
    const double vnorm = std::sqrt(std::max(norm_sq, 0.0));
    const double val = std::abs(y.dot(defect));  // conjugates y
    if (err_triple > 0 && vnorm > 0)
      worst = std::max(worst, val / (err_triple * vnorm));
  }
  return worst;
}

}  // namespace emfem
