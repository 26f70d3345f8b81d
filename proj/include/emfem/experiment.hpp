#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emfem/analysis.hpp"
#include "emfem/linalg.hpp"

namespace emfem {

// One solve job: everything needed to build, solve, and report a single case.
struct RunConfig {
  std::string method = "eem";  // "eem" | "cip"
  double kappa = 5.0;
  int n = 4;
  std::string gamma = "paper";  // "paper" | "zero" | "c1,c2,c3" (a+bi each)
  std::string solution = "multipole-sine";  // | "plane-wave"
  std::string solver = "direct";            // | "gmres"
  int quad_degree = 6;
  Vec3 box_lo{1.0, 1.0, 1.0};
  double box_side = 1.0;

  std::string out;          // CSV path; empty = stdout only
  std::string vtk;          // optional solution export
  std::string dump_matrix;  // optional MatrixMarket export of the system
  int threads = 1;

  // Sweep inputs.
  std::vector<int> n_list{4, 6, 8, 12, 16};
  std::vector<double> kappa_list{4, 8, 12, 16, 20};
  double kappa_h0 = 1.0;
  std::vector<std::string> methods{"eem", "cip"};

  Box box() const;
  ProblemParams problem_params() const;       // gamma resolved per method
  ManufacturedSolution make_solution() const;
  void validate() const;
};

std::array<Complex, 3> parse_gamma_spec(const std::string& spec);
std::string format_complex(Complex z);  // "a+bi"

struct ExperimentRecord {
  std::string method;  // "EEM" | "CIP"
  double kappa = 0;
  int n = 0;
  double h0 = 0;
  double h = 0;
  int dofs = 0;
  double rel_l2_err = 0;
  double rel_hcurl_err = 0;
  double rel_energy_err = 0;
  double interp_rel_hcurl_err = 0;
  double interp_rel_l2_err = 0;
  double stability_ratio = 0;
  std::string solver_method;
  int solver_iterations = 0;
  double solver_residual = 0;
  double wall_time_seconds = 0;
};

ExperimentRecord run_solve_case(const RunConfig& cfg,
                                FeFunction* solution_out = nullptr,
                                Mesh* mesh_out = nullptr);

// CSV schema: columns exactly in ExperimentRecord field order.
extern const char* kCsvHeader;
std::string csv_row(const ExperimentRecord& r);
std::string config_comment(const RunConfig& cfg, const std::string& subcommand);

// Least-squares slope of log(err) vs log(h0) over the last ceil(k/2) points
// (err ~ C h^p convention, p > 0 for decaying error).
double fit_log_slope(const std::vector<double>& h0, const std::vector<double>& err);

// Sweep drivers; records come back in deterministic job order regardless of
// the worker-pool size.
std::vector<ExperimentRecord> cmd_convergence(const RunConfig& cfg);
std::vector<ExperimentRecord> cmd_ksweep(const RunConfig& cfg);

// Property suite; prints one line per check, returns the failure count.
int cmd_validate(const RunConfig& cfg, std::ostream& os);

// Flat "key = value" config text with [section] blocks; returns
// "section.key" -> value (global keys get no prefix).
std::map<std::string, std::string> parse_config_file(std::istream& is);

void write_vtk_mesh(std::ostream& os, const Mesh& m);
void write_vtk_solution(std::ostream& os, const Mesh& m, const DofMap& dm,
                        const FeFunction& u);

}  // namespace emfem
