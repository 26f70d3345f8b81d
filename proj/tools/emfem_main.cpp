#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emfem/experiment.hpp"

namespace {

using emfem::ExperimentRecord;
using emfem::RunConfig;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "method") {
    cfg.method = value;
  } else if (key == "kappa") {
    cfg.kappa = std::stod(value);
  } else if (key == "n") {
    cfg.n = std::stoi(value);
  } else if (key == "gamma") {
    cfg.gamma = value;
  } else if (key == "solution") {
    cfg.solution = value;
  } else if (key == "solver") {
    cfg.solver = value;
  } else if (key == "quad_degree") {
    cfg.quad_degree = std::stoi(value);
  } else if (key == "box_lo") {
    const auto parts = split_csv(value);
    if (parts.size() != 3)
      throw std::invalid_argument("config: box_lo needs 3 comma-separated values");
    for (int i = 0; i < 3; ++i) cfg.box_lo[i] = std::stod(parts[i]);
  } else if (key == "box_side") {
    cfg.box_side = std::stod(value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "vtk") {
    cfg.vtk = value;
  } else if (key == "dump_matrix") {
    cfg.dump_matrix = value;
  } else if (key == "threads") {
    cfg.threads = std::stoi(value);
  } else if (key == "n_list") {
    cfg.n_list.clear();
    for (const auto& p : split_csv(value)) cfg.n_list.push_back(std::stoi(p));
  } else if (key == "kappa_list") {
    cfg.kappa_list.clear();
    for (const auto& p : split_csv(value))
      cfg.kappa_list.push_back(std::stod(p));
  } else if (key == "kappa_h0") {
    cfg.kappa_h0 = std::stod(value);
  } else if (key == "methods") {
    cfg.methods = split_csv(value);
  } else {
    throw std::invalid_argument("config: unknown key: " + key);
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path,
                       const std::string& subcommand) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  const auto kv = emfem::parse_config_file(f);
  for (const auto& [k, v] : kv)
    if (k.find('.') == std::string::npos) apply_kv(cfg, k, v);
  const std::string prefix = subcommand + ".";
  for (const auto& [k, v] : kv)
    if (k.rfind(prefix, 0) == 0) apply_kv(cfg, k.substr(prefix.size()), v);
}

// Precedence: defaults < config-file globals < config-file [subcommand]
// < explicitly supplied CLI flags.
struct CliOverrides {
  CLI::App* cmd = nullptr;
  RunConfig values;  // filled by CLI11
  std::vector<double> box_lo_raw;
  std::string config_path;

  void apply(RunConfig& cfg, const std::string& subcommand) const {
    if (!config_path.empty()) apply_config_file(cfg, config_path, subcommand);
    auto given = [&](const std::string& flag) {
      const CLI::Option* opt = cmd->get_option_no_throw(flag);
      return opt && opt->count() > 0;
    };
    auto take = [&](const std::string& flag, auto member) {
      if (given(flag)) cfg.*member = values.*member;
    };
    take("--method", &RunConfig::method);
    take("--kappa", &RunConfig::kappa);
    take("--n", &RunConfig::n);
    take("--gamma", &RunConfig::gamma);
    take("--solution", &RunConfig::solution);
    take("--solver", &RunConfig::solver);
    take("--quad-degree", &RunConfig::quad_degree);
    take("--box-side", &RunConfig::box_side);
    take("--out", &RunConfig::out);
    take("--vtk", &RunConfig::vtk);
    take("--dump-matrix", &RunConfig::dump_matrix);
    take("--threads", &RunConfig::threads);
    take("--n-list", &RunConfig::n_list);
    take("--kappa-list", &RunConfig::kappa_list);
    take("--kappa-h0", &RunConfig::kappa_h0);
    take("--methods", &RunConfig::methods);
    if (given("--box-lo"))
      for (int i = 0; i < 3; ++i) cfg.box_lo[i] = box_lo_raw[i];
  }
};

void add_common_options(CliOverrides& ov) {
  CLI::App* c = ov.cmd;
  RunConfig& v = ov.values;
  c->add_option("--kappa", v.kappa, "Wavenumber kappa (> 0)");
  c->add_option("--n", v.n, "Cells per box edge (6 tets per cell)");
  c->add_option("--method", v.method, "Discretization: eem | cip")
      ->check(CLI::IsMember({"eem", "cip"}));
  c->add_option("--gamma", v.gamma,
                "Penalty values: 'paper' | 'zero' | c1,c2,c3 (a+bi each)");
  c->add_option("--solution", v.solution,
                "Manufactured solution: multipole-sine | plane-wave")
      ->check(CLI::IsMember({"multipole-sine", "plane-wave"}));
  c->add_option("--solver", v.solver, "Linear solver: direct | gmres")
      ->check(CLI::IsMember({"direct", "gmres"}));
  c->add_option("--quad-degree", v.quad_degree,
                "Quadrature degree for data and error integrals");
  c->add_option("--box-lo", ov.box_lo_raw, "Box lower corner (3 values)")
      ->expected(3)
      ->delimiter(',');
  c->add_option("--box-side", v.box_side, "Box side length");
  c->add_option("--threads", v.threads, "Worker threads for sweeps");
  c->add_option("--config", ov.config_path,
                "Config file (key = value lines, [subcommand] sections)");
}

void add_output_options(CliOverrides& ov) {
  CLI::App* c = ov.cmd;
  RunConfig& v = ov.values;
  c->add_option("--out", v.out, "Append results to this CSV file");
  c->add_option("--vtk", v.vtk, "Write the solution as a legacy-ASCII VTK file");
  c->add_option("--dump-matrix", v.dump_matrix,
                "Write the assembled system in MatrixMarket format");
}

void print_human(std::ostream& os, const ExperimentRecord& r) {
  os << r.method << "  kappa=" << r.kappa << "  n=" << r.n
     << "  dofs=" << r.dofs << "  relL2=" << r.rel_l2_err
     << "  relHcurl=" << r.rel_hcurl_err << "  relEnergy=" << r.rel_energy_err
     << "  interpHcurl=" << r.interp_rel_hcurl_err
     << "  stab=" << r.stability_ratio << "  solver=" << r.solver_method
     << "(" << r.solver_iterations << " it, res " << r.solver_residual
     << ")  " << r.wall_time_seconds << " s\n";
}

void emit_csv(const RunConfig& cfg, const std::string& subcommand,
              const std::vector<ExperimentRecord>& recs) {
  if (cfg.out.empty()) {
    std::cout << emfem::kCsvHeader << "\n"
              << config_comment(cfg, subcommand) << "\n";
    for (const auto& r : recs) std::cout << emfem::csv_row(r) << "\n";
    return;
  }
  bool need_header = true;
  {
    std::ifstream probe(cfg.out);
    need_header = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
  }
  std::ofstream f(cfg.out, std::ios::app);
  if (!f) throw std::runtime_error("cannot open " + cfg.out);
  if (need_header) f << emfem::kCsvHeader << "\n";
  f << config_comment(cfg, subcommand) << "\n";
  for (const auto& r : recs) f << emfem::csv_row(r) << "\n";
  for (const auto& r : recs) print_human(std::cout, r);
  std::cout << "appended " << recs.size() << " rows to " << cfg.out << "\n";
}

void summarize_convergence(std::ostream& os, const RunConfig& cfg,
                           const std::vector<ExperimentRecord>& recs) {
  for (const auto& method : cfg.methods) {
    const std::string tag = method == "cip" ? "CIP" : "EEM";
    std::vector<double> hs, l2, hcurl, energy, il2, icurl;
    for (const auto& r : recs) {
      if (r.method != tag) continue;
      hs.push_back(r.h0);
      l2.push_back(r.rel_l2_err);
      hcurl.push_back(r.rel_hcurl_err);
      energy.push_back(r.rel_energy_err);
      il2.push_back(r.interp_rel_l2_err);
      icurl.push_back(r.interp_rel_hcurl_err);
    }
    if (hs.size() < 2) continue;
    os << tag << " slopes (last half of the ladder):"
       << "  L2 " << emfem::fit_log_slope(hs, l2) << "  H(curl) "
       << emfem::fit_log_slope(hs, hcurl) << "  energy "
       << emfem::fit_log_slope(hs, energy) << "  interp L2 "
       << emfem::fit_log_slope(hs, il2) << "  interp H(curl) "
       << emfem::fit_log_slope(hs, icurl) << "\n";
  }
}

void summarize_ksweep(std::ostream& os,
                      const std::vector<ExperimentRecord>& recs) {
  os << "pollution view (error/interp-error ratio per kappa):\n";
  for (const auto& r : recs) {
    const double ratio =
        r.interp_rel_hcurl_err > 0 ? r.rel_hcurl_err / r.interp_rel_hcurl_err
                                   : 0;
    os << "  " << r.method << " kappa=" << r.kappa << " n=" << r.n
       << "  relHcurl=" << r.rel_hcurl_err << "  ratio=" << ratio << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Edge-element solver for the time-harmonic Maxwell impedance problem "
      "(classical and interior-penalty stabilized)"};
  app.require_subcommand(1);

  CliOverrides solve_ov, conv_ov, ksweep_ov, validate_ov;

  solve_ov.cmd = app.add_subcommand("solve", "Solve one case and report errors");
  add_common_options(solve_ov);
  add_output_options(solve_ov);

  conv_ov.cmd = app.add_subcommand(
      "convergence", "h-refinement sweep over --n-list for each method");
  add_common_options(conv_ov);
  add_output_options(conv_ov);
  conv_ov.cmd->add_option("--n-list", conv_ov.values.n_list,
                          "Ascending mesh sizes")
      ->delimiter(',');
  conv_ov.cmd->add_option("--methods", conv_ov.values.methods,
                          "Methods to sweep (eem, cip)")
      ->delimiter(',');

  ksweep_ov.cmd = app.add_subcommand(
      "ksweep", "Wavenumber sweep with n = round(kappa * side / kappa-h0)");
  add_common_options(ksweep_ov);
  add_output_options(ksweep_ov);
  ksweep_ov.cmd->add_option("--kappa-list", ksweep_ov.values.kappa_list,
                            "Wavenumbers to sweep")
      ->delimiter(',');
  ksweep_ov.cmd->add_option("--kappa-h0", ksweep_ov.values.kappa_h0,
                            "Target kappa * h0 held fixed along the sweep");
  ksweep_ov.cmd->add_option("--methods", ksweep_ov.values.methods,
                            "Methods to sweep (eem, cip)")
      ->delimiter(',');

  validate_ov.cmd = app.add_subcommand(
      "validate", "Run the self-check property suite (exit code = failures)");
  add_common_options(validate_ov);

  CLI::App* mesh_info =
      app.add_subcommand("mesh-info", "Print mesh statistics for a given n");
  int mi_n = 2;
  std::vector<double> mi_lo{1.0, 1.0, 1.0};
  double mi_side = 1.0;
  std::string mi_vtk;
  mesh_info->add_option("--n", mi_n, "Cells per box edge");
  mesh_info->add_option("--box-lo", mi_lo, "Box lower corner (3 values)")
      ->expected(3)
      ->delimiter(',');
  mesh_info->add_option("--box-side", mi_side, "Box side length");
  mesh_info->add_option("--vtk", mi_vtk, "Write the mesh as a VTK file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_ov.cmd->parsed()) {
      RunConfig cfg;
      solve_ov.apply(cfg, "solve");
      cfg.validate();
      const ExperimentRecord rec = emfem::run_solve_case(cfg);
      emit_csv(cfg, "solve", {rec});
      if (!cfg.out.empty()) return 0;
      print_human(std::cerr, rec);
      return 0;
    }
    if (conv_ov.cmd->parsed()) {
      RunConfig cfg;
      conv_ov.apply(cfg, "convergence");
      cfg.validate();
      const auto recs = emfem::cmd_convergence(cfg);
      emit_csv(cfg, "convergence", recs);
      summarize_convergence(cfg.out.empty() ? std::cerr : std::cout, cfg, recs);
      return 0;
    }
    if (ksweep_ov.cmd->parsed()) {
      RunConfig cfg;
      ksweep_ov.apply(cfg, "ksweep");
      cfg.validate();
      const auto recs = emfem::cmd_ksweep(cfg);
      emit_csv(cfg, "ksweep", recs);
      summarize_ksweep(cfg.out.empty() ? std::cerr : std::cout, recs);
      return 0;
    }
    if (validate_ov.cmd->parsed()) {
      RunConfig cfg;
      validate_ov.apply(cfg, "validate");
      cfg.validate();
      return emfem::cmd_validate(cfg, std::cout);
    }
    if (mesh_info->parsed()) {
      emfem::Box box;
      box.lo = emfem::Vec3(mi_lo[0], mi_lo[1], mi_lo[2]);
      box.hi = box.lo + emfem::Vec3(mi_side, mi_side, mi_side);
      const emfem::Mesh m = emfem::build_cub6_mesh(mi_n, box);
      std::cout << emfem::mesh_stats(m);
      if (!mi_vtk.empty()) {
        std::ofstream f(mi_vtk);
        if (!f) throw std::runtime_error("cannot open " + mi_vtk);
        emfem::write_vtk_mesh(f, m);
        std::cout << "wrote " << mi_vtk << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
