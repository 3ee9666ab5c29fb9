// chaoskit: batch front-end for the chaos-process laboratory.
//
//   chaoskit check|verify|sde|simulate --config FILE [--seed U64] [--threads K]
//                                      [--out DIR] [--svg]
//
// check     structural checks on the configured kernel family   -> check.json
// verify    the configured verification suites                  -> verify.json
// sde       Malliavin-matrix / density experiment               -> sde.json
// simulate  per-sample X / DX paths                             -> path_<i>.csv
//
// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 configuration or
// runtime error.  Identical config + seed produce byte-identical artifacts
// regardless of --threads.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "chaoskit/config.hpp"
#include "chaoskit/io.hpp"

namespace fs = std::filesystem;
using namespace chaoskit;

namespace {

std::string artifact(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void announce(const std::string& verb, const std::string& path, bool pass) {
  std::cout << (pass ? "PASS " : "FAIL ") << verb << " -> " << path << "\n";
}

const Integrand& find_integrand(const std::vector<Integrand>& catalog, const std::string& name) {
  for (const auto& g : catalog)
    if (g.name == name) return g;
  throw ConfigError("unknown integrand: " + name);
}

VectorFieldSet make_fields(const ExperimentConfig& cfg) {
  if (cfg.fields == "elliptic-sine") return make_elliptic_sine_fields(cfg.sde_dim, cfg.amp);
  throw ConfigError("unknown vector-field set: " + cfg.fields);
}

VectorXd initial_state(const ExperimentConfig& cfg) {
  if (cfg.y0.empty()) return VectorXd::Zero(cfg.sde_dim);
  VectorXd y0(cfg.y0.size());
  for (std::size_t i = 0; i < cfg.y0.size(); ++i) y0(static_cast<Eigen::Index>(i)) = cfg.y0[i];
  return y0;
}

// ---------------------------------------------------------------------------

int run_check(const ExperimentConfig& cfg) {
  const KernelFamily fam = make_family(cfg);
  const AssumptionReport rep = check_assumptions(fam, cfg.assumptions);
  json j = report_json(rep);
  j["config_family"] = family_to_json(fam);
  const std::string path = artifact(cfg, "check.json");
  write_json_file(path, j);
  announce("check " + fam.name, path, rep.all_pass);
  return rep.all_pass ? 0 : 1;
}

int run_verify(const ExperimentConfig& cfg) {
  const KernelFamily fam = make_family(cfg);
  const std::vector<Integrand> catalog = standard_integrands();
  const std::vector<double> grid = uniform_grid(cfg.m);

  const AssumptionReport arep = check_assumptions(fam, cfg.assumptions);
  const double alpha_hat = arep.alpha.value;
  const double beta_hat = arep.beta.value;

  json out;
  out["family"] = family_to_json(fam);
  out["assumptions"] = report_json(arep);
  out["alpha_hat"] = alpha_hat;
  out["beta_hat"] = beta_hat;
  json suites = json::object();
  bool all = true;
  auto wants = [&](const std::string& s) {
    return std::find(cfg.suites.begin(), cfg.suites.end(), s) != cfg.suites.end();
  };

  if (wants("interpolation")) {
    json arr = json::array();
    for (const auto& name : cfg.integrands) {
      const auto rep = verify_interpolation(fam, find_integrand(catalog, name), beta_hat, cfg.m);
      all = all && rep.pass;
      arr.push_back(report_json(rep));
    }
    suites["interpolation"] = std::move(arr);
  }

  if (wants("energy")) {
    json arr = json::array();
    for (const auto& name : cfg.integrands) {
      const auto rep = verify_energy_identity(fam, find_integrand(catalog, name), cfg.m,
                                              cfg.samples, cfg.seed, cfg.threads);
      all = all && rep.pass;
      arr.push_back(report_json(rep));
    }
    suites["energy"] = std::move(arr);
  }

  if (wants("corollary")) {
    json arr = json::array();
    for (const auto& name : cfg.integrands) {
      const auto rep = verify_corollary_bounds(fam, find_integrand(catalog, name), beta_hat,
                                               cfg.m, cfg.samples, cfg.seed, cfg.threads);
      all = all && rep.pass;
      arr.push_back(report_json(rep));
    }
    suites["corollary"] = std::move(arr);
  }

  if (wants("uniform")) {
    UniformBoundOptions opt;
    opt.m = cfg.m;
    opt.n_samples = cfg.samples;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    opt.rank_tol = cfg.assumptions.rank_tol;
    const auto rep = verify_uniform_bound(fam, catalog, opt);
    all = all && rep.pass;
    suites["uniform"] = report_json(rep);
  }

  if (wants("nonvanishing")) {
    json arr = json::array();
    std::vector<Integrand> gs;
    for (const auto& name : cfg.integrands) gs.push_back(find_integrand(catalog, name));
    gs.push_back(make_random_integrand("sin-of-X", 1.0, [](double x) { return std::sin(x); }));
    for (const auto& g : gs) {
      const auto rep = verify_nonvanishing(fam, g, cfg.samples, cfg.m, cfg.seed, cfg.threads);
      all = all && rep.consistent;
      arr.push_back(report_json(rep));
    }
    suites["nonvanishing"] = std::move(arr);
  }

  if (wants("subspace")) {
    const auto rep = check_dx_in_subspace(fam, cfg.samples, cfg.seed, cfg.assumptions.rank_tol);
    all = all && rep.pass;
    suites["subspace"] = report_json(rep);
  }

  if (wants("density")) {
    json arr = json::array();
    for (const auto& name : cfg.integrands) {
      const Integrand& g = find_integrand(catalog, name);
      std::vector<double> vals(static_cast<std::size_t>(cfg.samples));
      std::vector<SymTensord> f;
      for (double t : grid) f.push_back(fam.at(t));
      parallel_for(vals.size(), cfg.threads, [&](std::size_t s) {
        const GaussianSample gs = draw_gaussian_sample(cfg.seed, s, fam.dim);
        std::vector<double> x(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) x[k] = evaluate(f[k], gs.z);
        const std::vector<double> gv = detail::integrand_values(g, grid, &x);
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) acc += gv[k] * (x[k + 1] - x[k]);
        vals[s] = acc;
      });
      const auto rep = density_diagnostic(std::move(vals), cfg.deltas);
      all = all && rep.atom_pass && !rep.degenerate;
      json j = report_json(rep);
      j["integrand"] = g.name;
      arr.push_back(std::move(j));
    }
    suites["density"] = std::move(arr);
  }

  if (wants("norris")) {
    const Integrand& g = find_integrand(catalog, cfg.integrands.empty() ? "t" : cfg.integrands.front());
    const GaussianSample gs = draw_gaussian_sample(cfg.seed, 0, fam.dim);
    Path<VectorXd> dx;
    dx.holder = fam.rho;
    Path<double> gp;
    gp.holder = g.tau;
    std::vector<double> x(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const SymTensord fk = fam.at(grid[k]);
      x[k] = evaluate(fk, gs.z);
      dx.values.push_back(malliavin_gradient(fk, gs.z));
    }
    gp.values = detail::integrand_values(g, grid, &x);
    const auto rep = norris_check(dx, gp, cfg.nu, cfg.epsilons);
    all = all && rep.pass;
    json j = report_json(rep);
    j["integrand"] = g.name;
    suites["norris"] = std::move(j);
  }

  out["suites"] = std::move(suites);
  out["pass"] = all;
  const std::string path = artifact(cfg, "verify.json");
  write_json_file(path, out);
  announce("verify " + fam.name, path, all);
  return all ? 0 : 1;
}

int run_sde(const ExperimentConfig& cfg) {
  const KernelFamily fam = make_family(cfg);
  const VectorFieldSet vf = make_fields(cfg);
  const VectorXd y0 = initial_state(cfg);
  MatrixXd coords;
  const auto rep = sde_density_experiment(fam, vf, y0, cfg.sde_t, cfg.samples, cfg.m, cfg.seed,
                                          cfg.threads, &coords);
  const std::string path = artifact(cfg, "sde.json");
  write_json_file(path, report_json(rep));
  if (cfg.svg) {
    for (int i = 0; i < rep.dim; ++i) {
      std::vector<double> col(static_cast<std::size_t>(coords.rows()));
      for (Eigen::Index s = 0; s < coords.rows(); ++s)
        col[static_cast<std::size_t>(s)] = coords(s, i);
      std::sort(col.begin(), col.end());
      const DensityReport& d = rep.coordinate_density[static_cast<std::size_t>(i)];
      if (d.degenerate) continue;
      const auto [xs, ds] = kde_curve(col, d.bandwidth);
      write_text_file(artifact(cfg, "sde_density_" + std::to_string(i + 1) + ".svg"),
                      svg_polyline_chart(xs, {ds}, {"kde Y_" + std::to_string(i + 1)}));
    }
  }
  announce("sde " + fam.name + " / " + vf.name, path, rep.pass);
  return rep.pass ? 0 : 1;
}

int run_simulate(const ExperimentConfig& cfg) {
  const KernelFamily fam = make_family(cfg);
  const std::vector<double> grid = uniform_grid(cfg.m);
  std::vector<SymTensord> f;
  for (double t : grid) f.push_back(fam.at(t));

  std::vector<std::string> header = {"t", "X"};
  for (int j = 1; j <= fam.dim; ++j) header.push_back("DX_" + std::to_string(j));

  for (int s = 0; s < cfg.samples; ++s) {
    const GaussianSample gs = draw_gaussian_sample(cfg.seed, static_cast<std::size_t>(s), fam.dim);
    std::vector<std::vector<std::string>> rows;
    std::vector<double> xv(grid.size()), dxnorm(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x = evaluate(f[k], gs.z);
      const VectorXd dx = malliavin_gradient(f[k], gs.z);
      xv[k] = x;
      dxnorm[k] = dx.norm();
      std::vector<std::string> row = {format_double(grid[k]), format_double(x)};
      for (int j = 0; j < fam.dim; ++j) row.push_back(format_double(dx(j)));
      rows.push_back(std::move(row));
    }
    const std::string base = "path_" + std::to_string(s);
    write_csv_file(artifact(cfg, base + ".csv"), header, rows);
    if (cfg.svg)
      write_text_file(artifact(cfg, base + ".svg"),
                      svg_polyline_chart(grid, {xv, dxnorm}, {"X_t", "|DX_t|"}));
    std::cout << "wrote " << artifact(cfg, base + ".csv") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-dimensional chaos-process laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  bool svg = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration file")->required();
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--threads", threads, "override the worker-thread count");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_flag("--svg", svg, "also emit SVG plots");
  };
  CLI::App* c_check = app.add_subcommand("check", "structural checks on the kernel family");
  CLI::App* c_verify = app.add_subcommand("verify", "run the configured verification suites");
  CLI::App* c_sde = app.add_subcommand("sde", "Malliavin-matrix / density experiment");
  CLI::App* c_simulate = app.add_subcommand("simulate", "emit sample X / DX paths");
  for (CLI::App* sub : {c_check, c_verify, c_sde, c_simulate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (sub->count("--threads") > 0) cfg.threads = threads;
    if (sub->count("--out") > 0) cfg.out_dir = out_dir;
    if (svg) cfg.svg = true;
    cfg.assumptions.seed = cfg.seed;
    validate_config(cfg);
    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);

    if (sub == c_check) return run_check(cfg);
    if (sub == c_verify) return run_verify(cfg);
    if (sub == c_sde) return run_sde(cfg);
    return run_simulate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "chaoskit: error: " << e.what() << "\n";
    return 2;
  }
}
