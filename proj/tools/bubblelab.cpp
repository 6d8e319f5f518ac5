#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bubble/config.hpp"
#include "bubble/curve.hpp"
#include "bubble/driver.hpp"
#include "bubble/families.hpp"
#include "bubble/neck.hpp"
#include "bubble/renorm.hpp"
#include "bubble/report.hpp"

using namespace bubble;

namespace {

int exit_code(const Error& e) { return e.kind() == ErrorKind::Validation ? 2 : 3; }

RunConfig load(const std::string& path, const std::string& tol) {
  RunConfig c = load_config(path);
  apply_tol_overrides(c, tol);
  return c;
}

std::string out_dir(const std::string& flag, const RunConfig& c) {
  if (!flag.empty()) return flag;
  if (!c.output_dir.empty()) return c.output_dir;
  return "out";
}

int run_extract(const std::string& config_path, const std::string& out, const std::string& tol) {
  const RunConfig c = load(config_path, tol);
  const auto family = make_family(c.family);
  const auto tree = extract_bubble_tree(family, c.driver);
  const std::string dir = out_dir(out, c);
  write_extract_outputs(dir, tree, c);
  int bubbles = 0;
  for (const auto& comp : tree.components) bubbles += comp.kind == ComponentKind::Bubble;
  std::printf("family %s: %d bubble(s), %d iteration(s), identity residual %.6g (%s)\n",
              c.family.kind.c_str(), bubbles, tree.iterations, tree.identity_residual,
              tree.identity_verdict.c_str());
  std::printf("reports written to %s\n", dir.c_str());
  return 0;
}

int run_neck(const std::string& config_path, const std::string& out, const std::string& tol) {
  const RunConfig c = load(config_path, tol);
  const auto family = make_family(c.family);
  const std::string dir = out_dir(out, c);
  write_neck_outputs(dir, family, c);
  std::printf("neck report written to %s\n", dir.c_str());
  return 0;
}

int run_curve(const std::string& graph_path, int node, int n_max) {
  std::ifstream in(graph_path);
  if (!in) throw Error(ErrorKind::Validation, "cli.curve", "cannot read graph file '" + graph_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto curve = MarkedNodalCurve::parse(ss.str());
  const auto st = is_stable(curve);
  std::printf("genus: %d\nmarks: %d\nstable: %s\n", curve.arithmetic_genus(), curve.num_marks(),
              st.stable ? "true" : "false");
  if (node < 0) return 0;
  if (node >= curve.num_edges())
    throw Error(ErrorKind::Validation, "cli.curve", "node index out of range");
  RegularityOptions opts;
  opts.n_max = n_max;
  const auto v = is_regular_node(curve, node, opts);
  const char* word = v.verdict == Regularity::Regular      ? "true"
                     : v.verdict == Regularity::NotRegular ? "false"
                                                           : "undecided";
  std::string witness;
  for (std::size_t i = 0; i < v.witness.size(); ++i)
    witness += (i ? "," : "") + std::to_string(v.witness[i]);
  if (v.verdict == Regularity::Regular)
    std::printf("regular: %s, witness: forget mark %s\n", word, witness.c_str());
  else
    std::printf("regular: %s\n", word);
  return 0;
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

int run_selftest() {
  std::vector<Check> checks;
  auto add = [&](std::string name, bool pass, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    checks.push_back({std::move(name), pass, buf});
  };

  for (int d = 1; d <= 3; ++d) {
    std::vector<Complex> coeffs(static_cast<std::size_t>(d) + 1, 0.0);
    coeffs[d] = 1.0;
    const double e = energy_quadrature(RationalMap::polynomial(coeffs), Region::full_sphere());
    const double rel = std::abs(e - 4.0 * kPi * d) / (4.0 * kPi * d);
    add("energy of z^" + std::to_string(d), rel <= 1e-6, rel);
  }
  {
    const double k = 10.0, rho = 0.3;
    const auto mu = density_to_measure(RationalMap::polynomial({0.0, k}), 1.0);
    const double exact = 4.0 * kPi * k * k * rho * rho / (1.0 + k * k * rho * rho);
    const double rel = std::abs(mass_in(mu, 0.0, rho) - exact) / exact;
    add("radial mass of kz", rel <= 1e-2, rel);
  }
  {
    const double eps = 0.25;
    const auto mu = polar_grid_measure([](Complex) { return 4.0 * 0.25 / kPi; }, 0.0, 1.0, 400, 64, 1.0);
    const auto r = solve_neck_scale(mu, 0.0, eps);
    const double target = std::sqrt(3.0) / 2.0 / (1.0 + std::sqrt(3.0) / 2.0);
    add("uniform disk neck scale", std::abs(r.t - target) <= 1e-9, std::abs(r.t - target));
  }
  {
    FamilySpec spec;
    spec.kind = "torus_linear";
    spec.a = 2.0;
    spec.b = 1.0;
    const auto d = diagnostics(torus_neck(spec, 6));
    const double err = std::abs(d.alpha - kPi * 3.0);
    add("linear torus alpha", err <= 1e-8, err);
  }
  {
    const auto s = sample_polar(RationalMap::polynomial({0.0, 0.0, 1.0}), 0.2, 1.0, 256, 256);
    const std::vector<double> radii{0.3, 0.5, 0.8};
    const double r = pohozaev_residual(s, radii);
    add("pohozaev residual of z^2", r <= 1e-8, r);
  }
  {
    const auto c = MarkedNodalCurve::parse("v0 g=0 legs=1,2\nv1 g=0 legs=3,4\ne 0 1\n");
    const auto v = is_regular_node(c, 0);
    const bool ok = v.verdict == Regularity::Regular && v.witness == std::vector<int>{4};
    add("(0,4) node regular with witness {4}", ok, ok ? 0.0 : 1.0);
  }

  bool all = true;
  for (const auto& c : checks) {
    std::printf("%s %s (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    all = all && c.pass;
  }
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubblelab: bubble-tree extraction laboratory"};
  app.require_subcommand(1);
  std::string config_path, out, tol, graph;
  int node = -1, n_max = 8;

  auto* extract = app.add_subcommand("extract", "run the extraction driver and write reports");
  extract->add_option("--config", config_path, "config file")->required();
  extract->add_option("--out", out, "output directory");
  extract->add_option("--tol", tol, "tolerance overrides key=value[,key=value]");

  auto* neck = app.add_subcommand("neck", "neck diagnostics for a nodal family");
  neck->add_option("--config", config_path, "config file")->required();
  neck->add_option("--out", out, "output directory");
  neck->add_option("--tol", tol, "tolerance overrides key=value[,key=value]");

  auto* curve = app.add_subcommand("curve", "stability and regularity queries on a dual graph");
  curve->add_option("--graph", graph, "dual-graph file")->required();
  curve->add_option("--node", node, "edge index to classify");
  curve->add_option("--n-max", n_max, "largest forgotten-set size searched");

  auto* selftest = app.add_subcommand("selftest", "closed-form oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (extract->parsed()) return run_extract(config_path, out, tol);
    if (neck->parsed()) return run_neck(config_path, out, tol);
    if (curve->parsed()) return run_curve(graph, node, n_max);
    if (selftest->parsed()) return run_selftest();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
