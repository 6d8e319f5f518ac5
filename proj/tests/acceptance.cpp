// One PASS/FAIL line per acceptance criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bubble/config.hpp"
#include "bubble/curve.hpp"
#include "bubble/driver.hpp"
#include "bubble/families.hpp"
#include "bubble/neck.hpp"
#include "bubble/renorm.hpp"
#include "bubble/report.hpp"
#include "oracles.hpp"

using namespace bubble;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string config_path(const std::string& name) {
  return std::string(BUBBLE_SOURCE_DIR) + "/configs/" + name + ".json";
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome criterion1() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    std::vector<Complex> c(static_cast<std::size_t>(d) + 1, 0.0);
    c[d] = 1.0;
    const double e = energy_quadrature(RationalMap::polynomial(c), Region::full_sphere());
    worst = std::max(worst, std::abs(e - oracle::sphere_energy(d)) / oracle::sphere_energy(d));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-6 && secs < 5.0, fmt("max rel error %.3g, %.3g s", worst, secs)};
}

Outcome criterion2() {
  double worst = 0.0;
  const std::vector<double> radii{0.3, 0.5, 0.8};
  for (int d = 1; d <= 3; ++d) {
    std::vector<Complex> c(static_cast<std::size_t>(d) + 1, 0.0);
    c[d] = 1.0;
    const auto s = sample_polar(RationalMap::polynomial(c), 0.2, 1.0, 256, 256);
    worst = std::max(worst, pohozaev_residual(s, radii));
  }
  return {worst <= 1e-8, fmt("max residual %.3g", worst)};
}

Outcome criterion3() {
  const double mass = 1.0, eps = 0.25;
  const auto disk = polar_grid_measure([&](Complex) { return mass / oracle::pi; }, 0.0, 1.0, 400,
                                       64, 1.0);
  const double t = solve_neck_scale(disk, 0.0, eps).t;
  const double err = std::abs(t - oracle::uniform_disk_t(mass, eps));

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int monotone = 0;
  const int instances = 100;
  for (int n = 0; n < instances; ++n) {
    struct Bump {
      Complex c;
      double s, m;
    };
    std::vector<Bump> bumps;
    const int nb = 1 + static_cast<int>(u(rng) * 3);
    for (int b = 0; b < nb; ++b)
      bumps.push_back({std::polar(0.5 * u(rng), oracle::pi * 2 * u(rng)), 0.05 + 0.15 * u(rng),
                       0.2 + u(rng)});
    auto density = [&](Complex z) {
      double v = 0.02;
      for (const auto& b : bumps)
        v += b.m / (2 * oracle::pi * b.s * b.s) * std::exp(-std::norm(z - b.c) / (2 * b.s * b.s));
      return v;
    };
    const auto mu = polar_grid_measure(density, 0.0, 1.0, 96, 48, 1.0);
    const Complex q = std::polar(0.2 * u(rng), oracle::pi * 2 * u(rng));
    const double level = (0.05 + 0.45 * u(rng)) * mu.total_mass();
    auto hist = solve_neck_scale(mu, q, level).history;
    std::sort(hist.begin(), hist.end());
    bool ok = true;
    for (std::size_t i = 1; i < hist.size(); ++i)
      if (hist[i].second > hist[i - 1].second) ok = false;
    monotone += ok;
  }
  return {err <= 1e-9 && monotone == instances,
          fmt("|t - t*| = %.3g; %.0f/%.0f histories nonincreasing", err, monotone, instances)};
}

Outcome criterion4() {
  const auto ladder = build_scale_ladder(1.0, 0.25, 6);
  const int k = ladder.working_index();
  const double d2k = ladder.delta(2 * k);
  const double sigma = d2k / 20.0;
  const double mass = 2.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int ok = 0;
  double worst_f = 0.0, worst_d = 0.0, worst_margin = 1e300;
  const int instances = 50;
  for (int n = 0; n < instances; ++n) {
    const Complex c = std::polar(0.7 * d2k * std::sqrt(u(rng)), 2 * oracle::pi * u(rng));
    auto density = [&](Complex z) {
      return mass / (2 * oracle::pi * sigma * sigma) * std::exp(-std::norm(z - c) / (2 * sigma * sigma));
    };
    const auto mu = polar_grid_measure(density, c, 8.0 * sigma, 64, 64, 1.0);
    const auto bc = find_balanced_center(mu, ladder, k);
    const double f = std::abs(bc.F) / bc.mass;
    const double d = std::abs(bc.q - c) / sigma;
    worst_f = std::max(worst_f, f);
    worst_d = std::max(worst_d, d);
    worst_margin = std::min(worst_margin, bc.min_boundary_margin);
    ok += f <= 1e-8 && d <= 3.0 && bc.boundary_condition_holds;
  }
  return {ok == instances, fmt("%.0f/50 ok; max |F|/mass %.3g, max |q-c|/sigma %.3g", ok, worst_f,
                               worst_d) +
                               fmt(", min boundary margin %.3g", worst_margin)};
}

Outcome criterion5() {
  FamilySpec plumbing;
  plumbing.kind = "plumbing";
  double worst = 0.0;
  for (double k : default_schedule("plumbing")) {
    const auto d = diagnostics(plumbing_neck(plumbing, k));
    worst = std::max(worst, std::abs(d.alpha) / d.energy);
  }
  double torus_err = 0.0;
  const double pairs[][2] = {{2, 1}, {1, 0}, {1, 2}, {0.5, 0.5}, {3, 0.25}};
  for (const auto& p : pairs) {
    FamilySpec torus;
    torus.kind = "torus_linear";
    torus.a = p[0];
    torus.b = p[1];
    const auto d = diagnostics(torus_neck(torus, 6));
    torus_err = std::max(torus_err, std::abs(d.alpha - oracle::torus_alpha(p[0], p[1])));
  }
  return {worst <= 1e-6 && torus_err <= 1e-8,
          fmt("plumbing max |alpha|/energy %.3g; torus max alpha error %.3g", worst, torus_err)};
}

Outcome criterion6() {
  FamilySpec plumbing;
  plumbing.kind = "plumbing";
  const auto schedule = zero_neck_schedule(plumbing.delta);
  std::vector<CylinderField> necks;
  for (double k : default_schedule("plumbing")) necks.push_back(plumbing_neck(plumbing, k));
  const auto free_result = zero_neck_test(necks, 0.05, schedule);
  const double finest = free_result.rows.back().energy;

  FamilySpec torus;
  torus.kind = "torus_linear";
  torus.a = 1.0;
  torus.b = 0.0;
  std::vector<CylinderField> tnecks;
  for (double k : default_schedule("torus_linear")) tnecks.push_back(torus_neck(torus, k));
  const auto torus_result = zero_neck_test(tnecks, 0.05, schedule);
  double mismatch = 0.0;
  for (const auto& r : torus_result.rows)
    mismatch = std::max(mismatch, std::abs(r.energy - r.predicted) / r.predicted);
  const bool pass = free_result.pass && finest <= 0.01 && !torus_result.pass && mismatch <= 0.05;
  return {pass, std::string("plumbing ") + (free_result.pass ? "PASS" : "FAIL") +
                    fmt(" (finest energy %.3g); ", finest) + "linear torus " +
                    (torus_result.pass ? "PASS" : "FAIL") +
                    fmt(" (max |E - 2T alpha| / 2T alpha %.3g)", mismatch)};
}

Outcome criterion7() {
  const auto start = Clock::now();
  const auto curves = enumerate_genus0(4, 6);
  int expected = 0;
  for (int n = 3; n <= 6; ++n) expected += oracle::genus0_strata(n);
  RegularityOptions opts;
  opts.genus0_shortcut = false;
  auto all_regular = [&](const MarkedNodalCurve& c) {
    for (int e = 0; e < c.num_edges(); ++e)
      if (is_regular_node(c, e, opts).verdict != Regularity::Regular) return false;
    return true;
  };
  int irregular = 0, roundtrip_fail = 0, inherit_fail = 0, insertions = 0;
  for (const auto& c : curves) {
    if (!all_regular(c)) ++irregular;
    auto check = [&](const BubbleInsertion& ins) {
      ++insertions;
      const auto back = forget_marks(ins.curve, ins.new_labels);
      if (!isomorphic(back.curve, c)) ++roundtrip_fail;
      for (int e = 0; e < c.num_edges(); ++e)
        for (int pe : ins.preimage_nodes[e])
          if (is_regular_node(ins.curve, pe, opts).verdict != Regularity::Regular) {
            ++inherit_fail;
            return;
          }
    };
    for (int v = 0; v < c.num_vertices(); ++v)
      check(add_bubble_component(c, {BubbleSite::Kind::Point, v}, 1));
    for (int e = 0; e < c.num_edges(); ++e)
      check(add_bubble_component(c, {BubbleSite::Kind::Node, e}, 2));
  }
  const double secs = seconds_since(start);
  const bool pass = static_cast<int>(curves.size()) == expected && irregular == 0 &&
                    roundtrip_fail == 0 && inherit_fail == 0 && secs < 10.0;
  return {pass, fmt("%.0f curves (expected %.0f), ", static_cast<double>(curves.size()), expected) +
                    fmt("%.0f irregular, %.0f insertions, ", irregular, insertions) +
                    fmt("%.0f round-trip and %.0f inheritance failures, ", roundtrip_fail,
                        inherit_fail) +
                    fmt("%.3g s", secs)};
}

struct Extraction {
  RunConfig config;
  BubbleTree tree;
  double seconds = 0.0;
};

Extraction extract(const std::string& name) {
  const auto start = Clock::now();
  RunConfig config = load_config(config_path(name));
  const auto family = make_family(config.family);
  BubbleTree tree = extract_bubble_tree(family, config.driver);
  return {std::move(config), std::move(tree), seconds_since(start)};
}

bool trace_ok(const BubbleTree& tree, double eps_bar) {
  for (std::size_t i = 1; i < tree.re_trace.size(); ++i)
    if (tree.re_trace[i - 1] - tree.re_trace[i] < eps_bar / 2 - eps_bar / 20) return false;
  return tree.iterations <= tree.iteration_cap &&
         tree.iteration_cap == static_cast<int>(std::ceil(2 * tree.limit_energy / eps_bar));
}

std::vector<Extraction> extractions;

Outcome criterion8() {
  extractions = {extract("bubble1"), extract("bubble2")};
  const auto& one = extractions[0];
  const auto& two = extractions[1];
  const double four_pi = oracle::sphere_energy(1);
  auto bubbles = [](const BubbleTree& t) {
    std::vector<double> e;
    for (const auto& c : t.components)
      if (c.kind == ComponentKind::Bubble) e.push_back(c.energy);
    return e;
  };
  const auto b1 = bubbles(one.tree), b2 = bubbles(two.tree);
  const double base1 = one.tree.components[0].energy;
  bool pass = b1.size() == 1 && oracle::close_rel(b1[0], four_pi, 0.02) && base1 <= 0.02 * four_pi &&
              one.tree.identity_residual <= 0.02;
  pass = pass && b2.size() == 2 && two.tree.iterations == 2 && two.tree.re_trace.size() == 3;
  for (double e : b2) pass = pass && oracle::close_rel(e, four_pi, 0.05);
  const double eps_bar = one.config.driver.eps_bar;
  pass = pass && trace_ok(one.tree, eps_bar) && trace_ok(two.tree, two.config.driver.eps_bar);
  // The only energy the bubble does not see is its tail beyond 1/delta_K.
  const double tail = oracle::bubble_tail(eps_bar, std::ldexp(1.0, one.config.driver.depth));
  const bool tail_ok = std::abs(one.tree.identity_residual * four_pi - tail) <= 0.5 * tail;
  const double secs = one.seconds + two.seconds;
  pass = pass && tail_ok && one.seconds < 60.0 && two.seconds < 60.0;
  std::string detail = fmt("bubble1 E = %.6g, base %.3g, residual %.3g; ", b1.empty() ? 0 : b1[0],
                           base1, one.tree.identity_residual);
  detail += fmt("bubble2 E = %.6g, %.6g; ", b2.size() > 0 ? b2[0] : 0, b2.size() > 1 ? b2[1] : 0);
  detail += fmt("%.3g s + %.3g s", one.seconds, two.seconds) + fmt(" (total %.3g s)", secs);
  return {pass, detail};
}

Outcome criterion9() {
  const std::vector<std::string> names{"bubble1", "bubble2", "fixed", "plumbing",
                                       "plumbing_bubble", "torus"};
  int identical = 0;
  for (const auto& name : names) {
    std::string first;
    auto it = std::find_if(extractions.begin(), extractions.end(),
                           [&](const Extraction& x) { return x.config.family.kind == name; });
    if (it != extractions.end())
      first = tree_json(it->tree, it->config);
    else {
      const auto x = extract(name);
      first = tree_json(x.tree, x.config);
    }
    const auto y = extract(name);
    identical += first == tree_json(y.tree, y.config);
  }
  return {identical == static_cast<int>(names.size()),
          fmt("%.0f/%.0f configs byte-identical", identical, static_cast<double>(names.size()))};
}

}  // namespace

int main() {
  report(1, "energy quadrature", criterion1);
  report(2, "pohozaev identity", criterion2);
  report(3, "neck-scale solver", criterion3);
  report(4, "balanced center", criterion4);
  report(5, "regular-node alpha", criterion5);
  report(6, "zero neck property", criterion6);
  report(7, "dual-graph layer", criterion7);
  report(8, "full extraction", criterion8);
  report(9, "determinism", criterion9);
  return failures == 0 ? 0 : 1;
}
