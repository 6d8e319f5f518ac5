#include "bubble/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace bubble {

using nlohmann::json;

namespace {

json cplx(Complex z) { return json::array({z.real(), z.imag()}); }

json common_header(const RunConfig& config) {
  const json cfg = json::parse(config.canonical_json);
  json h;
  h["schema"] = kReportSchema;
  h["config_hash"] = config.hash;
  h["family"] = config.family.kind;
  h["tolerances"] = cfg["tolerances"];
  h["thresholds"] = cfg["thresholds"];
  h["ladder"] = cfg["ladder"];
  h["notes"] = json::array(
      {"eps0, eps0_prime and eps0_double_prime are configured thresholds, not certified constants "
       "of the target geometry"});
  return h;
}

json neck_block(const NeckRecord& n) {
  json rows = json::array();
  for (const auto& r : n.zero_neck.rows)
    rows.push_back({{"delta", r.delta}, {"energy", r.energy}, {"diameter", r.diameter},
                    {"predicted", r.predicted}, {"measured", r.measured}});
  return {{"edge", n.edge},
          {"location", cplx(n.location)},
          {"zero_neck", {{"pass", n.zero_neck.pass}, {"late_from", n.zero_neck.late_from}, {"rows", rows}}},
          {"alpha", n.alpha},
          {"energy", n.energy},
          {"diameter", n.diameter},
          {"pohozaev_residual", n.pohozaev_residual}};
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::Validation, "cli.report", "cannot write '" + p.string() + "'");
  return out;
}

void write_theta(const std::filesystem::path& p, const NeckDiagnostics* d) {
  auto out = open_out(p);
  if (d)
    write_theta_csv(out, *d);
  else
    out << "t,theta,alpha_slice\n";
}

}  // namespace

std::string tree_json(const BubbleTree& tree, const RunConfig& config) {
  json j = common_header(config);
  j["limit_energy"] = tree.limit_energy;
  json comps = json::array();
  int bubbles = 0;
  for (std::size_t i = 0; i < tree.components.size(); ++i) {
    const auto& c = tree.components[i];
    if (c.kind == ComponentKind::Bubble) ++bubbles;
    comps.push_back({{"index", i},
                     {"vertex", c.vertex},
                     {"parent", c.parent},
                     {"kind", to_string(c.kind)},
                     {"site_kind", c.kind == ComponentKind::Base ? "none" : to_string(c.site_kind)},
                     {"attachment", cplx(c.attachment)},
                     {"energy", c.energy},
                     {"iteration", c.iteration},
                     {"new_labels", c.new_labels}});
  }
  j["components"] = comps;
  j["num_bubbles"] = bubbles;
  j["curve"] = tree.curve.to_text();
  json necks = json::array();
  for (const auto& n : tree.necks) necks.push_back(neck_block(n));
  j["necks"] = necks;
  j["re_trace"] = tree.re_trace;
  j["iterations"] = tree.iterations;
  j["iteration_cap"] = tree.iteration_cap;
  j["ledger"] = {{"limit_energy", tree.ledger.limit_energy},
                 {"base_energy", tree.ledger.base_energy},
                 {"smooth_count", tree.ledger.smooth_count},
                 {"regular_nodal_count", tree.ledger.regular_nodal_count},
                 {"eps_bar", tree.ledger.eps_bar}};
  j["identity"] = {{"residual", tree.identity_residual},
                   {"verdict", tree.identity_verdict},
                   {"connected", tree.connected}};
  json sing = json::array();
  for (const auto& s : tree.singular)
    sing.push_back({{"location", cplx(s.location)}, {"edge", s.edge}, {"mass", s.mass}});
  j["singular_set"] = sing;
  json def = json::array();
  for (const auto& d : tree.deferred)
    def.push_back({{"iteration", d.iteration}, {"component", d.component},
                   {"location", cplx(d.location)}, {"mass", d.mass}, {"reason", d.reason}});
  j["deferred"] = def;
  return j.dump(2) + "\n";
}

void write_markings_csv(std::ostream& out, const std::vector<MarkingRecord>& markings) {
  out << "iteration,component,k_index,q_re,q_im,r_re,r_im,t,outside_mass,center_moment_re,"
         "center_moment_im,balanced_moment_re,balanced_moment_im,total_mass,scale_ratio,"
         "multiple_zeros\n";
  for (const auto& rec : markings) {
    const Marking& m = rec.marking;
    out << rec.iteration << ',' << rec.component << ',' << m.k_index << ',' << g17(m.q.real())
        << ',' << g17(m.q.imag()) << ',' << g17(m.r.real()) << ',' << g17(m.r.imag()) << ','
        << g17(m.t) << ',' << g17(m.outside_mass) << ',' << g17(m.center_moment.real()) << ','
        << g17(m.center_moment.imag()) << ',' << g17(m.balanced_moment.real()) << ','
        << g17(m.balanced_moment.imag()) << ',' << g17(m.total_mass) << ','
        << g17(m.scale_ratio) << ',' << (m.multiple_zeros ? 1 : 0) << '\n';
  }
}

void write_extract_outputs(const std::string& dir, const BubbleTree& tree, const RunConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    auto out = open_out(fs::path(dir) / "tree.json");
    out << tree_json(tree, config);
  }
  {
    auto out = open_out(fs::path(dir) / "markings.csv");
    write_markings_csv(out, tree.markings);
  }
  write_theta(fs::path(dir) / "theta_profile.csv", tree.necks.empty() ? nullptr : &tree.necks[0].last);
}

void write_neck_outputs(const std::string& dir, const GeneratedFamily& family,
                        const RunConfig& config) {
  namespace fs = std::filesystem;
  if (family.necks.empty())
    throw Error(ErrorKind::Validation, "cli.neck", "family '" + family.spec.kind + "' has no necks");
  const auto schedule = zero_neck_schedule(family.spec.delta);
  NeckRecord rec;
  rec.edge = family.chart_node_edges.empty() ? 0 : family.chart_node_edges[0];
  rec.zero_neck = zero_neck_test(family.necks, config.driver.zero_neck_eps, schedule);
  rec.last = diagnostics(family.necks.back());
  rec.alpha = rec.last.alpha;
  rec.energy = rec.last.energy;
  rec.diameter = rec.last.diameter;
  rec.pohozaev_residual = rec.last.pohozaev_residual;
  const auto& last = family.necks.back();
  const auto bounds = theta_bounds_check(last, last.t_min(), last.t_max(), config.eps0_double_prime);

  json j = common_header(config);
  j["neck"] = neck_block(rec);
  j["half_length"] = rec.last.half_length;
  j["alpha_deviation"] = rec.last.alpha_deviation;
  j["avg_length"] = rec.last.avg_length;
  j["max_arc_length"] = rec.last.max_arc_length;
  j["theta_bounds"] = {{"convexity_slack", bounds.convexity_slack},
                       {"min_theta", bounds.min_theta},
                       {"integral_slack", bounds.integral_slack},
                       {"sqrt_integral_slack", bounds.sqrt_integral_slack},
                       {"positive", bounds.positive},
                       {"zero_field", bounds.zero_field},
                       {"energy", bounds.energy},
                       {"threshold", bounds.threshold},
                       {"precondition_exceeded", bounds.precondition_exceeded}};
  fs::create_directories(dir);
  {
    auto out = open_out(fs::path(dir) / "neck.json");
    out << j.dump(2) << "\n";
  }
  write_theta(fs::path(dir) / "theta_profile.csv", &rec.last);
}

}  // namespace bubble
