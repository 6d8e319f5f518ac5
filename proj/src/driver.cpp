#include "bubble/driver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace bubble {

double residual_energy(const ResidualEnergyLedger& ledger) {
  if (!std::isfinite(ledger.limit_energy) || !std::isfinite(ledger.base_energy) ||
      !std::isfinite(ledger.eps_bar))
    throw Error(ErrorKind::Validation, "driver.residual_energy", "ledger fields must be finite");
  return ledger.limit_energy - ledger.base_energy - ledger.smooth_count * ledger.eps_bar -
         ledger.regular_nodal_count * ledger.eps_bar / 2.0;
}

const char* to_string(ComponentKind kind) { return kind == ComponentKind::Base ? "base" : "bubble"; }
const char* to_string(SiteKind kind) { return kind == SiteKind::Smooth ? "smooth" : "nodal"; }

namespace {

using MeasureSeq = std::shared_ptr<const std::vector<WeightedParticleMeasure>>;

struct Pending {
  int owner = 0;
  Complex location;
  double mass = 0.0;
  SiteKind kind = SiteKind::Smooth;
  int edge = -1;
  MeasureSeq measures;
};

std::string trace_text(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(10);
  os << "[";
  for (std::size_t i = 0; i < trace.size(); ++i) os << (i ? ", " : "") << trace[i];
  os << "]";
  return os.str();
}

double mass_away_from(const WeightedParticleMeasure& mu, const std::vector<ConcentrationSite>& sites,
                      double radius) {
  WeightedParticleMeasure rest = mu;
  for (const auto& s : sites) rest = rest.excluding(Disk{s.location, radius});
  return rest.total_mass();
}

}  // namespace

BubbleTree extract_bubble_tree(const GeneratedFamily& family, const DriverConfig& config) {
  const char* where = "driver.extract_bubble_tree";
  if (family.measures.size() < 3)
    throw Error(ErrorKind::Validation, where, "schedule too short: need at least 3 members");
  if (family.chart_node_edges.size() != family.nodal_points.size())
    throw Error(ErrorKind::Validation, where, "nodal points and node edges differ in length");
  const ScaleLadder ladder = build_scale_ladder(config.delta0, config.eps_bar, config.depth);
  const double eps_bar = ladder.eps_bar();
  const int K = ladder.depth();
  const double dK = ladder.delta(K);
  const double dec_tol = config.decrement_tol > 0.0 ? config.decrement_tol : eps_bar / 20.0;

  BubbleTree tree{family.base_curve, {}, {}, {}, {}, 0.0, 0.0, {}, true, {}, {}, {}, 0, 0};
  const auto& last = family.measures.back();
  const double limit = family.total_energy.back();
  tree.limit_energy = limit;

  // Classify the nodes in the chart; non-regular ones with mass are frozen.
  std::vector<Complex> regular_nodes;
  std::vector<int> regular_edges;
  std::vector<Complex> frozen;
  for (std::size_t i = 0; i < family.nodal_points.size(); ++i) {
    const Complex p = family.nodal_points[i];
    const int edge = family.chart_node_edges[i];
    const auto verdict = is_regular_node(tree.curve, edge, config.regularity);
    if (verdict.verdict == Regularity::Regular) {
      regular_nodes.push_back(p);
      regular_edges.push_back(edge);
      continue;
    }
    const double m = mass_in(last, p, dK);
    if (m >= eps_bar) {
      tree.singular.push_back({p, edge, m});
      frozen.push_back(p);
    }
  }
  auto base_measures = std::make_shared<std::vector<WeightedParticleMeasure>>();
  for (const auto& mu : family.measures) {
    WeightedParticleMeasure rest = mu;
    for (auto p : frozen) rest = rest.excluding(Disk{p, ladder.delta(1)});
    base_measures->push_back(std::move(rest));
  }

  const auto report = detect_concentrations(
      *base_measures, WeightedParticleMeasure::empty(last.chart_radius()), ladder, regular_nodes);

  TreeComponent base;
  base.vertex = family.chart_vertex;
  base.kind = ComponentKind::Base;
  base.energy = mass_away_from(base_measures->back(), report.sites, dK) +
                (family.total_energy.back() - last.total_mass());
  tree.components.push_back(base);

  std::vector<Pending> pending;
  auto enqueue = [&](int owner, const ConcentrationSite& s, int edge, const MeasureSeq& seq,
                     int iteration) {
    if (s.mass < 2.0 * eps_bar) {
      tree.deferred.push_back({iteration, owner, s.location, s.mass, "mass below 2 eps_bar"});
      return;
    }
    pending.push_back({owner, s.location, s.mass, s.kind, edge, seq});
  };
  for (const auto& s : report.sites) {
    int edge = -1;
    if (s.kind == SiteKind::Nodal)
      for (std::size_t i = 0; i < regular_nodes.size(); ++i)
        if (regular_nodes[i] == s.location) edge = regular_edges[i];
    enqueue(0, s, edge, base_measures, 0);
  }

  auto current_re = [&] {
    ResidualEnergyLedger L;
    L.limit_energy = limit;
    for (const auto& c : tree.components) L.base_energy += c.energy;
    for (const auto& p : pending)
      (p.kind == SiteKind::Smooth ? L.smooth_count : L.regular_nodal_count)++;
    L.eps_bar = eps_bar;
    tree.ledger = L;
    return residual_energy(L);
  };

  tree.re_trace.push_back(current_re());
  tree.iteration_cap = std::max(1, static_cast<int>(std::ceil(2.0 * std::max(limit, 0.0) / eps_bar)));

  while (!pending.empty()) {
    if (tree.iterations >= tree.iteration_cap)
      throw Error(ErrorKind::Algorithmic, where,
                  "iteration cap reached; residual energy trace " + trace_text(tree.re_trace));
    const int iteration = ++tree.iterations;
    const Pending site = pending.front();
    pending.erase(pending.begin());
    const int owner_vertex = tree.components[site.owner].vertex;

    std::vector<Marking> marks;
    BubbleInsertion ins = [&] {
      if (site.kind == SiteKind::Smooth) {
        std::vector<WeightedParticleMeasure> moved;
        for (const auto& mu : *site.measures)
          moved.push_back(pushforward(mu, Mobius::translation(-site.location)));
        marks = mark_smooth_bubble(moved, ladder, eps_bar, config.balanced);
        return add_bubble_component(tree.curve, {BubbleSite::Kind::Point, owner_vertex}, 1);
      }
      if (family.necks.empty() || site.owner != 0 || site.edge < 0)
        throw Error(ErrorKind::Validation, where, "nodal site without neck data");
      marks = mark_nodal_bubble(family.necks, ladder, eps_bar);
      return add_bubble_component(tree.curve, {BubbleSite::Kind::Node, site.edge}, 2);
    }();
    tree.curve = ins.curve;

    auto nus = std::make_shared<std::vector<WeightedParticleMeasure>>();
    for (const auto& m : marks) nus->push_back(m.renormalized);
    const std::vector<Complex> inner_node =
        site.kind == SiteKind::Nodal ? std::vector<Complex>{Complex(0, 0)} : std::vector<Complex>{};
    std::vector<ConcentrationSite> children;
    if (nus->size() >= 2)
      children = detect_concentrations(*nus, WeightedParticleMeasure::empty(nus->back().chart_radius()),
                                       ladder, inner_node)
                     .sites;

    // Energy of the new component: the image of B(site, delta_K), less the
    // delta_K ball about the attachment point at infinity, minus child sites.
    const Marking& lm = marks.back();
    Complex image_center;
    double image_radius;
    if (site.kind == SiteKind::Smooth) {
      const double scale = 1.0 / lm.t - 1.0;
      image_center = -scale * lm.q;
      image_radius = scale * dK;
    } else {
      image_center = 0.0;
      image_radius = dK / std::abs(lm.r);
    }
    const auto inner = nus->back().restricted_to(Disk{{0, 0}, 1.0 / dK});
    double energy = mass_in(inner, image_center, image_radius);
    for (const auto& c : children) energy -= c.mass;

    TreeComponent comp;
    comp.vertex = ins.new_vertex;
    comp.parent = site.owner;
    comp.kind = ComponentKind::Bubble;
    comp.site_kind = site.kind;
    comp.attachment = site.location;
    comp.energy = std::max(energy, 0.0);
    comp.iteration = iteration;
    comp.new_labels = ins.new_labels;
    const int comp_index = static_cast<int>(tree.components.size());
    tree.components.push_back(comp);
    for (const auto& m : marks) tree.markings.push_back({iteration, comp_index, m});

    for (const auto& c : children) {
      if (c.kind == SiteKind::Nodal) {
        tree.deferred.push_back({iteration, comp_index, c.location, c.mass,
                                 "child nodal site at the inner node, deferred to the next iteration"});
        continue;
      }
      enqueue(comp_index, c, -1, nus, iteration);
    }

    const double re = current_re();
    const double drop = tree.re_trace.back() - re;
    tree.re_trace.push_back(re);
    if (!(drop >= eps_bar / 2.0 - dec_tol))
      throw Error(ErrorKind::Algorithmic, where,
                  "residual energy did not drop by eps_bar/2; trace " + trace_text(tree.re_trace));
  }

  if (!family.necks.empty()) {
    for (std::size_t i = 0; i < family.nodal_points.size(); ++i) {
      NeckRecord rec;
      rec.edge = family.chart_node_edges[i];
      rec.location = family.nodal_points[i];
      rec.zero_neck = zero_neck_test(family.necks, config.zero_neck_eps,
                                     zero_neck_schedule(family.spec.delta));
      rec.last = diagnostics(family.necks.back());
      rec.alpha = rec.last.alpha;
      rec.energy = rec.last.energy;
      rec.diameter = rec.last.diameter;
      rec.pohozaev_residual = rec.last.pohozaev_residual;
      tree.necks.push_back(std::move(rec));
    }
  }

  const auto check = energy_identity_check(tree, family, config.identity_tol);
  tree.identity_residual = check.residual;
  tree.identity_verdict = check.verdict;
  tree.connected = check.connected;
  return tree;
}

IdentityCheck energy_identity_check(const BubbleTree& tree, const GeneratedFamily& family,
                                    double tol) {
  if (family.total_energy.empty())
    throw Error(ErrorKind::Validation, "driver.energy_identity_check", "family has no members");
  const double limit = family.total_energy.back();
  double sum = 0.0;
  for (const auto& c : tree.components) sum += c.energy;
  IdentityCheck out;
  out.residual = limit > 0.0 ? std::abs(limit - sum) / limit : std::abs(sum);
  for (const auto& n : tree.necks)
    if (!n.zero_neck.pass) out.connected = false;
  out.asserted = tree.singular.empty();
  if (!out.asserted)
    out.verdict = "identity not asserted";
  else
    out.verdict = out.residual <= tol ? "identity holds" : "identity fails";
  return out;
}

}  // namespace bubble
