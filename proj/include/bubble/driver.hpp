#pragma once

#include <string>
#include <vector>

#include "bubble/curve.hpp"
#include "bubble/families.hpp"
#include "bubble/measure.hpp"
#include "bubble/neck.hpp"
#include "bubble/renorm.hpp"

namespace bubble {

struct ResidualEnergyLedger {
  double limit_energy = 0.0;
  double base_energy = 0.0;
  int smooth_count = 0;         // l: pending smooth sites
  int regular_nodal_count = 0;  // n: pending regular nodal sites
  double eps_bar = 0.0;
};

/// limit - base - l eps_bar - n eps_bar / 2.
double residual_energy(const ResidualEnergyLedger& ledger);

struct DriverConfig {
  double delta0 = 1.0;
  double eps_bar = 0.25;
  int depth = 6;
  double eps0_double_prime = 0.5;  // neck energy threshold for the theta bounds
  double decrement_tol = 0.0;      // 0 means eps_bar / 20
  double zero_neck_eps = 0.05;
  double identity_tol = 0.02;
  RegularityOptions regularity;
  BalancedCenterOptions balanced;
};

enum class ComponentKind { Base, Bubble };

struct TreeComponent {
  int vertex = 0;          // vertex of the final curve
  int parent = -1;         // index into components, -1 for the base
  ComponentKind kind = ComponentKind::Base;
  SiteKind site_kind = SiteKind::Smooth;  // how a bubble was attached
  Complex attachment;      // site location in the parent's chart
  double energy = 0.0;
  int iteration = 0;       // 0 for the base
  std::vector<int> new_labels;
};

struct NeckRecord {
  int edge = 0;            // edge of the base curve
  Complex location;
  ZeroNeckResult zero_neck;
  double alpha = 0.0;      // of the last member
  double energy = 0.0;
  double diameter = 0.0;
  double pohozaev_residual = 0.0;
  NeckDiagnostics last;    // full diagnostics of the last member
};

struct SingularPoint {
  Complex location;
  int edge = 0;
  double mass = 0.0;  // last member, ball of radius delta_K
};

struct DeferredSite {
  int iteration = 0;
  int component = 0;  // chart owner
  Complex location;
  double mass = 0.0;
  std::string reason;
};

struct MarkingRecord {
  int iteration = 0;
  int component = 0;  // the bubble created
  Marking marking;
};

struct BubbleTree {
  MarkedNodalCurve curve;
  std::vector<TreeComponent> components;
  std::vector<NeckRecord> necks;
  std::vector<double> re_trace;
  ResidualEnergyLedger ledger;  // final state
  double limit_energy = 0.0;
  double identity_residual = 0.0;
  std::string identity_verdict;
  bool connected = true;
  std::vector<SingularPoint> singular;
  std::vector<DeferredSite> deferred;
  std::vector<MarkingRecord> markings;
  int iterations = 0;
  int iteration_cap = 0;
};

/// Residual-energy induction: detect, classify, mark, insert a component,
/// one site per iteration, until no site of mass >= 2 eps_bar remains
/// outside the non-regular nodes.
BubbleTree extract_bubble_tree(const GeneratedFamily& family, const DriverConfig& config);

struct IdentityCheck {
  double residual = 0.0;
  bool asserted = false;  // false when the singular set is non-empty
  bool connected = true;
  std::string verdict;
};

IdentityCheck energy_identity_check(const BubbleTree& tree, const GeneratedFamily& family,
                                    double tol = 0.02);

const char* to_string(ComponentKind kind);
const char* to_string(SiteKind kind);

}  // namespace bubble
