#pragma once

#include <string>
#include <vector>

#include "bubble/core.hpp"

namespace bubble {

struct CurveEdge {
  int u = 0;
  int v = 0;  // u == v for a self-loop
};

struct Leg {
  int vertex = 0;
  int label = 0;
};

/// Dual graph of a marked nodal curve: vertices are components with a
/// genus, edges are nodes, legs are marked points.
class MarkedNodalCurve {
 public:
  MarkedNodalCurve(std::vector<int> genus, std::vector<CurveEdge> edges, std::vector<Leg> legs);

  /// Parses lines `v<i> g=<genus> legs=<l1,l2,...>` and `e <i> <j>`.
  /// Blank lines and lines starting with `#` are skipped.
  static MarkedNodalCurve parse(const std::string& text);
  std::string to_text() const;

  int num_vertices() const { return static_cast<int>(genus_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_marks() const { return static_cast<int>(legs_.size()); }
  int vertex_genus(int v) const { return genus_.at(v); }
  const std::vector<int>& genera() const { return genus_; }
  const std::vector<CurveEdge>& edges() const { return edges_; }
  const std::vector<Leg>& legs() const { return legs_; }

  /// sum of vertex genera + first Betti number of the graph
  int arithmetic_genus() const;
  /// legs plus edge endpoints at v (a loop counts twice)
  int special_points(int v) const;
  int max_label() const;
  int leg_with_label(int label) const;  // -1 when absent

 private:
  std::vector<int> genus_;
  std::vector<CurveEdge> edges_;
  std::vector<Leg> legs_;
};

struct StabilityReport {
  bool stable = false;
  bool global = false;              // 2g - 2 + n > 0
  std::vector<bool> vertex_stable;  // 2 g_v - 2 + special points > 0
};

StabilityReport is_stable(const MarkedNodalCurve& c);

enum class PointKind { Node, Mark, Regular };

/// Where a special point of the old curve lands: an edge index, a leg index,
/// or a regular point on a vertex of the new curve.
struct PointImage {
  PointKind kind = PointKind::Regular;
  int index = 0;
};

struct ForgetResult {
  MarkedNodalCurve curve;
  std::vector<PointImage> node_images;  // per edge of the input
  std::vector<PointImage> mark_images;  // per leg of the input
  std::vector<PointImage> vertex_images;  // image of a generic point of each input vertex
};

/// Removes the legs with the given labels, then contracts unstable
/// components until the curve is stable. Fails with "stratum empty" when
/// 2g - 2 + (remaining marks) <= 0.
ForgetResult forget_marks(const MarkedNodalCurve& c, const std::vector<int>& labels);
ForgetResult forget_mark(const MarkedNodalCurve& c, int leg_index);
/// Contraction alone (no legs removed).
ForgetResult stabilize(const MarkedNodalCurve& c);

enum class Regularity { Regular, NotRegular, Undecided };

struct RegularityVerdict {
  Regularity verdict = Regularity::Undecided;
  std::vector<int> witness;  // labels forgotten
};

struct RegularityOptions {
  int n_max = 8;
  bool genus0_shortcut = true;
};

/// A node is regular when forgetting some nonempty set of marks sends it to
/// a non-nodal point.
RegularityVerdict is_regular_node(const MarkedNodalCurve& c, int edge,
                                  const RegularityOptions& options = {});

struct BubbleSite {
  enum class Kind { Point, Node } kind = Kind::Point;
  int index = 0;  // vertex for a point, edge for a node
};

struct BubbleInsertion {
  MarkedNodalCurve curve;
  int new_vertex = 0;
  std::vector<int> new_labels;
  std::vector<std::vector<int>> preimage_nodes;  // per edge of the input
};

/// Case 1 attaches a genus-0 component with two new marks at a regular point.
/// Case 2 splits a node with a genus-0 component carrying one new mark.
/// Forgetting the new marks recovers the input up to isomorphism (checked).
BubbleInsertion add_bubble_component(const MarkedNodalCurve& c, BubbleSite site, int which_case);

/// Canonical text form; two curves are isomorphic (label-preserving) iff
/// their canonical forms agree.
std::string canonical_form(const MarkedNodalCurve& c);
bool isomorphic(const MarkedNodalCurve& a, const MarkedNodalCurve& b);

/// All stable genus-0 curves with at most max_vertices components and
/// between 3 and max_marks marks labelled 1..n, one per isomorphism class.
std::vector<MarkedNodalCurve> enumerate_genus0(int max_vertices, int max_marks);

}  // namespace bubble
