#include "bubble/curve.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace bubble {

MarkedNodalCurve::MarkedNodalCurve(std::vector<int> genus, std::vector<CurveEdge> edges,
                                   std::vector<Leg> legs)
    : genus_(std::move(genus)), edges_(std::move(edges)), legs_(std::move(legs)) {
  const char* where = "curve";
  const int V = num_vertices();
  if (V == 0) throw Error(ErrorKind::Validation, where, "curve needs at least one component");
  for (int g : genus_)
    if (g < 0) throw Error(ErrorKind::Validation, where, "negative genus");
  for (const auto& e : edges_)
    if (e.u < 0 || e.u >= V || e.v < 0 || e.v >= V)
      throw Error(ErrorKind::Validation, where, "edge refers to a missing vertex");
  std::set<int> labels;
  for (const auto& l : legs_) {
    if (l.vertex < 0 || l.vertex >= V)
      throw Error(ErrorKind::Validation, where, "leg refers to a missing vertex");
    if (!labels.insert(l.label).second)
      throw Error(ErrorKind::Validation, where, "mark labels must be distinct");
  }
  std::vector<std::vector<int>> adj(V);
  for (const auto& e : edges_) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<bool> seen(V, false);
  std::vector<int> stack = {0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
  }
  if (count != V) throw Error(ErrorKind::Validation, where, "dual graph is not connected");
}

int MarkedNodalCurve::arithmetic_genus() const {
  return std::accumulate(genus_.begin(), genus_.end(), 0) + num_edges() - num_vertices() + 1;
}

int MarkedNodalCurve::special_points(int v) const {
  int s = 0;
  for (const auto& l : legs_) s += l.vertex == v;
  for (const auto& e : edges_) s += (e.u == v) + (e.v == v);
  return s;
}

int MarkedNodalCurve::max_label() const {
  int m = 0;
  for (const auto& l : legs_) m = std::max(m, l.label);
  return m;
}

int MarkedNodalCurve::leg_with_label(int label) const {
  for (int i = 0; i < num_marks(); ++i)
    if (legs_[i].label == label) return i;
  return -1;
}

MarkedNodalCurve MarkedNodalCurve::parse(const std::string& text) {
  const char* where = "curve.parse";
  std::map<int, std::pair<int, std::vector<int>>> verts;
  std::vector<CurveEdge> edges;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::Validation, where, "line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "e") {
      int u, v;
      if (!(ls >> u >> v)) fail("edge needs two vertex indices");
      edges.push_back({u, v});
    } else if (head.size() > 1 && head[0] == 'v') {
      int idx;
      try {
        std::size_t used = 0;
        idx = std::stoi(head.substr(1), &used);
        if (used != head.size() - 1) fail("bad vertex index");
      } catch (const std::logic_error&) {
        fail("bad vertex index");
      }
      std::string gtok, ltok;
      if (!(ls >> gtok) || gtok.rfind("g=", 0) != 0) fail("expected g=<genus>");
      int g = 0;
      try {
        g = std::stoi(gtok.substr(2));
      } catch (const std::logic_error&) {
        fail("bad genus");
      }
      std::vector<int> labels;
      if (ls >> ltok) {
        if (ltok.rfind("legs=", 0) != 0) fail("expected legs=<labels>");
        std::string list = ltok.substr(5);
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (item.empty()) continue;
          try {
            labels.push_back(std::stoi(item));
          } catch (const std::logic_error&) {
            fail("bad mark label");
          }
        }
      }
      std::string extra;
      if (ls >> extra) fail("unexpected token '" + extra + "'");
      if (!verts.emplace(idx, std::make_pair(g, labels)).second) fail("duplicate vertex");
    } else {
      fail("unknown record '" + head + "'");
    }
  }
  std::vector<int> genus;
  std::vector<Leg> legs;
  int expect = 0;
  for (const auto& [idx, data] : verts) {
    if (idx != expect++) throw Error(ErrorKind::Validation, where, "vertex indices must be 0..V-1");
    genus.push_back(data.first);
    for (int l : data.second) legs.push_back({idx, l});
  }
  return MarkedNodalCurve(std::move(genus), std::move(edges), std::move(legs));
}

std::string MarkedNodalCurve::to_text() const {
  std::ostringstream out;
  for (int v = 0; v < num_vertices(); ++v) {
    std::vector<int> labels;
    for (const auto& l : legs_)
      if (l.vertex == v) labels.push_back(l.label);
    std::sort(labels.begin(), labels.end());
    out << 'v' << v << " g=" << genus_[v] << " legs=";
    for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
    out << '\n';
  }
  for (const auto& e : edges_) out << "e " << e.u << ' ' << e.v << '\n';
  return out.str();
}

StabilityReport is_stable(const MarkedNodalCurve& c) {
  StabilityReport r;
  r.global = 2 * c.arithmetic_genus() - 2 + c.num_marks() > 0;
  r.stable = r.global;
  for (int v = 0; v < c.num_vertices(); ++v) {
    const bool ok = 2 * c.vertex_genus(v) - 2 + c.special_points(v) > 0;
    r.vertex_stable.push_back(ok);
    r.stable = r.stable && ok;
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Fate {
  enum Kind { Alive, Merged, ToVertex, ToMark } kind = Alive;
  int index = 0;
};

class Contraction {
 public:
  explicit Contraction(const MarkedNodalCurve& c)
      : genus_(c.genera()), edges_(c.edges()), legs_(c.legs()) {
    valive_.assign(genus_.size(), true);
    ealive_.assign(edges_.size(), true);
    lalive_.assign(legs_.size(), true);
    vfate_.resize(genus_.size());
    efate_.resize(edges_.size());
    forgotten_at_.assign(legs_.size(), -1);
    n_vertices_ = genus_.size();
    n_edges_ = edges_.size();
    n_legs_ = legs_.size();
  }

  void forget(int leg) {
    lalive_[leg] = false;
    forgotten_at_[leg] = legs_[leg].vertex;
  }

  int special(int v) const {
    int s = 0;
    for (std::size_t l = 0; l < legs_.size(); ++l) s += lalive_[l] && legs_[l].vertex == v;
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (ealive_[e]) s += (edges_[e].u == v) + (edges_[e].v == v);
    return s;
  }

  void run() {
    const char* where = "curve.stabilize";
    for (std::size_t guard = 0; guard <= genus_.size(); ++guard) {
      int bad = -1;
      for (std::size_t v = 0; v < genus_.size(); ++v)
        if (valive_[v] && 2 * genus_[v] - 2 + special(static_cast<int>(v)) <= 0) {
          bad = static_cast<int>(v);
          break;
        }
      if (bad < 0) return;
      collapse(bad);
    }
    throw Error(ErrorKind::Algorithmic, where, "stabilization did not terminate");
  }

  ForgetResult result() const {
    std::vector<int> vmap(genus_.size(), -1), emap(edges_.size(), -1), lmap(legs_.size(), -1);
    std::vector<int> genus;
    std::vector<CurveEdge> edges;
    std::vector<Leg> legs;
    for (std::size_t v = 0; v < genus_.size(); ++v)
      if (valive_[v]) {
        vmap[v] = static_cast<int>(genus.size());
        genus.push_back(genus_[v]);
      }
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (ealive_[e]) {
        emap[e] = static_cast<int>(edges.size());
        edges.push_back({vmap[edges_[e].u], vmap[edges_[e].v]});
      }
    for (std::size_t l = 0; l < legs_.size(); ++l)
      if (lalive_[l]) {
        lmap[l] = static_cast<int>(legs.size());
        legs.push_back({vmap[legs_[l].vertex], legs_[l].label});
      }

    std::function<PointImage(int)> at_vertex;
    std::function<PointImage(int)> at_edge = [&](int e) -> PointImage {
      switch (efate_[e].kind) {
        case Fate::Alive:
          return {PointKind::Node, emap[e]};
        case Fate::Merged:
          return at_edge(efate_[e].index);
        case Fate::ToVertex:
          return at_vertex(efate_[e].index);
        case Fate::ToMark:
          return {PointKind::Mark, lmap[efate_[e].index]};
      }
      return {};
    };
    at_vertex = [&](int v) -> PointImage {
      if (valive_[v]) return {PointKind::Regular, vmap[v]};
      switch (vfate_[v].kind) {
        case Fate::ToVertex:
          return at_vertex(vfate_[v].index);
        case Fate::ToMark:
          return {PointKind::Mark, lmap[vfate_[v].index]};
        case Fate::Merged:
          return at_edge(vfate_[v].index);
        case Fate::Alive:
          break;
      }
      return {};
    };

    ForgetResult out{MarkedNodalCurve(std::move(genus), std::move(edges), std::move(legs)), {}, {}, {}};
    for (std::size_t e = 0; e < n_edges_; ++e) out.node_images.push_back(at_edge(static_cast<int>(e)));
    for (std::size_t l = 0; l < n_legs_; ++l) {
      if (lalive_[l])
        out.mark_images.push_back({PointKind::Mark, lmap[l]});
      else
        out.mark_images.push_back(at_vertex(forgotten_at_[l]));
    }
    for (std::size_t v = 0; v < n_vertices_; ++v) out.vertex_images.push_back(at_vertex(static_cast<int>(v)));
    return out;
  }

 private:
  void collapse(int v) {
    const char* where = "curve.stabilize";
    std::vector<int> my_legs, my_edges;
    for (std::size_t l = 0; l < legs_.size(); ++l)
      if (lalive_[l] && legs_[l].vertex == v) my_legs.push_back(static_cast<int>(l));
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (ealive_[e] && (edges_[e].u == v || edges_[e].v == v)) my_edges.push_back(static_cast<int>(e));
    auto other = [&](int e) { return edges_[e].u == v ? edges_[e].v : edges_[e].u; };
    const bool loop = my_edges.size() == 1 && edges_[my_edges[0]].u == edges_[my_edges[0]].v;
    valive_[v] = false;
    if (my_edges.size() == 1 && my_legs.empty() && !loop) {
      const int e = my_edges[0];
      const int u = other(e);
      ealive_[e] = false;
      efate_[e] = {Fate::ToVertex, u};
      vfate_[v] = {Fate::ToVertex, u};
    } else if (my_edges.size() == 1 && my_legs.size() == 1 && !loop) {
      const int e = my_edges[0];
      const int u = other(e);
      const int l = my_legs[0];
      legs_[l].vertex = u;
      ealive_[e] = false;
      efate_[e] = {Fate::ToMark, l};
      vfate_[v] = {Fate::ToMark, l};
    } else if (my_edges.size() == 2 && my_legs.empty()) {
      const int e1 = my_edges[0], e2 = my_edges[1];
      const int a = other(e1), b = other(e2);
      ealive_[e1] = ealive_[e2] = false;
      edges_.push_back({a, b});
      ealive_.push_back(true);
      efate_.push_back({});
      const int e3 = static_cast<int>(edges_.size()) - 1;
      efate_[e1] = efate_[e2] = {Fate::Merged, e3};
      vfate_[v] = {Fate::Merged, e3};
    } else {
      throw Error(ErrorKind::Domain, where, "stratum empty: no stable model exists");
    }
  }

  std::vector<int> genus_;
  std::vector<CurveEdge> edges_;
  std::vector<Leg> legs_;
  std::vector<bool> valive_, ealive_, lalive_;
  std::vector<Fate> vfate_, efate_;
  std::vector<int> forgotten_at_;
  std::size_t n_vertices_, n_edges_, n_legs_;
};

}  // namespace

ForgetResult forget_marks(const MarkedNodalCurve& c, const std::vector<int>& labels) {
  const char* where = "curve.forget_mark";
  std::set<int> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size())
    throw Error(ErrorKind::Validation, where, "repeated label in forget list");
  Contraction work(c);
  for (int label : labels) {
    const int leg = c.leg_with_label(label);
    if (leg < 0) throw Error(ErrorKind::Validation, where, "no mark with label " + std::to_string(label));
    work.forget(leg);
  }
  const int n_after = c.num_marks() - static_cast<int>(labels.size());
  if (2 * c.arithmetic_genus() - 2 + n_after <= 0)
    throw Error(ErrorKind::Domain, where, "stratum empty: 2g - 2 + n <= 0 after forgetting");
  work.run();
  return work.result();
}

ForgetResult forget_mark(const MarkedNodalCurve& c, int leg_index) {
  if (leg_index < 0 || leg_index >= c.num_marks())
    throw Error(ErrorKind::Validation, "curve.forget_mark", "invalid mark reference");
  return forget_marks(c, {c.legs()[leg_index].label});
}

ForgetResult stabilize(const MarkedNodalCurve& c) { return forget_marks(c, {}); }

// ---------------------------------------------------------------------------

namespace {

PointImage push_point(const ForgetResult& f, PointImage p) {
  switch (p.kind) {
    case PointKind::Node:
      return f.node_images[p.index];
    case PointKind::Mark:
      return f.mark_images[p.index];
    case PointKind::Regular:
      return f.vertex_images[p.index];
  }
  return p;
}

// Forgets labels one at a time in the given order, tracking the node.
std::pair<MarkedNodalCurve, PointImage> forget_sequentially(const MarkedNodalCurve& c, int edge,
                                                            const std::vector<int>& order) {
  MarkedNodalCurve cur = c;
  PointImage img{PointKind::Node, edge};
  for (int label : order) {
    auto f = forget_marks(cur, {label});
    img = push_point(f, img);
    cur = f.curve;
  }
  return {cur, img};
}

}  // namespace

RegularityVerdict is_regular_node(const MarkedNodalCurve& c, int edge,
                                  const RegularityOptions& options) {
  const char* where = "curve.is_regular_node";
  if (edge < 0 || edge >= c.num_edges()) throw Error(ErrorKind::Validation, where, "invalid node reference");
  if (!is_stable(c).stable) throw Error(ErrorKind::Validation, where, "curve is not stable");
  const int g = c.arithmetic_genus();
  const int n = c.num_marks();
  std::vector<int> labels;
  for (const auto& l : c.legs()) labels.push_back(l.label);
  std::sort(labels.begin(), labels.end());

  auto try_subset = [&](const std::vector<int>& subset) -> bool {
    if (subset.empty() || 2 * g - 2 + n - static_cast<int>(subset.size()) <= 0) return false;
    const auto f = forget_marks(c, subset);
    const bool regular = f.node_images[edge].kind != PointKind::Node;
    // The forgetful map must not depend on the order of forgetting.
    std::vector<int> reversed(subset.rbegin(), subset.rend());
    const auto [seq_curve, seq_img] = forget_sequentially(c, edge, reversed);
    if (canonical_form(seq_curve) != canonical_form(f.curve) ||
        (seq_img.kind == PointKind::Node) != !regular)
      throw Error(ErrorKind::Algorithmic, where, "forgetful map depends on the order of forgetting");
    return regular;
  };

  RegularityVerdict v;
  if (options.genus0_shortcut && g == 0 && n > 3) {
    std::vector<int> subset(labels.begin() + 3, labels.end());
    if (try_subset(subset)) {
      v.verdict = Regularity::Regular;
      v.witness = subset;
      return v;
    }
  }
  if (n > options.n_max) {
    for (int l : labels)
      if (try_subset({l})) {
        v.verdict = Regularity::Regular;
        v.witness = {l};
        return v;
      }
    v.verdict = Regularity::Undecided;
    return v;
  }
  for (int size = 1; size <= n; ++size) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + size, true);
    do {
      std::vector<int> subset;
      for (int i = 0; i < n; ++i)
        if (pick[i]) subset.push_back(labels[i]);
      if (try_subset(subset)) {
        v.verdict = Regularity::Regular;
        v.witness = subset;
        return v;
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  v.verdict = Regularity::NotRegular;
  return v;
}

// ---------------------------------------------------------------------------

BubbleInsertion add_bubble_component(const MarkedNodalCurve& c, BubbleSite site, int which_case) {
  const char* where = "curve.add_bubble_component";
  if (!is_stable(c).stable) throw Error(ErrorKind::Validation, where, "curve is not stable");
  std::vector<int> genus = c.genera();
  std::vector<CurveEdge> edges = c.edges();
  std::vector<Leg> legs = c.legs();
  const int E = c.num_vertices();
  const int top = c.max_label();
  BubbleInsertion out{c, E, {}, {}};
  for (int e = 0; e < c.num_edges(); ++e) out.preimage_nodes.push_back({e});
  genus.push_back(0);
  if (which_case == 1) {
    if (site.kind != BubbleSite::Kind::Point || site.index < 0 || site.index >= c.num_vertices())
      throw Error(ErrorKind::Validation, where, "case 1 needs a regular point on a vertex");
    edges.push_back({site.index, E});
    legs.push_back({E, top + 1});
    legs.push_back({E, top + 2});
    out.new_labels = {top + 1, top + 2};
  } else if (which_case == 2) {
    if (site.kind != BubbleSite::Kind::Node || site.index < 0 || site.index >= c.num_edges())
      throw Error(ErrorKind::Validation, where, "case 2 needs a node");
    const CurveEdge old = edges[site.index];
    edges[site.index] = {old.u, E};
    edges.push_back({E, old.v});
    out.preimage_nodes[site.index].push_back(static_cast<int>(edges.size()) - 1);
    legs.push_back({E, top + 1});
    out.new_labels = {top + 1};
  } else {
    throw Error(ErrorKind::Validation, where, "case must be 1 or 2");
  }
  out.curve = MarkedNodalCurve(std::move(genus), std::move(edges), std::move(legs));
  if (!is_stable(out.curve).stable)
    throw Error(ErrorKind::Algorithmic, where, "inserted component left the curve unstable");
  if (out.curve.arithmetic_genus() != c.arithmetic_genus())
    throw Error(ErrorKind::Algorithmic, where, "arithmetic genus changed");
  const auto back = forget_marks(out.curve, out.new_labels);
  if (!isomorphic(back.curve, c))
    throw Error(ErrorKind::Algorithmic, where, "forgetting the new marks does not recover the curve");
  return out;
}

// ---------------------------------------------------------------------------

std::string canonical_form(const MarkedNodalCurve& c) {
  const int V = c.num_vertices();
  std::vector<std::vector<int>> labels(V);
  for (const auto& l : c.legs()) labels[l.vertex].push_back(l.label);
  for (auto& l : labels) std::sort(l.begin(), l.end());
  std::vector<int> loops(V, 0);
  std::vector<std::vector<int>> nbrs(V);
  for (const auto& e : c.edges()) {
    if (e.u == e.v) {
      ++loops[e.u];
    } else {
      nbrs[e.u].push_back(e.v);
      nbrs[e.v].push_back(e.u);
    }
  }
  auto describe = [&](int v) {
    std::ostringstream s;
    s << "g" << c.vertex_genus(v) << "l" << loops[v] << "d" << nbrs[v].size() << "[";
    for (std::size_t i = 0; i < labels[v].size(); ++i) s << (i ? "," : "") << labels[v][i];
    s << "]";
    return s.str();
  };
  std::vector<std::string> color(V);
  for (int v = 0; v < V; ++v) color[v] = describe(v);
  for (int round = 0; round < V; ++round) {
    std::vector<std::string> next(V);
    for (int v = 0; v < V; ++v) {
      std::vector<std::string> around;
      for (int w : nbrs[v]) around.push_back(color[w]);
      std::sort(around.begin(), around.end());
      std::ostringstream s;
      s << describe(v) << "{";
      for (const auto& a : around) s << a << ";";
      s << "}";
      next[v] = s.str();
    }
    // Compress to ranks so strings stay short.
    std::vector<std::string> uniq = next;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (int v = 0; v < V; ++v) {
      const auto rank = std::lower_bound(uniq.begin(), uniq.end(), next[v]) - uniq.begin();
      next[v] = describe(v) + "#" + std::to_string(rank);
    }
    color = std::move(next);
  }

  std::vector<int> order(V);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return color[a] != color[b] ? color[a] < color[b] : a < b;
  });
  std::vector<std::pair<int, int>> classes;  // [begin, end) in order
  for (int i = 0; i < V;) {
    int j = i;
    while (j < V && color[order[j]] == color[order[i]]) ++j;
    classes.emplace_back(i, j);
    i = j;
  }
  double perms = 1.0;
  for (auto [b, e] : classes)
    for (int k = 2; k <= e - b; ++k) perms *= k;
  if (perms > 2e5)
    throw Error(ErrorKind::Algorithmic, "curve.canonical_form", "too many symmetric components");

  std::string head;
  for (int p = 0; p < V; ++p) head += describe(order[p]) + ";";
  std::string best;
  bool have = false;
  std::function<void(std::size_t)> recurse = [&](std::size_t ci) {
    if (ci == classes.size()) {
      std::vector<int> pos(V);
      for (int p = 0; p < V; ++p) pos[order[p]] = p;
      std::vector<std::pair<int, int>> es;
      for (const auto& e : c.edges()) {
        int a = pos[e.u], b = pos[e.v];
        es.emplace_back(std::min(a, b), std::max(a, b));
      }
      std::sort(es.begin(), es.end());
      std::string s = head + "|";
      for (auto [a, b] : es) s += std::to_string(a) + "-" + std::to_string(b) + ",";
      if (!have || s < best) {
        best = std::move(s);
        have = true;
      }
      return;
    }
    auto [b, e] = classes[ci];
    std::sort(order.begin() + b, order.begin() + e);
    do {
      recurse(ci + 1);
    } while (std::next_permutation(order.begin() + b, order.begin() + e));
  };
  recurse(0);
  return best;
}

bool isomorphic(const MarkedNodalCurve& a, const MarkedNodalCurve& b) {
  if (a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() ||
      a.num_marks() != b.num_marks())
    return false;
  return canonical_form(a) == canonical_form(b);
}

std::vector<MarkedNodalCurve> enumerate_genus0(int max_vertices, int max_marks) {
  std::map<std::string, MarkedNodalCurve> found;
  for (int V = 1; V <= max_vertices; ++V) {
    // Labelled trees on V vertices from Pruefer sequences.
    std::vector<std::vector<CurveEdge>> trees;
    if (V == 1) {
      trees.push_back({});
    } else if (V == 2) {
      trees.push_back({{0, 1}});
    } else {
      std::vector<int> seq(V - 2, 0);
      while (true) {
        std::vector<int> degree(V, 1);
        for (int x : seq) ++degree[x];
        std::vector<CurveEdge> edges;
        for (int x : seq) {
          for (int leaf = 0; leaf < V; ++leaf)
            if (degree[leaf] == 1) {
              edges.push_back({leaf, x});
              --degree[leaf];
              --degree[x];
              break;
            }
        }
        std::vector<int> last;
        for (int v = 0; v < V; ++v)
          if (degree[v] == 1) last.push_back(v);
        edges.push_back({last[0], last[1]});
        trees.push_back(edges);
        int pos = 0;
        while (pos < V - 2 && ++seq[pos] == V) seq[pos++] = 0;
        if (pos == V - 2) break;
      }
    }
    for (int n = 3; n <= max_marks; ++n) {
      for (const auto& tree : trees) {
        std::vector<int> assign(n, 0);
        while (true) {
          std::vector<Leg> legs;
          for (int i = 0; i < n; ++i) legs.push_back({assign[i], i + 1});
          MarkedNodalCurve c(std::vector<int>(V, 0), tree, legs);
          if (is_stable(c).stable) found.emplace(canonical_form(c), c);
          int pos = 0;
          while (pos < n && ++assign[pos] == V) assign[pos++] = 0;
          if (pos == n) break;
        }
      }
    }
  }
  std::vector<MarkedNodalCurve> out;
  for (auto& [key, c] : found) out.push_back(c);
  return out;
}

}  // namespace bubble
