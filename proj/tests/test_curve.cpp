#include "bubble/curve.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bubble;

namespace {

const char* kTwoComponent = "v0 g=0 legs=1,2\nv1 g=0 legs=3,4\ne 0 1\n";

}  // namespace

TEST_CASE("parse and print round-trip") {
  const auto c = MarkedNodalCurve::parse(std::string("# comment\n\n") + kTwoComponent);
  CHECK(c.num_vertices() == 2);
  CHECK(c.num_edges() == 1);
  CHECK(c.num_marks() == 4);
  CHECK(c.arithmetic_genus() == 0);
  CHECK(isomorphic(MarkedNodalCurve::parse(c.to_text()), c));
}

TEST_CASE("parse rejects malformed graphs") {
  CHECK_THROWS_AS(MarkedNodalCurve::parse("v0 g=0 legs=1\ne 0 3\n"), Error);
  CHECK_THROWS_AS(MarkedNodalCurve::parse("v0 g=x legs=1\n"), Error);
  CHECK_THROWS_AS(MarkedNodalCurve::parse("v0 g=0 legs=1,1,2\n"), Error);
  CHECK_THROWS_AS(MarkedNodalCurve::parse("v0 g=0 legs=1\nv1 g=0 legs=2\n"), Error);
}

TEST_CASE("genus counts loops") {
  const MarkedNodalCurve c({0}, {{0, 0}}, {{0, 1}});
  CHECK(c.arithmetic_genus() == 1);
  CHECK(c.special_points(0) == 3);
  CHECK(is_stable(c).stable);
}

TEST_CASE("stability per component") {
  const MarkedNodalCurve c({0, 0}, {{0, 1}}, {{0, 1}, {0, 2}, {1, 3}});
  const auto s = is_stable(c);
  CHECK(s.global);
  CHECK_FALSE(s.stable);
  CHECK(s.vertex_stable == std::vector<bool>{true, false});
  CHECK(stabilize(c).curve.num_vertices() == 1);
}

TEST_CASE("forgetting a mark contracts the component it leaves unstable") {
  const auto c = MarkedNodalCurve::parse(kTwoComponent);
  const auto r = forget_marks(c, {4});
  CHECK(r.curve.num_vertices() == 1);
  CHECK(r.curve.num_marks() == 3);
  CHECK(r.node_images[0].kind == PointKind::Mark);
  CHECK_THROWS_AS(forget_marks(c, {1, 2}), Error);
  CHECK_THROWS_AS(forget_marks(c, {9}), Error);
}

TEST_CASE("the (0,4) node is regular with witness {4}") {
  const auto c = MarkedNodalCurve::parse(kTwoComponent);
  const auto v = is_regular_node(c, 0);
  CHECK(v.verdict == Regularity::Regular);
  CHECK(v.witness == std::vector<int>{4});
  RegularityOptions search;
  search.genus0_shortcut = false;
  const auto w = is_regular_node(c, 0, search);
  CHECK(w.verdict == Regularity::Regular);
  REQUIRE(w.witness.size() == 1);
  CHECK(forget_marks(c, w.witness).node_images[0].kind != PointKind::Node);
}

TEST_CASE("a self-node with one mark is not regular") {
  const MarkedNodalCurve c({0}, {{0, 0}}, {{0, 1}});
  CHECK(is_regular_node(c, 0).verdict == Regularity::NotRegular);
}

TEST_CASE("bubble insertion adds two marks in case 1 and one in case 2") {
  const auto c = MarkedNodalCurve::parse(kTwoComponent);
  const auto one = add_bubble_component(c, {BubbleSite::Kind::Point, 0}, 1);
  CHECK(one.curve.num_marks() == c.num_marks() + 2);
  CHECK(one.curve.num_vertices() == 3);
  CHECK(one.new_labels.size() == 2);
  const auto two = add_bubble_component(c, {BubbleSite::Kind::Node, 0}, 2);
  CHECK(two.curve.num_marks() == c.num_marks() + 1);
  CHECK(two.curve.num_edges() == 2);
  CHECK(two.preimage_nodes[0].size() == 2);
  for (const auto& ins : {one, two}) {
    CHECK(ins.curve.arithmetic_genus() == 0);
    CHECK(isomorphic(forget_marks(ins.curve, ins.new_labels).curve, c));
  }
  CHECK_THROWS_AS(add_bubble_component(c, {BubbleSite::Kind::Point, 0}, 3), Error);
  CHECK_THROWS_AS(add_bubble_component(c, {BubbleSite::Kind::Node, 0}, 1), Error);
}

TEST_CASE("canonical form ignores vertex order") {
  const MarkedNodalCurve a({0, 0}, {{0, 1}}, {{0, 1}, {0, 2}, {1, 3}, {1, 4}});
  const MarkedNodalCurve b({0, 0}, {{1, 0}}, {{1, 1}, {1, 2}, {0, 3}, {0, 4}});
  const MarkedNodalCurve c({0, 0}, {{0, 1}}, {{0, 1}, {0, 3}, {1, 2}, {1, 4}});
  CHECK(isomorphic(a, b));
  CHECK_FALSE(isomorphic(a, c));
}

TEST_CASE("genus-0 enumeration matches the stratum counts") {
  for (int n = 3; n <= 5; ++n) {
    int expected = 0;
    for (int m = 3; m <= n; ++m) expected += oracle::genus0_strata(m);
    CHECK(enumerate_genus0(n - 2, n).size() == static_cast<std::size_t>(expected));
  }
  for (const auto& c : enumerate_genus0(3, 5)) {
    CHECK(is_stable(c).stable);
    CHECK(c.arithmetic_genus() == 0);
  }
}
