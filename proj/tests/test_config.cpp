#include <sstream>

#include "bubble/config.hpp"
#include "bubble/report.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bubble;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config accepted: " << text);
  return ErrorKind::Algorithmic;
}

}  // namespace

TEST_CASE("defaults fill the canonical config") {
  const auto c = parse_config(R"({"family": {"kind": "fixed"}})");
  CHECK(c.family.k == default_schedule("fixed"));
  CHECK(c.driver.eps_bar == doctest::Approx(0.25));
  CHECK(c.driver.decrement_tol == doctest::Approx(0.25 / 20));
  CHECK(c.eps0_double_prime == 0.5);
  CHECK_FALSE(c.seed);
  CHECK(c.hash.size() == 16);
}

TEST_CASE("hash ignores layout but not values") {
  const auto a = parse_config(R"({"family": {"kind": "fixed"}, "seed": 3})");
  const auto b = parse_config("{\n  \"seed\": 3,\n  \"family\": {\"kind\": \"fixed\"}\n}");
  const auto c = parse_config(R"({"family": {"kind": "fixed"}, "seed": 4})");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
}

TEST_CASE("invalid configs are validation errors") {
  for (const char* text : {
           "{",
           R"({"ladder": {}})",
           R"({"family": {"kind": "fixed", "colour": 1}})",
           R"({"family": {"kind": "spiral"}})",
           R"({"family": {"kind": "fixed", "k": [1, -2, 3]}})",
           R"({"family": {"kind": "fixed"}, "ladder": {"eps_bar": 0.3}})",
           R"({"family": {"kind": "fixed"}, "ladder": {"depth": 1}})",
           R"({"family": {"kind": "fixed"}, "tolerances": {"identity": -1}})",
           R"({"family": {"kind": "fixed"}, "seed": 1.5})",
       })
    CHECK(kind_of(text) == ErrorKind::Validation);
}

TEST_CASE("tolerance overrides") {
  auto c = parse_config(R"({"family": {"kind": "fixed"}, "output": "somewhere"})");
  const auto before = c.hash;
  apply_tol_overrides(c, "identity=0.05,regularity_n_max=4");
  CHECK(c.driver.identity_tol == doctest::Approx(0.05));
  CHECK(c.driver.regularity.n_max == 4);
  CHECK(c.output_dir == "somewhere");
  CHECK(c.hash != before);
  CHECK_THROWS_AS(apply_tol_overrides(c, "colour=1"), Error);
  CHECK_THROWS_AS(apply_tol_overrides(c, "identity"), Error);
  CHECK_THROWS_AS(apply_tol_overrides(c, "identity=abc"), Error);
  CHECK_THROWS_AS(apply_tol_overrides(c, "regularity_n_max=2.5"), Error);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("tree report layout") {
  const auto c = parse_config(R"({"family": {"kind": "fixed", "k": [1, 2, 3]}})");
  const auto tree = extract_bubble_tree(make_family(c.family), c.driver);
  const std::string text = tree_json(tree, c);
  CHECK(text.back() == '\n');
  const auto j = nlohmann::json::parse(text);
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["config_hash"] == c.hash);
  CHECK(j["num_bubbles"] == 0);
  CHECK(j["tolerances"].contains("decrement"));
  CHECK(j.dump(2) + "\n" == text);
  std::ostringstream csv;
  write_markings_csv(csv, tree.markings);
  CHECK(csv.str().rfind("iteration,component,k_index,q_re,q_im,", 0) == 0);
}
