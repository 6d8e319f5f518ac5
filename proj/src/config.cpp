#include "bubble/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace bubble {

using nlohmann::json;

namespace {

const char* kWhere = "cli.config";

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Validation, kWhere, what); }

void check_keys(const json& obj, const std::string& block, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail("'" + block + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail("unknown key '" + block + "." + it.key() + "'");
}

double number(const json& obj, const std::string& key, double fallback, const std::string& block) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail("'" + block + "." + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail("'" + block + "." + key + "' must be finite");
  return x;
}

int integer(const json& obj, const std::string& key, int fallback, const std::string& block) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail("'" + block + "." + key + "' must be an integer");
  return v.get<int>();
}

void positive(double x, const std::string& name) {
  if (!(x > 0.0)) fail("'" + name + "' must be positive");
}

RunConfig from_json(const json& j) {
  check_keys(j, "config", {"family", "ladder", "thresholds", "tolerances", "output", "seed"});
  RunConfig c;
  json norm;

  if (!j.contains("family")) fail("missing 'family' block");
  const json& f = j.at("family");
  check_keys(f, "family",
             {"kind", "k", "a", "b", "delta", "concentrating", "gamma", "mirror", "steps_per_ln2",
              "ntheta", "chart_radius", "cubature"});
  if (!f.contains("kind") || !f.at("kind").is_string()) fail("'family.kind' must be a string");
  FamilySpec& s = c.family;
  s.kind = f.at("kind").get<std::string>();
  if (f.contains("k")) {
    if (!f.at("k").is_array()) fail("'family.k' must be an array of numbers");
    for (const auto& v : f.at("k")) {
      if (!v.is_number()) fail("'family.k' must be an array of numbers");
      s.k.push_back(v.get<double>());
    }
  }
  try {
    if (s.k.empty()) s.k = default_schedule(s.kind);
  } catch (const Error& e) {
    fail(e.bare_message());
  }
  s.a = number(f, "a", s.a, "family");
  s.b = number(f, "b", s.b, "family");
  s.delta = number(f, "delta", s.delta, "family");
  if (f.contains("concentrating")) {
    if (!f.at("concentrating").is_boolean()) fail("'family.concentrating' must be a boolean");
    s.concentrating = f.at("concentrating").get<bool>();
  }
  s.gamma = number(f, "gamma", s.gamma, "family");
  s.mirror = number(f, "mirror", s.mirror, "family");
  s.steps_per_ln2 = integer(f, "steps_per_ln2", s.steps_per_ln2, "family");
  s.ntheta = integer(f, "ntheta", s.ntheta, "family");
  s.chart_radius = number(f, "chart_radius", s.chart_radius, "family");
  if (f.contains("cubature")) {
    const json& q = f.at("cubature");
    check_keys(q, "family.cubature", {"initial_radial", "initial_angular", "max_depth", "rel_tol"});
    s.cubature.initial_radial = integer(q, "initial_radial", s.cubature.initial_radial, "family.cubature");
    s.cubature.initial_angular = integer(q, "initial_angular", s.cubature.initial_angular, "family.cubature");
    s.cubature.max_depth = integer(q, "max_depth", s.cubature.max_depth, "family.cubature");
    s.cubature.rel_tol = number(q, "rel_tol", s.cubature.rel_tol, "family.cubature");
  }
  for (double k : s.k)
    if (!(k > 0.0) || !std::isfinite(k)) fail("'family.k' values must be positive");
  positive(s.delta, "family.delta");
  positive(s.chart_radius, "family.chart_radius");
  positive(s.gamma, "family.gamma");
  if (s.steps_per_ln2 < 1) fail("'family.steps_per_ln2' must be at least 1");
  if (s.ntheta < 3) fail("'family.ntheta' must be at least 3");
  if (s.cubature.initial_radial < 1 || s.cubature.initial_angular < 1 || s.cubature.max_depth < 1)
    fail("'family.cubature' counts must be at least 1");
  positive(s.cubature.rel_tol, "family.cubature.rel_tol");
  norm["family"] = {{"kind", s.kind}, {"k", s.k}, {"a", s.a}, {"b", s.b}, {"delta", s.delta},
                    {"concentrating", s.concentrating}, {"gamma", s.gamma}, {"mirror", s.mirror},
                    {"steps_per_ln2", s.steps_per_ln2}, {"ntheta", s.ntheta},
                    {"chart_radius", s.chart_radius},
                    {"cubature", {{"initial_radial", s.cubature.initial_radial},
                                  {"initial_angular", s.cubature.initial_angular},
                                  {"max_depth", s.cubature.max_depth},
                                  {"rel_tol", s.cubature.rel_tol}}}};

  const json empty = json::object();
  const json& th = j.contains("thresholds") ? j.at("thresholds") : empty;
  check_keys(th, "thresholds", {"eps0", "eps0_prime", "eps0_double_prime"});
  c.eps0 = number(th, "eps0", c.eps0, "thresholds");
  c.eps0_prime = number(th, "eps0_prime", c.eps0_prime, "thresholds");
  c.eps0_double_prime = number(th, "eps0_double_prime", c.eps0_double_prime, "thresholds");
  positive(c.eps0, "thresholds.eps0");
  positive(c.eps0_prime, "thresholds.eps0_prime");
  positive(c.eps0_double_prime, "thresholds.eps0_double_prime");
  norm["thresholds"] = {{"eps0", c.eps0}, {"eps0_prime", c.eps0_prime},
                        {"eps0_double_prime", c.eps0_double_prime}};

  DriverConfig& d = c.driver;
  const double eps_cap = 0.5 * std::min({c.eps0, c.eps0_prime, c.eps0_double_prime});
  const json& la = j.contains("ladder") ? j.at("ladder") : empty;
  check_keys(la, "ladder", {"delta0", "eps_bar", "depth"});
  d.delta0 = number(la, "delta0", d.delta0, "ladder");
  d.eps_bar = number(la, "eps_bar", eps_cap, "ladder");
  d.depth = integer(la, "depth", d.depth, "ladder");
  positive(d.delta0, "ladder.delta0");
  positive(d.eps_bar, "ladder.eps_bar");
  if (d.eps_bar > eps_cap) fail("'ladder.eps_bar' exceeds half the smallest threshold");
  if (d.depth < 2 || d.depth > 40) fail("'ladder.depth' must lie in [2, 40]");
  d.eps0_double_prime = c.eps0_double_prime;
  norm["ladder"] = {{"delta0", d.delta0}, {"eps_bar", d.eps_bar}, {"depth", d.depth}};

  const json& to = j.contains("tolerances") ? j.at("tolerances") : empty;
  check_keys(to, "tolerances",
             {"decrement", "zero_neck_eps", "identity", "balanced_center", "mollifier_bandwidth",
              "regularity_n_max"});
  d.decrement_tol = number(to, "decrement", d.eps_bar / 20.0, "tolerances");
  d.zero_neck_eps = number(to, "zero_neck_eps", d.zero_neck_eps, "tolerances");
  d.identity_tol = number(to, "identity", d.identity_tol, "tolerances");
  d.balanced.tol = number(to, "balanced_center", d.balanced.tol, "tolerances");
  d.balanced.bandwidth = number(to, "mollifier_bandwidth", d.balanced.bandwidth, "tolerances");
  d.regularity.n_max = integer(to, "regularity_n_max", d.regularity.n_max, "tolerances");
  positive(d.decrement_tol, "tolerances.decrement");
  positive(d.zero_neck_eps, "tolerances.zero_neck_eps");
  positive(d.identity_tol, "tolerances.identity");
  positive(d.balanced.tol, "tolerances.balanced_center");
  positive(d.balanced.bandwidth, "tolerances.mollifier_bandwidth");
  if (d.regularity.n_max < 1) fail("'tolerances.regularity_n_max' must be at least 1");
  norm["tolerances"] = {{"decrement", d.decrement_tol},
                        {"zero_neck_eps", d.zero_neck_eps},
                        {"identity", d.identity_tol},
                        {"balanced_center", d.balanced.tol},
                        {"mollifier_bandwidth", d.balanced.bandwidth},
                        {"regularity_n_max", d.regularity.n_max}};

  if (j.contains("output")) {
    if (!j.at("output").is_string()) fail("'output' must be a string");
    c.output_dir = j.at("output").get<std::string>();
  }
  norm["output"] = c.output_dir;
  if (j.contains("seed") && !j.at("seed").is_null()) {
    if (!j.at("seed").is_number_integer()) fail("'seed' must be an integer or null");
    c.seed = j.at("seed").get<std::int64_t>();
  }
  norm["seed"] = c.seed ? json(*c.seed) : json(nullptr);

  c.canonical_json = norm.dump();
  c.hash = fnv1a_hex(c.canonical_json);
  return c;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("malformed config: ") + e.what());
  }
  return from_json(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_tol_overrides(RunConfig& config, const std::string& overrides) {
  if (overrides.empty()) return;
  json j = json::parse(config.canonical_json);
  std::stringstream ss(overrides);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail("tolerance override '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      fail("tolerance override '" + item + "' has a non-numeric value");
    if (!j["tolerances"].contains(key)) fail("unknown tolerance '" + key + "'");
    if (key == "regularity_n_max") {
      if (value != std::floor(value)) fail("'regularity_n_max' must be an integer");
      j["tolerances"][key] = static_cast<int>(value);
    } else {
      j["tolerances"][key] = value;
    }
  }
  const std::string out = config.output_dir;
  config = from_json(j);
  config.output_dir = out;
}

}  // namespace bubble
