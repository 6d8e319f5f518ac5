#include <sstream>

#include "bubble/families.hpp"
#include "bubble/neck.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bubble;

namespace {

FamilySpec torus_spec(double a, double b) {
  FamilySpec s;
  s.kind = "torus_linear";
  s.a = a;
  s.b = b;
  return s;
}

}  // namespace

TEST_CASE("samples must lie on the target") {
  const TargetDescriptor sphere;
  CHECK_THROWS_AS(CylinderField::sample(1.0, 5, 8, sphere,
                                        [](double, double, std::span<double> out) {
                                          out[0] = 2.0;
                                          out[1] = out[2] = 0.0;
                                        }),
                  Error);
}

TEST_CASE("linear torus diagnostics are closed form") {
  const double a = 1.5, b = 0.5;
  const auto d = diagnostics(torus_neck(torus_spec(a, b), 7));
  CHECK(d.alpha == doctest::Approx(oracle::torus_alpha(a, b)).epsilon(1e-12));
  CHECK(d.alpha_deviation < 1e-10);
  CHECK(d.energy == doctest::Approx(2 * oracle::pi * d.half_length * (a * a + b * b)).epsilon(1e-9));
  for (double th : d.theta) CHECK(th == doctest::Approx(2 * oracle::pi * b * b).epsilon(1e-9));
}

TEST_CASE("plumbing necks are balanced and consistent") {
  FamilySpec s;
  s.kind = "plumbing";
  const auto neck = plumbing_neck(s, 9);
  REQUIRE(neck.nodal_meta());
  CHECK(std::abs(neck.nodal_meta()->t_k) == doctest::Approx(std::pow(4.0, -9)));
  CHECK(neck.half_length() == doctest::Approx(std::log(s.delta / std::pow(2.0, -9))).epsilon(0.02));
  CHECK(neck.derivative_consistency() < 5e-3);
  const auto d = diagnostics(neck);
  CHECK(std::abs(d.alpha) <= 1e-6 * d.energy);
  CHECK(d.pohozaev_residual < 1e-6);
}

TEST_CASE("symmetric restriction keeps the nodal chart") {
  FamilySpec s;
  s.kind = "plumbing";
  const auto neck = plumbing_neck(s, 8);
  const double T = neck.half_length() / 2;
  const auto sub = neck.restrict(-T, T);
  REQUIRE(sub.nodal_meta());
  CHECK(std::log(sub.nodal_meta()->delta / std::sqrt(std::abs(sub.nodal_meta()->t_k))) ==
        doctest::Approx(sub.half_length()).epsilon(1e-9));
  CHECK_FALSE(neck.restrict(0.0, T).nodal_meta());
}

TEST_CASE("pohozaev residual separates conformal from radial maps") {
  const auto s = sample_polar(RationalMap::polynomial({0.0, 0.0, 0.0, 1.0}), 0.2, 1.0, 128, 128);
  CHECK(pohozaev_residual(s, std::vector<double>{0.4, 0.7}) < 1e-8);
  PolarMapSamples radial;
  radial.nphi = 16;
  radial.dim = 1;
  for (int i = 0; i < 8; ++i) {
    const double r = 0.2 + 0.1 * i;
    radial.radii.push_back(r);
    for (int j = 0; j < 16; ++j) {
      radial.values.push_back(r * r * r);
      radial.d_r.push_back(3 * r * r);
      radial.d_phi.push_back(0.0);
    }
  }
  CHECK(pohozaev_residual(radial, std::vector<double>{0.5}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pohozaev_residual(radial, std::vector<double>{2.0}), Error);
}

TEST_CASE("theta bounds on a holomorphic neck") {
  FamilySpec s;
  s.kind = "plumbing";
  const auto neck = plumbing_neck(s, 10);
  // Theta = 2 pi sech^2(u) with u = ln|x|, so Theta'' - Theta < 0 where
  // sech^2 > 1/2: the full neck carries too much energy for the bounds.
  const auto full = theta_bounds_check(neck, neck.t_min(), neck.t_max(), 0.5);
  CHECK(full.precondition_exceeded);
  CHECK_FALSE(full.convexity_holds());
  const double T = std::log(0.125 / std::pow(2.0, -10));
  const auto inner = neck.restrict(-T, T);
  const auto r = theta_bounds_check(inner, inner.t_min(), inner.t_max(), 0.5);
  CHECK_FALSE(r.precondition_exceeded);
  CHECK(r.all_hold());
}

TEST_CASE("zero neck verdicts") {
  FamilySpec s;
  s.kind = "plumbing";
  std::vector<CylinderField> plumbing, torus;
  for (double k : {6.0, 7.0, 8.0, 9.0, 10.0, 11.0}) {
    plumbing.push_back(plumbing_neck(s, k));
    torus.push_back(torus_neck(torus_spec(1.0, 0.0), k));
  }
  const auto p = zero_neck_test(plumbing, 0.05, zero_neck_schedule(0.5));
  CHECK(p.pass);
  CHECK(p.rows.size() == 8);
  CHECK(p.rows.back().energy <= 0.01);
  const auto t = zero_neck_test(torus, 0.05, zero_neck_schedule(0.5));
  CHECK_FALSE(t.pass);
  for (const auto& row : t.rows) CHECK(row.energy == doctest::Approx(row.predicted).epsilon(0.05));
  CHECK_THROWS_AS(zero_neck_test(plumbing, 0.05, std::vector<double>{}), Error);
  CHECK_THROWS_AS(zero_neck_test(plumbing, 0.05, std::vector<double>{4.0}), Error);
}

TEST_CASE("theta csv layout") {
  std::ostringstream out;
  write_theta_csv(out, diagnostics(torus_neck(torus_spec(1.0, 1.0), 6)));
  const std::string text = out.str();
  CHECK(text.rfind("t,theta,alpha_slice\n", 0) == 0);
}
