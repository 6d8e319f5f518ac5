#include "bubble/families.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bubble;

TEST_CASE("polynomial algebra") {
  CHECK(resultant_modulus({-1.0, 0.0, 1.0}, {-3.0, 1.0}) == doctest::Approx(8.0));
  CHECK(resultant_modulus({-1.0, 1.0}, {-1.0, 0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-12));
  const auto roots = polynomial_roots({1.0, 0.0, 1.0});
  REQUIRE(roots.size() == 2);
  for (auto r : roots) CHECK(std::abs(r * r + 1.0) < 1e-14);
}

TEST_CASE("rational maps validate and evaluate") {
  CHECK_THROWS_AS(RationalMap({-1.0, 1.0}, {-1.0, 0.0, 1.0}), Error);
  CHECK_THROWS_AS(RationalMap({1.0}, {0.0}), Error);
  const RationalMap f({-0.3, 1.0}, {1.0, 0.5});
  CHECK(f.degree() == 1);
  CHECK(std::abs(f(0.5) - (0.2 / 1.25)) < 1e-15);
  const auto g = RationalMap::polynomial({0.0, 0.0, 2.0}).at_infinity();
  CHECK(std::abs(g(0.5) - 8.0) < 1e-12);
}

TEST_CASE("density of a linear map") {
  const double k = 3.0;
  const auto f = RationalMap::polynomial({0.0, k});
  for (Complex z : {Complex(0, 0), Complex(0.2, 0.1), Complex(-1, 2)})
    CHECK(f.density(z) ==
          doctest::Approx(4 * k * k / std::pow(1 + k * k * std::norm(z), 2)).epsilon(1e-13));
}

TEST_CASE("inverse stereographic projection and its differential") {
  const Complex w(0.3, -0.7);
  double p[3], du[3], dv[3], pu[3], pv[3];
  inverse_stereographic(w, p);
  CHECK(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] == doctest::Approx(1.0));
  inverse_stereographic_differential(w, du, dv);
  const double h = 1e-6;
  inverse_stereographic(w + h, pu);
  inverse_stereographic(w + Complex(0, h), pv);
  for (int i = 0; i < 3; ++i) {
    CHECK(du[i] == doctest::Approx((pu[i] - p[i]) / h).epsilon(1e-4));
    CHECK(dv[i] == doctest::Approx((pv[i] - p[i]) / h).epsilon(1e-4));
  }
}

TEST_CASE("energy quadrature against closed forms") {
  CHECK(energy_quadrature(RationalMap::polynomial({0.0, 20.0}), Region::disk(0.5)) ==
        doctest::Approx(oracle::linear_disk_energy(20.0, 0.5)).epsilon(1e-9));
  const RationalMap mobius({-0.3, 1.0}, {1.0, 0.5});
  CHECK(energy_quadrature(mobius, Region::full_sphere()) ==
        doctest::Approx(oracle::sphere_energy(1)).epsilon(1e-8));
  const RationalMap quadratic({-1.0, 0.0, 1.0}, {1.0, 0.0, 1.0});
  CHECK(energy_quadrature(quadratic, Region::full_sphere()) ==
        doctest::Approx(oracle::sphere_energy(2)).epsilon(1e-8));
  QuadratureOptions tight;
  tight.max_depth = 2;
  tight.rel_tol = 1e-16;
  CHECK_THROWS_AS(energy_quadrature(RationalMap::polynomial({-250.0, 0.0, 1e3}), Region::disk(1.0), tight),
                  Error);
}

TEST_CASE("density measure keeps the energy") {
  const auto f = RationalMap::polynomial({-0.25 * 1e3, 0.0, 1e3});
  const auto mu = density_to_measure(f, 1.0);
  CHECK(mu.total_mass() == doctest::Approx(energy_quadrature(f, Region::disk(1.0))).epsilon(1e-6));
}

TEST_CASE("family generation") {
  CHECK_THROWS_AS(default_schedule("spiral"), Error);
  FamilySpec spec;
  spec.kind = "bubble2";
  spec.k = {10, 100, 1000};
  const auto fam = make_family(spec);
  CHECK(fam.measures.size() == 3);
  CHECK(fam.maps.size() == 3);
  CHECK(fam.total_energy.back() == doctest::Approx(oracle::sphere_energy(2)));
  CHECK(fam.base_curve.num_marks() == 3);
  CHECK(fam.nodal_points.empty());

  FamilySpec plumbing;
  plumbing.kind = "plumbing";
  plumbing.k = {6, 7, 8};
  const auto nodal = make_family(plumbing);
  CHECK(nodal.necks.size() == 3);
  CHECK(nodal.nodal_points.size() == 1);
  CHECK(nodal.base_curve.num_edges() == 1);

  plumbing.k = {6, 0.5, 8};
  try {
    make_family(plumbing);
    FAIL("expected an error");
  } catch (const Error& e) {
    REQUIRE(e.k_index());
    CHECK(*e.k_index() == 1);
  }
}
