#include <random>
#include <sstream>

#include "bubble/families.hpp"
#include "bubble/measure.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bubble;

namespace {

WeightedParticleMeasure random_measure(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Complex> pts;
  std::vector<double> w;
  for (int i = 0; i < n; ++i) {
    pts.push_back(std::polar(std::sqrt(u(rng)), 2 * oracle::pi * u(rng)));
    w.push_back(u(rng));
  }
  return WeightedParticleMeasure(pts, w, 1.0);
}

}  // namespace

TEST_CASE("particle measure rejects bad input") {
  CHECK_THROWS_AS(WeightedParticleMeasure({{0.1, 0}}, {-1.0}, 1.0), Error);
  CHECK_THROWS_AS(WeightedParticleMeasure({{2.0, 0}}, {1.0}, 1.0), Error);
  CHECK_THROWS_AS(WeightedParticleMeasure({{0.1, 0}}, {1.0, 2.0}, 1.0), Error);
  try {
    WeightedParticleMeasure({{0.1, 0}}, {std::nan("")}, 1.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("mass_in agrees with a plain loop") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_measure(rng, 500);
    const Complex c(u(rng) - 0.5, u(rng) - 0.5);
    const double r = 0.05 + u(rng);
    CHECK(mass_in(mu, c, r) ==
          doctest::Approx(oracle::brute_mass_in(mu.points(), mu.weights(), c, r)).epsilon(1e-12));
  }
}

TEST_CASE("restriction and exclusion partition the mass") {
  std::mt19937_64 rng(2);
  const auto mu = random_measure(rng, 300);
  const Disk d{{0.2, -0.1}, 0.4};
  CHECK(mu.restricted_to(d).total_mass() + mu.excluding(d).total_mass() ==
        doctest::Approx(mu.total_mass()).epsilon(1e-12));
}

TEST_CASE("compensated sum recovers small terms") {
  std::vector<double> v{1e16, 1.0, -1e16};
  for (int i = 0; i < 1000; ++i) v.push_back(1e-3);
  CHECK(compensated_sum(v) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("pushforward keeps weights and moves moments") {
  std::mt19937_64 rng(3);
  const auto mu = random_measure(rng, 200);
  const Complex shift(0.3, -0.2);
  const auto nu = pushforward(mu, Mobius::translation(shift));
  CHECK(nu.total_mass() == doctest::Approx(mu.total_mass()));
  const Complex m0 = first_moment(mu, {{0, 0}, 2.0});
  const Complex m1 = first_moment(nu, {{0, 0}, 3.0});
  CHECK(std::abs(m1 - (m0 + shift * mu.total_mass())) < 1e-10);
}

TEST_CASE("polar grid cells are exact for constant density") {
  const auto mu = polar_grid_measure([](Complex) { return 1.0; }, {0.1, 0.1}, 0.5, 17, 23, 1.0);
  CHECK(mu.total_mass() == doctest::Approx(oracle::pi * 0.25).epsilon(1e-13));
  CHECK(mass_in(mu, {0.1, 0.1}, 0.25) == doctest::Approx(oracle::pi * 0.0625).epsilon(0.02));
}

TEST_CASE("adaptive cubature integrates the linear bubble density") {
  const auto f = RationalMap::polynomial({0.0, 50.0});
  const auto mu = adaptive_polar_measure([&](Complex z) { return f.density(z); }, 1.0);
  CHECK(mu.total_mass() == doctest::Approx(oracle::linear_disk_energy(50.0, 1.0)).epsilon(1e-8));
}

TEST_CASE("scale ladder values") {
  const auto L = build_scale_ladder(1.0, 0.2, 6);
  CHECK(L.depth() == 6);
  CHECK(L.working_index() == 3);
  for (int k = 0; k <= 6; ++k) {
    CHECK(L.delta(k) == doctest::Approx(std::ldexp(1.0, -k)));
    CHECK(L.epsilon(k) == doctest::Approx(0.05 * std::ldexp(1.0, -k)));
  }
  CHECK_THROWS_AS(build_scale_ladder(1.0, -0.1, 6), Error);
  CHECK_THROWS_AS(build_scale_ladder(1.0, 0.2, 1), Error);
}

TEST_CASE("detection finds a single bubble at the origin") {
  std::vector<WeightedParticleMeasure> mus;
  for (double k : {1e4, 1e5, 1e6})
    mus.push_back(density_to_measure(RationalMap::polynomial({0.0, k}), 1.0));
  const auto L = build_scale_ladder(1.0, 0.25, 6);
  const auto rep = detect_concentrations(mus, WeightedParticleMeasure::empty(1.0), L);
  REQUIRE(rep.sites.size() == 1);
  CHECK(std::abs(rep.sites[0].location) < L.delta(6));
  CHECK(rep.sites[0].kind == SiteKind::Smooth);
  CHECK(rep.sites[0].mass ==
        doctest::Approx(oracle::linear_disk_energy(1e6, L.delta(6))).epsilon(0.01));
}

TEST_CASE("detection is silent on a fixed map") {
  const auto mu = density_to_measure(RationalMap::polynomial({0.0, 1.0}), 1.0);
  const std::vector<WeightedParticleMeasure> mus{mu, mu, mu};
  const auto rep = detect_concentrations(mus, WeightedParticleMeasure::empty(1.0),
                                         build_scale_ladder(1.0, 0.25, 6));
  CHECK(rep.sites.empty());
}

TEST_CASE("particle csv has a header") {
  std::ostringstream out;
  write_csv(out, WeightedParticleMeasure({{0.5, 0.25}}, {2.0}, 1.0));
  CHECK(out.str() == "re,im,weight\n0.5,0.25,2\n");
}
