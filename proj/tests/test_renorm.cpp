#include <random>

#include "bubble/families.hpp"
#include "bubble/profile.hpp"
#include "bubble/renorm.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bubble;

namespace {

WeightedParticleMeasure gaussian(Complex c, double sigma, double mass, int n = 64) {
  return polar_grid_measure(
      [&](Complex z) {
        return mass / (2 * oracle::pi * sigma * sigma) * std::exp(-std::norm(z - c) / (2 * sigma * sigma));
      },
      c, 8 * sigma, n, n, 1.0);
}

}  // namespace

TEST_CASE("cross ratio normalizes q and the cut circle") {
  const Complex q(0.1, -0.2);
  const double t = 0.3;
  CHECK(std::abs(cross_ratio(q, t, q)) < 1e-15);
  CHECK(std::abs(cross_ratio(q, t, q + t / (1 - t)) - 1.0) < 1e-14);
  const auto m = cross_ratio_map(q, t);
  CHECK(std::abs(m(0.7) - cross_ratio(q, t, 0.7)) < 1e-14);
  CHECK_THROWS_AS(cross_ratio(q, 1.0, 0.0), Error);
  CHECK_THROWS_AS(cross_ratio(q, 0.0, 0.0), Error);
}

TEST_CASE("profiles are nonincreasing and agree with the Gaussian tail") {
  const double sigma = 0.05, mass = 3.0;
  const auto mu = gaussian(0.0, sigma, mass, 128);
  for (auto mode : {ProfileMode::Step, ProfileMode::ShellInterpolated, ProfileMode::Mollified}) {
    const RadialMassProfile p(mu, 0.0, mode);
    double prev = p.outside(0.0);
    for (double s = 0.001; s < 0.4; s += 0.001) {
      const double v = p.outside(s);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
    CHECK(p.outside(2 * sigma) ==
          doctest::Approx(oracle::gaussian_outside(mass, sigma, 2 * sigma)).epsilon(0.03));
  }
}

TEST_CASE("mollified slope matches a difference quotient") {
  const auto mu = gaussian({0.01, 0.0}, 0.05, 1.0);
  const RadialMassProfile p(mu, 0.0, ProfileMode::Mollified);
  const double s = 0.07, h = 1e-6;
  const auto [v, slope] = p.outside_and_slope(s);
  CHECK(v == doctest::Approx(p.outside(s)));
  CHECK(slope == doctest::Approx((p.outside(s + h) - p.outside(s - h)) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("neck scale on a uniform disk") {
  const double mass = 2.0;
  const auto mu = polar_grid_measure([&](Complex) { return mass / oracle::pi; }, 0.0, 1.0, 400, 64, 1.0);
  for (double eps : {0.1, 0.5, 1.0}) {
    const auto r = solve_neck_scale(mu, 0.0, eps);
    CHECK(r.t == doctest::Approx(oracle::uniform_disk_t(mass, eps)).epsilon(1e-9));
    CHECK(r.scale == doctest::Approx(r.t / (1 - r.t)));
  }
  CHECK_THROWS_AS(solve_neck_scale(mu, 0.0, -1.0), Error);
  CHECK_THROWS_AS(solve_neck_scale(mu, 0.0, 5.0), Error);
}

TEST_CASE("neck scale of a Gaussian matches its tail") {
  const double sigma = 0.1, mass = 1.0, eps = 0.3;
  const auto mu = gaussian(0.0, sigma, mass, 256);
  const auto r = solve_neck_scale(mu, 0.0, eps);
  const double s = sigma * std::sqrt(2 * std::log(mass / eps));
  CHECK(r.scale == doctest::Approx(s).epsilon(2e-3));
}

TEST_CASE("balanced center of symmetric bumps") {
  const auto L = build_scale_ladder(1.0, 0.25, 6);
  const double sigma = L.delta(6) / 20;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 4; ++i) {
    const Complex c = std::polar(0.7 * L.delta(6) * u(rng), 2 * oracle::pi * u(rng));
    const auto bc = find_balanced_center(gaussian(c, sigma, 2.0), L, 3);
    CHECK(std::abs(bc.F) <= 1e-8 * bc.mass);
    CHECK(std::abs(bc.q - c) <= 3 * sigma);
    CHECK(bc.winding == 1);
    CHECK(bc.boundary_condition_holds);
    CHECK(std::abs(bc.r - (bc.q + bc.t / (1 - bc.t))) < 1e-15);
  }
}

TEST_CASE("balanced center refuses a spread-out measure") {
  const auto L = build_scale_ladder(1.0, 0.25, 6);
  const auto mu = polar_grid_measure([](Complex) { return 1.0; }, 0.0, 1.0, 32, 32, 1.0);
  try {
    find_balanced_center(mu, L, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
  CHECK_THROWS_AS(find_balanced_center(mu, L, 4), Error);
}

TEST_CASE("center functional vanishes at the center of a symmetric bump") {
  const auto mu = gaussian(0.0, 0.002, 1.0);
  CHECK(std::abs(center_functional(mu, 0.0, 0.25)) < 1e-10);
  CHECK(std::abs(center_functional(mu, {0.001, 0.0}, 0.25)) > 1e-4);
}

TEST_CASE("nodal pushforward carries the neck energy") {
  FamilySpec spec;
  spec.kind = "plumbing";
  const auto neck = plumbing_neck(spec, 8);
  const auto mu = build_nodal_pushforward(neck, spec.delta);
  CHECK(mu.total_mass() == doctest::Approx(diagnostics(neck).energy).epsilon(1e-6));
  CHECK(mu.chart_radius() == doctest::Approx(spec.delta));
}
