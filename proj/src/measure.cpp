#include "bubble/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

namespace bubble {

namespace {

constexpr const char* kWhere = "measure";

double max_modulus(std::span<const Complex> pts) {
  double m = 0.0;
  for (auto z : pts) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

WeightedParticleMeasure::WeightedParticleMeasure(std::vector<Complex> points,
                                                 std::vector<double> weights,
                                                 double chart_radius)
    : points_(std::move(points)), weights_(std::move(weights)), chart_radius_(chart_radius) {
  if (points_.size() != weights_.size())
    throw Error(ErrorKind::Validation, kWhere, "points and weights differ in length");
  if (!(chart_radius_ > 0.0) || !std::isfinite(chart_radius_))
    throw Error(ErrorKind::Validation, kWhere, "chart radius must be positive and finite");
  // Tolerate rounding in points generated exactly on the chart boundary.
  const double bound = chart_radius_ * (1.0 + 1e-12);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw Error(ErrorKind::Validation, kWhere,
                  "weight " + std::to_string(i) + " is negative or not finite");
    if (!(std::abs(points_[i]) <= bound))
      throw Error(ErrorKind::Validation, kWhere,
                  "point " + std::to_string(i) + " lies outside the chart radius");
  }
  total_ = compensated_sum(weights_);
}

WeightedParticleMeasure WeightedParticleMeasure::empty(double chart_radius) {
  return WeightedParticleMeasure({}, {}, chart_radius);
}

WeightedParticleMeasure WeightedParticleMeasure::restricted_to(const Disk& region) const {
  std::vector<Complex> pts;
  std::vector<double> ws;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (region.contains(points_[i])) {
      pts.push_back(points_[i]);
      ws.push_back(weights_[i]);
    }
  }
  return WeightedParticleMeasure(std::move(pts), std::move(ws), chart_radius_);
}

WeightedParticleMeasure WeightedParticleMeasure::excluding(const Disk& region) const {
  std::vector<Complex> pts;
  std::vector<double> ws;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (std::abs(points_[i] - region.center) >= region.radius) {
      pts.push_back(points_[i]);
      ws.push_back(weights_[i]);
    }
  }
  return WeightedParticleMeasure(std::move(pts), std::move(ws), chart_radius_);
}

double mass_in(const WeightedParticleMeasure& mu, Complex center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::Validation, "measure.mass_in", "radius must be positive");
  auto pts = mu.points();
  auto ws = mu.weights();
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i] - center) <= radius) {
      double y = ws[i] - carry;
      double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
  }
  return sum;
}

WeightedParticleMeasure pushforward(const WeightedParticleMeasure& mu, const Mobius& map) {
  const Complex det = map.a * map.d - map.b * map.c;
  if (std::abs(det) == 0.0 || !std::isfinite(std::abs(det)))
    throw Error(ErrorKind::Domain, "measure.pushforward",
                "invalid renormalization: map is not injective (degenerate Moebius map)");
  std::vector<Complex> pts;
  pts.reserve(mu.size());
  for (auto z : mu.points()) {
    Complex denom = map.c * z + map.d;
    if (std::abs(denom) == 0.0)
      throw Error(ErrorKind::Domain, "measure.pushforward",
                  "invalid renormalization: pole of the map lies on the support");
    Complex w = map(z);
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
      throw Error(ErrorKind::Domain, "measure.pushforward",
                  "invalid renormalization: non-finite image point");
    pts.push_back(w);
  }
  double radius = std::max(max_modulus(pts), 1e-300);
  std::vector<double> ws(mu.weights().begin(), mu.weights().end());
  return WeightedParticleMeasure(std::move(pts), std::move(ws), radius);
}

Complex first_moment(const WeightedParticleMeasure& mu, const Disk& region) {
  auto pts = mu.points();
  auto ws = mu.weights();
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (region.contains(pts[i])) sum += ws[i] * pts[i];
  return sum;
}

WeightedParticleMeasure combine(const WeightedParticleMeasure& a, const WeightedParticleMeasure& b) {
  std::vector<Complex> pts(a.points().begin(), a.points().end());
  pts.insert(pts.end(), b.points().begin(), b.points().end());
  std::vector<double> ws(a.weights().begin(), a.weights().end());
  ws.insert(ws.end(), b.weights().begin(), b.weights().end());
  return WeightedParticleMeasure(std::move(pts), std::move(ws),
                                 std::max(a.chart_radius(), b.chart_radius()));
}

WeightedParticleMeasure polar_grid_measure(const PlanarDensity& density, Complex center,
                                           double radius, int nr, int ntheta,
                                           double chart_radius) {
  if (nr < 1 || ntheta < 1 || !(radius > 0.0))
    throw Error(ErrorKind::Validation, "measure.polar_grid", "degenerate grid");
  std::vector<Complex> pts;
  std::vector<double> ws;
  pts.reserve(static_cast<std::size_t>(nr) * ntheta);
  ws.reserve(pts.capacity());
  const double dr = radius / nr;
  const double dth = kTwoPi / ntheta;
  for (int i = 0; i < nr; ++i) {
    const double r0 = i * dr;
    const double r1 = (i + 1) * dr;
    const double rm = 0.5 * (r0 + r1);
    const double cell_area = 0.5 * (r1 * r1 - r0 * r0) * dth;
    for (int j = 0; j < ntheta; ++j) {
      const double th = (j + 0.5) * dth;
      Complex z = center + std::polar(rm, th);
      pts.push_back(z);
      ws.push_back(density(z) * cell_area);
    }
  }
  return WeightedParticleMeasure(std::move(pts), std::move(ws), chart_radius);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<double, 4> kGaussNodes = {-0.8611363115940526, -0.3399810435848563,
                                               0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights = {0.3478548451374538, 0.6521451548625461,
                                                 0.6521451548625461, 0.3478548451374538};

struct PolarCell {
  double r0, r1, t0, t1;
  int depth_r = 0;
  int depth_t = 0;
};

double cell_estimate(const PlanarDensity& density, const PolarCell& c) {
  const double hr = 0.5 * (c.r1 - c.r0);
  const double mr = 0.5 * (c.r1 + c.r0);
  const double ht = 0.5 * (c.t1 - c.t0);
  const double mt = 0.5 * (c.t1 + c.t0);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double r = mr + hr * kGaussNodes[i];
    for (int j = 0; j < 4; ++j) {
      const double t = mt + ht * kGaussNodes[j];
      sum += kGaussWeights[i] * kGaussWeights[j] * r * density(std::polar(r, t));
    }
  }
  return sum * hr * ht;
}

void emit_cell(const PlanarDensity& density, const PolarCell& c, std::vector<Complex>& pts,
               std::vector<double>& ws) {
  const double hr = 0.5 * (c.r1 - c.r0);
  const double mr = 0.5 * (c.r1 + c.r0);
  const double ht = 0.5 * (c.t1 - c.t0);
  const double mt = 0.5 * (c.t1 + c.t0);
  for (int i = 0; i < 4; ++i) {
    const double r = mr + hr * kGaussNodes[i];
    for (int j = 0; j < 4; ++j) {
      const double t = mt + ht * kGaussNodes[j];
      Complex z = std::polar(r, t);
      pts.push_back(z);
      ws.push_back(kGaussWeights[i] * kGaussWeights[j] * r * density(z) * hr * ht);
    }
  }
}

std::pair<PolarCell, PolarCell> split_r(const PolarCell& c) {
  const double m = 0.5 * (c.r0 + c.r1);
  PolarCell a = c, b = c;
  a.r1 = m;
  b.r0 = m;
  a.depth_r = b.depth_r = c.depth_r + 1;
  return {a, b};
}

std::pair<PolarCell, PolarCell> split_t(const PolarCell& c) {
  const double m = 0.5 * (c.t0 + c.t1);
  PolarCell a = c, b = c;
  a.t1 = m;
  b.t0 = m;
  a.depth_t = b.depth_t = c.depth_t + 1;
  return {a, b};
}

// Approximate Euclidean distance from z to a polar cell.
double distance_to_cell(const PolarCell& c, Complex z) {
  const double rz = std::abs(z);
  double tz = std::arg(z);
  if (tz < 0) tz += kTwoPi;
  const double r = std::clamp(rz, c.r0, c.r1);
  double t = tz;
  if (tz < c.t0 || tz > c.t1) {
    auto wrap = [](double d) { return std::abs(std::remainder(d, kTwoPi)); };
    t = wrap(tz - c.t0) < wrap(tz - c.t1) ? c.t0 : c.t1;
  }
  return std::abs(std::polar(r, t) - z);
}

}  // namespace

WeightedParticleMeasure adaptive_polar_measure(const PlanarDensity& density, double radius,
                                               const AdaptiveCubatureOptions& options,
                                               std::span<const Complex> focus_points,
                                               std::span<const double> focus_scales) {
  if (!(radius > 0.0) || options.initial_radial < 1 || options.initial_angular < 1)
    throw Error(ErrorKind::Validation, "measure.adaptive_polar", "degenerate cubature setup");
  if (focus_points.size() != focus_scales.size())
    throw Error(ErrorKind::Validation, "measure.adaptive_polar", "focus lists differ in length");

  std::vector<PolarCell> cells;
  const double dr = radius / options.initial_radial;
  const double dt = kTwoPi / options.initial_angular;
  for (int i = 0; i < options.initial_radial; ++i)
    for (int j = 0; j < options.initial_angular; ++j)
      cells.push_back({i * dr, (i + 1) * dr, j * dt, (j + 1) * dt});

  // Grade the mesh toward focus points until cells near each focus point are
  // no larger than its scale.
  std::vector<PolarCell> graded;
  std::vector<PolarCell> stack(cells.rbegin(), cells.rend());
  while (!stack.empty()) {
    PolarCell c = stack.back();
    stack.pop_back();
    const double ext_r = c.r1 - c.r0;
    const double ext_t = c.r1 * (c.t1 - c.t0);
    const double ext = std::max(ext_r, ext_t);
    bool refine = false;
    for (std::size_t f = 0; f < focus_points.size(); ++f) {
      if (ext > focus_scales[f] && distance_to_cell(c, focus_points[f]) <= ext) {
        refine = true;
        break;
      }
    }
    if (refine && c.depth_r < options.max_depth && c.depth_t < options.max_depth) {
      auto [a, b] = ext_r >= ext_t ? split_r(c) : split_t(c);
      stack.push_back(b);
      stack.push_back(a);
    } else {
      graded.push_back(c);
    }
  }

  double estimate = 0.0;
  for (const auto& c : graded) estimate += cell_estimate(density, c);
  const double tol = options.rel_tol * std::max(std::abs(estimate), 1e-300);

  std::vector<Complex> pts;
  std::vector<double> ws;
  stack.assign(graded.rbegin(), graded.rend());
  while (!stack.empty()) {
    PolarCell c = stack.back();
    stack.pop_back();
    const double whole = cell_estimate(density, c);
    auto [ra, rb] = split_r(c);
    auto [ta, tb] = split_t(c);
    const double err_r = std::abs(cell_estimate(density, ra) + cell_estimate(density, rb) - whole);
    const double err_t = std::abs(cell_estimate(density, ta) + cell_estimate(density, tb) - whole);
    const bool can_r = c.depth_r < options.max_depth;
    const bool can_t = c.depth_t < options.max_depth;
    if ((err_r <= tol || !can_r) && (err_t <= tol || !can_t)) {
      emit_cell(density, c, pts, ws);
      continue;
    }
    if (can_r && (err_r >= err_t || !can_t)) {
      stack.push_back(rb);
      stack.push_back(ra);
    } else {
      stack.push_back(tb);
      stack.push_back(ta);
    }
  }
  return WeightedParticleMeasure(std::move(pts), std::move(ws), radius);
}

WeightedParticleMeasure adaptive_polar_measure(const PlanarDensity& density, double radius,
                                               const AdaptiveCubatureOptions& options) {
  return adaptive_polar_measure(density, radius, options, {}, {});
}

void write_csv(std::ostream& out, const WeightedParticleMeasure& mu) {
  out << "re,im,weight\n";
  out << std::setprecision(17);
  auto pts = mu.points();
  auto ws = mu.weights();
  for (std::size_t i = 0; i < pts.size(); ++i)
    out << pts[i].real() << ',' << pts[i].imag() << ',' << ws[i] << '\n';
}

// ---------------------------------------------------------------------------

ScaleLadder::ScaleLadder(std::vector<double> delta, std::vector<double> epsilon, double eps_bar)
    : delta_(std::move(delta)), epsilon_(std::move(epsilon)), eps_bar_(eps_bar) {
  const char* where = "measure.scale_ladder";
  if (delta_.size() != epsilon_.size() || delta_.size() < 3)
    throw Error(ErrorKind::Validation, where, "ladder needs matching sequences of depth >= 2");
  if (!(eps_bar_ > 0.0)) throw Error(ErrorKind::Validation, where, "eps_bar must be positive");
  if (std::abs(epsilon_[0] - eps_bar_ / 4.0) > 1e-15 * eps_bar_)
    throw Error(ErrorKind::Validation, where, "eps_0 must equal eps_bar/4");
  for (std::size_t k = 0; k < delta_.size(); ++k) {
    if (!(delta_[k] > 0.0) || !(epsilon_[k] > 0.0))
      throw Error(ErrorKind::Validation, where, "scales and tolerances must be positive");
    if (k > 0 && (delta_[k] > delta_[k - 1] / 2.0 || epsilon_[k] > epsilon_[k - 1] / 2.0))
      throw Error(ErrorKind::Validation, where,
                  "halving condition fails at index " + std::to_string(k));
  }
  const int k = working_index();
  if (!(2.0 * epsilon_[k] + 2.0 * epsilon_[2 * k] < eps_bar_))
    throw Error(ErrorKind::Validation, where,
                "condition (1) 2 eps_k + 2 eps_2k < eps_bar fails at working index " +
                    std::to_string(k));
  if (!(3.0 * delta_[2 * k - 1] < delta_[k]))
    throw Error(ErrorKind::Validation, where,
                "condition (2) 3 delta_{2k-1} < delta_k fails at working index " +
                    std::to_string(k));
}

ScaleLadder build_scale_ladder(double delta0, double eps_bar, int depth) {
  if (!(delta0 > 0.0) || !(eps_bar > 0.0) || depth < 2)
    throw Error(ErrorKind::Validation, "measure.build_scale_ladder",
                "need delta0 > 0, eps_bar > 0 and depth >= 2");
  std::vector<double> delta(static_cast<std::size_t>(depth) + 1);
  std::vector<double> eps(delta.size());
  for (int k = 0; k <= depth; ++k) {
    delta[k] = std::ldexp(delta0, -k);
    eps[k] = std::ldexp(eps_bar / 4.0, -k);
  }
  return ScaleLadder(std::move(delta), std::move(eps), eps_bar);
}

// ---------------------------------------------------------------------------

namespace {

using CellKey = std::pair<long long, long long>;

CellKey cell_of(Complex z, double h) {
  return {static_cast<long long>(std::floor(z.real() / h)),
          static_cast<long long>(std::floor(z.imag() / h))};
}

double excess(const WeightedParticleMeasure& mu, const WeightedParticleMeasure& limit,
              Complex x, double r) {
  double e = mass_in(mu, x, r);
  if (limit.size() > 0) e -= mass_in(limit, x, r);
  return e;
}

Complex local_centroid(const WeightedParticleMeasure& mu, Complex x, double r) {
  Complex m{0, 0};
  double w = 0.0;
  auto pts = mu.points();
  auto ws = mu.weights();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i] - x) <= r) {
      m += ws[i] * pts[i];
      w += ws[i];
    }
  }
  return w > 0.0 ? m / w : x;
}

bool lex_less(Complex a, Complex b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

}  // namespace

ConcentrationReport detect_concentrations(std::span<const WeightedParticleMeasure> mus,
                                          const WeightedParticleMeasure& mu_limit,
                                          const ScaleLadder& ladder,
                                          std::span<const Complex> nodal_points) {
  const char* where = "measure.detect_concentrations";
  if (mus.size() < 2)
    throw Error(ErrorKind::Validation, where, "need at least two sequence members");
  const int K = ladder.depth();
  const double h = ladder.delta(K);
  const double threshold = ladder.eps_bar();
  const auto& last = mus.back();
  const auto& prev = mus[mus.size() - 2];

  std::map<CellKey, double> cells;
  {
    auto pts = last.points();
    auto ws = last.weights();
    for (std::size_t i = 0; i < pts.size(); ++i) cells[cell_of(pts[i], h)] += ws[i];
    auto lp = mu_limit.points();
    auto lw = mu_limit.weights();
    for (std::size_t i = 0; i < lp.size(); ++i) cells[cell_of(lp[i], h)] -= lw[i];
  }

  ConcentrationReport report;
  report.threshold = threshold;
  report.separation = 2.0 * h;

  std::vector<Complex> rejected;
  while (true) {
    // Neighborhood sums over 3x3 blocks of cells.
    double best = -1.0;
    CellKey best_key{};
    for (const auto& [key, w] : cells) {
      double s = 0.0;
      for (long long dx = -1; dx <= 1; ++dx)
        for (long long dy = -1; dy <= 1; ++dy) {
          auto it = cells.find({key.first + dx, key.second + dy});
          if (it != cells.end()) s += it->second;
        }
      if (s > best) {
        best = s;
        best_key = key;
      }
    }
    if (best < threshold) break;

    Complex seed{(best_key.first + 0.5) * h, (best_key.second + 0.5) * h};
    Complex x = local_centroid(last, seed, 2.0 * h);
    for (int it = 0; it < 4; ++it) x = local_centroid(last, x, h);

    SiteKind kind = SiteKind::Smooth;
    for (auto p : nodal_points) {
      if (std::abs(p - x) <= h) {
        x = p;
        kind = SiteKind::Nodal;
        break;
      }
    }

    // Clear the neighborhood so the next pass looks elsewhere.
    const long long span = static_cast<long long>(std::ceil(2.0 * h / h)) + 1;
    CellKey center_key = cell_of(x, h);
    for (auto* key : {&center_key, &best_key})
      for (long long dx = -span; dx <= span; ++dx)
        for (long long dy = -span; dy <= span; ++dy) cells.erase({key->first + dx, key->second + dy});

    ConcentrationSite site;
    site.location = x;
    site.kind = kind;
    double min_excess = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= K; ++m) {
      double e = excess(last, mu_limit, x, ladder.delta(m));
      site.scale_excess.push_back(e);
      min_excess = std::min(min_excess, e);
    }
    site.mass = site.scale_excess.back();
    if (min_excess < threshold) {
      rejected.push_back(x);
      continue;
    }
    for (int m = 1; m <= K; ++m)
      site.scale_slack.push_back(ladder.epsilon(m) - std::abs(site.scale_excess[m - 1] - site.mass));

    const double prev_mass = excess(prev, mu_limit, x, h);
    if (!(std::abs(prev_mass - site.mass) < ladder.epsilon(K)))
      throw Error(ErrorKind::Algorithmic, where,
                  "subsequence not extracted: late masses at the finest scale differ by " +
                      std::to_string(std::abs(prev_mass - site.mass)) + " >= eps_K = " +
                      std::to_string(ladder.epsilon(K)));
    report.sites.push_back(std::move(site));
  }

  // Enforce separation: keep the heavier site, then the lexicographically smaller.
  std::sort(report.sites.begin(), report.sites.end(), [](const auto& a, const auto& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return lex_less(a.location, b.location);
  });
  std::vector<ConcentrationSite> kept;
  for (auto& s : report.sites) {
    bool clash = false;
    for (const auto& k : kept)
      if (std::abs(k.location - s.location) < report.separation) clash = true;
    if (!clash) kept.push_back(std::move(s));
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return lex_less(a.location, b.location); });
  report.sites = std::move(kept);
  return report;
}

}  // namespace bubble
