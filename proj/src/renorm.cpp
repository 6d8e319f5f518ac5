#include "bubble/renorm.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace bubble {

Complex cross_ratio(Complex q, double t, Complex x) {
  if (!(t > 0.0 && t < 1.0))
    throw Error(ErrorKind::Domain, "renorm.cross_ratio", "t must lie in (0,1)");
  return (1.0 / t - 1.0) * (x - q);
}

Mobius cross_ratio_map(Complex q, double t) {
  if (!(t > 0.0 && t < 1.0))
    throw Error(ErrorKind::Domain, "renorm.cross_ratio", "t must lie in (0,1)");
  const double a = 1.0 / t - 1.0;
  return Mobius::affine(a, -a * q);
}

// ---------------------------------------------------------------------------

namespace {

NeckScaleResult bisect_scale(const RadialMassProfile& profile, double eps_bar, double tol) {
  const char* where = "renorm.solve_neck_scale";
  const double spread = profile.spread_mass();
  if (!(spread > eps_bar))
    throw Error(ErrorKind::Domain, where,
                "energy below quantum: mass away from q is " + std::to_string(spread) +
                    " <= eps_bar " + std::to_string(eps_bar));
  NeckScaleResult res;
  double best_t = 0.5, best_v = 0.0, best_r = std::numeric_limits<double>::infinity();
  // Residuals within tol read as exact zeros so the solver stops there.
  auto g = [&](double t) {
    const double v = profile.outside(t / (1.0 - t));
    res.history.emplace_back(t, v);
    const double r = std::abs(v - eps_bar);
    if (r < best_r) {
      best_r = r;
      best_t = t;
      best_v = v;
    }
    return r <= tol ? 0.0 : v - eps_bar;
  };
  // Bracket geometrically about the raw-count crossing, then refine.
  auto t_of = [](double s) { return s / (1.0 + s); };
  double a = 0.0, b = 1.0, ga = spread - eps_bar, gb = -eps_bar;
  const double s0 = profile.step_crossing(eps_bar);
  if (s0 > 0.0) {
    double w = profile.mode() == ProfileMode::Mollified ? 2.0 * profile.bandwidth() : 1e-3;
    for (; w < 50.0; w *= 4.0) {
      const double ta = t_of(s0 * std::exp(-w)), tb = t_of(s0 * std::exp(w));
      if (!(ta > 0.0 && tb < 1.0 && ta < tb)) break;
      const double va = g(ta);
      if (va == 0.0) {
        a = b = ta;
        break;
      }
      if (va < 0.0) {
        b = ta;
        gb = va;
        continue;
      }
      a = ta;
      ga = va;
      const double vb = g(tb);
      if (vb == 0.0) {
        a = b = tb;
        break;
      }
      if (vb > 0.0) {
        a = tb;
        ga = vb;
        continue;
      }
      b = tb;
      gb = vb;
      break;
    }
  }
  std::pair<double, double> bracket{a, b};
  if (profile.mode() == ProfileMode::Mollified && s0 > 0.0) {
    // Safeguarded Newton in s: the mollified profile is smooth with a known slope.
    double sa = 0.0, sb = std::numeric_limits<double>::infinity();
    double s = s0;
    bracket = {0.0, 1.0};
    for (int it = 0; it < 200; ++it) {
      const auto [v, dv] = profile.outside_and_slope(s);
      const double t = t_of(s);
      res.history.emplace_back(t, v);
      const double r = std::abs(v - eps_bar);
      if (r < best_r) {
        best_r = r;
        best_t = t;
        best_v = v;
      }
      if (r <= tol) break;
      if (v > eps_bar) {
        sa = s;
        bracket.first = t;
      } else {
        sb = s;
        bracket.second = t;
      }
      if (bracket.second - bracket.first <= 1e-14) break;
      double next = dv < 0.0 ? s - (v - eps_bar) / dv : -1.0;
      if (!(next > sa && next < sb)) {
        if (std::isinf(sb))
          next = 2.0 * s;
        else if (sa == 0.0)
          next = 0.5 * s;
        else
          next = 0.5 * (sa + sb);
      }
      s = next;
    }
  } else if (a < b) {
    std::uintmax_t max_iter = 200;
    auto narrow = [](double x, double y) { return y - x <= 1e-14; };
    bracket = boost::math::tools::toms748_solve(g, a, b, ga, gb, narrow, max_iter);
  }
  double f_lo = spread, f_hi = 0.0;
  for (const auto& [t, v] : res.history) {
    if (t == bracket.first) f_lo = v;
    if (t == bracket.second) f_hi = v;
  }
  // A collapsed bracket across which f is continuous to 1e-6 of the spread
  // is a crossing resolved to machine precision in t, not a jump.
  const bool collapsed = bracket.second - bracket.first <= 1e-14 && bracket.first > 0.0 &&
                         bracket.second < 1.0 && f_lo - f_hi <= 1e-6 * spread;
  if (!(best_r <= tol) && !collapsed)
    throw Error(ErrorKind::Algorithmic, where,
                "mass function not spanning eps_bar: closest value " + std::to_string(best_v) +
                    " at t = " + std::to_string(best_t));

  auto sorted = res.history;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].second > sorted[i - 1].second + 1e-12 * spread)
      throw Error(ErrorKind::Algorithmic, where, "outside-mass objective is not nonincreasing");

  res.t = best_t;
  res.scale = best_t / (1.0 - best_t);
  res.outside_mass = best_v;
  res.residual = best_r;
  return res;
}

}  // namespace

NeckScaleResult solve_neck_scale(const WeightedParticleMeasure& mu, Complex q, double eps_bar,
                                 const NeckScaleOptions& options) {
  if (!(eps_bar > 0.0))
    throw Error(ErrorKind::Validation, "renorm.solve_neck_scale", "eps_bar must be positive");
  if (!(mu.total_mass() > eps_bar))
    throw Error(ErrorKind::Domain, "renorm.solve_neck_scale",
                "energy below quantum: total mass " + std::to_string(mu.total_mass()) +
                    " <= eps_bar " + std::to_string(eps_bar));
  RadialMassProfile profile(mu, q, options.mode, options.bandwidth);
  const double tol = options.tol > 0.0 ? options.tol : 1e-9 * profile.spread_mass();
  return bisect_scale(profile, eps_bar, tol);
}

namespace {

struct CenterEval {
  Complex F;
  double t;
};

CenterEval evaluate_center(const WeightedParticleMeasure& mu, Complex q, double eps_bar,
                           double bandwidth) {
  RadialMassProfile profile(mu, q, ProfileMode::Mollified, bandwidth);
  const auto ns = bisect_scale(profile, eps_bar, 1e-13 * profile.spread_mass());
  const double s = ns.scale;
  auto pts = mu.points();
  auto ws = mu.weights();
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Complex z = pts[i] - q;
    const double d = std::abs(z);
    // Saturated inclusion outside the mollifier window.
    const double x = (s - d) / (bandwidth * s);
    const double w = x > 8.5 ? 1.0 : (x < -8.5 ? 0.0 : profile.inclusion(d, s));
    if (w > 0.0) sum += ws[i] * w * z;
  }
  return {sum / s, ns.t};
}

}  // namespace

Complex center_functional(const WeightedParticleMeasure& mu, Complex q, double eps_bar,
                          double bandwidth) {
  if (!(mu.total_mass() > eps_bar))
    throw Error(ErrorKind::Domain, "renorm.center_functional",
                "energy below quantum: total mass " + std::to_string(mu.total_mass()));
  return evaluate_center(mu, q, eps_bar, bandwidth).F;
}

// ---------------------------------------------------------------------------

namespace {

class CenterSolver {
 public:
  CenterSolver(const WeightedParticleMeasure& mu, double eps_bar, double bandwidth)
      : mu_(mu), eps_bar_(eps_bar), bandwidth_(bandwidth) {}

  Complex F(Complex q) {
    auto key = std::make_pair(q.real(), q.imag());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Complex v = evaluate_center(mu_, q, eps_bar_, bandwidth_).F;
    cache_.emplace(key, v);
    return v;
  }

  // Accumulated argument change of F along the segment a -> b, refining
  // until each step turns by less than pi/4.
  double arg_change(Complex a, Complex b, Complex Fa, Complex Fb, int depth, bool& hit_zero,
                    double zero_tol, Complex& zero_at) {
    if (std::abs(Fb) <= zero_tol) {
      hit_zero = true;
      zero_at = b;
    }
    const double d = std::arg(Fb / Fa);
    if (std::abs(d) <= kPi / 4 || depth >= 12) return d;
    const Complex m = 0.5 * (a + b);
    const Complex Fm = F(m);
    if (std::abs(Fm) <= zero_tol) {
      hit_zero = true;
      zero_at = m;
      return d;
    }
    return arg_change(a, m, Fa, Fm, depth + 1, hit_zero, zero_tol, zero_at) +
           arg_change(m, b, Fm, Fb, depth + 1, hit_zero, zero_tol, zero_at);
  }

  // Winding number of F along the boundary of an axis-aligned square.
  int square_winding(Complex center, double half, int per_side, bool& hit_zero, double zero_tol,
                     Complex& zero_at) {
    std::array<Complex, 4> corners = {center + Complex(-half, -half), center + Complex(half, -half),
                                      center + Complex(half, half), center + Complex(-half, half)};
    std::vector<Complex> path;
    for (int c = 0; c < 4; ++c)
      for (int s = 0; s < per_side; ++s)
        path.push_back(corners[c] + (corners[(c + 1) % 4] - corners[c]) * (double(s) / per_side));
    double total = 0.0;
    Complex prev = path.front();
    Complex Fprev = F(prev);
    if (std::abs(Fprev) <= zero_tol) {
      hit_zero = true;
      zero_at = prev;
    }
    for (std::size_t i = 1; i <= path.size(); ++i) {
      const Complex cur = path[i % path.size()];
      const Complex Fcur = F(cur);
      total += arg_change(prev, cur, Fprev, Fcur, 0, hit_zero, zero_tol, zero_at);
      prev = cur;
      Fprev = Fcur;
    }
    return static_cast<int>(std::lround(total / kTwoPi));
  }

  // Damped Newton with a forward-difference Jacobian.
  bool newton(Complex& q, double h, double tol, int max_steps, double max_radius) {
    Complex Fq = F(q);
    for (int step = 0; step < max_steps; ++step) {
      if (std::abs(Fq) <= tol) return true;
      const Complex Fx = F(q + Complex(h, 0));
      const Complex Fy = F(q + Complex(0, h));
      const double a = (Fx - Fq).real() / h, b = (Fy - Fq).real() / h;
      const double c = (Fx - Fq).imag() / h, d = (Fy - Fq).imag() / h;
      const double det = a * d - b * c;
      if (det == 0.0 || !std::isfinite(det)) return false;
      const double dx = -(d * Fq.real() - b * Fq.imag()) / det;
      const double dy = -(-c * Fq.real() + a * Fq.imag()) / det;
      Complex delta(dx, dy);
      double lambda = 1.0;
      bool improved = false;
      for (int back = 0; back < 40; ++back) {
        Complex trial = q + lambda * delta;
        if (std::abs(trial) <= max_radius) {
          Complex Ft = F(trial);
          if (std::abs(Ft) < std::abs(Fq)) {
            q = trial;
            Fq = Ft;
            improved = true;
            break;
          }
        }
        lambda *= 0.5;
      }
      if (!improved) return std::abs(Fq) <= tol;
      h = std::max(std::min(h, 0.5 * std::abs(lambda * delta)), 1e-14 * max_radius);
    }
    return std::abs(Fq) <= tol;
  }

 private:
  const WeightedParticleMeasure& mu_;
  double eps_bar_;
  double bandwidth_;
  std::map<std::pair<double, double>, Complex> cache_;
};

}  // namespace

BalancedCenter find_balanced_center(const WeightedParticleMeasure& mu, const ScaleLadder& ladder,
                                    int k, const BalancedCenterOptions& options) {
  const char* where = "renorm.find_balanced_center";
  if (k < 1 || 2 * k > ladder.depth())
    throw Error(ErrorKind::Validation, where, "index k must satisfy 1 <= k and 2k <= depth");
  const double eps_bar = ladder.eps_bar();
  const double ek = ladder.epsilon(k), e2k = ladder.epsilon(2 * k);
  const auto restricted = mu.restricted_to(Disk{{0, 0}, ladder.delta(k)});
  const double E = restricted.total_mass();
  const std::string not_concentrated = "degree argument fails: measure not concentrated";
  if (!(E > eps_bar))
    throw Error(ErrorKind::Domain, where,
                not_concentrated + " (mass in B_k is " + std::to_string(E) + " <= eps_bar)");
  const double annulus = E - mass_in(restricted, {0, 0}, ladder.delta(2 * k));
  if (!(annulus < 2 * ek + 2 * e2k))
    throw Error(ErrorKind::Domain, where,
                not_concentrated + " (annulus mass " + std::to_string(annulus) +
                    " >= 2 eps_k + 2 eps_2k)");
  if (!((E - eps_bar - 2 * ek - 2 * e2k) / 2 > 8 * (ek + e2k)))
    throw Error(ErrorKind::Domain, where,
                not_concentrated + " (mass in B_k too small for the boundary estimate)");

  BalancedCenter out;
  out.mass = E;
  const double zero_tol = options.tol * E;
  const double rho = ladder.delta(2 * k - 1);
  CenterSolver solver(restricted, eps_bar, options.bandwidth);

  // Boundary winding on the circle.
  const int N = std::max(options.boundary_samples, 8);
  std::vector<Complex> values(N);
  out.min_boundary_margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < N; ++j) {
    const Complex q = std::polar(rho, kTwoPi * j / N);
    values[j] = solver.F(q);
    out.min_boundary_margin = std::min(out.min_boundary_margin, (values[j] / -q).real());
  }
  double total = 0.0;
  for (int j = 0; j < N; ++j) total += std::arg(values[(j + 1) % N] / values[j]);
  out.winding = static_cast<int>(std::lround(total / kTwoPi));
  out.boundary_condition_holds = out.min_boundary_margin > 0.0;
  if (out.winding == 0)
    throw Error(ErrorKind::Domain, where,
                not_concentrated + " (F has winding number zero on the boundary circle)");

  const double max_radius = ladder.delta(k);
  auto polish = [&](Complex start) {
    Complex q = start;
    if (!solver.newton(q, 1e-6 * rho, zero_tol, options.max_newton_steps, max_radius)) return;
    for (auto z : out.zeros)
      if (std::abs(z - q) <= 1e-6 * rho) return;
    out.zeros.push_back(q);
  };

  // Newton from the centroid and the origin first; a single zero with
  // winding +-1 accounts for the whole degree.
  Complex centroid = first_moment(restricted, Disk{{0, 0}, ladder.delta(k)}) / E;
  if (std::abs(centroid) > 0.5 * rho) centroid *= 0.5 * rho / std::abs(centroid);
  polish(centroid);
  if (out.zeros.empty()) polish({0, 0});

  if (out.zeros.empty() || std::abs(out.winding) != 1) {
    // Quadrant subdivision by winding, then Newton from each surviving square.
    struct Square {
      Complex center;
      double half;
    };
    std::vector<Square> live = {{{0, 0}, rho}};
    std::vector<Complex> candidates;
    for (int level = 0; level < options.subdivision_levels && !live.empty(); ++level) {
      std::vector<Square> next;
      for (const auto& sq : live) {
        const double h = 0.5 * sq.half;
        for (Complex off : {Complex(-h, -h), Complex(h, -h), Complex(-h, h), Complex(h, h)}) {
          bool hit = false;
          Complex at;
          const int w = solver.square_winding(sq.center + off, h, 8, hit, zero_tol, at);
          if (hit) candidates.push_back(at);
          if (w != 0) next.push_back({sq.center + off, h});
        }
      }
      if (next.empty()) break;  // zero sits on a square edge; keep the parents
      if (next.size() > 8) next.resize(8);
      live = std::move(next);
    }
    for (const auto& sq : live) candidates.push_back(sq.center);
    for (Complex start : candidates) polish(start);
  }
  std::sort(out.zeros.begin(), out.zeros.end(), [](Complex a, Complex b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b)
                                      : (a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag());
  });
  if (out.zeros.empty())
    throw Error(ErrorKind::Algorithmic, where, "zero not localized: Newton did not reach tolerance");
  out.multiple_zeros = out.zeros.size() > 1;
  out.q = out.zeros.front();
  if (!(std::abs(out.q) <= rho * (1 + 1e-12)))
    throw Error(ErrorKind::Algorithmic, where,
                "zero not localized: zero lies outside B_{2k-1}");
  const auto ev = evaluate_center(restricted, out.q, eps_bar, options.bandwidth);
  out.F = ev.F;
  out.t = ev.t;
  out.r = out.q + ev.t / (1.0 - ev.t);
  if (!(std::abs(out.r) < ladder.delta(k)))
    throw Error(ErrorKind::Algorithmic, where, "zero not localized: r lies outside B_k");
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Marking> mark_smooth_bubble(std::span<const WeightedParticleMeasure> mus,
                                        const ScaleLadder& ladder, double eps_bar,
                                        const BalancedCenterOptions& options) {
  const char* where = "renorm.mark_smooth_bubble";
  if (mus.empty()) throw Error(ErrorKind::Validation, where, "empty sequence");
  if (std::abs(eps_bar - ladder.eps_bar()) > 1e-15 * eps_bar)
    throw Error(ErrorKind::Validation, where, "eps_bar differs from the ladder's");
  const int n = static_cast<int>(mus.size());
  const int k = ladder.working_index();
  std::vector<Marking> out;
  for (int idx = n - (n + 1) / 2; idx < n; ++idx) {
    try {
      const auto bc = find_balanced_center(mus[idx], ladder, k, options);
      const auto restricted = mus[idx].restricted_to(Disk{{0, 0}, ladder.delta(k)});
      const auto ns = solve_neck_scale(restricted, bc.q, eps_bar);
      Marking m;
      m.k_index = idx;
      m.q = bc.q;
      m.t = ns.t;
      m.r = bc.q + ns.scale;
      if (!(std::abs(m.r) < ladder.delta(k)))
        throw Error(ErrorKind::Algorithmic, where, "zero not localized: r lies outside B_k");
      m.renormalized = pushforward(restricted, cross_ratio_map(bc.q, ns.t));
      m.outside_mass = ns.outside_mass;
      m.center_moment = first_moment(m.renormalized, Disk{{0, 0}, 1.0});
      m.balanced_moment = bc.F;
      m.total_mass = restricted.total_mass();
      m.multiple_zeros = bc.multiple_zeros;
      out.push_back(std::move(m));
    } catch (const Error& e) {
      if (e.k_index()) throw;
      throw e.at_index(idx);
    }
  }
  return out;
}

WeightedParticleMeasure build_nodal_pushforward(const CylinderField& neck, double delta) {
  const char* where = "renorm.build_nodal_pushforward";
  if (!neck.nodal_meta())
    throw Error(ErrorKind::Validation, where, "neck carries no nodal chart metadata");
  if (!(delta > 0.0)) throw Error(ErrorKind::Validation, where, "delta must be positive");
  const Complex tk = neck.nodal_meta()->t_k;
  if (!(std::abs(tk) < delta * delta))
    throw Error(ErrorKind::Domain, where, "neck not thin: |t_k| >= delta^2");
  const Complex root = std::sqrt(tk);
  const double ht = neck.dt();
  const double hth = neck.dtheta();
  std::vector<Complex> pts;
  std::vector<double> ws;
  pts.reserve(static_cast<std::size_t>(neck.nt()) * neck.ntheta());
  ws.reserve(pts.capacity());
  for (int i = 0; i < neck.nt(); ++i) {
    const double t = neck.t_at(i);
    const double end = (i == 0 || i == neck.nt() - 1) ? 0.5 : 1.0;
    for (int j = 0; j < neck.ntheta(); ++j) {
      const double th = j * hth;
      double e = 0.0;
      for (double v : neck.d_t(i, j)) e += v * v;
      for (double v : neck.d_theta(i, j)) e += v * v;
      pts.push_back(root * std::exp(Complex(t, th)));
      ws.push_back(0.5 * e * ht * hth * end);
    }
  }
  return WeightedParticleMeasure(std::move(pts), std::move(ws), delta);
}

std::vector<Marking> mark_nodal_bubble(std::span<const CylinderField> necks,
                                       const ScaleLadder& ladder, double eps_bar) {
  const char* where = "renorm.mark_nodal_bubble";
  if (necks.empty()) throw Error(ErrorKind::Validation, where, "empty sequence");
  const int n = static_cast<int>(necks.size());
  const int k = ladder.working_index();
  std::vector<Marking> out;
  for (int idx = n - (n + 1) / 2; idx < n; ++idx) {
    try {
      if (!necks[idx].nodal_meta())
        throw Error(ErrorKind::Validation, where, "neck carries no nodal chart metadata");
      const auto& meta = *necks[idx].nodal_meta();
      const auto mu = build_nodal_pushforward(necks[idx], meta.delta);
      const auto ns = solve_neck_scale(mu, {0, 0}, eps_bar);
      Marking m;
      m.k_index = idx;
      m.q = {0, 0};
      m.t = ns.t;
      m.r = {ns.scale, 0.0};
      if (!(ns.scale < ladder.delta(k)))
        throw Error(ErrorKind::Algorithmic, where, "renormalization scale lies outside B_k");
      m.renormalized = pushforward(mu, Mobius::affine(1.0 / ns.scale, 0.0));
      m.outside_mass = ns.outside_mass;
      m.center_moment = first_moment(m.renormalized, Disk{{0, 0}, 1.0});
      m.total_mass = mu.total_mass();
      m.scale_ratio = std::abs(meta.t_k) / ns.scale;
      out.push_back(std::move(m));
    } catch (const Error& e) {
      if (e.k_index()) throw;
      throw e.at_index(idx);
    }
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i].scale_ratio < out[i - 1].scale_ratio)) decreasing = false;
  if (out.size() >= 2 && (!decreasing || !(out.back().scale_ratio <= 0.5 * out.front().scale_ratio)))
    throw Error(ErrorKind::Algorithmic, where,
                "hypothesis violated: mass hiding in inner disk (|t_k / r_k| does not tend to 0)");
  return out;
}

}  // namespace bubble
