#include "bubble/neck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace bubble {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s);
}

double trapezoid(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

}  // namespace

double TargetDescriptor::defect(std::span<const double> p) const {
  if (kind == TargetKind::Sphere) return std::abs(std::sqrt(norm2(p)) - 1.0);
  const double a = std::hypot(p[0], p[1]) - radius1;
  const double b = std::hypot(p[2], p[3]) - radius2;
  return std::hypot(a, b);
}

CylinderField::CylinderField(double t_min, double t_max, int nt, int ntheta,
                             TargetDescriptor target, std::vector<double> values,
                             std::vector<double> d_t, std::vector<double> d_theta,
                             bool analytic_derivatives, std::optional<NodalMeta> meta)
    : t_min_(t_min),
      t_max_(t_max),
      nt_(nt),
      ntheta_(ntheta),
      target_(target),
      values_(std::move(values)),
      d_t_(std::move(d_t)),
      d_theta_(std::move(d_theta)),
      analytic_(analytic_derivatives),
      meta_(meta) {
  const char* where = "neck.field";
  if (nt_ < 2 || ntheta_ < 3 || !(t_max_ > t_min_))
    throw Error(ErrorKind::Validation, where, "degenerate grid");
  if (target_.kind == TargetKind::FlatTorus && !(target_.radius1 > 0 && target_.radius2 > 0))
    throw Error(ErrorKind::Validation, where, "torus radii must be positive");
  const std::size_t n = static_cast<std::size_t>(nt_) * ntheta_ * dim();
  if (values_.size() != n || d_t_.size() != n || d_theta_.size() != n)
    throw Error(ErrorKind::Validation, where, "sample arrays do not match the grid");
  for (int i = 0; i < nt_; ++i)
    for (int j = 0; j < ntheta_; ++j)
      if (!(target_.defect(value(i, j)) <= 1e-10))
        throw Error(ErrorKind::Validation, where, "sample off the target manifold");
  if (meta_ && (!(std::abs(meta_->t_k) > 0.0) || !(meta_->delta > 0.0)))
    throw Error(ErrorKind::Validation, where, "nodal metadata needs t_k != 0 and delta > 0");
}

CylinderField CylinderField::sample(double T, int nt, int ntheta, TargetDescriptor target,
                                    const PointFn& fn, const PointFn& d_t,
                                    const PointFn& d_theta, std::optional<NodalMeta> meta) {
  if (!(T > 0.0) || nt < 3 || ntheta < 3)
    throw Error(ErrorKind::Validation, "neck.sample", "degenerate grid");
  const int dim = target.dimension();
  const std::size_t n = static_cast<std::size_t>(nt) * ntheta * dim;
  std::vector<double> v(n), ft(n), fth(n);
  const double h = 2.0 * T / (nt - 1);
  const double hth = kTwoPi / ntheta;
  auto slot = [&](std::vector<double>& a, int i, int j) {
    return std::span<double>(a.data() + (static_cast<std::size_t>(i) * ntheta + j) * dim,
                             static_cast<std::size_t>(dim));
  };
  for (int i = 0; i < nt; ++i) {
    const double t = -T + i * h;
    for (int j = 0; j < ntheta; ++j) {
      const double th = j * hth;
      fn(t, th, slot(v, i, j));
      if (d_t) d_t(t, th, slot(ft, i, j));
      if (d_theta) d_theta(t, th, slot(fth, i, j));
    }
  }
  const bool analytic = static_cast<bool>(d_t) && static_cast<bool>(d_theta);
  if (!d_t) {
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < ntheta; ++j) {
        auto out = slot(ft, i, j);
        for (int c = 0; c < dim; ++c) {
          auto f = [&](int ii) { return slot(v, ii, j)[c]; };
          if (i == 0)
            out[c] = (-3 * f(0) + 4 * f(1) - f(2)) / (2 * h);
          else if (i == nt - 1)
            out[c] = (3 * f(nt - 1) - 4 * f(nt - 2) + f(nt - 3)) / (2 * h);
          else
            out[c] = (f(i + 1) - f(i - 1)) / (2 * h);
        }
      }
  }
  if (!d_theta) {
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < ntheta; ++j) {
        auto out = slot(fth, i, j);
        auto next = slot(v, i, (j + 1) % ntheta);
        auto prev = slot(v, i, (j + ntheta - 1) % ntheta);
        for (int c = 0; c < dim; ++c) out[c] = (next[c] - prev[c]) / (2 * hth);
      }
  }
  return CylinderField(-T, T, nt, ntheta, target, std::move(v), std::move(ft), std::move(fth),
                       analytic, meta);
}

CylinderField CylinderField::restrict(double lo, double hi) const {
  const double h = dt();
  const int i_lo = std::max(0, static_cast<int>(std::ceil((lo - t_min_) / h - 1e-9)));
  const int i_hi = std::min(nt_ - 1, static_cast<int>(std::floor((hi - t_min_) / h + 1e-9)));
  if (i_hi - i_lo < 1)
    throw Error(ErrorKind::Validation, "neck.restrict", "sub-cylinder has fewer than two slices");
  const std::size_t row = static_cast<std::size_t>(ntheta_) * dim();
  auto slice = [&](const std::vector<double>& a) {
    return std::vector<double>(a.begin() + i_lo * row, a.begin() + (i_hi + 1) * row);
  };
  const double a = t_at(i_lo);
  const double b = t_at(i_hi);
  std::optional<NodalMeta> meta;
  if (meta_ && std::abs(a + b) <= 1e-9 * h)
    meta = NodalMeta{meta_->t_k, std::sqrt(std::abs(meta_->t_k)) * std::exp(b)};
  return CylinderField(a, b, i_hi - i_lo + 1, ntheta_, target_, slice(values_), slice(d_t_),
                       slice(d_theta_), analytic_, meta);
}

double CylinderField::derivative_consistency() const {
  const double h = dt();
  const double hth = dtheta();
  double worst = 0.0;
  double scale = 0.0;
  for (int i = 0; i < nt_; ++i)
    for (int j = 0; j < ntheta_; ++j) {
      scale = std::max({scale, std::sqrt(norm2(d_t(i, j))), std::sqrt(norm2(d_theta(i, j)))});
      auto next = value(i, (j + 1) % ntheta_);
      auto prev = value(i, (j + ntheta_ - 1) % ntheta_);
      for (int c = 0; c < dim(); ++c)
        worst = std::max(worst, std::abs((next[c] - prev[c]) / (2 * hth) - d_theta(i, j)[c]));
      if (i > 0 && i + 1 < nt_)
        for (int c = 0; c < dim(); ++c)
          worst = std::max(worst, std::abs((value(i + 1, j)[c] - value(i - 1, j)[c]) / (2 * h) -
                                           d_t(i, j)[c]));
    }
  return scale > 0.0 ? worst / scale : worst;
}

// ---------------------------------------------------------------------------

namespace {

double max_pairwise_distance(const CylinderField& f) {
  const int d = f.dim();
  std::vector<std::span<const double>> pts;
  pts.reserve(static_cast<std::size_t>(f.nt()) * f.ntheta());
  for (int i = 0; i < f.nt(); ++i)
    for (int j = 0; j < f.ntheta(); ++j) pts.push_back(f.value(i, j));
  std::vector<double> centroid(d, 0.0);
  for (auto p : pts)
    for (int c = 0; c < d; ++c) centroid[c] += p[c];
  for (auto& c : centroid) c /= static_cast<double>(pts.size());
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(pts.size());
  for (std::size_t n = 0; n < pts.size(); ++n) order.emplace_back(dist(pts[n], centroid), n);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  double best = 0.0;
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (2.0 * order[a].first <= best) break;
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (order[a].first + order[b].first <= best) break;
      best = std::max(best, dist(pts[order[a].second], pts[order[b].second]));
    }
  }
  return best;
}

}  // namespace

NeckDiagnostics diagnostics(const CylinderField& field) {
  NeckDiagnostics out;
  const int nt = field.nt();
  const int nth = field.ntheta();
  const double h = field.dt();
  const double hth = field.dtheta();
  out.half_length = field.half_length();
  std::vector<double> a_t(nt), speed(nt);
  out.t.resize(nt);
  out.theta.resize(nt);
  out.alpha_slice.resize(nt);
  double max_ratio = 0.0;
  for (int i = 0; i < nt; ++i) {
    double st = 0.0, sth = 0.0, sp = 0.0, arc = 0.0;
    for (int j = 0; j < nth; ++j) {
      const double ft2 = norm2(field.d_t(i, j));
      st += ft2;
      sth += norm2(field.d_theta(i, j));
      sp += std::sqrt(ft2);
      arc += dist(field.value(i, j), field.value(i, (j + 1) % nth));
    }
    out.t[i] = field.t_at(i);
    a_t[i] = st * hth;
    out.theta[i] = sth * hth;
    out.alpha_slice[i] = 0.5 * (a_t[i] - out.theta[i]);
    speed[i] = sp * hth;
    out.max_arc_length = std::max(out.max_arc_length, arc);
    const double sum = a_t[i] + out.theta[i];
    if (sum > 0.0) max_ratio = std::max(max_ratio, std::abs(a_t[i] - out.theta[i]) / sum);
  }
  const double length = field.t_max() - field.t_min();
  out.alpha = trapezoid(out.alpha_slice, h) / length;
  for (double a : out.alpha_slice) out.alpha_deviation = std::max(out.alpha_deviation, std::abs(a - out.alpha));
  std::vector<double> density(nt);
  for (int i = 0; i < nt; ++i) density[i] = 0.5 * (a_t[i] + out.theta[i]);
  out.energy = trapezoid(density, h);
  out.avg_length = trapezoid(speed, h) / kTwoPi;
  out.pohozaev_residual = max_ratio;
  out.diameter = max_pairwise_distance(field);

  const double split = length * out.alpha + trapezoid(out.theta, h);
  if (!(std::abs(split - out.energy) <= 1e-9 * out.energy + 1e-300))
    throw Error(ErrorKind::Algorithmic, "neck.diagnostics",
                "energy split identity E = 2T alpha + int Theta failed");
  if (!(out.diameter <= (2.0 * out.max_arc_length + out.avg_length) * (1.0 + 1e-6) + 1e-12))
    throw Error(ErrorKind::Algorithmic, "neck.diagnostics",
                "diameter exceeds 2 max arc + average length");
  return out;
}

void write_theta_csv(std::ostream& out, const NeckDiagnostics& d) {
  out << "t,theta,alpha_slice\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.t.size(); ++i)
    out << d.t[i] << ',' << d.theta[i] << ',' << d.alpha_slice[i] << '\n';
}

// ---------------------------------------------------------------------------

double pohozaev_residual(const PolarMapSamples& s, std::span<const double> radii) {
  const char* where = "neck.pohozaev_residual";
  const std::size_t nr = s.radii.size();
  if (nr < 2 || s.nphi < 3 || s.dim < 1)
    throw Error(ErrorKind::Validation, where, "degenerate polar grid");
  const std::size_t n = nr * s.nphi * s.dim;
  if (s.values.size() != n)
    throw Error(ErrorKind::Validation, where, "value array does not match the grid");
  for (std::size_t i = 1; i < nr; ++i)
    if (!(s.radii[i] > s.radii[i - 1]))
      throw Error(ErrorKind::Validation, where, "radii must increase");
  const bool have_r = s.d_r.size() == n;
  const bool have_phi = s.d_phi.size() == n;
  const double hphi = kTwoPi / s.nphi;
  auto idx = [&](std::size_t i, int j, int c) {
    return (i * s.nphi + static_cast<std::size_t>(j)) * s.dim + c;
  };

  std::vector<double> A(nr), B(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    double sa = 0.0, sb = 0.0;
    for (int j = 0; j < s.nphi; ++j) {
      for (int c = 0; c < s.dim; ++c) {
        double fphi, fr;
        if (have_phi) {
          fphi = s.d_phi[idx(i, j, c)];
        } else {
          fphi = (s.values[idx(i, (j + 1) % s.nphi, c)] -
                  s.values[idx(i, (j + s.nphi - 1) % s.nphi, c)]) / (2 * hphi);
        }
        if (have_r) {
          fr = s.d_r[idx(i, j, c)];
        } else {
          // Three-point formula on the nonuniform radial grid.
          std::size_t a = i == 0 ? 0 : (i == nr - 1 ? nr - 3 : i - 1);
          if (nr < 3) a = 0;
          if (nr < 3) {
            fr = (s.values[idx(1, j, c)] - s.values[idx(0, j, c)]) / (s.radii[1] - s.radii[0]);
          } else {
            const double x = s.radii[i];
            const double x0 = s.radii[a], x1 = s.radii[a + 1], x2 = s.radii[a + 2];
            const double y0 = s.values[idx(a, j, c)], y1 = s.values[idx(a + 1, j, c)],
                         y2 = s.values[idx(a + 2, j, c)];
            fr = y0 * (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
                 y1 * (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
                 y2 * (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
          }
        }
        sa += fphi * fphi;
        sb += fr * fr;
      }
    }
    A[i] = sa * hphi;
    B[i] = s.radii[i] * s.radii[i] * sb * hphi;
  }

  double worst = 0.0;
  const double lo = s.radii.front();
  const double hi = s.radii.back();
  for (double r : radii) {
    if (r < lo * (1 - 1e-12) || r > hi * (1 + 1e-12))
      throw Error(ErrorKind::Domain, where, "radius outside the sampled annulus");
    auto it = std::upper_bound(s.radii.begin(), s.radii.end(), r);
    std::size_t k = it == s.radii.begin() ? 0 : static_cast<std::size_t>(it - s.radii.begin()) - 1;
    if (k >= nr - 1) k = nr - 2;
    const double w = std::clamp((r - s.radii[k]) / (s.radii[k + 1] - s.radii[k]), 0.0, 1.0);
    const double a = (1 - w) * A[k] + w * A[k + 1];
    const double b = (1 - w) * B[k] + w * B[k + 1];
    const double sum = a + b;
    if (sum > 0.0) worst = std::max(worst, std::abs(a - b) / sum);
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

// Integral over [lo, hi] of the piecewise-linear interpolant of f on the grid.
double linear_integral(const std::vector<double>& t, const std::vector<double>& f, double lo,
                       double hi) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double a = std::max(lo, t[i]);
    const double b = std::min(hi, t[i + 1]);
    if (b <= a) continue;
    const double h = t[i + 1] - t[i];
    auto at = [&](double x) { return f[i] + (f[i + 1] - f[i]) * (x - t[i]) / h; };
    s += 0.5 * (at(a) + at(b)) * (b - a);
  }
  return s;
}

double linear_at(const std::vector<double>& t, const std::vector<double>& f, double x) {
  auto it = std::upper_bound(t.begin(), t.end(), x);
  std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  if (k >= t.size() - 1) k = t.size() - 2;
  const double w = (x - t[k]) / (t[k + 1] - t[k]);
  return (1 - w) * f[k] + w * f[k + 1];
}

}  // namespace

ThetaBoundsReport theta_bounds_check(const CylinderField& field, double T1, double T2,
                                     double energy_threshold) {
  const double h = field.dt();
  if (!(T1 < T2) || T1 < field.t_min() - 1e-9 * h || T2 > field.t_max() + 1e-9 * h)
    throw Error(ErrorKind::Validation, "neck.theta_bounds_check",
                "need t_min <= T1 < T2 <= t_max");
  const NeckDiagnostics d = diagnostics(field);
  ThetaBoundsReport r;
  r.T1 = T1;
  r.T2 = T2;
  r.energy = d.energy;
  r.threshold = energy_threshold;
  r.precondition_exceeded = d.energy > energy_threshold;

  const double th1 = linear_at(d.t, d.theta, T1);
  const double th2 = linear_at(d.t, d.theta, T2);
  std::vector<double> root(d.theta.size());
  for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(std::max(d.theta[i], 0.0));
  r.integral_slack = 2.0 * (th1 + th2) - linear_integral(d.t, d.theta, T1, T2);
  r.sqrt_integral_slack =
      4.0 * (std::sqrt(th1) + std::sqrt(th2)) - linear_integral(d.t, root, T1, T2);

  double max_theta = 0.0;
  r.min_theta = std::numeric_limits<double>::infinity();
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    if (d.t[i] < T1 - 1e-9 * h || d.t[i] > T2 + 1e-9 * h) continue;
    r.min_theta = std::min(r.min_theta, d.theta[i]);
    max_theta = std::max(max_theta, d.theta[i]);
    if (i > 0 && i + 1 < d.t.size()) {
      const double second = (d.theta[i + 1] - 2 * d.theta[i] + d.theta[i - 1]) / (h * h);
      slack = std::min(slack, second - d.theta[i]);
    }
  }
  if (!std::isfinite(r.min_theta)) r.min_theta = std::min(th1, th2);
  r.convexity_slack = std::isfinite(slack) ? slack : 0.0;
  r.zero_field = max_theta == 0.0 && th1 == 0.0 && th2 == 0.0;
  r.positive = r.min_theta > 0.0 && th1 > 0.0 && th2 > 0.0;
  return r;
}

std::vector<double> zero_neck_schedule(double delta, int halvings) {
  std::vector<double> out;
  for (int j = 0; j <= halvings; ++j) out.push_back(std::ldexp(delta, -j));
  return out;
}

ZeroNeckResult zero_neck_test(std::span<const CylinderField> necks, double eps,
                              std::span<const double> delta_schedule) {
  const char* where = "neck.zero_neck_test";
  if (delta_schedule.empty()) throw Error(ErrorKind::Validation, where, "schedule empty");
  if (necks.empty()) throw Error(ErrorKind::Validation, where, "no necks given");
  if (!(eps > 0.0)) throw Error(ErrorKind::Validation, where, "eps must be positive");
  for (std::size_t k = 0; k < necks.size(); ++k)
    if (!necks[k].nodal_meta())
      throw Error(ErrorKind::Validation, where, "neck lacks nodal metadata", static_cast<int>(k));

  ZeroNeckResult res;
  const int n = static_cast<int>(necks.size());
  res.late_from = n - (n + 1) / 2;
  std::vector<double> alpha(n, 0.0);
  for (int k = res.late_from; k < n; ++k) alpha[k] = diagnostics(necks[k]).alpha;

  for (double delta : delta_schedule) {
    ZeroNeckRow row;
    row.delta = delta;
    for (int k = res.late_from; k < n; ++k) {
      const auto& f = necks[k];
      const auto& meta = *f.nodal_meta();
      if (!(delta > 0.0) || delta > meta.delta * (1 + 1e-12))
        throw Error(ErrorKind::Validation, where, "schedule radius outside the nodal chart", k);
      const double T = std::log(delta / std::sqrt(std::abs(meta.t_k)));
      row.predicted = std::max(row.predicted, std::abs(2.0 * std::max(T, 0.0) * alpha[k]));
      if (T < 0.5 * f.dt()) continue;  // sub-cylinder has no extent
      const auto d = diagnostics(f.restrict(-T, T));
      row.energy = std::max(row.energy, d.energy);
      row.diameter = std::max(row.diameter, d.diameter);
      ++row.measured;
    }
    if (row.measured == n - res.late_from && row.energy < eps && row.diameter < eps) res.pass = true;
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace bubble
