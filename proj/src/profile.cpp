#include "bubble/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bubble {

namespace {

// Quintic Hermite tables for the normal cdf and density on [-kTableEdge, kTableEdge].
// Interpolation error is below 1e-14, far under the mollifier's own resolution.
constexpr double kTableEdge = 8.5;
constexpr int kTablePerUnit = 64;

// Per-interval polynomial coefficients in the local coordinate u in [0, 1].
struct NormalTable {
  std::vector<double> cdf, pdf;  // 6 coefficients per interval
  NormalTable() {
    const int n = static_cast<int>(2 * kTableEdge * kTablePerUnit);
    const double h = 1.0 / kTablePerUnit;
    auto phi = [](double x) { return 0.3989422804014327 * std::exp(-0.5 * x * x); };
    for (int i = 0; i < n; ++i) {
      const double x0 = -kTableEdge + i * h, x1 = x0 + h;
      append(cdf, 0.5 * std::erfc(-x0 / std::sqrt(2.0)), 0.5 * std::erfc(-x1 / std::sqrt(2.0)),
             h * phi(x0), h * phi(x1), -h * h * x0 * phi(x0), -h * h * x1 * phi(x1));
      append(pdf, phi(x0), phi(x1), -h * x0 * phi(x0), -h * x1 * phi(x1),
             h * h * (x0 * x0 - 1) * phi(x0), h * h * (x1 * x1 - 1) * phi(x1));
    }
  }
  // Quintic Hermite through values, first and second derivatives at both ends.
  static void append(std::vector<double>& c, double f0, double f1, double d0, double d1,
                     double s0, double s1) {
    c.push_back(f0);
    c.push_back(d0);
    c.push_back(0.5 * s0);
    c.push_back(-10 * f0 - 6 * d0 - 1.5 * s0 + 0.5 * s1 - 4 * d1 + 10 * f1);
    c.push_back(15 * f0 + 8 * d0 + 1.5 * s0 - s1 + 7 * d1 - 15 * f1);
    c.push_back(-6 * f0 - 3 * d0 - 0.5 * s0 + 0.5 * s1 - 3 * d1 + 6 * f1);
  }
};

const NormalTable kTable;

inline double table_eval(const std::vector<double>& coef, double x) {
  const double pos = (x + kTableEdge) * kTablePerUnit;
  const std::size_t n = coef.size() / 6;
  std::size_t i = static_cast<std::size_t>(pos);
  if (i >= n) i = n - 1;
  const double u = pos - static_cast<double>(i);
  const double* c = coef.data() + 6 * i;
  return c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * (c[4] + u * c[5]))));
}

double normal_cdf(double x) {
  if (x <= -kTableEdge || x >= kTableEdge) return 0.5 * std::erfc(-x / std::sqrt(2.0));
  return table_eval(kTable.cdf, x);
}

double normal_pdf(double x) {
  if (x <= -kTableEdge || x >= kTableEdge) return 0.3989422804014327 * std::exp(-0.5 * x * x);
  return table_eval(kTable.pdf, x);
}

constexpr double kWindow = 8.0;  // mollifier support in bandwidths

}  // namespace

RadialMassProfile::RadialMassProfile(const WeightedParticleMeasure& mu, Complex q,
                                     ProfileMode mode, double bandwidth)
    : mode_(mode), bandwidth_(bandwidth) {
  if (mode_ == ProfileMode::Mollified && !(bandwidth_ > 0.0))
    throw Error(ErrorKind::Validation, "renorm.profile", "bandwidth must be positive");
  auto pts = mu.points();
  auto ws = mu.weights();
  std::vector<std::pair<double, double>> dw;
  dw.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::sqrt(std::norm(pts[i] - q));
    if (d > 0.0 && ws[i] > 0.0) dw.emplace_back(d, ws[i]);
  }
  if (mode_ == ProfileMode::Mollified) {
    // Smooth sums are evaluated by linear scans; no ordering is needed.
    long double acc = 0.0L;
    for (const auto& [d, w] : dw) {
      dist_.push_back(d);
      weight_.push_back(w);
      acc += w;
    }
    spread_ = static_cast<double>(acc);
    return;
  }
  std::sort(dw.begin(), dw.end());
  dist_.reserve(dw.size());
  weight_.reserve(dw.size());
  for (const auto& [d, w] : dw) {
    dist_.push_back(d);
    weight_.push_back(w);
  }
  suffix_.assign(dist_.size() + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t i = dist_.size(); i-- > 0;) {
    acc += weight_[i];
    suffix_[i] = static_cast<double>(acc);
  }
  spread_ = suffix_[0];

  if (mode_ != ProfileMode::ShellInterpolated) return;

  std::vector<double> shell_d, shell_m;
  for (std::size_t i = 0; i < dist_.size();) {
    std::size_t j = i;
    long double m = 0.0L;
    while (j < dist_.size() && dist_[j] - dist_[i] <= 1e-12 * dist_[i]) m += weight_[j++];
    shell_d.push_back(dist_[i]);
    shell_m.push_back(static_cast<double>(m));
    i = j;
  }
  const std::size_t n = shell_d.size();
  if (n < 2) return;  // step profile

  knot_.resize(n + 1);
  value_.resize(n + 1);
  knot_[0] = std::max(0.0, shell_d[0] - 0.5 * (shell_d[1] - shell_d[0]));
  value_[0] = spread_;
  long double rest = spread_;
  for (std::size_t m = 1; m < n; ++m) {
    rest -= shell_m[m - 1];
    knot_[m] = 0.5 * (shell_d[m - 1] + shell_d[m]);
    value_[m] = std::max(0.0, static_cast<double>(rest));
  }
  knot_[n] = shell_d[n - 1] + 0.5 * (shell_d[n - 1] - shell_d[n - 2]);
  value_[n] = 0.0;

  // Parabolic (three-point) slopes, then the Fritsch-Carlson limiter.
  const std::size_t K = n + 1;
  std::vector<double> h(K - 1), sec(K - 1);
  for (std::size_t m = 0; m + 1 < K; ++m) {
    h[m] = knot_[m + 1] - knot_[m];
    sec[m] = (value_[m + 1] - value_[m]) / h[m];
  }
  slope_.assign(K, 0.0);
  for (std::size_t m = 1; m + 1 < K; ++m) {
    if (sec[m - 1] * sec[m] <= 0.0) continue;
    slope_[m] = (h[m] * sec[m - 1] + h[m - 1] * sec[m]) / (h[m - 1] + h[m]);
  }
  slope_[0] = ((2 * h[0] + h[1]) * sec[0] - h[0] * sec[1]) / (h[0] + h[1]);
  if (slope_[0] * sec[0] < 0.0) slope_[0] = 0.0;
  const std::size_t e = K - 2;
  slope_[K - 1] = ((2 * h[e] + h[e - 1]) * sec[e] - h[e] * sec[e - 1]) / (h[e] + h[e - 1]);
  if (slope_[K - 1] * sec[e] < 0.0) slope_[K - 1] = 0.0;
  for (std::size_t m = 0; m + 1 < K; ++m) {
    if (sec[m] == 0.0) {
      slope_[m] = slope_[m + 1] = 0.0;
      continue;
    }
    const double a = slope_[m] / sec[m];
    const double b = slope_[m + 1] / sec[m];
    const double r2 = a * a + b * b;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      slope_[m] = tau * a * sec[m];
      slope_[m + 1] = tau * b * sec[m];
    }
  }
}

double RadialMassProfile::step_outside(double s) const {
  auto it = std::lower_bound(dist_.begin(), dist_.end(), s);
  return suffix_[static_cast<std::size_t>(it - dist_.begin())];
}

std::pair<double, double> RadialMassProfile::outside_and_slope(double s) const {
  if (mode_ != ProfileMode::Mollified || !(s > 0.0)) return {outside(s), 0.0};
  const double bw = bandwidth_ * s;
  const double inv = 1.0 / bw;
  double sum = 0.0, slope = 0.0;
  for (std::size_t i = 0; i < dist_.size(); ++i) {
    const double x = (dist_[i] - s) * inv;
    if (x >= kWindow) {
      sum += weight_[i];
    } else if (x > -kWindow) {
      sum += weight_[i] * normal_cdf(x);
      slope -= weight_[i] * normal_pdf(x) * dist_[i] * inv / s;
    }
  }
  return {sum, slope};
}

double RadialMassProfile::step_crossing(double level) const {
  if (dist_.empty()) return 0.0;
  if (mode_ == ProfileMode::Mollified) {
    // Weighted selection: smallest d with the mass strictly beyond it <= level.
    std::vector<std::pair<double, double>> dw(dist_.size());
    for (std::size_t i = 0; i < dist_.size(); ++i) dw[i] = {dist_[i], weight_[i]};
    auto first = dw.begin(), last = dw.end();
    double beyond = 0.0;  // mass ordered after [first, last)
    while (last - first > 1) {
      auto mid = first + (last - first - 1) / 2;
      std::nth_element(first, mid, last);
      double upper = 0.0;
      for (auto it = mid + 1; it != last; ++it) upper += it->second;
      if (beyond + upper <= level) {
        beyond += upper;
        last = mid + 1;
      } else {
        first = mid + 1;
      }
    }
    return first->first;
  }
  // suffix_ is nonincreasing; first i with suffix_[i + 1] <= level.
  std::size_t lo = 0, hi = dist_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (suffix_[mid + 1] <= level)
      hi = mid;
    else
      lo = mid + 1;
  }
  return dist_[lo];
}

double RadialMassProfile::mollified_outside(double s) const {
  if (!(s > 0.0)) return spread_;
  const double inv = 1.0 / (bandwidth_ * s);
  double sum = 0.0;
  for (std::size_t i = 0; i < dist_.size(); ++i) {
    const double x = (dist_[i] - s) * inv;
    if (x >= kWindow)
      sum += weight_[i];
    else if (x > -kWindow)
      sum += weight_[i] * normal_cdf(x);
  }
  return sum;
}

double RadialMassProfile::shell_outside(double s) const {
  if (knot_.empty()) return step_outside(s);
  if (s <= knot_.front()) return value_.front();
  if (s >= knot_.back()) return 0.0;
  auto it = std::upper_bound(knot_.begin(), knot_.end(), s);
  const std::size_t m = static_cast<std::size_t>(it - knot_.begin()) - 1;
  const double h = knot_[m + 1] - knot_[m];
  const double x = (s - knot_[m]) / h;
  const double x2 = x * x, x3 = x2 * x;
  const double h00 = 2 * x3 - 3 * x2 + 1;
  const double h10 = x3 - 2 * x2 + x;
  const double h01 = -2 * x3 + 3 * x2;
  const double h11 = x3 - x2;
  const double v = h00 * value_[m] + h10 * h * slope_[m] + h01 * value_[m + 1] + h11 * h * slope_[m + 1];
  return std::clamp(v, value_[m + 1], value_[m]);
}

double RadialMassProfile::outside(double s) const {
  switch (mode_) {
    case ProfileMode::Step:
      return step_outside(s);
    case ProfileMode::Mollified:
      return mollified_outside(s);
    case ProfileMode::ShellInterpolated:
      return shell_outside(s);
  }
  return step_outside(s);
}

double RadialMassProfile::inclusion(double d, double s) const {
  if (mode_ == ProfileMode::Mollified) {
    if (!(s > 0.0)) return 0.0;
    return normal_cdf((s - d) / (bandwidth_ * s));
  }
  return d < s ? 1.0 : 0.0;
}

}  // namespace bubble
