#include "bubble/families.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "bubble/renorm.hpp"

namespace bubble {

namespace {

void trim(std::vector<Complex>& c) {
  while (!c.empty() && c.back() == Complex(0.0, 0.0)) c.pop_back();
}

int deg(const std::vector<Complex>& c) { return c.empty() ? -1 : static_cast<int>(c.size()) - 1; }

// Value and first derivative by Horner's rule.
void horner(const std::vector<Complex>& c, Complex z, Complex& value, Complex& slope) {
  value = 0.0;
  slope = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) {
    slope = slope * z + value;
    value = value * z + c[i];
  }
}

double coeff_norm(const std::vector<Complex>& c) {
  double s = 0.0;
  for (auto x : c) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace

double resultant_modulus(const std::vector<Complex>& p_in, const std::vector<Complex>& q_in) {
  auto p = p_in, q = q_in;
  trim(p);
  trim(q);
  const int m = deg(p), n = deg(q);
  if (m < 0 || n < 0) return 0.0;
  if (m == 0) return std::pow(std::abs(p[0]), n);
  if (n == 0) return std::pow(std::abs(q[0]), m);
  const int N = m + n;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(N, N);
  // Rows hold descending coefficients, shifted.
  for (int r = 0; r < n; ++r)
    for (int i = 0; i <= m; ++i) S(r, r + i) = p[m - i];
  for (int r = 0; r < m; ++r)
    for (int i = 0; i <= n; ++i) S(n + r, r + i) = q[n - i];
  return std::abs(S.partialPivLu().determinant());
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coefficients) {
  auto c = coefficients;
  trim(c);
  const int n = deg(c);
  if (n < 1) return {};
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) M(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) M(i, n - 1) = -c[i] / c[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(M, false);
  std::vector<Complex> roots;
  for (int i = 0; i < n; ++i) {
    Complex z = solver.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      Complex v, d;
      horner(c, z, v, d);
      if (d == Complex(0.0, 0.0)) break;
      Complex next = z - v / d;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      z = next;
    }
    roots.push_back(z);
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

RationalMap::RationalMap(std::vector<Complex> numerator, std::vector<Complex> denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  trim(num_);
  trim(den_);
  const char* where = "families.rational_map";
  if (den_.empty()) throw Error(ErrorKind::Validation, where, "denominator is zero");
  for (auto c : num_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(ErrorKind::Validation, where, "non-finite coefficient");
  for (auto c : den_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(ErrorKind::Validation, where, "non-finite coefficient");
  if (deg(num_) >= 1 && deg(den_) >= 1) {
    const double scale = std::pow(coeff_norm(num_), deg(den_)) * std::pow(coeff_norm(den_), deg(num_));
    if (!(resultant_modulus(num_, den_) > 1e-12 * scale))
      throw Error(ErrorKind::Validation, where, "numerator and denominator share a root");
  }
}

RationalMap RationalMap::polynomial(std::vector<Complex> coefficients) {
  return RationalMap(std::move(coefficients), {1.0});
}

RationalMap RationalMap::constant(Complex value) { return RationalMap({value}, {1.0}); }

int RationalMap::degree() const {
  if (deg(num_) <= 0 && deg(den_) == 0) return 0;
  return std::max(deg(num_), deg(den_));
}

Complex RationalMap::operator()(Complex z) const {
  Complex p, dp, q, dq;
  horner(num_, z, p, dp);
  horner(den_, z, q, dq);
  return p / q;
}

RationalMap RationalMap::at_infinity() const {
  const int dp = std::max(deg(num_), 0), dq = deg(den_);
  const int d = std::max(dp, dq);
  std::vector<Complex> n(static_cast<std::size_t>(d) + 1, 0.0), m(static_cast<std::size_t>(d) + 1, 0.0);
  for (int i = 0; i <= deg(num_); ++i) n[d - i] = num_[i];
  for (int i = 0; i <= dq; ++i) m[d - i] = den_[i];
  return RationalMap(std::move(n), std::move(m));
}

double RationalMap::density(Complex z) const {
  Complex p, dp, q, dq;
  horner(num_, z, p, dp);
  horner(den_, z, q, dq);
  const double denom = std::norm(p) + std::norm(q);
  if (!(denom > 0.0)) return 0.0;
  return 4.0 * std::norm(dp * q - p * dq) / (denom * denom);
}

void RationalMap::focus_points(double radius, std::vector<Complex>& points,
                               std::vector<double>& scales) const {
  auto add = [&](const std::vector<Complex>& roots, const std::vector<Complex>& self,
                 const std::vector<Complex>& other) {
    for (auto z0 : roots) {
      Complex v, d, w, dw;
      horner(self, z0, v, d);
      horner(other, z0, w, dw);
      if (std::abs(d) == 0.0) continue;
      const double width = std::abs(w / d);
      if (!(width < 0.5 * radius) || std::abs(z0) > radius + 2.0 * width) continue;
      points.push_back(z0);
      scales.push_back(std::max(0.25 * width, 1e-12 * radius));
    }
  };
  add(polynomial_roots(num_), num_, den_);
  add(polynomial_roots(den_), den_, num_);
}

// ---------------------------------------------------------------------------

void inverse_stereographic(Complex w, double out[3]) {
  const double u = w.real(), v = w.imag();
  const double D = 1.0 + u * u + v * v;
  out[0] = 2.0 * u / D;
  out[1] = 2.0 * v / D;
  out[2] = (u * u + v * v - 1.0) / D;
}

void inverse_stereographic_differential(Complex w, double du[3], double dv[3]) {
  const double u = w.real(), v = w.imag();
  const double D = 1.0 + u * u + v * v;
  const double D2 = D * D;
  du[0] = 2.0 * (D - 2.0 * u * u) / D2;
  du[1] = -4.0 * u * v / D2;
  du[2] = 4.0 * u / D2;
  dv[0] = -4.0 * u * v / D2;
  dv[1] = 2.0 * (D - 2.0 * v * v) / D2;
  dv[2] = 4.0 * v / D2;
}

namespace {

// dS at w applied to the tangent vector xi.
void push_tangent(Complex w, Complex xi, std::span<double> out) {
  double du[3], dv[3];
  inverse_stereographic_differential(w, du, dv);
  for (int c = 0; c < 3; ++c) out[c] = xi.real() * du[c] + xi.imag() * dv[c];
}

Complex derivative(const RationalMap& f, Complex z) {
  Complex p, dp, q, dq;
  horner(f.numerator(), z, p, dp);
  horner(f.denominator(), z, q, dq);
  return (dp * q - p * dq) / (q * q);
}

// Sorted break points in [lo, hi], endpoints included.
std::vector<double> breaks(std::vector<double> cuts, double lo, double hi) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::erase_if(cuts, [&](double x) { return !(x >= lo && x <= hi); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double x, double y) { return y - x <= 1e-15 * (hi - lo); }),
             cuts.end());
  return cuts;
}

// Bisection on top of a single 61-point Gauss-Kronrod pass. boost's own
// recursion measures the error in the unit variable, which on short
// intervals never meets a relative tolerance; here it is rescaled.
template <class F>
double adaptive_gk(const F& f, double a, double b, double abs_tol, int depth, double& error) {
  using boost::math::quadrature::gauss_kronrod;
  double e = 0.0;
  const double v = gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &e);
  e *= 0.5 * (b - a);
  if (depth <= 0 || e <= abs_tol || e <= 1e-14 * std::abs(v)) {
    error += e;
    return v;
  }
  const double mid = 0.5 * (a + b);
  return adaptive_gk(f, a, mid, 0.5 * abs_tol, depth - 1, error) +
         adaptive_gk(f, mid, b, 0.5 * abs_tol, depth - 1, error);
}

template <class F>
double integrate_pieces(const F& f, const std::vector<double>& cuts, double rel_tol, int depth,
                        double& error) {
  using boost::math::quadrature::gauss_kronrod;
  double rough = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    rough += std::abs(gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 0, 0.0));
  const double abs_tol = rel_tol * rough;
  double value = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double share = abs_tol * (cuts[i + 1] - cuts[i]) / (cuts.back() - cuts.front());
    value += adaptive_gk(f, cuts[i], cuts[i + 1], share, depth, error);
  }
  return value;
}

// Nested adaptive quadrature in (theta, r). Both axes are cut at the roots
// of P and Q and a few widths around them, so that narrow peaks sit at
// interval ends where the rule samples densely.
double disk_energy(const RationalMap& f, double radius, const QuadratureOptions& options) {
  std::vector<Complex> pts;
  std::vector<double> scales;
  f.focus_points(radius, pts, scales);
  std::vector<double> rcuts, acuts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double m = std::abs(pts[i]);
    for (double c : {-16.0, -4.0, 0.0, 4.0, 16.0}) rcuts.push_back(m + c * scales[i]);
    if (m <= scales[i]) continue;
    const double a = std::arg(pts[i]) < 0 ? std::arg(pts[i]) + kTwoPi : std::arg(pts[i]);
    for (double c : {-16.0, -4.0, 0.0, 4.0, 16.0})
      for (double shift : {-kTwoPi, 0.0, kTwoPi}) acuts.push_back(a + shift + c * scales[i] / m);
  }
  const auto rb = breaks(rcuts, 0.0, radius);
  const auto ab = breaks(acuts, 0.0, kTwoPi);
  double inner_error = 0.0;
  auto radial = [&](double theta) {
    const Complex e = std::polar(1.0, theta);
    return integrate_pieces([&](double r) { return r * f.density(r * e); }, rb,
                            0.01 * options.rel_tol, options.max_depth, inner_error);
  };
  double error = 0.0;
  const double value = integrate_pieces(radial, ab, options.rel_tol, options.max_depth, error);
  if (!(error <= options.rel_tol * std::abs(value)))
    throw Error(ErrorKind::Algorithmic, "families.energy_quadrature",
                "resolution insufficient for the requested tolerance; estimate " +
                    std::to_string(value) + ", error " + std::to_string(error));
  return value;
}

}  // namespace

double energy_quadrature(const RationalMap& f, Region region, const QuadratureOptions& options) {
  if (region.kind == Region::Kind::Disk) {
    if (!(region.radius > 0.0))
      throw Error(ErrorKind::Validation, "families.energy_quadrature", "disk radius must be positive");
    return disk_energy(f, region.radius, options);
  }
  return disk_energy(f, 1.0, options) + disk_energy(f.at_infinity(), 1.0, options);
}

WeightedParticleMeasure density_to_measure(const RationalMap& f, double radius,
                                           const AdaptiveCubatureOptions& options) {
  if (!(radius > 0.0))
    throw Error(ErrorKind::Validation, "families.density_to_measure", "radius must be positive");
  std::vector<Complex> pts;
  std::vector<double> scales;
  f.focus_points(radius, pts, scales);
  return adaptive_polar_measure([&f](Complex z) { return f.density(z); }, radius, options, pts,
                                scales);
}

PolarMapSamples sample_polar(const RationalMap& f, double r_in, double r_out, int nr, int nphi) {
  if (!(r_in > 0.0 && r_out > r_in) || nr < 2 || nphi < 3)
    throw Error(ErrorKind::Validation, "families.sample_polar", "degenerate annulus grid");
  PolarMapSamples s;
  s.nphi = nphi;
  s.dim = 3;
  const std::size_t n = static_cast<std::size_t>(nr) * nphi * 3;
  s.values.resize(n);
  s.d_r.resize(n);
  s.d_phi.resize(n);
  for (int i = 0; i < nr; ++i) {
    const double r = r_in + (r_out - r_in) * i / (nr - 1);
    s.radii.push_back(r);
    for (int j = 0; j < nphi; ++j) {
      const Complex e = std::polar(1.0, kTwoPi * j / nphi);
      const Complex z = r * e;
      const Complex w = f(z);
      const Complex d = derivative(f, z);
      const std::size_t at = (static_cast<std::size_t>(i) * nphi + j) * 3;
      inverse_stereographic(w, &s.values[at]);
      push_tangent(w, d * e, {&s.d_r[at], 3});
      push_tangent(w, d * Complex(0, 1) * z, {&s.d_phi[at], 3});
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

std::vector<double> default_schedule(const std::string& kind) {
  if (kind == "bubble1" || kind == "bubble2") return {1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  if (kind == "fixed") return {1, 2, 3, 4, 5, 6};
  if (kind == "plumbing") return {6, 7, 8, 9, 10, 11};
  if (kind == "torus_linear") return {6, 7, 8, 9, 10, 11};
  throw Error(ErrorKind::Validation, "families.make_family", "unknown family kind '" + kind + "'");
}

namespace {

double plumbing_t(double k) { return std::pow(4.0, -k); }

int half_steps(double T, int steps_per_ln2) {
  return std::max(1, static_cast<int>(std::lround(T / (std::log(2.0) / steps_per_ln2))));
}

}  // namespace

CylinderField plumbing_neck(const FamilySpec& spec, double k) {
  const double tk = plumbing_t(k);
  if (!(tk < spec.delta * spec.delta))
    throw Error(ErrorKind::Validation, "families.plumbing", "neck not thin: |t_k| >= delta^2");
  const double root = std::sqrt(tk);
  const double T = std::log(spec.delta / root);
  const int m = half_steps(T, spec.steps_per_ln2);
  const double rho = std::pow(tk, spec.gamma);
  const bool conc = spec.concentrating;
  const double mirror = spec.mirror;
  auto w_of = [=](Complex x) {
    return conc ? x / rho : x + mirror * tk / x;
  };
  auto dw_of = [=](Complex x) {
    return conc ? Complex(1.0 / rho, 0.0) : Complex(1.0, 0.0) - mirror * tk / (x * x);
  };
  auto x_of = [=](double t, double th) { return root * std::exp(Complex(t, th)); };
  TargetDescriptor target{TargetKind::Sphere, 1.0, 1.0};
  return CylinderField::sample(
      T, 2 * m + 1, spec.ntheta, target,
      [=](double t, double th, std::span<double> out) {
        inverse_stereographic(w_of(x_of(t, th)), out.data());
      },
      [=](double t, double th, std::span<double> out) {
        const Complex x = x_of(t, th);
        push_tangent(w_of(x), dw_of(x) * x, out);
      },
      [=](double t, double th, std::span<double> out) {
        const Complex x = x_of(t, th);
        push_tangent(w_of(x), dw_of(x) * Complex(0, 1) * x, out);
      },
      NodalMeta{Complex(tk, 0.0), spec.delta});
}

CylinderField torus_neck(const FamilySpec& spec, double k) {
  const double tk = plumbing_t(k);
  if (!(tk < spec.delta * spec.delta))
    throw Error(ErrorKind::Validation, "families.torus_linear", "neck not thin: |t_k| >= delta^2");
  const double T = std::log(spec.delta / std::sqrt(tk));
  const int m = half_steps(T, spec.steps_per_ln2);
  const double a = spec.a, b = spec.b;
  const double r1 = 1.0;
  const double r2 = b != 0.0 ? std::abs(b) : 1.0;
  TargetDescriptor target{TargetKind::FlatTorus, r1, r2};
  return CylinderField::sample(
      T, 2 * m + 1, spec.ntheta, target,
      [=](double t, double th, std::span<double> out) {
        out[0] = r1 * std::cos(a * t / r1);
        out[1] = r1 * std::sin(a * t / r1);
        out[2] = r2 * std::cos(b * th / r2);
        out[3] = r2 * std::sin(b * th / r2);
      },
      [=](double t, double, std::span<double> out) {
        out[0] = -a * std::sin(a * t / r1);
        out[1] = a * std::cos(a * t / r1);
        out[2] = 0.0;
        out[3] = 0.0;
      },
      [=](double, double th, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = -b * std::sin(b * th / r2);
        out[3] = b * std::cos(b * th / r2);
      },
      NodalMeta{Complex(tk, 0.0), spec.delta});
}

GeneratedFamily make_family(const FamilySpec& spec_in) {
  const char* where = "families.make_family";
  FamilySpec spec = spec_in;
  if (spec.k.empty()) spec.k = default_schedule(spec.kind);
  else default_schedule(spec.kind);  // rejects unknown kinds
  for (double k : spec.k)
    if (!(k > 0.0) || !std::isfinite(k))
      throw Error(ErrorKind::Validation, where, "schedule values must be positive and finite");
  if (!(spec.delta > 0.0) || !(spec.chart_radius > 0.0))
    throw Error(ErrorKind::Validation, where, "radii must be positive");
  if (spec.steps_per_ln2 < 1 || spec.ntheta < 3)
    throw Error(ErrorKind::Validation, where, "neck resolution too small");

  const bool rational = spec.kind == "bubble1" || spec.kind == "bubble2" || spec.kind == "fixed";
  MarkedNodalCurve base = rational
      ? MarkedNodalCurve({0}, {}, {{0, 1}, {0, 2}, {0, 3}})
      : (spec.kind == "plumbing"
             ? MarkedNodalCurve({0, 0}, {{0, 1}}, {{0, 1}, {0, 2}, {1, 3}, {1, 4}})
             : MarkedNodalCurve({0}, {{0, 0}}, {{0, 1}}));
  GeneratedFamily fam{spec, {}, {}, {}, {}, {}, base, {}, 0};

  for (std::size_t i = 0; i < spec.k.size(); ++i) {
    const double k = spec.k[i];
    try {
      if (rational) {
        RationalMap f = spec.kind == "bubble1"
                            ? RationalMap::polynomial({0.0, k})
                            : spec.kind == "bubble2"
                                  ? RationalMap::polynomial({-spec.a * spec.a * k, 0.0, k})
                                  : RationalMap::polynomial({0.0, 1.0});
        fam.measures.push_back(density_to_measure(f, spec.chart_radius, spec.cubature));
        fam.total_energy.push_back(4.0 * kPi * f.degree());
        fam.maps.push_back(std::move(f));
      } else {
        CylinderField neck = spec.kind == "plumbing" ? plumbing_neck(spec, k) : torus_neck(spec, k);
        fam.measures.push_back(build_nodal_pushforward(neck, spec.delta));
        fam.total_energy.push_back(fam.measures.back().total_mass());
        fam.necks.push_back(std::move(neck));
      }
    } catch (const Error& e) {
      if (e.k_index()) throw;
      throw e.at_index(static_cast<int>(i));
    }
  }
  if (!rational) {
    fam.nodal_points = {Complex(0.0, 0.0)};
    fam.chart_node_edges = {0};
  }
  return fam;
}

}  // namespace bubble
