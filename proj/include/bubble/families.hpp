#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bubble/curve.hpp"
#include "bubble/measure.hpp"
#include "bubble/neck.hpp"

namespace bubble {

/// Rational map P/Q into the Riemann sphere, coefficients in ascending order.
class RationalMap {
 public:
  RationalMap(std::vector<Complex> numerator, std::vector<Complex> denominator);

  static RationalMap polynomial(std::vector<Complex> coefficients);
  static RationalMap constant(Complex value);

  const std::vector<Complex>& numerator() const { return num_; }
  const std::vector<Complex>& denominator() const { return den_; }
  /// max(deg P, deg Q): the topological degree.
  int degree() const;

  Complex operator()(Complex z) const;
  /// The map w -> f(1/w), which covers the chart about infinity.
  RationalMap at_infinity() const;

  /// Pullback of the area form of the unit sphere per unit chart area:
  /// 4 |P'Q - PQ'|^2 / (|P|^2 + |Q|^2)^2. Its integral is the energy.
  double density(Complex z) const;

  /// Roots of P and of Q inside the closed disk of the given radius with a
  /// length scale over which the density varies near each root.
  void focus_points(double radius, std::vector<Complex>& points, std::vector<double>& scales) const;

 private:
  std::vector<Complex> num_;
  std::vector<Complex> den_;
};

/// |Res(P, Q)| from the Sylvester matrix.
double resultant_modulus(const std::vector<Complex>& p, const std::vector<Complex>& q);

/// Roots of a polynomial given by ascending coefficients (companion matrix).
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coefficients);

/// Inverse stereographic projection from the north pole and its real
/// differential: d_u S and d_v S for w = u + i v.
void inverse_stereographic(Complex w, double out[3]);
void inverse_stereographic_differential(Complex w, double du[3], double dv[3]);

struct Region {
  enum class Kind { FullSphere, Disk } kind = Kind::FullSphere;
  double radius = 1.0;  // chart disk about 0, Disk kind only

  static Region full_sphere() { return {Kind::FullSphere, 1.0}; }
  static Region disk(double r) { return {Kind::Disk, r}; }
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  int max_depth = 30;  // bisections per axis
};

/// Adaptive quadrature of the energy over a chart disk or the whole sphere
/// (unit disk plus the unit disk of the chart at infinity). Throws when the
/// error estimate still exceeds the tolerance at the bisection cap.
double energy_quadrature(const RationalMap& f, Region region, const QuadratureOptions& options = {});

/// Particle measure of the energy density on the chart disk of given radius,
/// by adaptive polar cubature graded toward roots of P and Q.
WeightedParticleMeasure density_to_measure(const RationalMap& f, double radius,
                                           const AdaptiveCubatureOptions& options = {});

/// Samples z -> S(f(z)) on the annulus r_in <= |z| <= r_out with analytic
/// radial and angular derivatives. Rings are uniform in r.
PolarMapSamples sample_polar(const RationalMap& f, double r_in, double r_out, int nr, int nphi);

// ---------------------------------------------------------------------------
// Family generation

struct FamilySpec {
  std::string kind;               // bubble1 | bubble2 | fixed | plumbing | torus_linear
  std::vector<double> k;          // schedule; meaning depends on the kind
  double a = 0.5;                 // bubble2 root; torus_linear slope in t
  double b = 0.0;                 // torus_linear slope in theta
  double delta = 0.5;             // nodal chart radius
  bool concentrating = false;     // plumbing: bubble on the neck
  double gamma = 0.25;            // plumbing bubble scale |t_k|^gamma
  double mirror = 0.0;            // plumbing: coefficient of t_k / x
  int steps_per_ln2 = 8;          // neck t-resolution
  int ntheta = 64;                // neck angular resolution
  double chart_radius = 1.0;      // rational families
  AdaptiveCubatureOptions cubature;
};

/// Default schedule for a kind (used when `FamilySpec::k` is empty).
std::vector<double> default_schedule(const std::string& kind);

struct GeneratedFamily {
  FamilySpec spec;
  std::vector<RationalMap> maps;                  // rational kinds
  std::vector<CylinderField> necks;               // nodal kinds
  std::vector<WeightedParticleMeasure> measures;  // chart measures, one per k
  std::vector<double> total_energy;               // energy of each member
  std::vector<Complex> nodal_points;              // nodes inside the chart
  MarkedNodalCurve base_curve;
  std::vector<int> chart_node_edges;              // edge of base_curve per nodal point
  int chart_vertex = 0;                           // vertex carrying the chart
};

GeneratedFamily make_family(const FamilySpec& spec);

/// Neck of the plumbing family at parameter t_k (exposed for tests).
CylinderField plumbing_neck(const FamilySpec& spec, double k);
CylinderField torus_neck(const FamilySpec& spec, double k);

}  // namespace bubble
