#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "bubble/core.hpp"

namespace bubble {

/// Closed disk in a planar chart.
struct Disk {
  Complex center{0.0, 0.0};
  double radius = 1.0;

  bool contains(Complex z) const { return std::abs(z - center) <= radius; }
};

/// Planar Moebius transform x -> (a x + b) / (c x + d). Affine maps have c = 0.
struct Mobius {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};
  Complex c{0.0, 0.0};
  Complex d{1.0, 0.0};

  static Mobius identity() { return {}; }
  static Mobius translation(Complex shift) { return {{1, 0}, shift, {0, 0}, {1, 0}}; }
  static Mobius affine(Complex scale, Complex shift) { return {scale, shift, {0, 0}, {1, 0}}; }

  Complex operator()(Complex x) const { return (a * x + b) / (c * x + d); }
};

/// Discrete measure on a planar chart: weighted quadrature nodes.
///
/// Immutable after construction. The constructor validates that weights are
/// finite and nonnegative and that every point lies in the closed disk of
/// radius chart_radius about the chart origin.
class WeightedParticleMeasure {
 public:
  WeightedParticleMeasure() = default;
  WeightedParticleMeasure(std::vector<Complex> points, std::vector<double> weights,
                          double chart_radius);

  /// Zero measure on a chart of the given radius.
  static WeightedParticleMeasure empty(double chart_radius);

  std::span<const Complex> points() const { return points_; }
  std::span<const double> weights() const { return weights_; }
  double chart_radius() const { return chart_radius_; }
  std::size_t size() const { return points_.size(); }
  double total_mass() const { return total_; }

  /// Sub-measure of the particles inside the closed disk.
  WeightedParticleMeasure restricted_to(const Disk& region) const;
  /// Sub-measure of the particles outside the open disk (|z - c| >= r).
  WeightedParticleMeasure excluding(const Disk& region) const;

 private:
  std::vector<Complex> points_;
  std::vector<double> weights_;
  double chart_radius_ = 1.0;
  double total_ = 0.0;
};

/// Neumaier-compensated sum in index order.
double compensated_sum(std::span<const double> values);

double mass_in(const WeightedParticleMeasure& mu, Complex center, double radius);

/// Image measure under an injective Moebius map. Weights are copied
/// unchanged; the chart radius of the result is the largest image modulus.
WeightedParticleMeasure pushforward(const WeightedParticleMeasure& mu, const Mobius& map);

/// Sum of w_i z_i over the particles in the closed region.
Complex first_moment(const WeightedParticleMeasure& mu, const Disk& region);

/// Concatenation of two measures on a common chart.
WeightedParticleMeasure combine(const WeightedParticleMeasure& a, const WeightedParticleMeasure& b);

// ---------------------------------------------------------------------------
// Quadrature layouts

using PlanarDensity = std::function<double(Complex)>;

/// Tensor polar grid about `center`: nr uniform radial cells with nodes at
/// cell midpoints, ntheta uniform angular cells. Each weight is the density
/// at the node times the exact area of its cell, so a constant density gives
/// exact cell masses.
WeightedParticleMeasure polar_grid_measure(const PlanarDensity& density, Complex center,
                                           double radius, int nr, int ntheta,
                                           double chart_radius);

struct AdaptiveCubatureOptions {
  int initial_radial = 8;
  int initial_angular = 8;
  int max_depth = 48;          // bisections per axis
  double rel_tol = 1e-13;      // per cell, relative to the total mass estimate
};

/// Anisotropic adaptive polar cubature on the disk of given radius about the
/// origin. Cells carry 4x4 tensor Gauss-Legendre nodes; a cell is split along
/// the axis whose two-child estimate disagrees most with the parent. The
/// accepted cells' nodes become the particles.
WeightedParticleMeasure adaptive_polar_measure(const PlanarDensity& density, double radius,
                                               const AdaptiveCubatureOptions& options = {});

/// Same, after first grading the mesh so that cells within one cell size of
/// focus_points[i] are no larger than focus_scales[i]. Use this when the
/// density has spikes narrower than the initial cells, which the error
/// estimate alone cannot see.
WeightedParticleMeasure adaptive_polar_measure(const PlanarDensity& density, double radius,
                                               const AdaptiveCubatureOptions& options,
                                               std::span<const Complex> focus_points,
                                               std::span<const double> focus_scales);

/// CSV with header `re,im,weight`, 17 significant digits.
void write_csv(std::ostream& out, const WeightedParticleMeasure& mu);

// ---------------------------------------------------------------------------
// Scale ladder

/// Nested scales delta_k = delta_0 2^-k and tolerances
/// eps_k = (eps_bar / 4) 2^-k, k = 0..depth, validated at the working index
/// (largest k with 2k <= depth).
class ScaleLadder {
 public:
  ScaleLadder(std::vector<double> delta, std::vector<double> epsilon, double eps_bar);

  std::span<const double> delta() const { return delta_; }
  std::span<const double> epsilon() const { return epsilon_; }
  double delta(int k) const { return delta_.at(static_cast<std::size_t>(k)); }
  double epsilon(int k) const { return epsilon_.at(static_cast<std::size_t>(k)); }
  double eps_bar() const { return eps_bar_; }
  int depth() const { return static_cast<int>(delta_.size()) - 1; }
  int working_index() const { return depth() / 2; }

 private:
  std::vector<double> delta_;
  std::vector<double> epsilon_;
  double eps_bar_;
};

ScaleLadder build_scale_ladder(double delta0, double eps_bar, int depth);

// ---------------------------------------------------------------------------
// Concentration detection

enum class SiteKind { Smooth, Nodal };

struct ConcentrationSite {
  Complex location;
  double mass = 0.0;             // excess of the last measure at the finest scale
  SiteKind kind = SiteKind::Smooth;
  std::vector<double> scale_excess;  // excess at delta_1..delta_K, last measure
  std::vector<double> scale_slack;   // eps_m - |excess_m - mass|, may be negative
};

struct ConcentrationReport {
  std::vector<ConcentrationSite> sites;
  double threshold = 0.0;
  double separation = 0.0;
};

/// Finds points where the late members of `mus` keep at least eps_bar more
/// mass than `mu_limit` in every ladder ball about the point.
///
/// A site is nodal when it lies within delta_K of one of `nodal_points`,
/// in which case its location snaps to that nodal point. Fails with an
/// Algorithmic error when the last two members disagree at the finest scale
/// by eps_K or more about a site.
ConcentrationReport detect_concentrations(std::span<const WeightedParticleMeasure> mus,
                                          const WeightedParticleMeasure& mu_limit,
                                          const ScaleLadder& ladder,
                                          std::span<const Complex> nodal_points = {});

}  // namespace bubble
