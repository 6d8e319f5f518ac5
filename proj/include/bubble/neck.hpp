#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bubble/core.hpp"

namespace bubble {

enum class TargetKind {
  Sphere,    // unit sphere in R^3
  FlatTorus  // Clifford torus S^1(radius1) x S^1(radius2) in R^4
};

struct TargetDescriptor {
  TargetKind kind = TargetKind::Sphere;
  double radius1 = 1.0;
  double radius2 = 1.0;

  int dimension() const { return kind == TargetKind::Sphere ? 3 : 4; }
  /// Distance of p from the target submanifold.
  double defect(std::span<const double> p) const;
};

/// Link to the nodal chart x = sqrt(t_k) e^{t + i theta} over |x|, |y| <= delta.
struct NodalMeta {
  Complex t_k;
  double delta = 0.0;
};

/// A map sampled on a uniform grid over [t_min, t_max] x S^1.
///
/// Rows are t-slices (nt >= 2, endpoints included), columns are the ntheta
/// angles 2 pi j / ntheta. Values and derivatives are stored row-major with
/// `dim` components per sample.
class CylinderField {
 public:
  using PointFn = std::function<void(double t, double theta, std::span<double> out)>;

  CylinderField(double t_min, double t_max, int nt, int ntheta, TargetDescriptor target,
                std::vector<double> values, std::vector<double> d_t, std::vector<double> d_theta,
                bool analytic_derivatives, std::optional<NodalMeta> meta = std::nullopt);

  /// Samples `fn` on the symmetric cylinder [-T, T]. Without `d_t`/`d_theta`
  /// the derivatives are centered finite differences (one-sided at the ends).
  static CylinderField sample(double T, int nt, int ntheta, TargetDescriptor target,
                              const PointFn& fn, const PointFn& d_t = {},
                              const PointFn& d_theta = {},
                              std::optional<NodalMeta> meta = std::nullopt);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double half_length() const { return 0.5 * (t_max_ - t_min_); }
  int nt() const { return nt_; }
  int ntheta() const { return ntheta_; }
  int dim() const { return target_.dimension(); }
  double dt() const { return (t_max_ - t_min_) / (nt_ - 1); }
  double dtheta() const { return kTwoPi / ntheta_; }
  double t_at(int i) const { return t_min_ + i * dt(); }
  const TargetDescriptor& target() const { return target_; }
  const std::optional<NodalMeta>& nodal_meta() const { return meta_; }
  bool analytic_derivatives() const { return analytic_; }

  std::span<const double> value(int i, int j) const { return at(values_, i, j); }
  std::span<const double> d_t(int i, int j) const { return at(d_t_, i, j); }
  std::span<const double> d_theta(int i, int j) const { return at(d_theta_, i, j); }

  /// Slices with t in [lo, hi] (grid-snapped, tolerance 1e-9 of a step).
  /// Nodal metadata survives only for symmetric restrictions, with delta
  /// rescaled so that the new half-length is ln(delta / sqrt|t_k|).
  CylinderField restrict(double lo, double hi) const;

  /// Largest deviation between stored derivatives and centered finite
  /// differences of positions, relative to the largest derivative.
  double derivative_consistency() const;

 private:
  std::span<const double> at(const std::vector<double>& v, int i, int j) const {
    const std::size_t d = static_cast<std::size_t>(dim());
    return {v.data() + (static_cast<std::size_t>(i) * ntheta_ + j) * d, d};
  }

  double t_min_, t_max_;
  int nt_, ntheta_;
  TargetDescriptor target_;
  std::vector<double> values_, d_t_, d_theta_;
  bool analytic_;
  std::optional<NodalMeta> meta_;
};

struct NeckDiagnostics {
  double half_length = 0.0;
  double alpha = 0.0;
  double alpha_deviation = 0.0;
  std::vector<double> t;
  std::vector<double> theta;        // Theta(t) = int |f_theta|^2
  std::vector<double> alpha_slice;  // 1/2 int (|f_t|^2 - |f_theta|^2)
  double energy = 0.0;
  double avg_length = 0.0;
  double diameter = 0.0;
  double max_arc_length = 0.0;      // largest closed-curve length of a slice
  double pohozaev_residual = 0.0;   // max_t |int|f_t|^2 - Theta| / (sum), 0 when both vanish
};

NeckDiagnostics diagnostics(const CylinderField& field);

/// CSV with header `t,theta,alpha_slice`.
void write_theta_csv(std::ostream& out, const NeckDiagnostics& d);

/// A map on an annulus sampled on a polar grid: rings at `radii` (increasing),
/// nphi uniform angles. Derivatives in r and phi are optional.
struct PolarMapSamples {
  std::vector<double> radii;
  int nphi = 0;
  int dim = 0;
  std::vector<double> values;
  std::vector<double> d_r;
  std::vector<double> d_phi;
};

/// max over the requested radii of |int |F_phi|^2 - r^2 int |F_r|^2| divided by
/// the sum of both terms (0 when both vanish). Ring integrals are
/// interpolated linearly in r between sampled rings.
double pohozaev_residual(const PolarMapSamples& samples, std::span<const double> radii);

struct ThetaBoundsReport {
  double T1 = 0.0, T2 = 0.0;
  double convexity_slack = 0.0;      // min over interior slices of Theta'' - Theta
  double min_theta = 0.0;
  double integral_slack = 0.0;       // 2(Theta(T1) + Theta(T2)) - int Theta
  double sqrt_integral_slack = 0.0;  // 4(sqrt Theta(T1) + sqrt Theta(T2)) - int sqrt Theta
  bool positive = false;             // Theta > 0 everywhere on [T1, T2]
  bool zero_field = false;           // Theta == 0 identically (boundary case)
  double energy = 0.0;
  double threshold = 0.0;
  bool precondition_exceeded = false;  // energy > threshold
  bool convexity_holds() const { return convexity_slack >= 0.0; }
  bool all_hold() const {
    return positive && convexity_holds() && integral_slack >= 0.0 && sqrt_integral_slack >= 0.0;
  }
};

ThetaBoundsReport theta_bounds_check(const CylinderField& field, double T1, double T2,
                                     double energy_threshold = 0.5);

struct ZeroNeckRow {
  double delta = 0.0;
  double energy = 0.0;      // sup over late necks
  double diameter = 0.0;    // sup over late necks
  double predicted = 0.0;   // sup over late necks of |2 T^delta alpha|
  int measured = 0;         // late necks long enough to restrict
};

struct ZeroNeckResult {
  bool pass = false;
  std::vector<ZeroNeckRow> rows;
  int late_from = 0;  // first index counted as late
};

/// delta 2^-j for j = 0..halvings.
std::vector<double> zero_neck_schedule(double delta, int halvings = 7);

/// For each delta in the schedule, restricts every late neck to the
/// sub-cylinder |t| <= ln(delta / sqrt|t_k|). PASS iff for some delta every
/// late neck could be restricted and energy and diameter both fall below eps.
ZeroNeckResult zero_neck_test(std::span<const CylinderField> necks, double eps,
                              std::span<const double> delta_schedule);

}  // namespace bubble
