#pragma once

#include <utility>
#include <vector>

#include "bubble/measure.hpp"

namespace bubble {

/// How mass outside a disk about q is counted as a function of its radius.
enum class ProfileMode {
  /// Raw particle count; atoms on the circle count as outside, so the
  /// profile is right-continuous in the radius.
  Step,
  /// Particles grouped into shells of equal distance; the outside mass is
  /// pinned at the midpoints between shells and joined by a monotone cubic.
  /// Exact for densities whose radial CDF is quadratic between knots. A
  /// measure with a single shell keeps the step profile.
  ShellInterpolated,
  /// Each particle counted outside with weight Phi((d - s) / (bandwidth s)).
  Mollified
};

/// Mass of a particle measure outside B(q, s) as a nonincreasing function of s.
class RadialMassProfile {
 public:
  RadialMassProfile(const WeightedParticleMeasure& mu, Complex q, ProfileMode mode,
                    double bandwidth = 0.01);

  /// Mass outside the disk of radius s about q.
  double outside(double s) const;
  /// Mass away from q itself (atoms exactly at q are excluded).
  double spread_mass() const { return spread_; }
  ProfileMode mode() const { return mode_; }
  double bandwidth() const { return bandwidth_; }

  /// Mollified mode: outside(s) and its derivative in s.
  std::pair<double, double> outside_and_slope(double s) const;

  /// Distance of the particle at which the raw count outside first drops to
  /// `level` or below; a starting guess for the crossing of any mode.
  double step_crossing(double level) const;

  /// Fraction of a particle at distance d counted inside radius s.
  double inclusion(double d, double s) const;

 private:
  double step_outside(double s) const;
  double mollified_outside(double s) const;
  double shell_outside(double s) const;

  ProfileMode mode_;
  double bandwidth_;
  double spread_ = 0.0;
  std::vector<double> dist_;     // sorted ascending, atoms at q removed
  std::vector<double> suffix_;   // suffix_[i] = sum of weights from i on
  std::vector<double> weight_;   // weights in sorted order
  // Shell interpolation data.
  std::vector<double> knot_;
  std::vector<double> value_;
  std::vector<double> slope_;
};

}  // namespace bubble
