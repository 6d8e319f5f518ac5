#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bubble/measure.hpp"
#include "bubble/neck.hpp"
#include "bubble/profile.hpp"

namespace bubble {

/// R_{q,t}(x) = (1/t - 1)(x - q). Sends q to 0 and q + t/(1-t) to 1.
Complex cross_ratio(Complex q, double t, Complex x);
Mobius cross_ratio_map(Complex q, double t);

struct NeckScaleOptions {
  double tol = 0.0;  // mass residual; 0 means 1e-9 x mass away from q
  ProfileMode mode = ProfileMode::ShellInterpolated;
  double bandwidth = 0.01;  // relative, Mollified mode only
};

struct NeckScaleResult {
  double t = 0.0;
  double scale = 0.0;          // t / (1 - t), the radius of the cut circle
  double outside_mass = 0.0;   // f(t)
  double residual = 0.0;       // |f(t) - eps_bar|
  std::vector<std::pair<double, double>> history;  // (t, f(t)) in evaluation order
};

/// Bisection for the t in (0,1) at which the mass outside R_{q,t}^{-1}(unit
/// disk) equals eps_bar. Stops when the residual is within tol or the
/// bracket is narrower than 1e-14. Verifies f is nonincreasing over the
/// sampled history.
NeckScaleResult solve_neck_scale(const WeightedParticleMeasure& mu, Complex q, double eps_bar,
                                 const NeckScaleOptions& options = {});

/// First moment over the unit disk of the measure pushed forward by
/// R_{q,t_q}. Uses the mollified profile so that F is smooth in q.
Complex center_functional(const WeightedParticleMeasure& mu, Complex q, double eps_bar,
                          double bandwidth = 0.01);

struct BalancedCenterOptions {
  double tol = 1e-8;  // |F(q)| <= tol x mass
  double bandwidth = 0.01;
  int boundary_samples = 720;
  int subdivision_levels = 5;
  int max_newton_steps = 60;
};

struct BalancedCenter {
  Complex q;
  double t = 0.0;
  Complex r;                      // q + t / (1 - t)
  Complex F;                      // F(q)
  double mass = 0.0;              // mass of mu restricted to B_k
  int winding = 0;                // of F along the boundary circle
  double min_boundary_margin = 0.0;  // min over boundary samples of Re(F(q)/(-q))
  bool boundary_condition_holds = false;
  std::vector<Complex> zeros;     // every zero found, ordered by modulus
  bool multiple_zeros = false;
};

/// Zero of F in B(0, delta_{2k-1}) for mu restricted to B(0, delta_k).
/// Checks the concentration hypotheses at index k first.
BalancedCenter find_balanced_center(const WeightedParticleMeasure& mu, const ScaleLadder& ladder,
                                    int k, const BalancedCenterOptions& options = {});

struct Marking {
  int k_index = 0;       // position in the input sequence
  Complex q;
  Complex r;
  double t = 0.0;
  WeightedParticleMeasure renormalized;
  double outside_mass = 0.0;     // renormalized mass outside the unit disk
  Complex center_moment;         // first moment over the unit disk (step inclusion)
  Complex balanced_moment;       // F(q), mollified inclusion; zero for nodal markings
  double total_mass = 0.0;
  double scale_ratio = 0.0;      // |t_k| / |r_k|, nodal markings only
  bool multiple_zeros = false;
};

/// Case 1 markings for the late half of a sequence concentrating at the origin.
std::vector<Marking> mark_smooth_bubble(std::span<const WeightedParticleMeasure> mus,
                                        const ScaleLadder& ladder, double eps_bar,
                                        const BalancedCenterOptions& options = {});

/// Energy density of a neck pushed to the x-side nodal chart B(0, delta).
WeightedParticleMeasure build_nodal_pushforward(const CylinderField& neck, double delta);

/// Case 2 markings for the late half of a neck sequence: q fixed at the node.
std::vector<Marking> mark_nodal_bubble(std::span<const CylinderField> necks,
                                       const ScaleLadder& ladder, double eps_bar);

}  // namespace bubble
