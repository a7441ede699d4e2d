#pragma once

// Stencil geometries (ball, annulus, shrinking annuli, radial weights) and
// their derived constants: the time-rescaling constant c_A and the first/
// second one-coordinate moments k1, k2.

#include <functional>
#include <string>

#include "medflow/errors.hpp"

namespace medflow {

using RadialFn = std::function<double(double)>;

struct KernelSpec {
  enum class Shape { Ball, Annulus, ShrinkingAnnulus, RadialWeight };

  Shape shape = Shape::Ball;
  double r = 0.0;        // stencil radius (scale of the kernel)
  double kappa = 0.0;    // Annulus only, in [0,1)
  RadialFn kappa_of_r;   // ShrinkingAnnulus schedule; empty -> 1 - sqrt(r)
  RadialFn radial;       // RadialWeight: K(rho) on the unscaled radius

  static KernelSpec ball(double r) { return {Shape::Ball, r, 0.0, nullptr, nullptr}; }
  static KernelSpec annulus(double kappa, double r);
  static KernelSpec shrinking(double r, RadialFn schedule = nullptr);
  static KernelSpec radial_weight(RadialFn k, double r);

  // inner/outer radii of the indicator stencil at this spec's r
  double kappa_at_r() const;
  bool is_indicator() const { return shape != Shape::RadialWeight; }
};

struct KernelMoments {
  double c_A = 0.0;     // one scheme step advances physical MCF time by c_A * h
  double k1 = 0.0;      // mean |x1| moment of the unit-mass kernel
  double k2 = 0.0;      // mean x1^2 moment of the unit-mass kernel
  double omega_d = 0.0; // unit-ball volume
};

// Closed forms for Ball/Annulus; adaptive quadrature (rel. tol 1e-10) for
// radial weights. Kernels are normalized to unit mass first, which makes the
// mean-integral and full-integral readings of k2 coincide.
KernelMoments moments(const KernelSpec& spec, int d);

struct Admissibility {
  bool ok = false;
  std::string clause;  // violated clause when !ok
};

// Sampled check of the admissible-kernel conditions: K(0) > 0 and continuity
// at 0, non-increasing, finite (d+1)-th radial moment (partial sums Cauchy at
// 1e-8).
Admissibility admissible(const RadialFn& k, int d);

}  // namespace medflow
