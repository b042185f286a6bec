#pragma once

// Closed-form recovery of the object wave E_o(t) from the two intensities
// E_I(t) = |E_r + E_o|^2 and E_I(t + T_s) = |e^{j delta} E_r + E_o|^2.
//
// Geometrically E_o sits on the intersection of the circles of radius
// sqrt(E_I1) around -E_r and radius sqrt(E_I2) around -e^{j delta} E_r.
// With |E_o| < A_r the wanted intersection is the one nearer the origin.

#include "holowb/types.hpp"

namespace holowb {

struct RecoveryContext {
  double ref_amplitude = 1.0;  // A_r
  double phase_step = 0.0;     // delta
  cplx reference{1.0, 0.0};    // E_r(t) at the first sample instant
  double sin_tolerance = 1e-6;
  double clamp_tolerance = 1e-9;

  // Q = 2 |sin(delta / 2)| A_r, the distance between the circle centers.
  double center_distance() const;

  // Throws Errc::ill_conditioned_delta when |sin delta| <= sin_tolerance,
  // Errc::domain when A_r <= 0.
  void validate() const;
};

// Quadratic-root form: solves u' b^2 + v' b + w' = 0 for b = A_o^2 + A_r^2
// (minus root) and rebuilds A_o cos(phi), A_o sin(phi). Throws
// Errc::inconsistent_intensities when the discriminant is negative beyond
// the clamp tolerance.
cplx recover_quadratic(double e_i1, double e_i2, const RecoveryContext& ctx);

// Circle-intersection form. Evaluates both intersections and returns the
// one of smaller modulus. Throws Errc::circles_disjoint when the radicand
// is negative beyond the clamp tolerance.
cplx recover_geometric(double e_i1, double e_i2, const RecoveryContext& ctx);

struct GeometricRecovery {
  cplx value;
  bool clamped = false;  // radicand was negative beyond tolerance and forced to zero
};

// As recover_geometric, but a disjoint circle pair is projected onto the
// tangent point instead of raising.
GeometricRecovery recover_geometric_clamped(double e_i1, double e_i2, const RecoveryContext& ctx);

}  // namespace holowb
