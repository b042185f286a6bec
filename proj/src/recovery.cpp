#include "holowb/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "holowb/error.hpp"

namespace holowb {

double RecoveryContext::center_distance() const {
  return 2.0 * std::abs(std::sin(0.5 * phase_step)) * ref_amplitude;
}

void RecoveryContext::validate() const {
  if (!(ref_amplitude > 0.0)) throw Error(Errc::domain, "recovery: reference amplitude must be positive");
  if (!(std::abs(std::sin(phase_step)) > sin_tolerance)) {
    throw Error(Errc::ill_conditioned_delta,
                "recovery: |sin(delta)| too small, the two holograms carry no phase information");
  }
}

cplx recover_quadratic(double e_i1, double e_i2, const RecoveryContext& ctx) {
  ctx.validate();
  const double a_r = ctx.ref_amplitude;
  const double cos_d = std::cos(ctx.phase_step);
  const double sin_d = std::sin(ctx.phase_step);
  const double sin2 = sin_d * sin_d;
  const double a_r2 = a_r * a_r;
  const double half = std::sin(0.5 * ctx.phase_step);
  const double one_minus_cos = 2.0 * half * half;

  const double u = 2.0 * one_minus_cos;
  const double v = -u * (e_i1 + e_i2) - 4.0 * a_r2 * sin2;
  const double diff = e_i1 - e_i2;
  // e1^2 + e2^2 - 2 e1 e2 cos + 4 A^4 sin^2, as a sum of nonnegative terms
  const double w = diff * diff + 2.0 * e_i1 * e_i2 * one_minus_cos + 4.0 * a_r2 * a_r2 * sin2;

  // v^2 - 4uw expanded: the sin^2 factor comes out exactly, which keeps the
  // cancellation at the scale of the bracket instead of v^2 when delta ~ pi
  const double q2 = u * a_r2;
  double disc = 4.0 * sin2 * (2.0 * q2 * (e_i1 + e_i2) - diff * diff - q2 * q2);
  if (disc < 0.0) {
    if (disc < -ctx.clamp_tolerance * v * v) {
      throw Error(Errc::inconsistent_intensities,
                  "recover_quadratic: negative discriminant, intensities are not jointly realizable");
    }
    disc = 0.0;
  }
  // Smaller root b = (-v - sqrt(disc)) / (2u), written as 2w / (-v + sqrt(disc))
  // to avoid cancellation when u is small. -v > 0 always.
  const double b = 2.0 * w / (-v + std::sqrt(disc));

  const double a_cos = (e_i1 - b) / (2.0 * a_r);
  const double a_sin = (e_i2 - e_i1 * cos_d - one_minus_cos * b) / (2.0 * a_r * sin_d);
  return cplx(a_cos, a_sin) * (ctx.reference / a_r);
}

namespace {

struct Intersection {
  cplx near;
  bool clamped;
};

Intersection intersect(double e_i1, double e_i2, const RecoveryContext& ctx, bool allow_clamp) {
  ctx.validate();
  const double q = ctx.center_distance();
  const double q2 = q * q;
  const double s1 = (e_i1 - e_i2) / (2.0 * q2);
  const double spread = (e_i1 + e_i2) / (2.0 * q2);
  double radicand = spread - s1 * s1 - 0.25;
  bool clamped = false;
  if (radicand < 0.0) {
    if (radicand < -ctx.clamp_tolerance * std::max(1.0, spread)) {
      if (!allow_clamp) {
        throw Error(Errc::circles_disjoint, "recover_geometric: the hologram circles do not intersect");
      }
      clamped = true;
    }
    radicand = 0.0;
  }
  const double s2 = std::sqrt(radicand);
  const cplx rot = std::polar(1.0, ctx.phase_step);
  const cplx chord = 1.0 - rot;
  const cplx mid = 0.5 * (rot + 1.0);
  const cplx j{0.0, 1.0};
  const cplx plus = (chord * (s1 - j * s2) - mid) * ctx.reference;
  const cplx minus = (chord * (s1 + j * s2) - mid) * ctx.reference;
  return {std::abs(plus) <= std::abs(minus) ? plus : minus, clamped};
}

}  // namespace

cplx recover_geometric(double e_i1, double e_i2, const RecoveryContext& ctx) {
  return intersect(e_i1, e_i2, ctx, false).near;
}

GeometricRecovery recover_geometric_clamped(double e_i1, double e_i2, const RecoveryContext& ctx) {
  const auto r = intersect(e_i1, e_i2, ctx, true);
  return {r.near, r.clamped};
}

}  // namespace holowb
