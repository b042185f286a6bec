#include "holowb/whml.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "holowb/error.hpp"
#include "holowb/specfun.hpp"

namespace holowb {

CMatrix sample_basis(const FrequencyGrid& grid, const std::vector<double>& times) {
  CMatrix basis(grid.subcarriers, static_cast<Eigen::Index>(times.size()));
  for (Eigen::Index l = 0; l < basis.cols(); ++l) {
    const double t = times[static_cast<std::size_t>(l)];
    for (int k = 0; k < grid.subcarriers; ++k) basis(k, l) = phasor_product(grid.frequency(k), t);
  }
  return basis;
}

LikelihoodContext LikelihoodContext::from_record(const HologramRecord& record, const FrequencyGrid& grid) {
  LikelihoodContext ctx;
  ctx.intensities = record.intensities;
  ctx.times = record.times;
  ctx.reference.resize(static_cast<Eigen::Index>(record.times.size()));
  for (std::size_t l = 0; l < record.times.size(); ++l) {
    ctx.reference(static_cast<Eigen::Index>(l)) = reference_wave(record.reference, record.times[l]);
  }
  ctx.basis = sample_basis(grid, record.times);
  ctx.noise_variance = record.noise_variance;
  return ctx;
}

LikelihoodContext LikelihoodContext::with_intensities(const LikelihoodContext& base,
                                                      std::vector<double> intensities) {
  LikelihoodContext ctx = base;
  ctx.intensities = std::move(intensities);
  return ctx;
}

double LikelihoodContext::reference_scale() const {
  return reference.size() > 0 ? reference.cwiseAbs().maxCoeff() : 0.0;
}

void LikelihoodContext::validate() const {
  if (!(noise_variance > 0.0)) throw Error(Errc::domain, "likelihood: noise variance must be positive");
  if (samples() < 1) throw Error(Errc::dimension, "likelihood: need at least one sample");
  if (static_cast<Eigen::Index>(intensities.size()) != samples() || reference.size() != samples()) {
    throw Error(Errc::dimension, "likelihood: intensities, reference and basis disagree in length");
  }
  for (double e : intensities) {
    if (!(e >= 0.0)) throw Error(Errc::domain, "likelihood: intensities must be nonnegative");
  }
}

void SolverOptions::validate() const {
  if (!(armijo_alpha > 0.0 && armijo_alpha < 0.5)) throw Error(Errc::config, "solver: armijo_alpha must lie in (0, 0.5)");
  if (!(reduction > 0.0 && reduction < 1.0)) throw Error(Errc::config, "solver: reduction must lie in (0, 1)");
  if (max_iterations < 0) throw Error(Errc::config, "solver: max_iterations must be nonnegative");
  if (!(hessian_damping >= 0.0)) throw Error(Errc::config, "solver: hessian_damping must be nonnegative");
}

namespace {

// Per-sample quantities shared by the gradient and the Hessian.
struct SampleTerms {
  CVector mu;
  Eigen::ArrayXd magnitude;
  Eigen::ArrayXd z;
  Eigen::ArrayXd ratio;       // R(z_l)
  Eigen::ArrayXd complement;  // 1 - R(z_l)
};

SampleTerms sample_terms(const CVector& h, const LikelihoodContext& ctx, double mean_tolerance) {
  ctx.validate();
  if (h.size() != ctx.subcarriers()) throw Error(Errc::dimension, "channel vector length differs from basis rows");
  const Eigen::Index n = ctx.samples();
  SampleTerms s{ctx.mean(h), Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  const double floor = mean_tolerance * std::max(ctx.reference_scale(), std::numeric_limits<double>::min());
  for (Eigen::Index l = 0; l < n; ++l) {
    const double mag = std::abs(s.mu(l));
    if (!(mag > floor)) {
      throw DegenerateMeanError("likelihood: |mu_l| vanished at sample " + std::to_string(l), static_cast<int>(l));
    }
    const double e = ctx.intensities[static_cast<std::size_t>(l)];
    s.magnitude(l) = mag;
    s.z(l) = 2.0 * std::sqrt(e) * mag / ctx.noise_variance;
    s.complement(l) = specfun::bessel_ratio_complement(s.z(l));
    s.ratio(l) = 1.0 - s.complement(l);
  }
  return s;
}

}  // namespace

double log_likelihood(const CVector& h, const LikelihoodContext& ctx) {
  ctx.validate();
  if (h.size() != ctx.subcarriers()) throw Error(Errc::dimension, "channel vector length differs from basis rows");
  const CVector mu = ctx.mean(h);
  const double s2 = ctx.noise_variance;
  double acc = 0.0;
  for (Eigen::Index l = 0; l < mu.size(); ++l) {
    const double e = ctx.intensities[static_cast<std::size_t>(l)];
    const double mag = std::abs(mu(l));
    acc += specfun::log_bessel_i0(2.0 * std::sqrt(e) * mag / s2) - (e + mag * mag) / s2;
  }
  return acc - static_cast<double>(mu.size()) * std::log(s2);
}

CVector wirtinger_gradient(const CVector& h, const LikelihoodContext& ctx, double mean_tolerance) {
  const auto s = sample_terms(h, ctx, mean_tolerance);
  const double s2 = ctx.noise_variance;
  CVector weighted(s.mu.size());
  for (Eigen::Index l = 0; l < s.mu.size(); ++l) {
    // sqrt(E) R / |mu| - 1, split so the near-truth cancellation stays small
    const double root = std::sqrt(ctx.intensities[static_cast<std::size_t>(l)]);
    const double coeff = ((root - s.magnitude(l)) - root * s.complement(l)) / s.magnitude(l);
    weighted(l) = (coeff / s2) * s.mu(l);
  }
  return ctx.basis.conjugate() * weighted;
}

CMatrix HessianBlocks::augmented() const {
  const Eigen::Index n = hh.rows();
  CMatrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = hch;
  m.topRightCorner(n, n) = hchc;
  m.bottomLeftCorner(n, n) = hh;
  m.bottomRightCorner(n, n) = hhc;
  return m;
}

HessianBlocks hessian_blocks(const CVector& h, const LikelihoodContext& ctx, double mean_tolerance) {
  const auto s = sample_terms(h, ctx, mean_tolerance);
  const double s2 = ctx.noise_variance;
  const Eigen::Index n = s.mu.size();
  Eigen::VectorXd mixed(n);  // diagonal of the h*, h coupling
  CVector pure(n);           // diagonal of the h*, h* coupling (conjugated form)
  for (Eigen::Index l = 0; l < n; ++l) {
    const double e = ctx.intensities[static_cast<std::size_t>(l)];
    const double c = s.complement(l);
    const double one_minus_r2 = c * (2.0 - c);
    const double z = s.z(l);
    mixed(l) = (e * one_minus_r2 - s2) / (s2 * s2);
    const cplx mu_conj = std::conj(s.mu(l));
    pure(l) = (z * z * one_minus_r2 - 2.0 * z * s.ratio(l)) / (4.0 * mu_conj * mu_conj);
  }
  HessianBlocks b;
  const CMatrix phi_conj = ctx.basis.conjugate();
  b.hch = phi_conj * mixed.asDiagonal() * ctx.basis.transpose();
  b.hhc = b.hch.conjugate();
  b.hchc = phi_conj * pure.asDiagonal() * ctx.basis.adjoint();
  b.hh = b.hchc.conjugate();
  return b;
}

NewtonStep newton_step(const CVector& gradient, const HessianBlocks& blocks, double damping) {
  const Eigen::Index n = gradient.size();
  if (blocks.hh.rows() != n || blocks.hch.rows() != n) throw Error(Errc::dimension, "newton_step: block sizes differ from gradient");
  if (damping < 0.0) throw Error(Errc::config, "newton_step: damping must be nonnegative");

  const CMatrix m = blocks.augmented();
  CVector rhs(2 * n);
  rhs << -gradient, -gradient.conjugate();

  const double diag_scale = std::max(m.diagonal().cwiseAbs().mean(), std::numeric_limits<double>::min());
  double lambda = damping;
  constexpr int kMaxRetries = 6;
  CVector x;
  bool solved = false;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    CMatrix shifted = m;
    shifted.diagonal().array() -= lambda;
    Eigen::PartialPivLU<CMatrix> lu(shifted);
    const double rcond = lu.rcond();
    if (std::isfinite(rcond) && rcond > 1e-14) {
      x = lu.solve(rhs);
      if (x.allFinite()) {
        solved = true;
        break;
      }
    }
    lambda = lambda == 0.0 ? 1e-8 * diag_scale : lambda * 10.0;
  }
  if (!solved) throw Error(Errc::singular_system, "newton_step: augmented Hessian is singular");

  NewtonStep out;
  out.damping = lambda;
  const CVector upper = x.head(n);
  const CVector lower = x.tail(n);
  const double norm = upper.norm();
  out.conjugate_residual = norm > 0.0 ? (lower - upper.conjugate()).norm() / norm : 0.0;
  out.step = 0.5 * (upper + lower.conjugate());

  const double slope = 2.0 * gradient.dot(out.step).real();  // dot conjugates its first argument
  if (!(slope > 0.0)) {
    out.step = gradient;
    out.gradient_fallback = true;
  }
  return out;
}

LineSearch backtrack(const std::function<double(double)>& objective, double f0, double slope,
                     double alpha, double beta, int max_reductions) {
  if (!(slope > 0.0)) throw Error(Errc::not_ascent, "line search: direction is not an ascent direction");
  double q = 1.0;
  for (int k = 0; k <= max_reductions; ++k) {
    const double f = objective(q);
    if (f >= f0 + alpha * q * slope) return {q, f, k};
    q *= beta;
  }
  return {0.0, f0, max_reductions};
}

double armijo_search(const CVector& h, const CVector& dh, const CVector& gradient,
                     const LikelihoodContext& ctx, const SolverOptions& opts) {
  opts.validate();
  const double f0 = log_likelihood(h, ctx);
  const double slope = 2.0 * gradient.dot(dh).real();
  const auto ls = backtrack([&](double q) { return log_likelihood(h + q * dh, ctx); }, f0, slope,
                            opts.armijo_alpha, opts.reduction, opts.max_reductions);
  return ls.step;
}

Estimate whml_estimate(const CVector& init, const LikelihoodContext& ctx, const SolverOptions& opts) {
  opts.validate();
  ctx.validate();
  if (init.size() != ctx.subcarriers()) throw Error(Errc::dimension, "whml_estimate: initial estimate has wrong length");

  Estimate est;
  est.h = init;
  double f = log_likelihood(est.h, ctx);
  est.likelihood_trace.push_back(f);
  est.termination = Termination::max_iterations;

  while (est.iterations < opts.max_iterations) {
    CVector g;
    HessianBlocks blocks;
    try {
      g = wirtinger_gradient(est.h, ctx, opts.mean_tolerance);
      blocks = hessian_blocks(est.h, ctx, opts.mean_tolerance);
    } catch (const DegenerateMeanError& e) {
      if (est.perturbations >= opts.max_perturbations) throw;
      ++est.perturbations;
      const auto l = static_cast<Eigen::Index>(e.sample());
      const CVector dir = ctx.basis.col(l).conjugate();
      est.h += (1e-9 * ctx.reference_scale() / dir.norm()) * dir;
      // the nudge is not an accepted step; it only moves the baseline
      f = log_likelihood(est.h, ctx);
      est.likelihood_trace.back() = f;
      continue;
    }
    if (g.norm() < opts.gradient_tolerance) {
      est.termination = Termination::gradient;
      break;
    }
    const auto step = newton_step(g, blocks, opts.hessian_damping);
    const double slope = 2.0 * g.dot(step.step).real();
    const CVector& dh = step.step;
    const auto ls = backtrack([&](double q) { return log_likelihood(est.h + q * dh, ctx); }, f, slope,
                              opts.armijo_alpha, opts.reduction, opts.max_reductions);
    if (ls.step == 0.0) {
      est.termination = Termination::stagnation;
      break;
    }
    const CVector update = ls.step * dh;
    est.h += update;
    f = ls.value;
    est.likelihood_trace.push_back(f);
    ++est.iterations;
    if (update.norm() / std::max(1.0, est.h.norm()) < opts.step_tolerance) {
      est.termination = Termination::step;
      break;
    }
  }
  est.log_likelihood = f;
  return est;
}

}  // namespace holowb
