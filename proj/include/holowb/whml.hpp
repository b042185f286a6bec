#pragma once

// Maximum-likelihood channel estimation from noisy holograms.
//
// Each intensity E_I[l] = |mu_l + w_l|^2 with w_l ~ CN(0, sigma^2) is
// non-central chi-squared with two degrees of freedom, mean
// mu_l = E_r(t_l) + Phi(t_l)^T h. The log-likelihood
//
//   F(h) = sum_l [ log I0(z_l) - (E_I[l] + |mu_l|^2) / sigma^2 ] - L log sigma^2,
//   z_l  = 2 sqrt(E_I[l]) |mu_l| / sigma^2,
//
// is maximized with Wirtinger-calculus Newton steps on the augmented
// variable [h; h*] and Armijo backtracking.

#include <functional>
#include <vector>

#include "holowb/channel.hpp"
#include "holowb/estimate.hpp"
#include "holowb/holography.hpp"
#include "holowb/types.hpp"

namespace holowb {

struct LikelihoodContext {
  std::vector<double> intensities;
  std::vector<double> times;
  CVector reference;  // E_r(t_l)
  CMatrix basis;      // N_f x L_tot, basis(k, l) = e^{j 2 pi f_k t_l}
  double noise_variance = 0.0;

  static LikelihoodContext from_record(const HologramRecord& record, const FrequencyGrid& grid);
  // Shares the sampling layout of `record` but swaps in new intensities.
  static LikelihoodContext with_intensities(const LikelihoodContext& base, std::vector<double> intensities);

  Eigen::Index samples() const { return basis.cols(); }
  Eigen::Index subcarriers() const { return basis.rows(); }
  CVector mean(const CVector& h) const { return reference + basis.transpose() * h; }
  double reference_scale() const;
  void validate() const;
};

CMatrix sample_basis(const FrequencyGrid& grid, const std::vector<double>& times);

struct SolverOptions {
  double armijo_alpha = 0.25;     // in (0, 0.5)
  double reduction = 0.5;         // in (0, 1)
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;
  double step_tolerance = 1e-8;
  double hessian_damping = 0.0;   // >= 0
  double mean_tolerance = 1e-12;  // |mu_l| below this times A_r counts as degenerate
  int max_reductions = 60;
  int max_perturbations = 8;

  void validate() const;
};

double log_likelihood(const CVector& h, const LikelihoodContext& ctx);

// dF/dh*, throws DegenerateMeanError when some |mu_l| <= tolerance * A_r.
CVector wirtinger_gradient(const CVector& h, const LikelihoodContext& ctx, double mean_tolerance = 1e-12);

struct HessianBlocks {
  CMatrix hh;    // d^2F / dh dh^T
  CMatrix hhc;   // d^2F / dh dh^H
  CMatrix hch;   // d^2F / dh* dh^T
  CMatrix hchc;  // d^2F / dh* dh^H

  // [[hch, hchc], [hh, hhc]], the matrix acting on [dh; dh*].
  CMatrix augmented() const;
};

HessianBlocks hessian_blocks(const CVector& h, const LikelihoodContext& ctx, double mean_tolerance = 1e-12);

struct NewtonStep {
  CVector step;
  double damping = 0.0;       // lambda actually used
  bool gradient_fallback = false;
  double conjugate_residual = 0.0;  // ||x_lower - conj(x_upper)|| / ||x_upper|| before symmetrizing
};

// Solves (M - lambda I) [dh; dh*] = -[g; g*] with M the augmented Hessian.
// A singular system is retried with escalating lambda; a non-ascent
// solution falls back to dh = g.
NewtonStep newton_step(const CVector& gradient, const HessianBlocks& blocks, double damping);

struct LineSearch {
  double step = 0.0;  // 0 signals stagnation
  double value = 0.0; // objective at the accepted step
  int reductions = 0;
};

// Backtracking from q = 1 by factor beta until
// f(q) >= f0 + alpha q slope. Throws Errc::not_ascent if slope <= 0.
LineSearch backtrack(const std::function<double(double)>& objective, double f0, double slope,
                     double alpha, double beta, int max_reductions);

// Armijo step length along dh for the log-likelihood.
double armijo_search(const CVector& h, const CVector& dh, const CVector& gradient,
                     const LikelihoodContext& ctx, const SolverOptions& opts);

Estimate whml_estimate(const CVector& init, const LikelihoodContext& ctx, const SolverOptions& opts = {});

}  // namespace holowb
