#pragma once

// Cramer-Rao lower bound for unbiased channel estimates from holograms.
//
// With gamma_l = |mu_l|^2 / sigma^2 and
//   J(gamma) = int_0^inf gamma t e^{-gamma (1 + t)} I0(2 gamma sqrt t) R^2(2 gamma sqrt t) dt
// (the expectation of t R^2 under the normalized intensity t = E_I / |mu|^2),
// the complex information I_h and pseudo-information P_h of the augmented
// parameter [h; h*] are assembled per sample and block-inverted.

#include "holowb/types.hpp"
#include "holowb/whml.hpp"

namespace holowb {

enum class JMode { quadrature, approx };

// score_consistent: I_h = Phi* diag{(J - 1)|mu|^2} Phi^T / sigma^4,
//                   P_h = Phi* diag{(J - 1) mu^2}  Phi^H / sigma^4,
//   the covariance and pseudo-covariance of the zero-mean score dF/dh*.
// published:        I_h = Phi* (mu mu^H + diag{4 (J - 1)|mu|^2}) Phi^T / sigma^4,
//                   P_h = Phi* (mu mu^T + diag{4 (J - 1) mu^2})  Phi^H / sigma^4.
enum class InformationForm { score_consistent, published };

// J(gamma) by adaptive Gauss-Kronrod quadrature, absolute accuracy 1e-6.
double j_gamma_quadrature(double gamma);
// J(gamma) - 1, kept accurate for large gamma where J -> 1.
double j_gamma_excess(double gamma);

// 1 + 1/gamma - (1/4) sqrt(pi/gamma) e^{-gamma/2} [(1 + 1/gamma) I0(gamma/2) + I1(gamma/2)]
double j_gamma_approx(double gamma);

double j_gamma(double gamma, JMode mode);

struct InformationMatrices {
  CMatrix info;    // Hermitian
  CMatrix pseudo;  // symmetric
};

InformationMatrices information_matrices(const CVector& h, const LikelihoodContext& ctx, JMode mode,
                                         InformationForm form = InformationForm::score_consistent);

struct CrlbReport {
  CMatrix info;
  CMatrix pseudo;
  CMatrix bound;  // inverse of [[I, P], [P*, I*]], Schur blocks plus one refinement step
  CMatrix schur;  // R = I - P (I^-1)* P*
  double nmse_floor_db = std::numeric_limits<double>::quiet_NaN();
};

CrlbReport crlb_matrix(const CMatrix& info, const CMatrix& pseudo);

// 10 log10(tr(Re R^-1) / ||h||^2)
double crlb_nmse_floor(const CrlbReport& report, const CVector& h_true);

// information_matrices + crlb_matrix + crlb_nmse_floor.
CrlbReport crlb_report(const CVector& h_true, const LikelihoodContext& ctx, JMode mode,
                       InformationForm form = InformationForm::score_consistent);

}  // namespace holowb
