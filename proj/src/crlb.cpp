#include "holowb/crlb.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "holowb/error.hpp"
#include "holowb/specfun.hpp"

namespace holowb {

namespace {

constexpr double kQuadratureAccuracy = 1e-6;

void require_gamma(double gamma, const char* who) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(Errc::domain, std::string(who) + ": gamma must be positive and finite");
  }
}

// Integrates 2 gamma s^3 e^{-gamma (1 + s^2)} I0(2 gamma s) g(2 gamma s) over s = sqrt(t) >= 0.
// The density factor is folded into e^{-gamma (1 - s)^2} times the scaled I0, which peaks
// near s = 1 with width ~ 1 / sqrt(2 gamma).
template <class G>
double normalized_expectation(double gamma, G&& g, const char* who) {
  const auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double z = 2.0 * gamma * s;
    const double log_density = std::log(specfun::bessel_i0_scaled(z)) - gamma * (1.0 - s) * (1.0 - s);
    return 2.0 * gamma * s * s * s * std::exp(log_density) * g(z);
  };

  // beyond these the integrand sits under ~e^{-50} of its peak
  const double reach = std::sqrt((50.0 + 2.0 * std::log1p(1.0 / gamma)) / gamma);
  const double lo = std::max(0.0, 1.0 - reach);
  const double hi = 1.0 + reach;
  const double w = 1.0 / std::sqrt(2.0 * gamma);
  std::vector<double> cuts{lo, 1.0 - 8.0 * w, 1.0 - 2.0 * w, 1.0, 1.0 + 2.0 * w, 1.0 + 8.0 * w, hi};
  for (double& c : cuts) c = std::clamp(c, lo, hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 12,
                                                                            1e-10, &err);
    // the reported estimate lives on the rescaled [-1, 1] interval
    total_error += err * 0.5 * (cuts[i + 1] - cuts[i]);
  }
  const double absolute_error = total_error;
  if (!std::isfinite(total) || absolute_error > kQuadratureAccuracy) {
    throw QuadratureError(std::string(who) + ": quadrature missed its accuracy target", total, absolute_error);
  }
  return total;
}

}  // namespace

double j_gamma_excess(double gamma) {
  require_gamma(gamma, "j_gamma");
  if (gamma < 1.0) {
    const double j = normalized_expectation(
        gamma,
        [](double z) {
          const double r = 1.0 - specfun::bessel_ratio_complement(z);
          return r * r;
        },
        "j_gamma");
    return j - 1.0;
  }
  // E[t] = 1 + 1/gamma exactly, so J - 1 = 1/gamma - E[t (1 - R^2)]
  const double deficit = normalized_expectation(
      gamma,
      [](double z) {
        const double c = specfun::bessel_ratio_complement(z);
        return c * (2.0 - c);
      },
      "j_gamma");
  return 1.0 / gamma - deficit;
}

double j_gamma_quadrature(double gamma) { return 1.0 + j_gamma_excess(gamma); }

double j_gamma_approx(double gamma) {
  require_gamma(gamma, "j_gamma_approx");
  const double x = 0.5 * gamma;
  const double bracket = (1.0 + 1.0 / gamma) * specfun::bessel_i0_scaled(x) + specfun::bessel_i1_scaled(x);
  return 1.0 + 1.0 / gamma - 0.25 * std::sqrt(std::numbers::pi / gamma) * bracket;
}

double j_gamma(double gamma, JMode mode) {
  return mode == JMode::quadrature ? j_gamma_quadrature(gamma) : j_gamma_approx(gamma);
}

InformationMatrices information_matrices(const CVector& h, const LikelihoodContext& ctx, JMode mode,
                                         InformationForm form) {
  ctx.validate();
  if (h.size() != ctx.subcarriers()) throw Error(Errc::dimension, "information_matrices: channel length differs from basis rows");
  const double s2 = ctx.noise_variance;
  const CVector mu = ctx.mean(h);
  const double scale = form == InformationForm::published ? 4.0 : 1.0;

  Eigen::VectorXd weight(mu.size());  // diag entries of J_I, up to the form's scale
  CVector pseudo_weight(mu.size());
  for (Eigen::Index l = 0; l < mu.size(); ++l) {
    const double mag2 = std::norm(mu(l));
    if (!(mag2 > 0.0)) {
      throw DegenerateMeanError("information_matrices: mu_l vanished at sample " + std::to_string(l), static_cast<int>(l));
    }
    const double gamma = mag2 / s2;
    const double excess = mode == JMode::quadrature ? j_gamma_excess(gamma) : j_gamma_approx(gamma) - 1.0;
    weight(l) = scale * excess * mag2;
    pseudo_weight(l) = scale * excess * mu(l) * mu(l);
  }

  const double inv_s4 = 1.0 / (s2 * s2);
  const CMatrix phi_conj = ctx.basis.conjugate();
  InformationMatrices out;
  out.info = inv_s4 * (phi_conj * weight.asDiagonal() * ctx.basis.transpose());
  out.pseudo = inv_s4 * (phi_conj * pseudo_weight.asDiagonal() * ctx.basis.adjoint());
  if (form == InformationForm::published) {
    const CVector v = phi_conj * mu;
    out.info += inv_s4 * (v * v.adjoint());
    out.pseudo += inv_s4 * (v * v.transpose());
  }
  // remove round-off asymmetry so downstream inverses see exact structure
  out.info = 0.5 * (out.info + out.info.adjoint()).eval();
  out.pseudo = 0.5 * (out.pseudo + out.pseudo.transpose()).eval();
  return out;
}

CrlbReport crlb_matrix(const CMatrix& info, const CMatrix& pseudo) {
  const Eigen::Index n = info.rows();
  if (info.cols() != n || pseudo.rows() != n || pseudo.cols() != n || n == 0) {
    throw Error(Errc::dimension, "crlb_matrix: information matrices must be square and equal in size");
  }
  constexpr double kMinRcond = 1e-12;
  Eigen::PartialPivLU<CMatrix> info_lu(info);
  if (!(info_lu.rcond() > kMinRcond)) throw Error(Errc::singular_information, "crlb_matrix: information matrix is singular");
  const CMatrix info_inv = info_lu.inverse();

  CrlbReport r;
  r.info = info;
  r.pseudo = pseudo;
  const CMatrix q = pseudo * info_inv.conjugate();
  r.schur = info - q * pseudo.conjugate();
  Eigen::PartialPivLU<CMatrix> schur_lu(r.schur);
  if (!(schur_lu.rcond() > kMinRcond)) throw Error(Errc::singular_information, "crlb_matrix: Schur complement is singular");
  const CMatrix schur_inv = schur_lu.inverse();

  r.bound.resize(2 * n, 2 * n);
  r.bound.topLeftCorner(n, n) = schur_inv;
  r.bound.topRightCorner(n, n) = -schur_inv * q;
  r.bound.bottomLeftCorner(n, n) = -q.adjoint() * schur_inv;
  r.bound.bottomRightCorner(n, n) = schur_inv.conjugate();

  // I - Q P* cancels several digits when the rank-one part dominates; one
  // refinement step against the full matrix recovers them.
  CMatrix full(2 * n, 2 * n);
  full << info, pseudo, pseudo.conjugate(), info.conjugate();
  const CMatrix residual = CMatrix::Identity(2 * n, 2 * n) - full * r.bound;
  r.bound += r.bound * residual;
  const CMatrix top_left = 0.25 * (r.bound.topLeftCorner(n, n) + r.bound.topLeftCorner(n, n).adjoint() +
                                   r.bound.bottomRightCorner(n, n).conjugate() +
                                   r.bound.bottomRightCorner(n, n).transpose());
  const CMatrix top_right = 0.5 * (r.bound.topRightCorner(n, n) + r.bound.bottomLeftCorner(n, n).conjugate());
  r.bound.topLeftCorner(n, n) = top_left;
  r.bound.bottomRightCorner(n, n) = top_left.conjugate();
  r.bound.topRightCorner(n, n) = top_right;
  r.bound.bottomLeftCorner(n, n) = top_right.conjugate();
  return r;
}

double crlb_nmse_floor(const CrlbReport& report, const CVector& h_true) {
  const double energy = h_true.squaredNorm();
  if (!(energy > 0.0)) throw Error(Errc::domain, "crlb_nmse_floor: true channel is zero");
  const Eigen::Index n = report.schur.rows();
  if (report.bound.rows() != 2 * n || h_true.size() != n) throw Error(Errc::dimension, "crlb_nmse_floor: report and channel sizes differ");
  const double trace = report.bound.topLeftCorner(n, n).diagonal().real().sum();
  return 10.0 * std::log10(trace / energy);
}

CrlbReport crlb_report(const CVector& h_true, const LikelihoodContext& ctx, JMode mode, InformationForm form) {
  const auto m = information_matrices(h_true, ctx, mode, form);
  auto report = crlb_matrix(m.info, m.pseudo);
  report.nmse_floor_db = crlb_nmse_floor(report, h_true);
  return report;
}

}  // namespace holowb
