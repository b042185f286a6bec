// Acceptance run: one PASS/FAIL line per primary criterion, with the measured
// value next to its pinned tolerance. Exit status is nonzero if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../instances.hpp"
#include "../oracles.hpp"
#include "holowb/crlb.hpp"
#include "holowb/error.hpp"
#include "holowb/grows.hpp"
#include "holowb/harness.hpp"
#include "holowb/recovery.hpp"
#include "holowb/whml.hpp"

using namespace holowb;

namespace {

// tolerances
constexpr double kNoiselessRelErr = 1e-9;
constexpr double kRecoveryAgreement = 1e-9;
constexpr double kGradientRelErr = 1e-5;
constexpr double kHessianRelErr = 1e-4;
constexpr double kJApproxMaxErr = 0.07;
constexpr double kBoundSigmas = 3.0;
constexpr double kWhmlMarginDb = 0.5;

// runtime budgets, seconds
constexpr double kNoiselessBudget = 30.0;
constexpr double kRecoveryBudget = 5.0;
constexpr double kWirtingerBudget = 10.0;
constexpr double kJApproxBudget = 10.0;
constexpr double kBoundBudget = 300.0;
constexpr double kTrendBudget = 600.0;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void criterion(const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string timing = fmt("%.2f s", secs);
  if (budget_s > 0) {
    timing += fmt(" (budget %.0f s)", budget_s);
    if (secs >= budget_s) {
      out.pass = false;
      timing += " over budget";
    }
  }
  if (!out.pass) ++failures;
  std::printf("[%s] %-26s %s; %s\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str(), timing.c_str());
  std::fflush(stdout);
}

Scenario desk(int n_f, double snr_db) {
  Scenario s;
  s.grid = FrequencyGrid{3.5e9, n_f, 1.0 / 30e3};
  s.samples_per_symbol = n_f;
  s.k_factor = 4.0;
  s.phase_step = std::numbers::pi / 2;
  s.snr_db = snr_db;
  return s;
}

Outcome noiseless_exactness() {
  const int sizes[] = {4, 32, 132};
  double worst = 0.0;
  int units = 0;
  for (int i = 0; i < 50; ++i) {
    Scenario s = desk(sizes[i % 3], std::numeric_limits<double>::infinity());
    s.seed = 1000 + static_cast<std::uint64_t>(i);
    s.trials = 1;
    s.run_whml = false;
    s.run_crlb = false;
    const auto t = run_trial(s, 0);
    for (const auto& u : t.grows) {
      const double rel = u.failed ? INFINITY : std::sqrt(u.squared_error / u.energy);
      worst = std::max(worst, rel);
      ++units;
    }
  }
  return {worst < kNoiselessRelErr, "max relative error " + fmt("%.3g", worst) + " < " + fmt("%.0e", kNoiselessRelErr) +
                                        " over " + std::to_string(units) + " units"};
}

Outcome recovery_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a_r = 0.05 + 10.0 * u(rng);
    const cplx e_r = std::polar(a_r, kTwoPi * u(rng));
    double delta = 0.0;
    do {
      delta = kTwoPi * u(rng);
    } while (std::abs(std::sin(delta)) <= 1e-3);
    const cplx e_o = std::polar(a_r * u(rng), kTwoPi * u(rng));
    RecoveryContext ctx;
    ctx.ref_amplitude = a_r;
    ctx.phase_step = delta;
    ctx.reference = e_r;
    const double e1 = std::norm(e_r + e_o);
    const double e2 = std::norm(std::polar(1.0, delta) * e_r + e_o);
    worst = std::max(worst, std::abs(recover_quadratic(e1, e2, ctx) - recover_geometric(e1, e2, ctx)));
  }
  return {worst < kRecoveryAgreement, "max |quadratic - geometric| " + fmt("%.3g", worst) + " < " +
                                          fmt("%.0e", kRecoveryAgreement) + " over 10000 pairs"};
}

Outcome wirtinger_calculus() {
  std::mt19937_64 rng(77);
  double worst_g = 0.0, worst_h = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n_f = 1 + i % 4;
    const int L = 1 + (i / 4) % 4;  // L_tot = 2L <= 8
    const auto in = testing_instances::random_instance(rng, n_f, L, 5.0 + i);
    const CVector h = in.h + oracle::random_cvec(rng, n_f, 0.03);
    const auto f = [&](const Eigen::VectorXcd& x) { return log_likelihood(x, in.ctx); };
    const CVector g = wirtinger_gradient(h, in.ctx);
    worst_g = std::max(worst_g, oracle::rel_err(g, oracle::fd_wirtinger(f, h, 1e-6 * std::max(1.0, h.norm()))));

    const double step = 1e-5 * std::max(1.0, h.norm());
    const auto j = oracle::fd_complex_jacobian(
        [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return wirtinger_gradient(x, in.ctx); }, h, step);
    const auto jc = oracle::fd_complex_jacobian(
        [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return wirtinger_gradient(x, in.ctx).conjugate(); }, h,
        step);
    const auto b = hessian_blocks(h, in.ctx);
    for (double e : {oracle::rel_err(b.hch, j.dz), oracle::rel_err(b.hchc, j.dzc), oracle::rel_err(b.hh, jc.dz),
                     oracle::rel_err(b.hhc, jc.dzc)}) {
      worst_h = std::max(worst_h, e);
    }
  }
  return {worst_g < kGradientRelErr && worst_h < kHessianRelErr,
          "gradient " + fmt("%.2g", worst_g) + " < " + fmt("%.0e", kGradientRelErr) + ", Hessian blocks " +
              fmt("%.2g", worst_h) + " < " + fmt("%.0e", kHessianRelErr) + " over 20 instances"};
}

Outcome newton_monotonicity() {
  std::mt19937_64 rng(4242);
  int violations = 0, steps = 0;
  for (int i = 0; i < 20; ++i) {
    const auto in = testing_instances::random_instance(rng, 12, 12, 10.0);
    const GrowsSettings settings{12, in.grid, in.record.reference};
    const auto init = grows_estimate(in.record, settings).h;
    const auto est = whml_estimate(init, in.ctx);
    for (std::size_t k = 1; k < est.likelihood_trace.size(); ++k) {
      if (!(est.likelihood_trace[k] >= est.likelihood_trace[k - 1])) ++violations;
    }
    steps += est.iterations;
  }
  return {violations == 0 && steps > 0, std::to_string(violations) + " decreases over " + std::to_string(steps) +
                                            " accepted iterations on 20 instances at 10 dB"};
}

Outcome j_approximation() {
  double max_all = 0.0, max_low = 0.0, max_high = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double g = std::pow(100.0, i / 49.0);
    const double err = std::abs(j_gamma_approx(g) - j_gamma_quadrature(g));
    max_all = std::max(max_all, err);
    if (g <= 10.0) max_low = std::max(max_low, err);
    if (g >= 10.0) max_high = std::max(max_high, err);
  }
  return {max_all <= kJApproxMaxErr && max_high < max_low,
          "max |J_approx - J| " + fmt("%.4f", max_all) + " <= " + fmt("%.2f", kJApproxMaxErr) + ", max on [10,100] " +
              fmt("%.2e", max_high) + " < max on [1,10] " + fmt("%.2e", max_low)};
}

Outcome bound_validity() {
  Scenario s = desk(32, 10.0);
  s.trials = 500;
  s.seed = 7;
  s.fixed_channel = true;
  const auto trials = run_trials(s, workers());
  const auto draw = draw_trial(s, 0);
  const auto units = draw.records.size();

  std::vector<double> bound(units);
  double bound_sum = 0.0;
  for (std::size_t u = 0; u < units; ++u) {
    const CVector h = draw.channel.row(static_cast<Eigen::Index>(u)).transpose();
    const auto ctx = LikelihoodContext::from_record(draw.records[u], s.grid);
    const auto r = crlb_report(h, ctx, s.j_mode, s.information_form);
    bound[u] = r.bound.topLeftCorner(h.size(), h.size()).diagonal().real().sum();
    bound_sum += bound[u];
  }

  // error power summed over units, one sample per trial
  double sum = 0.0, sum2 = 0.0;
  std::vector<double> unit_sum(units, 0.0), unit_sum2(units, 0.0);
  for (const auto& t : trials) {
    double total = 0.0;
    for (std::size_t u = 0; u < units; ++u) {
      const double e = t.grows[u].squared_error;
      total += e;
      unit_sum[u] += e;
      unit_sum2[u] += e * e;
    }
    sum += total;
    sum2 += total * total;
  }
  const double n = static_cast<double>(trials.size());
  const double mean = sum / n;
  const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1));
  double min_z = INFINITY;
  for (std::size_t u = 0; u < units; ++u) {
    const double m = unit_sum[u] / n;
    const double su = std::sqrt(std::max(0.0, unit_sum2[u] / n - m * m) / (n - 1));
    min_z = std::min(min_z, (m - bound[u]) / su);
  }

  const auto rows = summarize(s, "snr", 10.0, trials, NAN);
  const double grows_db = rows[0].nmse_db, whml_db = rows[1].nmse_db;
  const bool above = mean >= bound_sum - kBoundSigmas * se;
  const bool close = whml_db <= grows_db + kWhmlMarginDb;
  std::ostringstream d;
  d << "GROWS error power " << fmt("%.4e", mean) << " vs CRLB trace " << fmt("%.4e", bound_sum) << " (z = "
    << fmt("%+.2f", (mean - bound_sum) / se) << ", need >= -" << kBoundSigmas << "; per-unit min z " << fmt("%+.2f", min_z)
    << "); NMSE WH-ML " << fmt("%.3f", whml_db) << " dB <= GROWS " << fmt("%.3f", grows_db) << " + " << kWhmlMarginDb
    << " dB, WH-ML failures " << rows[1].failures;
  return {above && close, d.str()};
}

Outcome trend_reproduction() {
  Scenario base = desk(132, 10.0);
  base.trials = 100;
  base.seed = 11;
  base.run_whml = false;

  Scenario snr = base;
  snr.sweep_variable = "snr";
  snr.sweep_values = {-10, 0, 10, 20, 30};
  snr.run_crlb = false;
  const auto snr_rows = run_sweep(snr, {workers(), nullptr});

  Scenario k = base;
  k.sweep_variable = "k";
  k.sweep_values = {2, 4, 8, 16};
  const auto k_rows = run_sweep(k, {workers(), nullptr});

  bool snr_ok = true, k_ok = true, crlb_ok = true;
  std::ostringstream d;
  d << "GROWS NMSE over SNR";
  for (std::size_t i = 0; i < snr_rows.size(); ++i) {
    d << ' ' << fmt("%.2f", snr_rows[i].nmse_db);
    if (i > 0 && !(snr_rows[i].nmse_db < snr_rows[i - 1].nmse_db)) snr_ok = false;
  }
  d << " (strictly decreasing); over K";
  for (std::size_t i = 0; i < k_rows.size(); ++i) {
    d << ' ' << fmt("%.2f", k_rows[i].nmse_db);
    if (i > 0 && !(k_rows[i].nmse_db <= k_rows[i - 1].nmse_db)) k_ok = false;
  }
  d << ", CRLB";
  for (std::size_t i = 0; i < k_rows.size(); ++i) {
    d << ' ' << fmt("%.2f", k_rows[i].crlb_db);
    if (!std::isfinite(k_rows[i].crlb_db) || (i > 0 && !(k_rows[i].crlb_db <= k_rows[i - 1].crlb_db))) crlb_ok = false;
  }
  d << " (non-increasing)";
  return {snr_ok && k_ok && crlb_ok, d.str()};
}

Outcome determinism() {
  Scenario s;
  s.grid = FrequencyGrid{3.5e9, 24, 1.0 / 30e3};
  s.samples_per_symbol = 24;
  s.sweep_variable = "snr";
  s.sweep_values = {0, 10, 20};
  s.trials = 6;
  s.seed = 99;
  auto csv = [&](int w) {
    std::ostringstream out;
    write_csv(out, run_sweep(s, {w, nullptr}));
    return out.str();
  };
  const std::string reference = csv(1);
  int mismatches = 0;
  for (int w : {1, 2, 3, 8}) mismatches += csv(w) != reference;
  return {mismatches == 0, std::to_string(mismatches) + " of 4 reruns differ from the single-worker CSV (" +
                               std::to_string(reference.size()) + " bytes, workers 1, 2, 3, 8)"};
}

}  // namespace

int main() {
  std::printf("acceptance: %d worker thread(s)\n", workers());
  criterion("noiseless-exactness", kNoiselessBudget, noiseless_exactness);
  criterion("recovery-equivalence", kRecoveryBudget, recovery_equivalence);
  criterion("wirtinger-calculus", kWirtingerBudget, wirtinger_calculus);
  criterion("newton-armijo-monotonic", 0, newton_monotonicity);
  criterion("j-approximation", kJApproxBudget, j_approximation);
  criterion("bound-validity", kBoundBudget, bound_validity);
  criterion("trend-reproduction", kTrendBudget, trend_reproduction);
  criterion("determinism", 0, determinism);
  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
