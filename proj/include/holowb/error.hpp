#pragma once

#include <stdexcept>
#include <string>

namespace holowb {

enum class Errc {
  domain,
  config,
  dimension,
  inconsistent_intensities,
  circles_disjoint,
  ill_conditioned_delta,
  degenerate_mean,
  not_ascent,
  singular_system,
  singular_information,
  quadrature_accuracy,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised when adaptive quadrature misses its tolerance; carries the
// best estimate reached.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : Error(Errc::quadrature_accuracy, what), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

// Index of the sample whose mean |mu_l| vanished.
class DegenerateMeanError : public Error {
 public:
  DegenerateMeanError(const std::string& what, int sample)
      : Error(Errc::degenerate_mean, what), sample_(sample) {}
  int sample() const noexcept { return sample_; }

 private:
  int sample_;
};

}  // namespace holowb
