#pragma once

#include <limits>
#include <string>
#include <vector>

#include "holowb/types.hpp"

namespace holowb {

enum class Termination {
  direct,         // closed-form estimator, no iterations
  gradient,       // gradient norm below tolerance
  step,           // relative step below tolerance
  stagnation,     // line search found no sufficient increase
  max_iterations,
};

const char* to_string(Termination t);

struct Estimate {
  CVector h;
  int iterations = 0;
  double log_likelihood = std::numeric_limits<double>::quiet_NaN();
  Termination termination = Termination::direct;
  int clamps = 0;       // GROWS: samples whose circle pair had to be clamped
  int perturbations = 0;  // WH-ML: degenerate-mean nudges
  std::vector<double> likelihood_trace;  // F at the start and after every accepted step
};

}  // namespace holowb
