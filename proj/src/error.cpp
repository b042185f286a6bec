#include "holowb/error.hpp"

#include "holowb/estimate.hpp"

namespace holowb {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::domain: return "domain";
    case Errc::config: return "config";
    case Errc::dimension: return "dimension";
    case Errc::inconsistent_intensities: return "inconsistent_intensities";
    case Errc::circles_disjoint: return "circles_disjoint";
    case Errc::ill_conditioned_delta: return "ill_conditioned_delta";
    case Errc::degenerate_mean: return "degenerate_mean";
    case Errc::not_ascent: return "not_ascent";
    case Errc::singular_system: return "singular_system";
    case Errc::singular_information: return "singular_information";
    case Errc::quadrature_accuracy: return "quadrature_accuracy";
  }
  return "unknown";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::direct: return "direct";
    case Termination::gradient: return "gradient";
    case Termination::step: return "step";
    case Termination::stagnation: return "stagnation";
    case Termination::max_iterations: return "max_iterations";
  }
  return "unknown";
}

}  // namespace holowb
