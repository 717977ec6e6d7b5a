#include "cssc/errors.hpp"

namespace cssc {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::non_monotone_time: return "NonMonotoneTime";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::endpoint_not_observed: return "EndpointNotObserved";
    case Errc::not_diagonally_dominant: return "NotDiagonallyDominant";
    case Errc::singular_matrix: return "SingularMatrix";
    case Errc::incomplete_knot_data: return "IncompleteKnotData";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::non_finite_state: return "NonFiniteState";
    case Errc::interval_too_short: return "IntervalTooShort";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::parse_error: return "ParseError";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::unknown_function: return "UnknownFunction";
    case Errc::checkpoint_mismatch: return "CheckpointMismatch";
  }
  return "UnknownError";
}

Error::Error(Errc code, const std::string& msg)
    : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace cssc
