#pragma once

#include <stdexcept>
#include <string>

namespace cssc {

/// Machine-checkable failure categories used across the library.
enum class Errc {
  non_monotone_time,
  dimension_mismatch,
  endpoint_not_observed,
  not_diagonally_dominant,
  singular_matrix,
  incomplete_knot_data,
  out_of_domain,
  non_finite_state,
  interval_too_short,
  length_mismatch,
  non_finite_loss,
  parse_error,
  invariant_violation,
  invalid_spec,
  unknown_function,
  checkpoint_mismatch,
};

const char* errc_name(Errc code);

/// Exception carrying an Errc plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& msg);

}  // namespace cssc
