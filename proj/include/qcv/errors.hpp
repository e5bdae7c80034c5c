#pragma once

#include <stdexcept>
#include <string>

namespace qcv {

/// Error categories used across the toolkit. Each thrown Error carries one
/// of these codes plus a human-readable message with location context.
enum class Errc {
  missing_column,
  unparseable_cell,
  duplicate_timestamp,
  empty_file,
  timestamp_mismatch,
  nonpositive_deflator,
  nonpositive_value,
  too_short,
  length_mismatch,
  singular_design,
  unknown_variable,
  degenerate_epsilon,
  degenerate_distances,
  block_too_short,
  non_convergence,
  invalid_params,
  chain_divergence,
  mode_search_failure,
  degenerate_weights,
  empty_fit,
  data_mismatch,
  io_error,
  config_error,
  invalid_argument,
  numeric_failure,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qcv
