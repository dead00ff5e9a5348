#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hs {

enum class Errc {
  empty_matrix,
  ragged_matrix,
  non_finite_entry,
  negative_entry,
  zero_column,
  nonpositive_imaginary_input,
  invalid_argument,
  dimension_mismatch,
  length_mismatch,
  zero_column_after_truncation,
  quadrature_stall,
  convergence_failure,
  parse_error,
  io_error,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure surfaced by the library. `indices()` carries the 0-based
// location(s) of the violation when there is one (entry (i, j), column k, ...).
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::vector<std::size_t> indices = {});

  Errc code() const noexcept { return code_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  Errc code_;
  std::vector<std::size_t> indices_;
};

}  // namespace hs
