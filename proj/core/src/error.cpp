#include "hs/error.hpp"

#include <utility>

namespace hs {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::empty_matrix: return "EmptyMatrix";
    case Errc::ragged_matrix: return "RaggedMatrix";
    case Errc::non_finite_entry: return "NonFiniteEntry";
    case Errc::negative_entry: return "NegativeEntry";
    case Errc::zero_column: return "ZeroColumn";
    case Errc::nonpositive_imaginary_input: return "NonpositiveImaginaryInput";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::zero_column_after_truncation: return "ZeroColumnAfterTruncation";
    case Errc::quadrature_stall: return "QuadratureStall";
    case Errc::convergence_failure: return "ConvergenceFailure";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, std::string message, std::vector<std::size_t> indices)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      indices_(std::move(indices)) {}

}  // namespace hs
