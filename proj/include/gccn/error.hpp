#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gccn {

enum class errc {
  invalid_argument,
  // complex
  empty_cell,
  vertex_out_of_range,
  duplicate_cell,
  rank_order_violation,
  singleton_rank_nonzero,
  not_a_bijection,
  // neighborhoods / hasse
  rank_filter_out_of_range,
  empty_spec_list,
  // numerics
  shape_mismatch,
  detached_loss,
  non_finite_value,
  duplicate_parameter,
  unknown_parameter,
  // models
  config_mismatch,
  // wl
  uncolored_node,
  out_of_range,
  k_too_large,
  histogram_mismatch,
  // data
  missing_file,
  malformed_line,
  dangling_node_reference,
  unknown_name,
  // train
  diverged_loss,
  // io
  parse_error,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::empty_cell: return "EmptyCell";
    case errc::vertex_out_of_range: return "VertexOutOfRange";
    case errc::duplicate_cell: return "DuplicateCell";
    case errc::rank_order_violation: return "RankOrderViolation";
    case errc::singleton_rank_nonzero: return "SingletonRankNonzero";
    case errc::not_a_bijection: return "NotABijection";
    case errc::rank_filter_out_of_range: return "RankFilterOutOfRange";
    case errc::empty_spec_list: return "EmptySpecList";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::detached_loss: return "DetachedLoss";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::duplicate_parameter: return "DuplicateParameter";
    case errc::unknown_parameter: return "UnknownParameter";
    case errc::config_mismatch: return "ConfigMismatch";
    case errc::uncolored_node: return "UncoloredNode";
    case errc::out_of_range: return "OutOfRange";
    case errc::k_too_large: return "KTooLarge";
    case errc::histogram_mismatch: return "HistogramMismatch";
    case errc::missing_file: return "MissingFile";
    case errc::malformed_line: return "MalformedLine";
    case errc::dangling_node_reference: return "DanglingNodeReference";
    case errc::unknown_name: return "UnknownName";
    case errc::diverged_loss: return "DivergedLoss";
    case errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

/// Library-wide exception; `code()` identifies the failure class.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

  /// True for failures caused by malformed input data rather than API misuse.
  bool is_data_error() const noexcept {
    switch (code_) {
      case errc::missing_file:
      case errc::malformed_line:
      case errc::dangling_node_reference:
      case errc::parse_error:
      case errc::empty_cell:
      case errc::vertex_out_of_range:
      case errc::duplicate_cell:
      case errc::rank_order_violation:
      case errc::singleton_rank_nonzero:
        return true;
      default:
        return false;
    }
  }

 private:
  errc code_;
};

}  // namespace gccn
