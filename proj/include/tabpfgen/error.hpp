#pragma once

#include <stdexcept>
#include <string>

namespace tabpfgen {

// Closed set of failure modes. The CLI maps every thrown Error to a single
// `error_code=<name>` line, so the names are part of the external interface.
enum class ErrorCode {
  io_missing_file,
  io_write_failed,
  csv_malformed,
  csv_bad_cell,
  csv_empty_table,
  csv_label_column,
  bad_config,
  unknown_config_key,
  bad_argument,
  label_out_of_range,
  missing_class,
  class_too_small,
  single_class_labels,
  column_all_missing,
  scorer_unsupported_grad,
  sgld_nonfinite,
  no_convergence,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::io_missing_file: return "io_missing_file";
    case ErrorCode::io_write_failed: return "io_write_failed";
    case ErrorCode::csv_malformed: return "csv_malformed";
    case ErrorCode::csv_bad_cell: return "csv_bad_cell";
    case ErrorCode::csv_empty_table: return "csv_empty_table";
    case ErrorCode::csv_label_column: return "csv_label_column";
    case ErrorCode::bad_config: return "bad_config";
    case ErrorCode::unknown_config_key: return "unknown_config_key";
    case ErrorCode::bad_argument: return "bad_argument";
    case ErrorCode::label_out_of_range: return "label_out_of_range";
    case ErrorCode::missing_class: return "missing_class";
    case ErrorCode::class_too_small: return "class_too_small";
    case ErrorCode::single_class_labels: return "single_class_labels";
    case ErrorCode::column_all_missing: return "column_all_missing";
    case ErrorCode::scorer_unsupported_grad: return "scorer_unsupported_grad";
    case ErrorCode::sgld_nonfinite: return "sgld_nonfinite";
    case ErrorCode::no_convergence: return "no_convergence";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace tabpfgen
