#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapshape {

enum class ErrorCode {
  InvalidInput,
  InsufficientSampling,
  DegenerateNeighborhood,
  SolverFailure,
  DisconnectedModel,
  MemoryGuard,
  UnsupportedFormat,
  IncompatibleParameters,
  AmbiguousCut,
  IoFailure,
};

const char* to_string(ErrorCode code);

// Process exit code used by the CLI for each error category.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::int64_t> ids = {});

  ErrorCode code() const noexcept { return code_; }
  // Point ids (or other indices) implicated by the failure, when any.
  const std::vector<std::int64_t>& ids() const noexcept { return ids_; }
  // Message without the category prefix and id list.
  const std::string& detail() const noexcept { return detail_; }
  // Free-form numeric payload, e.g. residual norms for solver failures.
  std::vector<double> values;

 private:
  ErrorCode code_;
  std::string detail_;
  std::vector<std::int64_t> ids_;
};

// Prefixes the message of an Error with a pipeline stage label.
[[noreturn]] void rethrow_with_stage(const Error& e, const std::string& stage);

}  // namespace lapshape
