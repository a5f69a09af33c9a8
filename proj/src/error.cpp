#include "lapshape/error.hpp"

namespace lapshape {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::InsufficientSampling: return "insufficient-sampling";
    case ErrorCode::DegenerateNeighborhood: return "degenerate-neighborhood";
    case ErrorCode::SolverFailure: return "solver-failure";
    case ErrorCode::DisconnectedModel: return "disconnected-model";
    case ErrorCode::MemoryGuard: return "memory-guard";
    case ErrorCode::UnsupportedFormat: return "unsupported-format";
    case ErrorCode::IncompatibleParameters: return "incompatible-parameters";
    case ErrorCode::AmbiguousCut: return "ambiguous-cut";
    case ErrorCode::IoFailure: return "io-failure";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverFailure:
    case ErrorCode::DisconnectedModel:
      return 3;
    case ErrorCode::UnsupportedFormat:
      return 4;
    default:
      return 2;
  }
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::vector<std::int64_t>& ids) {
  std::string out = std::string(to_string(code)) + ": " + message;
  if (!ids.empty()) {
    out += " [ids:";
    const std::size_t shown = ids.size() < 20 ? ids.size() : 20;
    for (std::size_t i = 0; i < shown; ++i) out += " " + std::to_string(ids[i]);
    if (shown < ids.size()) out += " ... (" + std::to_string(ids.size()) + " total)";
    out += "]";
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::vector<std::int64_t> ids)
    : std::runtime_error(format_message(code, message, ids)), code_(code), detail_(message), ids_(std::move(ids)) {}

void rethrow_with_stage(const Error& e, const std::string& stage) {
  Error wrapped(e.code(), stage + ": " + e.detail(), e.ids());
  wrapped.values = e.values;
  throw wrapped;
}

}  // namespace lapshape
