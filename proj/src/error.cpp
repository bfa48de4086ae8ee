#include "qpn/error.hpp"

namespace qpn {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::NegativeSqrt: return "NegativeSqrt";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::UnknownPlace: return "UnknownPlace";
    case ErrorCode::NotEnabled: return "NotEnabled";
    case ErrorCode::CounterViolation: return "CounterViolation";
    case ErrorCode::ZeroWeightGroup: return "ZeroWeightGroup";
    case ErrorCode::NondeterministicStep: return "NondeterministicStep";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidNet: return "InvalidNet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::MultipleGroups: return "MultipleGroups";
    case ErrorCode::NotIntegerNet: return "NotIntegerNet";
    case ErrorCode::StateExplosion: return "StateExplosion";
    case ErrorCode::NonConstantWeights: return "NonConstantWeights";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UndeclaredReference: return "UndeclaredReference";
    case ErrorCode::InvalidInitialMarking: return "InvalidInitialMarking";
  }
  return "UnknownError";
}

bool is_evaluation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DivisionByZero:
    case ErrorCode::NegativeSqrt:
    case ErrorCode::NonFiniteResult:
    case ErrorCode::UnknownPlace:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(render(code, message, std::nullopt, std::nullopt)),
      code_(code),
      detail_(message) {}

Error::Error(ErrorCode code, const std::string& message, SourcePos pos)
    : std::runtime_error(render(code, message, pos, std::nullopt)),
      code_(code),
      detail_(message),
      pos_(pos) {}

Error Error::at_step(std::size_t step) const {
  Error copy(code_, detail_);
  copy.pos_ = pos_;
  copy.step_ = step;
  static_cast<std::runtime_error&>(copy) = std::runtime_error(render(code_, detail_, pos_, step));
  return copy;
}

Error Error::at(SourcePos pos) const {
  if (pos_) return *this;
  Error copy(code_, detail_, pos);
  copy.step_ = step_;
  static_cast<std::runtime_error&>(copy) = std::runtime_error(render(code_, detail_, pos, step_));
  return copy;
}

std::string Error::render(ErrorCode code, const std::string& detail,
                          const std::optional<SourcePos>& pos,
                          const std::optional<std::size_t>& step) {
  std::string out;
  if (pos) out += std::to_string(pos->line) + ":" + std::to_string(pos->column) + ": ";
  if (step) out += "step " + std::to_string(*step) + ": ";
  out += to_string(code);
  out += ": ";
  out += detail;
  return out;
}

}  // namespace qpn
