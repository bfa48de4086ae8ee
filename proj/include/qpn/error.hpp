#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qpn {

enum class ErrorCode {
  SyntaxError,
  UnknownFunction,
  MalformedNumber,
  DivisionByZero,
  NegativeSqrt,
  NonFiniteResult,
  UnknownPlace,
  NotEnabled,
  CounterViolation,
  ZeroWeightGroup,
  NondeterministicStep,
  InvalidParams,
  InvalidNet,
  DimensionMismatch,
  NotNormalized,
  AllZero,
  MultipleGroups,
  NotIntegerNet,
  StateExplosion,
  NonConstantWeights,
  DuplicateId,
  UndeclaredReference,
  InvalidInitialMarking,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for the codes raised while evaluating a weight expression.
bool is_evaluation_error(ErrorCode code) noexcept;

/// Source position, 1-based.
struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, const std::string& message, SourcePos pos);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<SourcePos>& position() const noexcept { return pos_; }
  const std::optional<std::size_t>& step() const noexcept { return step_; }
  /// The message without the position/step prefix.
  const std::string& detail() const noexcept { return detail_; }

  /// Copy of this error tagged with the run step at which it occurred.
  Error at_step(std::size_t step) const;
  /// Copy of this error with a source position (kept if already set).
  Error at(SourcePos pos) const;

private:
  static std::string render(ErrorCode code, const std::string& detail,
                            const std::optional<SourcePos>& pos,
                            const std::optional<std::size_t>& step);

  ErrorCode code_;
  std::string detail_;
  std::optional<SourcePos> pos_;
  std::optional<std::size_t> step_;
};

}  // namespace qpn
