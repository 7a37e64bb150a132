#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace greenforms {

enum class ErrorCode {
  InvalidParams,
  EmptySourceSet,
  InvalidMesh,
  MeshFormat,
  DegreeOutOfRange,
  DegenerateSimplex,
  ShapeMismatch,
  InvalidExponent,
  FlatnessViolation,
  SingularOperator,
  InsufficientSamples,
  UnsupportedConfiguration,
  BallTooSmall,
  NotOrthogonal,
  NotClosed,
  ObstructionNonExact,
  InadmissibleExponents,
  EnsembleDegenerate,
  DisconnectedInterior,
  RankDeficient,
  BaselineViolated,
  EmptyReport,
  ConfigParse,
  MissingInput,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace greenforms
