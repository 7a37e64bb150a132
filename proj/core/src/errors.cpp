#include "greenforms/errors.hpp"

namespace greenforms {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::EmptySourceSet: return "EmptySourceSet";
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::MeshFormat: return "MeshFormat";
    case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorCode::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::FlatnessViolation: return "FlatnessViolation";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::UnsupportedConfiguration: return "UnsupportedConfiguration";
    case ErrorCode::BallTooSmall: return "BallTooSmall";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::ObstructionNonExact: return "ObstructionNonExact";
    case ErrorCode::InadmissibleExponents: return "InadmissibleExponents";
    case ErrorCode::EnsembleDegenerate: return "EnsembleDegenerate";
    case ErrorCode::DisconnectedInterior: return "DisconnectedInterior";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::BaselineViolated: return "BaselineViolated";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::MissingInput: return "MissingInput";
  }
  return "Unknown";
}

}  // namespace greenforms
