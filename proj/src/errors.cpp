#include "knet/errors.hpp"

namespace knet {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::IsolatedVertex: return "IsolatedVertex";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::PointsOnDifferentNetworks: return "PointsOnDifferentNetworks";
    case ErrorCode::EdgeNotIncident: return "EdgeNotIncident";
    case ErrorCode::VertexNotInterior: return "VertexNotInterior";
    case ErrorCode::VertexNotBoundary: return "VertexNotBoundary";
    case ErrorCode::NodeNotInterior: return "NodeNotInterior";
    case ErrorCode::InvalidCoefficientSign: return "InvalidCoefficientSign";
    case ErrorCode::InvalidMode: return "InvalidMode";
    case ErrorCode::MonotonicityProbeFailed: return "MonotonicityProbeFailed";
    case ErrorCode::BarrierConstructionFailed: return "BarrierConstructionFailed";
    case ErrorCode::MaxSweepsExceeded: return "MaxSweepsExceeded";
    case ErrorCode::LocalRootBracketFailed: return "LocalRootBracketFailed";
    case ErrorCode::SingularLinearization: return "SingularLinearization";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::EmptyInteriorSet: return "EmptyInteriorSet";
    case ErrorCode::NoActiveProbe: return "NoActiveProbe";
    case ErrorCode::ProblemNotLinear: return "ProblemNotLinear";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonPositiveError: return "NonPositiveError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace knet
