#pragma once

#include <stdexcept>
#include <string>

namespace knet {

enum class ErrorCode {
  MalformedInput,
  DisconnectedGraph,
  DuplicateEdge,
  IsolatedVertex,
  NonPositiveLength,
  PointsOnDifferentNetworks,
  EdgeNotIncident,
  VertexNotInterior,
  VertexNotBoundary,
  NodeNotInterior,
  InvalidCoefficientSign,
  InvalidMode,
  MonotonicityProbeFailed,
  BarrierConstructionFailed,
  MaxSweepsExceeded,
  LocalRootBracketFailed,
  SingularLinearization,
  WindowTooLarge,
  EmptyInteriorSet,
  NoActiveProbe,
  ProblemNotLinear,
  SingularSystem,
  NonPositiveError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace knet
