#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lanegraph {

enum class ErrorCode {
  // graph model
  DuplicateNodeId,
  DuplicateEdge,
  DanglingEdge,
  OutOfFrame,
  SelfLoop,
  NonFiniteCoordinate,
  InvalidScore,
  InvalidFrame,
  UnknownNode,
  NonPositiveSpacing,
  // documents
  ParseError,
  DanglingConnection,
  // rasters
  EmptyFrame,
  InvalidRaster,
  NonPositiveCell,
  OutOfBounds,
  BadMagic,
  TruncatedFile,
  UnknownDtype,
  TrailingData,
  // geometry / resampling
  DegenerateSegment,
  EmptyGraph,
  // directions
  BackgroundClass,
  BackgroundAtAnchor,
  DirectionAmbiguous,
  EmptyList,
  MeanUndefined,
  // metrics
  EmptyGroundTruth,
  EmptySet,
  FrameMismatch,
  // estimators / synth
  TooFewAnchors,
  InvalidSpec,
  InvalidArgument,
  // filesystem
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code identifies the failure kind;
/// the message names the offending element.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace lanegraph
