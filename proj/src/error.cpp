#include "lanegraph/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lanegraph/io.hpp"

namespace lanegraph {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::OutOfFrame: return "OutOfFrame";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorCode::InvalidScore: return "InvalidScore";
    case ErrorCode::InvalidFrame: return "InvalidFrame";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::NonPositiveSpacing: return "NonPositiveSpacing";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DanglingConnection: return "DanglingConnection";
    case ErrorCode::EmptyFrame: return "EmptyFrame";
    case ErrorCode::InvalidRaster: return "InvalidRaster";
    case ErrorCode::NonPositiveCell: return "NonPositiveCell";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::UnknownDtype: return "UnknownDtype";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::BackgroundClass: return "BackgroundClass";
    case ErrorCode::BackgroundAtAnchor: return "BackgroundAtAnchor";
    case ErrorCode::DirectionAmbiguous: return "DirectionAmbiguous";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::MeanUndefined: return "MeanUndefined";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::TooFewAnchors: return "TooFewAnchors";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "failed reading '" + path + "'");
  return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace lanegraph
