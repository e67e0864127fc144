#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanegraph/error.hpp"
#include "lanegraph/graph.hpp"
#include "lanegraph/raster.hpp"

namespace lanegraph {

inline constexpr int kDirectionBins = 18;
inline constexpr std::uint8_t kBackgroundClass = 18;
inline constexpr const char* kDirectionChannel = "dir";

/// Bin of a heading: floor(deg / 20) over [0°, 360°), half-open bins.
int angle_to_class(double theta_rad);

/// Bin-center heading (k·20° + 10°) in radians. Throws BackgroundClass for 18
/// and InvalidArgument for anything else outside 0..17.
double class_to_angle(int k);

/// Heading of the resultant of unit vectors. Throws EmptyList, or
/// MeanUndefined when the resultant is shorter than 1e-9.
double circular_mean(std::span<const double> angles_rad);

/// Per-pixel direction classes stored in the u8 "dir" channel of a raster.
/// The origin places pixel (0, 0) in world meters; it is not persisted.
class DirectionField {
 public:
  DirectionField(BevRaster raster, Point2 origin = {});

  const BevRaster& raster() const { return raster_; }
  Point2 origin() const { return origin_; }
  std::size_t width() const { return raster_.width(); }
  std::size_t height() const { return raster_.height(); }
  double resolution() const { return raster_.resolution(); }

  std::uint8_t at(std::size_t row, std::size_t col) const { return codes()[row * width() + col]; }
  const std::vector<std::uint8_t>& codes() const { return raster_.channel(kDirectionChannel).u8(); }

  /// Class of the pixel containing p; nullopt outside the field. Points on
  /// the far boundary belong to the last row / column.
  std::optional<std::uint8_t> sample(Point2 p) const;

 private:
  BevRaster raster_;
  Point2 origin_;
};

/// Field with every non-background class rotated by 180°.
DirectionField reversed(const DirectionField& field);

enum class Orientation { AtoB, BtoA };

struct DirectedEdgeDecision {
  Orientation chosen = Orientation::AtoB;
  double mean_dir_rad = 0.0;
  double confidence = 0.0;  // |cos| between mean direction and the edge
};

/// Orients the segment A-B by the mean lane direction sampled at both
/// anchors. Throws OutOfFrame, BackgroundAtAnchor or DirectionAmbiguous.
DirectedEdgeDecision resolve_edge_direction(const DirectionField& field, Point2 a, Point2 b);

struct DirectionIssue {
  std::size_t edge_index = 0;
  NodeId src = 0;
  NodeId dst = 0;
  ErrorCode reason = ErrorCode::DirectionAmbiguous;
};

struct DirectionReport {
  std::size_t directed = 0;
  std::vector<DirectionIssue> issues;
};

struct DirectedGraph {
  LaneGraph graph;
  DirectionReport report;
};

/// Orients every edge of g. Edges that cannot be resolved stay undirected and
/// are listed in the report.
DirectedGraph direct_graph(const DirectionField& field, const LaneGraph& g);

}  // namespace lanegraph
