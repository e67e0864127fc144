#pragma once

#include "lanegraph/graph.hpp"

namespace lanegraph {

struct PostprocessConfig {
  double node_score_min = 0.5;
  double edge_score_min = 0.2;
  double max_span_fraction = 0.25;
  double image_width_m = 51.2;
  double image_height_m = 51.2;

  /// Defaults with the extent taken from a graph frame.
  static PostprocessConfig for_frame(const Frame& f);
  /// Throws InvalidArgument when a threshold or the extent is out of range.
  void validate() const;
  double max_span_m() const;
};

/// False-positive filter, applied once in this order:
///   1. drop nodes scoring below node_score_min, with their edges
///   2. drop edges scoring below edge_score_min
///   3. drop edges longer than max_span_fraction * min(width, height)
///   4. drop nodes left without edges
LaneGraph filter_graph(const LaneGraph& g, const PostprocessConfig& cfg);

}  // namespace lanegraph
