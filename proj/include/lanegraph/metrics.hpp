#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lanegraph/geometry.hpp"
#include "lanegraph/graph.hpp"
#include "lanegraph/raster.hpp"

namespace lanegraph {

inline constexpr double kDefaultMatchRadius = 4.0;  // m

/// Injective node correspondence. pairs hold (gt index, pred index) into the
/// respective nodes() vectors.
struct NodeMatching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double match_radius_m = kDefaultMatchRadius;
};

/// Greedy nearest matching: ground-truth nodes in ascending id order each take
/// the nearest still-free predicted node within the radius (lowest id wins
/// ties).
NodeMatching match_nodes(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m);

struct AplsResult {
  double value = 0.0;
  std::size_t matched_nodes = 0;
  std::size_t unmatched_nodes = 0;
  std::size_t evaluated_pairs = 0;
};

/// One-sided average path length similarity of pred against gt. Pairs are
/// unordered unless respect_direction is set. Throws EmptyGroundTruth.
AplsResult apls_detail(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m = kDefaultMatchRadius,
                       bool respect_direction = false);

double apls(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m = kDefaultMatchRadius,
            bool respect_direction = false);

/// Mean of both one-sided scores. An empty prediction scores 0.
double apls_symmetric(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m = kDefaultMatchRadius,
                      bool respect_direction = false);

/// Symmetric Chamfer distance (sum of squared nearest distances, both ways).
/// Throws EmptySet when either set is empty.
double chamfer(std::span<const Point2> xs, std::span<const Point2> ys);

std::vector<Point2> node_positions(const LaneGraph& g);

struct OverlapScores {
  double f1 = 0.0;
  double iou = 0.0;
  std::size_t gt_pixels = 0;
  std::size_t pred_pixels = 0;
  std::size_t intersection = 0;
};

/// Dice and Jaccard overlap of the rendered graphs. Throws FrameMismatch.
OverlapScores overlap_scores(const LaneGraph& gt, const LaneGraph& pred, double resolution = kDefaultResolution,
                             double lane_width_m = kDefaultLaneWidth);

struct DirectionAccuracy {
  double value = 0.0;
  std::size_t evaluated_edges = 0;
  std::size_t matched_edges = 0;
  std::size_t correct_edges = 0;
};

/// Fraction of predicted edges whose heading lies within π/2 of the nearest
/// ground-truth edge (by midpoint distance, within the radius). Unmatched or
/// undirected edges count as wrong. No predicted edges gives 0.
DirectionAccuracy direction_accuracy_detail(const LaneGraph& gt, const LaneGraph& pred,
                                            double match_radius_m = kDefaultMatchRadius);

double direction_accuracy(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m = kDefaultMatchRadius);

struct MetricsConfig {
  bool apls = true;
  bool chamfer = true;
  bool overlap = true;
  bool direction = true;
  double match_radius_m = kDefaultMatchRadius;
  double resolution = kDefaultResolution;
  double lane_width_m = kDefaultLaneWidth;
  bool respect_direction = false;
  bool symmetric_apls = false;
};

struct MetricReport {
  std::optional<double> apls;
  std::optional<double> chamfer_m2;  // absent when a node set is empty
  std::optional<double> f1;
  std::optional<double> iou;
  std::optional<double> dir_accuracy;

  std::size_t gt_nodes = 0;
  std::size_t pred_nodes = 0;
  std::size_t matched_nodes = 0;
  std::size_t unmatched_nodes = 0;
  std::size_t evaluated_pairs = 0;
  std::size_t evaluated_edges = 0;
};

MetricReport evaluate_all(const LaneGraph& gt, const LaneGraph& pred, const MetricsConfig& cfg = {});

struct MeanReport {
  std::size_t samples = 0;
  // Mean over the samples where the metric is present, with that count.
  std::optional<double> apls, chamfer_m2, f1, iou, dir_accuracy;
  std::size_t apls_n = 0, chamfer_n = 0, f1_n = 0, iou_n = 0, dir_n = 0;
};

/// Arithmetic mean per metric, folded in sample order.
MeanReport mean_report(std::span<const MetricReport> reports);

}  // namespace lanegraph
