#include "lanegraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "lanegraph/error.hpp"

namespace lanegraph {

NodeMatching match_nodes(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m) {
  NodeMatching m;
  m.match_radius_m = match_radius_m;
  const double r2 = match_radius_m * match_radius_m;

  std::vector<std::size_t> gt_order(gt.nodes().size());
  std::iota(gt_order.begin(), gt_order.end(), 0);
  std::sort(gt_order.begin(), gt_order.end(),
            [&](std::size_t a, std::size_t b) { return gt.nodes()[a].id < gt.nodes()[b].id; });

  // Predicted nodes sorted by x for a pruned scan.
  std::vector<std::size_t> by_x(pred.nodes().size());
  std::iota(by_x.begin(), by_x.end(), 0);
  std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) {
    return pred.nodes()[a].x_m < pred.nodes()[b].x_m;
  });
  std::vector<double> xs(by_x.size());
  for (std::size_t i = 0; i < by_x.size(); ++i) xs[i] = pred.nodes()[by_x[i]].x_m;

  std::vector<bool> taken(pred.nodes().size(), false);
  for (const std::size_t gi : gt_order) {
    const Point2 p = gt.nodes()[gi].position();
    const auto lo = std::lower_bound(xs.begin(), xs.end(), p.x - match_radius_m) - xs.begin();
    const auto hi = std::upper_bound(xs.begin(), xs.end(), p.x + match_radius_m) - xs.begin();
    std::optional<std::size_t> best;
    double best_d2 = 0.0;
    for (auto k = lo; k < hi; ++k) {
      const std::size_t pi = by_x[static_cast<std::size_t>(k)];
      if (taken[pi]) continue;
      const double d2 = squared_distance(p, pred.nodes()[pi].position());
      if (d2 > r2) continue;
      if (!best || d2 < best_d2 || (d2 == best_d2 && pred.nodes()[pi].id < pred.nodes()[*best].id)) {
        best = pi;
        best_d2 = d2;
      }
    }
    if (best) {
      taken[*best] = true;
      m.pairs.emplace_back(gi, *best);
    }
  }
  return m;
}

AplsResult apls_detail(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m, bool respect_direction) {
  if (gt.empty()) fail(ErrorCode::EmptyGroundTruth, "APLS needs ground-truth nodes");
  AplsResult res;
  const std::size_t n = gt.nodes().size();
  const auto gt_paths = all_pairs_shortest_paths(gt, respect_direction);

  const auto counts_pair = [&](std::size_t i, std::size_t j) {
    const double d = gt_paths[i][j];
    return d != kUnreachable && d > 0.0;
  };

  if (pred.empty()) {
    res.unmatched_nodes = n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = respect_direction ? 0 : i + 1; j < n; ++j) {
        if (i != j && counts_pair(i, j)) ++res.evaluated_pairs;
      }
    }
    res.value = 0.0;
    return res;
  }

  const NodeMatching matching = match_nodes(gt, pred, match_radius_m);
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> partner(n, kNone);
  for (const auto& [g, p] : matching.pairs) partner[g] = p;
  res.matched_nodes = matching.pairs.size();
  res.unmatched_nodes = n - res.matched_nodes;

  const auto pred_paths = all_pairs_shortest_paths(pred, respect_direction);
  double penalty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = respect_direction ? 0 : i + 1; j < n; ++j) {
      if (i == j || !counts_pair(i, j)) continue;
      ++res.evaluated_pairs;
      if (partner[i] == kNone || partner[j] == kNone) {
        penalty += 1.0;
        continue;
      }
      const double d = gt_paths[i][j];
      const double dp = pred_paths[partner[i]][partner[j]];
      if (dp == kUnreachable) {
        penalty += 1.0;
        continue;
      }
      penalty += std::min(1.0, std::abs(d - dp) / d);
    }
  }
  res.value = res.evaluated_pairs == 0 ? 1.0 : 1.0 - penalty / static_cast<double>(res.evaluated_pairs);
  return res;
}

double apls(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m, bool respect_direction) {
  return apls_detail(gt, pred, match_radius_m, respect_direction).value;
}

double apls_symmetric(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m, bool respect_direction) {
  const double forward = apls(gt, pred, match_radius_m, respect_direction);
  if (pred.empty()) return 0.0;
  return 0.5 * (forward + apls(pred, gt, match_radius_m, respect_direction));
}

namespace {

// Squared distance from p to its nearest neighbor in sorted (by x) ys.
double nearest_squared(Point2 p, std::span<const Point2> sorted) {
  const auto mid = std::lower_bound(sorted.begin(), sorted.end(), p.x,
                                    [](const Point2& q, double x) { return q.x < x; });
  double best = std::numeric_limits<double>::infinity();
  for (auto it = mid; it != sorted.end(); ++it) {
    const double dx = it->x - p.x;
    if (dx * dx >= best) break;
    best = std::min(best, squared_distance(p, *it));
  }
  for (auto it = mid; it != sorted.begin();) {
    --it;
    const double dx = p.x - it->x;
    if (dx * dx >= best) break;
    best = std::min(best, squared_distance(p, *it));
  }
  return best;
}

double one_sided(std::span<const Point2> from, std::span<const Point2> to) {
  std::vector<Point2> sorted(to.begin(), to.end());
  std::sort(sorted.begin(), sorted.end(), [](const Point2& a, const Point2& b) { return a.x < b.x; });
  double sum = 0.0;
  for (const Point2& p : from) sum += nearest_squared(p, sorted);
  return sum;
}

}  // namespace

double chamfer(std::span<const Point2> xs, std::span<const Point2> ys) {
  if (xs.empty() || ys.empty()) fail(ErrorCode::EmptySet, "Chamfer distance needs two non-empty point sets");
  return one_sided(xs, ys) + one_sided(ys, xs);
}

std::vector<Point2> node_positions(const LaneGraph& g) {
  std::vector<Point2> out;
  out.reserve(g.nodes().size());
  for (const auto& n : g.nodes()) out.push_back(n.position());
  return out;
}

OverlapScores overlap_scores(const LaneGraph& gt, const LaneGraph& pred, double resolution, double lane_width_m) {
  if (!(gt.frame() == pred.frame())) fail(ErrorCode::FrameMismatch, "ground truth and prediction frames differ");
  const auto a = rasterize_graph(gt, resolution, lane_width_m);
  const auto b = rasterize_graph(pred, resolution, lane_width_m);
  const auto& ma = a.channel("lane").u8();
  const auto& mb = b.channel("lane").u8();
  OverlapScores s;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    s.gt_pixels += ma[i];
    s.pred_pixels += mb[i];
    s.intersection += static_cast<std::size_t>(ma[i] & mb[i]);
  }
  const std::size_t uni = s.gt_pixels + s.pred_pixels - s.intersection;
  if (uni == 0) {
    s.f1 = 1.0;
    s.iou = 1.0;
    return s;
  }
  s.f1 = 2.0 * static_cast<double>(s.intersection) / static_cast<double>(s.gt_pixels + s.pred_pixels);
  s.iou = static_cast<double>(s.intersection) / static_cast<double>(uni);
  return s;
}

DirectionAccuracy direction_accuracy_detail(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m) {
  DirectionAccuracy acc;
  acc.evaluated_edges = pred.edges().size();
  if (pred.edges().empty()) return acc;

  std::vector<Point2> mids;
  mids.reserve(gt.edges().size());
  for (const auto& e : gt.edges()) mids.push_back(lerp(gt.source_point(e), gt.target_point(e), 0.5));
  const double r2 = match_radius_m * match_radius_m;

  for (const auto& e : pred.edges()) {
    const Point2 a = pred.source_point(e);
    const Point2 b = pred.target_point(e);
    const Point2 mid = lerp(a, b, 0.5);
    // Ties on the midpoint go to the edge whose endpoints are closer, then to
    // the lower index.
    const auto endpoint_gap = [&](const LaneSegment& g) {
      const Point2 ga = gt.source_point(g);
      const Point2 gb = gt.target_point(g);
      return std::min(squared_distance(a, ga) + squared_distance(b, gb),
                      squared_distance(a, gb) + squared_distance(b, ga));
    };
    std::optional<std::size_t> best;
    double best_d2 = 0.0;
    double best_gap = 0.0;
    for (std::size_t k = 0; k < mids.size(); ++k) {
      const double d2 = squared_distance(mid, mids[k]);
      if (d2 > r2 || (best && d2 > best_d2)) continue;
      const double gap = endpoint_gap(gt.edges()[k]);
      if (!best || d2 < best_d2 || gap < best_gap) {
        best = k;
        best_d2 = d2;
        best_gap = gap;
      }
    }
    if (!best) continue;
    ++acc.matched_edges;
    const auto& g = gt.edges()[*best];
    if (!e.directed || !g.directed || a == b) continue;
    const double delta = angular_difference(heading(b - a), heading(gt.target_point(g) - gt.source_point(g)));
    if (delta < 0.5 * std::numbers::pi) ++acc.correct_edges;
  }
  acc.value = static_cast<double>(acc.correct_edges) / static_cast<double>(acc.evaluated_edges);
  return acc;
}

double direction_accuracy(const LaneGraph& gt, const LaneGraph& pred, double match_radius_m) {
  return direction_accuracy_detail(gt, pred, match_radius_m).value;
}

MetricReport evaluate_all(const LaneGraph& gt, const LaneGraph& pred, const MetricsConfig& cfg) {
  MetricReport r;
  r.gt_nodes = gt.nodes().size();
  r.pred_nodes = pred.nodes().size();
  if (cfg.apls) {
    const auto a = apls_detail(gt, pred, cfg.match_radius_m, cfg.respect_direction);
    r.apls = cfg.symmetric_apls ? apls_symmetric(gt, pred, cfg.match_radius_m, cfg.respect_direction) : a.value;
    r.matched_nodes = a.matched_nodes;
    r.unmatched_nodes = a.unmatched_nodes;
    r.evaluated_pairs = a.evaluated_pairs;
  }
  if (cfg.chamfer && !gt.empty() && !pred.empty()) {
    r.chamfer_m2 = chamfer(node_positions(gt), node_positions(pred));
  }
  if (cfg.overlap) {
    const auto o = overlap_scores(gt, pred, cfg.resolution, cfg.lane_width_m);
    r.f1 = o.f1;
    r.iou = o.iou;
  }
  if (cfg.direction) {
    const auto d = direction_accuracy_detail(gt, pred, cfg.match_radius_m);
    r.dir_accuracy = d.value;
    r.evaluated_edges = d.evaluated_edges;
  }
  return r;
}

MeanReport mean_report(std::span<const MetricReport> reports) {
  MeanReport m;
  m.samples = reports.size();
  const auto fold = [&](auto member, std::optional<double>& out, std::size_t& count) {
    double sum = 0.0;
    for (const auto& r : reports) {
      if (const auto& v = r.*member; v) {
        sum += *v;
        ++count;
      }
    }
    if (count > 0) out = sum / static_cast<double>(count);
  };
  fold(&MetricReport::apls, m.apls, m.apls_n);
  fold(&MetricReport::chamfer_m2, m.chamfer_m2, m.chamfer_n);
  fold(&MetricReport::f1, m.f1, m.f1_n);
  fold(&MetricReport::iou, m.iou, m.iou_n);
  fold(&MetricReport::dir_accuracy, m.dir_accuracy, m.dir_n);
  return m;
}

}  // namespace lanegraph
