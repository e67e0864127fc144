#include "lanegraph/direction_field.hpp"

#include <cmath>
#include <numbers>

namespace lanegraph {

namespace {
constexpr double kBinWidth = kTwoPi / kDirectionBins;
}

int angle_to_class(double theta_rad) {
  if (!std::isfinite(theta_rad)) fail(ErrorCode::InvalidArgument, "angle must be finite");
  const double a = canonical_angle(theta_rad);
  const int k = static_cast<int>(std::floor(a / kBinWidth));
  return std::clamp(k, 0, kDirectionBins - 1);
}

double class_to_angle(int k) {
  if (k == kBackgroundClass) fail(ErrorCode::BackgroundClass, "class 18 carries no direction");
  if (k < 0 || k >= kDirectionBins) fail(ErrorCode::InvalidArgument, "direction class " + std::to_string(k));
  return (static_cast<double>(k) + 0.5) * kBinWidth;
}

double circular_mean(std::span<const double> angles_rad) {
  if (angles_rad.empty()) fail(ErrorCode::EmptyList, "no angles to average");
  double sx = 0.0;
  double sy = 0.0;
  for (const double a : angles_rad) {
    sx += std::cos(a);
    sy += std::sin(a);
  }
  if (std::hypot(sx, sy) < 1e-9) fail(ErrorCode::MeanUndefined, "angles cancel out");
  return canonical_angle(std::atan2(sy, sx));
}

DirectionField::DirectionField(BevRaster raster, Point2 origin) : raster_(std::move(raster)), origin_(origin) {
  const Channel& c = raster_.channel(kDirectionChannel);
  if (c.dtype() != Dtype::U8) fail(ErrorCode::InvalidRaster, "'dir' channel must be u8");
  for (const auto code : c.u8()) {
    if (code > kBackgroundClass) fail(ErrorCode::InvalidRaster, "direction code " + std::to_string(code) + " > 18");
  }
}

std::optional<std::uint8_t> DirectionField::sample(Point2 p) const {
  const double u = (p.x - origin_.x) / resolution();
  const double v = (p.y - origin_.y) / resolution();
  if (!(u >= 0.0) || !(v >= 0.0)) return std::nullopt;
  auto col = static_cast<std::size_t>(std::floor(u));
  auto row = static_cast<std::size_t>(std::floor(v));
  if (col == width() && u <= static_cast<double>(width())) col = width() - 1;
  if (row == height() && v <= static_cast<double>(height())) row = height() - 1;
  if (col >= width() || row >= height()) return std::nullopt;
  return at(row, col);
}

DirectionField reversed(const DirectionField& field) {
  BevRaster r = field.raster();
  for (auto& code : r.channel(kDirectionChannel).u8()) {
    if (code != kBackgroundClass) code = static_cast<std::uint8_t>((code + kDirectionBins / 2) % kDirectionBins);
  }
  return DirectionField(std::move(r), field.origin());
}

DirectedEdgeDecision resolve_edge_direction(const DirectionField& field, Point2 a, Point2 b) {
  const auto ca = field.sample(a);
  const auto cb = field.sample(b);
  if (!ca || !cb) fail(ErrorCode::OutOfFrame, "anchor outside the direction field");
  if (*ca == kBackgroundClass || *cb == kBackgroundClass) {
    fail(ErrorCode::BackgroundAtAnchor, "no lane direction under an anchor");
  }
  const double angles[] = {class_to_angle(*ca), class_to_angle(*cb)};
  const double mean = circular_mean(angles);
  const Point2 d = unit_from_angle(mean);
  const Point2 ab = b - a;
  const double len = norm(ab);
  const double proj = dot(d, ab);
  if (std::abs(proj) < 1e-9 * len || len == 0.0) {
    fail(ErrorCode::DirectionAmbiguous, "lane direction is perpendicular to the segment");
  }
  return {proj > 0.0 ? Orientation::AtoB : Orientation::BtoA, mean, std::abs(proj) / len};
}

DirectedGraph direct_graph(const DirectionField& field, const LaneGraph& g) {
  DirectionReport report;
  std::vector<LaneSegment> edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    LaneSegment& e = edges[i];
    try {
      const auto decision = resolve_edge_direction(field, g.source_point(e), g.target_point(e));
      if (decision.chosen == Orientation::BtoA) std::swap(e.src, e.dst);
      e.directed = true;
      ++report.directed;
    } catch (const Error& ex) {
      if (ex.code() == ErrorCode::InvalidArgument) throw;
      e.directed = false;
      report.issues.push_back({i, e.src, e.dst, ex.code()});
    }
  }
  return {build_graph(g.nodes(), std::move(edges), g.frame()), std::move(report)};
}

}  // namespace lanegraph
