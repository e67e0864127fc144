#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lanegraph/geometry.hpp"
#include "lanegraph/graph.hpp"

namespace lanegraph {

enum class Dtype : std::uint8_t { U8 = 0, F32 = 1 };

inline constexpr double kDefaultResolution = 0.2;  // m/px
inline constexpr double kDefaultLaneWidth = 1.8;   // m
inline constexpr std::size_t kMaxChannelName = 16;

/// One named plane of a raster, stored row-major.
struct Channel {
  std::string name;
  std::variant<std::vector<std::uint8_t>, std::vector<float>> data;

  Dtype dtype() const { return data.index() == 0 ? Dtype::U8 : Dtype::F32; }
  std::size_t size() const;
  std::vector<std::uint8_t>& u8() { return std::get<0>(data); }
  const std::vector<std::uint8_t>& u8() const { return std::get<0>(data); }
  std::vector<float>& f32() { return std::get<1>(data); }
  const std::vector<float>& f32() const { return std::get<1>(data); }

  friend bool operator==(const Channel&, const Channel&) = default;
};

Channel make_u8_channel(std::string name, std::size_t count, std::uint8_t fill = 0);
Channel make_f32_channel(std::string name, std::size_t count, float fill = 0.0f);

/// Multi-channel bird's-eye-view grid. Pixel (row, col) covers the square
/// [col, col+1) x [row, row+1) times the resolution, relative to the grid
/// origin.
class BevRaster {
 public:
  BevRaster() = default;
  BevRaster(std::size_t width_px, std::size_t height_px, double resolution_m_per_px);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t pixel_count() const { return width_ * height_; }
  double resolution() const { return resolution_; }
  double width_m() const { return static_cast<double>(width_) * resolution_; }
  double height_m() const { return static_cast<double>(height_) * resolution_; }

  const std::vector<Channel>& channels() const { return channels_; }
  bool has_channel(const std::string& name) const;
  const Channel& channel(const std::string& name) const;
  Channel& channel(const std::string& name);

  /// Appends a channel. Throws InvalidRaster on bad name, duplicate name or
  /// wrong plane size.
  void add_channel(Channel c);

  friend bool operator==(const BevRaster&, const BevRaster&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double resolution_ = kDefaultResolution;
  std::vector<Channel> channels_;
};

/// Pixel count along an extent, tolerant of rounding in extent / resolution.
std::size_t pixels_for_extent(double extent_m, double resolution);

/// Center of pixel (row, col) in world meters for a grid anchored at origin.
inline Point2 pixel_center(double origin_x, double origin_y, double resolution, std::size_t row, std::size_t col) {
  return {origin_x + (static_cast<double>(col) + 0.5) * resolution,
          origin_y + (static_cast<double>(row) + 0.5) * resolution};
}

/// Renders edges as capsules of diameter lane_width_m into a u8 channel named
/// "lane" (1 = lane). A pixel is set iff its center lies within lane_width/2
/// of some edge segment. The grid covers the graph frame.
BevRaster rasterize_graph(const LaneGraph& g, double resolution = kDefaultResolution,
                          double lane_width_m = kDefaultLaneWidth);

/// Exact Euclidean distance (pixels) from every pixel to the nearest nonzero
/// mask pixel. Pixels of a mask without foreground get +inf. When
/// gaussian_sigma_px > 0 the result is smoothed afterwards.
std::vector<float> distance_transform(std::span<const std::uint8_t> mask, std::size_t width, std::size_t height,
                                      double gaussian_sigma_px = 0.0);

/// Separable Gaussian blur, kernel truncated at 3 sigma and renormalized over
/// the taps that fall inside the image.
std::vector<float> gaussian_blur(std::span<const float> plane, std::size_t width, std::size_t height,
                                 double sigma_px);

Channel extract_crop_channel(const Channel& c, std::size_t width, std::size_t row, std::size_t col,
                             std::size_t size_px);

/// Square crop of every channel. Throws OutOfBounds when the window leaves the
/// raster.
BevRaster extract_crop(const BevRaster& r, std::size_t origin_row, std::size_t origin_col, std::size_t size_px);

// ---------------------------------------------------------------------------
// Point clouds and vehicle boxes

struct CloudPoint {
  double x_m = 0.0;
  double y_m = 0.0;
  double z_m = 0.0;
  double intensity = 0.0;

  friend bool operator==(const CloudPoint&, const CloudPoint&) = default;
};

struct PointCloud {
  std::vector<CloudPoint> points;
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Keeps, per ground cell of cell_m x cell_m anchored at the origin, only the
/// point with the lowest z (first occurrence wins ties). Output is ordered by
/// the first appearance of each cell in the input.
PointCloud accumulate_lowest_z(const PointCloud& cloud, double cell_m, double origin_x_m = 0.0,
                               double origin_y_m = 0.0);

/// CSV with header line "x_m,y_m,z_m,intensity".
PointCloud parse_point_csv(const std::string& text);
std::string format_point_csv(const PointCloud& cloud);

struct VehicleBox {
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  double length_m = 1.0;
  double width_m = 1.0;
  double heading_rad = 0.0;
};

/// f32 channel "vehicles": -1 outside every box, heading / 2π in [0, 1)
/// inside. Later boxes overwrite earlier ones.
Channel encode_vehicle_layer(std::span<const VehicleBox> boxes, const Frame& frame,
                             double resolution = kDefaultResolution);

// ---------------------------------------------------------------------------
// BVR1 files

std::string write_bvr(const BevRaster& r);
BevRaster read_bvr(std::string_view bytes);

BevRaster read_bvr_file(const std::string& path);
void write_bvr_file(const BevRaster& r, const std::string& path);

}  // namespace lanegraph
