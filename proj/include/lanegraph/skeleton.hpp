#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lanegraph/geometry.hpp"

namespace lanegraph {

/// Binary image view, row-major, nonzero = foreground.
struct MaskView {
  std::span<const std::uint8_t> pixels;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Zhang–Suen thinning to a one-pixel-wide 8-connected skeleton. Each
/// sub-iteration's candidates are removed one at a time and only while they
/// are still simple points, so the number of 8-connected components never
/// changes. The deletion conditions read pixels beyond the image edge as
/// copies of the nearest edge pixel. Leftover staircase corners are removed
/// afterwards.
std::vector<std::uint8_t> thin(MaskView mask);

/// True when removing (row, col) leaves the local topology unchanged
/// (8-connected foreground, 4-connected background).
bool is_simple_pixel(std::span<const std::uint8_t> img, std::size_t width, std::size_t height, std::size_t row,
                     std::size_t col);

/// Number of 8-connected foreground components.
std::size_t count_components(MaskView mask);

/// Ramer–Douglas–Peucker on an open polyline. Returns the indices of the kept
/// vertices, always including the first and last.
std::vector<std::size_t> rdp_indices(std::span<const Point2> polyline, double epsilon);

std::vector<Point2> rdp_simplify(std::span<const Point2> polyline, double epsilon);

}  // namespace lanegraph
