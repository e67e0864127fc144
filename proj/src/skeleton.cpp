#include "lanegraph/skeleton.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "lanegraph/error.hpp"

namespace lanegraph {

namespace {

// Ring order: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDr{-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDc{0, 1, 1, 1, 0, -1, -1, -1};

std::array<bool, 8> ring(std::span<const std::uint8_t> img, std::size_t w, std::size_t h, std::size_t row,
                         std::size_t col) {
  std::array<bool, 8> out{};
  for (std::size_t k = 0; k < 8; ++k) {
    const auto r = static_cast<std::ptrdiff_t>(row) + kDr[k];
    const auto c = static_cast<std::ptrdiff_t>(col) + kDc[k];
    if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(h) || c >= static_cast<std::ptrdiff_t>(w)) continue;
    out[k] = img[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)] != 0;
  }
  return out;
}

// Same ring, but positions beyond the image edge read the nearest edge pixel.
// A band cut by the edge then thins like a line that continues, not like a
// dead end that collapses into one of its corners.
std::array<bool, 8> clamped_ring(std::span<const std::uint8_t> img, std::size_t w, std::size_t h, std::size_t row,
                                 std::size_t col) {
  std::array<bool, 8> out{};
  const auto max_r = static_cast<std::ptrdiff_t>(h) - 1;
  const auto max_c = static_cast<std::ptrdiff_t>(w) - 1;
  for (std::size_t k = 0; k < 8; ++k) {
    const auto r = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(row) + kDr[k], 0, max_r);
    const auto c = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(col) + kDc[k], 0, max_c);
    out[k] = img[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)] != 0;
  }
  return out;
}

int count_set(const std::array<bool, 8>& n) { return static_cast<int>(std::count(n.begin(), n.end(), true)); }

// 0 -> 1 transitions walking the ring once.
int transitions(const std::array<bool, 8>& n) {
  int a = 0;
  for (std::size_t k = 0; k < 8; ++k) a += (!n[k] && n[(k + 1) % 8]) ? 1 : 0;
  return a;
}

bool simple_from_ring(const std::array<bool, 8>& n) {
  std::array<std::size_t, 8> parent{};
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

  for (std::size_t k = 0; k < 8; ++k) {
    const std::size_t next = (k + 1) % 8;
    if (n[k] && n[next]) unite(k, next);
    if (k % 2 == 0 && n[k] && n[(k + 2) % 8]) unite(k, (k + 2) % 8);
    if (!n[k] && !n[next]) unite(k, next);
  }
  std::array<bool, 8> fg_root{};
  std::array<bool, 8> bg_root{};
  int fg = 0;
  int bg = 0;
  for (std::size_t k = 0; k < 8; ++k) {
    const std::size_t r = find(k);
    if (n[k]) {
      if (!fg_root[r]) {
        fg_root[r] = true;
        ++fg;
      }
    } else if (k % 2 == 0 && !bg_root[r]) {
      bg_root[r] = true;
      ++bg;
    }
  }
  return fg == 1 && bg == 1;
}

}  // namespace

bool is_simple_pixel(std::span<const std::uint8_t> img, std::size_t width, std::size_t height, std::size_t row,
                     std::size_t col) {
  return simple_from_ring(ring(img, width, height, row, col));
}

std::vector<std::uint8_t> thin(MaskView mask) {
  const std::size_t w = mask.width;
  const std::size_t h = mask.height;
  if (mask.pixels.size() != w * h) fail(ErrorCode::InvalidRaster, "mask size does not match dimensions");
  std::vector<std::uint8_t> img(mask.pixels.size());
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = mask.pixels[i] ? 1 : 0;

  const auto removable = [&](std::size_t r, std::size_t c) {
    const auto n = ring(img, w, h, r, c);
    return count_set(n) >= 2 && simple_from_ring(n);
  };

  std::vector<std::size_t> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int step = 0; step < 2; ++step) {
      candidates.clear();
      for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          if (!img[r * w + c]) continue;
          const auto n = clamped_ring(img, w, h, r, c);
          const int b = count_set(n);
          if (b < 2 || b > 6 || transitions(n) != 1) continue;
          // n[0]=P2 (N), n[2]=P4 (E), n[4]=P6 (S), n[6]=P8 (W)
          const bool ok = step == 0 ? (!(n[0] && n[2] && n[4]) && !(n[2] && n[4] && n[6]))
                                    : (!(n[0] && n[2] && n[6]) && !(n[0] && n[4] && n[6]));
          if (ok) candidates.push_back(r * w + c);
        }
      }
      for (const std::size_t idx : candidates) {
        if (removable(idx / w, idx % w)) {
          img[idx] = 0;
          changed = true;
        }
      }
    }
  }

  // Staircase corners: a pixel touching two perpendicular 4-neighbors is
  // redundant when the diagonal connection already holds.
  changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        if (!img[r * w + c]) continue;
        const auto n = ring(img, w, h, r, c);
        const bool corner = (n[0] && n[2]) || (n[2] && n[4]) || (n[4] && n[6]) || (n[6] && n[0]);
        if (corner && count_set(n) >= 2 && simple_from_ring(n)) {
          img[r * w + c] = 0;
          changed = true;
        }
      }
    }
  }
  return img;
}

std::size_t count_components(MaskView mask) {
  const std::size_t w = mask.width;
  const std::size_t h = mask.height;
  std::vector<bool> seen(mask.pixels.size(), false);
  std::vector<std::size_t> stack;
  std::size_t count = 0;
  for (std::size_t start = 0; start < mask.pixels.size(); ++start) {
    if (!mask.pixels[start] || seen[start]) continue;
    ++count;
    seen[start] = true;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const auto r = static_cast<std::ptrdiff_t>(idx / w);
      const auto c = static_cast<std::ptrdiff_t>(idx % w);
      for (std::size_t k = 0; k < 8; ++k) {
        const auto rr = r + kDr[k];
        const auto cc = c + kDc[k];
        if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(h) || cc >= static_cast<std::ptrdiff_t>(w)) continue;
        const auto j = static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc);
        if (mask.pixels[j] && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
  }
  return count;
}

std::vector<std::size_t> rdp_indices(std::span<const Point2> polyline, double epsilon) {
  if (polyline.empty()) return {};
  if (polyline.size() == 1) return {0};
  std::vector<bool> keep(polyline.size(), false);
  keep.front() = keep.back() = true;
  const double eps2 = epsilon * epsilon;

  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, polyline.size() - 1}};
  while (!stack.empty()) {
    const auto [first, last] = stack.back();
    stack.pop_back();
    if (last <= first + 1) continue;
    double worst = -1.0;
    std::size_t split = first;
    for (std::size_t i = first + 1; i < last; ++i) {
      const double d2 = squared_distance_to_segment(polyline[i], polyline[first], polyline[last]);
      if (d2 > worst) {
        worst = d2;
        split = i;
      }
    }
    if (worst > eps2) {
      keep[split] = true;
      stack.emplace_back(split, last);
      stack.emplace_back(first, split);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

std::vector<Point2> rdp_simplify(std::span<const Point2> polyline, double epsilon) {
  std::vector<Point2> out;
  for (const std::size_t i : rdp_indices(polyline, epsilon)) out.push_back(polyline[i]);
  return out;
}

}  // namespace lanegraph
