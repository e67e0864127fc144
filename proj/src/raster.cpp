#include "lanegraph/raster.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "lanegraph/error.hpp"
#include "lanegraph/io.hpp"

namespace lanegraph {

std::size_t Channel::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

Channel make_u8_channel(std::string name, std::size_t count, std::uint8_t fill) {
  return {std::move(name), std::vector<std::uint8_t>(count, fill)};
}

Channel make_f32_channel(std::string name, std::size_t count, float fill) {
  return {std::move(name), std::vector<float>(count, fill)};
}

BevRaster::BevRaster(std::size_t width_px, std::size_t height_px, double resolution_m_per_px)
    : width_(width_px), height_(height_px), resolution_(resolution_m_per_px) {
  if (width_px == 0 || height_px == 0) fail(ErrorCode::InvalidRaster, "raster dimensions must be positive");
  if (!(resolution_m_per_px > 0.0) || !std::isfinite(resolution_m_per_px)) {
    fail(ErrorCode::InvalidRaster, "resolution must be positive");
  }
}

bool BevRaster::has_channel(const std::string& name) const {
  return std::any_of(channels_.begin(), channels_.end(), [&](const Channel& c) { return c.name == name; });
}

const Channel& BevRaster::channel(const std::string& name) const {
  for (const auto& c : channels_) {
    if (c.name == name) return c;
  }
  fail(ErrorCode::InvalidRaster, "no channel named '" + name + "'");
}

Channel& BevRaster::channel(const std::string& name) {
  return const_cast<Channel&>(static_cast<const BevRaster&>(*this).channel(name));
}

void BevRaster::add_channel(Channel c) {
  if (c.name.empty() || c.name.size() > kMaxChannelName) {
    fail(ErrorCode::InvalidRaster, "channel name '" + c.name + "' must be 1-16 bytes");
  }
  for (const char ch : c.name) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x20 || u > 0x7e) fail(ErrorCode::InvalidRaster, "channel name must be printable ASCII");
  }
  if (has_channel(c.name)) fail(ErrorCode::InvalidRaster, "duplicate channel '" + c.name + "'");
  if (c.size() != pixel_count()) {
    fail(ErrorCode::InvalidRaster, "channel '" + c.name + "' has " + std::to_string(c.size()) + " entries, expected " +
                                       std::to_string(pixel_count()));
  }
  channels_.push_back(std::move(c));
}

std::size_t pixels_for_extent(double extent_m, double resolution) {
  const double n = extent_m / resolution;
  const double r = std::round(n);
  if (std::abs(n - r) < 1e-6) return static_cast<std::size_t>(std::max(0.0, r));
  return static_cast<std::size_t>(std::max(0.0, std::ceil(n)));
}

BevRaster rasterize_graph(const LaneGraph& g, double resolution, double lane_width_m) {
  if (!(resolution > 0.0)) fail(ErrorCode::InvalidArgument, "resolution must be positive");
  if (!(lane_width_m > 0.0)) fail(ErrorCode::InvalidArgument, "lane width must be positive");
  const Frame& f = g.frame();
  const std::size_t w = pixels_for_extent(f.width_m, resolution);
  const std::size_t h = pixels_for_extent(f.height_m, resolution);
  if (w == 0 || h == 0) fail(ErrorCode::EmptyFrame, "graph frame covers no pixels");

  BevRaster out(w, h, resolution);
  Channel lane = make_u8_channel("lane", w * h);
  auto& mask = lane.u8();
  const double radius = 0.5 * lane_width_m;
  const double r2 = radius * radius;

  // Clamp a continuous pixel coordinate range to valid indices.
  const auto index_range = [resolution](double lo_m, double hi_m, std::size_t n) {
    const double lo = std::ceil(lo_m / resolution - 0.5) - 1.0;
    const double hi = std::floor(hi_m / resolution - 0.5) + 1.0;
    const auto first = static_cast<std::ptrdiff_t>(std::max(0.0, lo));
    const auto last = static_cast<std::ptrdiff_t>(std::min(static_cast<double>(n) - 1.0, hi));
    return std::pair{first, last};
  };

  for (const auto& e : g.edges()) {
    // Fixed endpoint order so an edge and its reverse give the same pixels.
    Point2 a = g.source_point(e);
    Point2 b = g.target_point(e);
    if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
    const auto [c0, c1] = index_range(std::min(a.x, b.x) - radius - f.origin_x_m,
                                      std::max(a.x, b.x) + radius - f.origin_x_m, w);
    const auto [r0, r1] = index_range(std::min(a.y, b.y) - radius - f.origin_y_m,
                                      std::max(a.y, b.y) + radius - f.origin_y_m, h);
    for (std::ptrdiff_t row = r0; row <= r1; ++row) {
      for (std::ptrdiff_t col = c0; col <= c1; ++col) {
        const auto idx = static_cast<std::size_t>(row) * w + static_cast<std::size_t>(col);
        if (mask[idx]) continue;
        const Point2 p = pixel_center(f.origin_x_m, f.origin_y_m, resolution, static_cast<std::size_t>(row),
                                      static_cast<std::size_t>(col));
        if (squared_distance_to_segment(p, a, b) <= r2) mask[idx] = 1;
      }
    }
  }
  out.add_channel(std::move(lane));
  return out;
}

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas; squared distance transform of a sampled
// function along one line. Works in place through the given stride.
void squared_edt_1d(double* f, std::size_t n, std::size_t stride, std::vector<double>& d, std::vector<std::size_t>& v,
                    std::vector<double>& z) {
  if (n == 0) return;
  d.resize(n);
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  const auto at = [&](std::size_t i) { return f[i * stride]; };
  const auto intersect = [&](std::size_t q, std::size_t p) {
    const auto qd = static_cast<double>(q);
    const auto pd = static_cast<double>(p);
    return ((at(q) + qd * qd) - (at(p) + pd * pd)) / (2.0 * qd - 2.0 * pd);
  };
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = dq * dq + at(v[k]);
  }
  for (std::size_t q = 0; q < n; ++q) f[q * stride] = d[q];
}

}  // namespace

std::vector<float> distance_transform(std::span<const std::uint8_t> mask, std::size_t width, std::size_t height,
                                      double gaussian_sigma_px) {
  if (mask.size() != width * height) fail(ErrorCode::InvalidRaster, "mask size does not match dimensions");
  std::vector<double> sq(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) sq[i] = mask[i] ? 0.0 : kFar;

  std::vector<double> d;
  std::vector<std::size_t> v;
  std::vector<double> z;
  for (std::size_t col = 0; col < width; ++col) squared_edt_1d(sq.data() + col, height, width, d, v, z);
  for (std::size_t row = 0; row < height; ++row) squared_edt_1d(sq.data() + row * width, width, 1, d, v, z);

  std::vector<float> out(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    out[i] = sq[i] >= 0.5 * kFar ? std::numeric_limits<float>::infinity() : static_cast<float>(std::sqrt(sq[i]));
  }
  if (gaussian_sigma_px > 0.0) return gaussian_blur(out, width, height, gaussian_sigma_px);
  return out;
}

std::vector<float> gaussian_blur(std::span<const float> plane, std::size_t width, std::size_t height,
                                 double sigma_px) {
  if (plane.size() != width * height) fail(ErrorCode::InvalidRaster, "plane size does not match dimensions");
  if (!(sigma_px > 0.0)) return {plane.begin(), plane.end()};
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma_px));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * static_cast<double>(i * i) / (sigma_px * sigma_px));
  }

  const auto w = static_cast<std::ptrdiff_t>(width);
  const auto h = static_cast<std::ptrdiff_t>(height);
  std::vector<double> tmp(plane.size());
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      double norm_sum = 0.0;
      for (std::ptrdiff_t k = std::max(-radius, -c); k <= std::min(radius, w - 1 - c); ++k) {
        const double wk = kernel[static_cast<std::size_t>(k + radius)];
        acc += wk * plane[static_cast<std::size_t>(r * w + c + k)];
        norm_sum += wk;
      }
      tmp[static_cast<std::size_t>(r * w + c)] = acc / norm_sum;
    }
  }
  std::vector<float> out(plane.size());
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      double norm_sum = 0.0;
      for (std::ptrdiff_t k = std::max(-radius, -r); k <= std::min(radius, h - 1 - r); ++k) {
        const double wk = kernel[static_cast<std::size_t>(k + radius)];
        acc += wk * tmp[static_cast<std::size_t>((r + k) * w + c)];
        norm_sum += wk;
      }
      out[static_cast<std::size_t>(r * w + c)] = static_cast<float>(acc / norm_sum);
    }
  }
  return out;
}

Channel extract_crop_channel(const Channel& c, std::size_t width, std::size_t row, std::size_t col,
                             std::size_t size_px) {
  Channel out{c.name, {}};
  std::visit(
      [&](const auto& plane) {
        using Vec = std::decay_t<decltype(plane)>;
        Vec cropped;
        cropped.reserve(size_px * size_px);
        for (std::size_t r = row; r < row + size_px; ++r) {
          const auto begin = plane.begin() + static_cast<std::ptrdiff_t>(r * width + col);
          cropped.insert(cropped.end(), begin, begin + static_cast<std::ptrdiff_t>(size_px));
        }
        out.data = std::move(cropped);
      },
      c.data);
  return out;
}

BevRaster extract_crop(const BevRaster& r, std::size_t origin_row, std::size_t origin_col, std::size_t size_px) {
  if (size_px == 0 || origin_row + size_px > r.height() || origin_col + size_px > r.width()) {
    fail(ErrorCode::OutOfBounds, "crop of " + std::to_string(size_px) + " px at (" + std::to_string(origin_row) + ", " +
                                     std::to_string(origin_col) + ") exceeds " + std::to_string(r.height()) + "x" +
                                     std::to_string(r.width()) + " raster");
  }
  BevRaster out(size_px, size_px, r.resolution());
  for (const auto& c : r.channels()) out.add_channel(extract_crop_channel(c, r.width(), origin_row, origin_col, size_px));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct CellKey {
  std::int64_t i;
  std::int64_t j;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    const auto a = static_cast<std::uint64_t>(k.i);
    const auto b = static_cast<std::uint64_t>(k.j);
    return std::hash<std::uint64_t>{}(a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6)));
  }
};

}  // namespace

PointCloud accumulate_lowest_z(const PointCloud& cloud, double cell_m, double origin_x_m, double origin_y_m) {
  if (!(cell_m > 0.0) || !std::isfinite(cell_m)) fail(ErrorCode::NonPositiveCell, "cell size " + std::to_string(cell_m));
  PointCloud out;
  std::unordered_map<CellKey, std::size_t, CellHash> slot;
  for (const auto& p : cloud.points) {
    if (!std::isfinite(p.x_m) || !std::isfinite(p.y_m) || !std::isfinite(p.z_m)) {
      fail(ErrorCode::NonFiniteCoordinate, "point cloud contains a non-finite coordinate");
    }
    const CellKey key{static_cast<std::int64_t>(std::floor((p.x_m - origin_x_m) / cell_m)),
                      static_cast<std::int64_t>(std::floor((p.y_m - origin_y_m) / cell_m))};
    const auto [it, inserted] = slot.try_emplace(key, out.points.size());
    if (inserted) {
      out.points.push_back(p);
    } else if (p.z_m < out.points[it->second].z_m) {
      out.points[it->second] = p;
    }
  }
  return out;
}

PointCloud parse_point_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  PointCloud cloud;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "x_m,y_m,z_m,intensity") {
        fail(ErrorCode::ParseError, "line 1: expected header 'x_m,y_m,z_m,intensity'");
      }
      continue;
    }
    std::array<double, 4> values{};
    const char* cur = line.c_str();
    for (std::size_t k = 0; k < values.size(); ++k) {
      char* end = nullptr;
      values[k] = std::strtod(cur, &end);
      if (end == cur) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 4 numbers");
      cur = end;
      if (k + 1 < values.size()) {
        if (*cur != ',') fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected ','");
        ++cur;
      }
    }
    while (*cur == ' ' || *cur == '\t') ++cur;
    if (*cur != '\0') fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": trailing characters");
    cloud.points.push_back({values[0], values[1], values[2], values[3]});
  }
  if (!header_seen) fail(ErrorCode::ParseError, "missing header line");
  return cloud;
}

std::string format_point_csv(const PointCloud& cloud) {
  std::string out = "x_m,y_m,z_m,intensity\n";
  char buf[128];
  for (const auto& p : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.x_m, p.y_m, p.z_m, p.intensity);
    out += buf;
  }
  return out;
}

Channel encode_vehicle_layer(std::span<const VehicleBox> boxes, const Frame& frame, double resolution) {
  if (!(resolution > 0.0)) fail(ErrorCode::InvalidArgument, "resolution must be positive");
  const std::size_t w = pixels_for_extent(frame.width_m, resolution);
  const std::size_t h = pixels_for_extent(frame.height_m, resolution);
  Channel layer = make_f32_channel("vehicles", w * h, -1.0f);
  auto& plane = layer.f32();
  for (const auto& box : boxes) {
    const double theta = canonical_angle(box.heading_rad);
    auto value = static_cast<float>(theta / kTwoPi);
    if (value >= 1.0f) value = std::nextafter(1.0f, 0.0f);
    const Point2 axis = unit_from_angle(theta);
    const Point2 side{-axis.y, axis.x};
    const double half_l = 0.5 * box.length_m;
    const double half_w = 0.5 * box.width_m;
    const double reach = std::hypot(half_l, half_w);
    const Point2 center{box.center_x_m, box.center_y_m};

    const auto lo_col = std::max(0.0, std::floor((center.x - reach - frame.origin_x_m) / resolution));
    const auto hi_col = std::min(static_cast<double>(w) - 1.0, std::ceil((center.x + reach - frame.origin_x_m) / resolution));
    const auto lo_row = std::max(0.0, std::floor((center.y - reach - frame.origin_y_m) / resolution));
    const auto hi_row = std::min(static_cast<double>(h) - 1.0, std::ceil((center.y + reach - frame.origin_y_m) / resolution));
    for (double r = lo_row; r <= hi_row; r += 1.0) {
      for (double c = lo_col; c <= hi_col; c += 1.0) {
        const auto row = static_cast<std::size_t>(r);
        const auto col = static_cast<std::size_t>(c);
        const Point2 local = pixel_center(frame.origin_x_m, frame.origin_y_m, resolution, row, col) - center;
        if (std::abs(dot(local, axis)) <= half_l && std::abs(dot(local, side)) <= half_w) plane[row * w + col] = value;
      }
    }
  }
  return layer;
}

// ---------------------------------------------------------------------------
// BVR1: little-endian, no padding.

namespace {

constexpr std::string_view kMagic = "BVR1";

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    need(sizeof(U), what);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      fail(ErrorCode::TruncatedFile, std::string("file ends inside ") + what + " at byte " + std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string write_bvr(const BevRaster& r) {
  std::string out;
  out.reserve(4 + 12 + 8 + r.channels().size() * (17 + r.pixel_count() * 4));
  out.append(kMagic);
  put_le(out, static_cast<std::uint32_t>(r.width()));
  put_le(out, static_cast<std::uint32_t>(r.height()));
  put_le(out, static_cast<std::uint32_t>(r.channels().size()));
  put_le(out, r.resolution());
  for (const auto& c : r.channels()) {
    std::string name = c.name;
    name.resize(kMaxChannelName, '\0');
    out.append(name);
    put_le(out, static_cast<std::uint8_t>(c.dtype()));
  }
  for (const auto& c : r.channels()) {
    if (c.dtype() == Dtype::U8) {
      const auto& plane = c.u8();
      out.append(reinterpret_cast<const char*>(plane.data()), plane.size());
    } else {
      for (const float v : c.f32()) put_le(out, v);
    }
  }
  return out;
}

BevRaster read_bvr(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    fail(ErrorCode::BadMagic, "expected 'BVR1' header");
  }
  Reader in(bytes.substr(kMagic.size()));
  const auto width = in.get<std::uint32_t>("header");
  const auto height = in.get<std::uint32_t>("header");
  const auto count = in.get<std::uint32_t>("header");
  const auto resolution = in.get<double>("header");
  if (width == 0 || height == 0) fail(ErrorCode::InvalidRaster, "raster dimensions must be positive");

  std::vector<std::pair<std::string, Dtype>> decls;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto raw = in.take(kMaxChannelName, "channel table");
    std::string name(raw.substr(0, raw.find('\0')));
    const auto dtype = in.get<std::uint8_t>("channel table");
    if (dtype > 1) fail(ErrorCode::UnknownDtype, "channel '" + name + "' has dtype " + std::to_string(dtype));
    decls.emplace_back(std::move(name), static_cast<Dtype>(dtype));
  }

  BevRaster r(width, height, resolution);
  const std::size_t n = r.pixel_count();
  for (auto& [name, dtype] : decls) {
    if (dtype == Dtype::U8) {
      const auto raw = in.take(n, "u8 plane");
      r.add_channel({name, std::vector<std::uint8_t>(raw.begin(), raw.end())});
    } else {
      std::vector<float> plane(n);
      for (auto& v : plane) v = in.get<float>("f32 plane");
      r.add_channel({name, std::move(plane)});
    }
  }
  if (in.remaining() != 0) fail(ErrorCode::TrailingData, std::to_string(in.remaining()) + " bytes after last plane");
  return r;
}

BevRaster read_bvr_file(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    return read_bvr(bytes);
  } catch (const Error& ex) {
    throw Error(ex.code(), path + ": " + ex.what());
  }
}

void write_bvr_file(const BevRaster& r, const std::string& path) { write_file(path, write_bvr(r)); }

}  // namespace lanegraph
