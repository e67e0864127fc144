#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>

#include "lanegraph/error.hpp"
#include "lanegraph/raster.hpp"
#include "oracles.hpp"

using namespace lanegraph;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

std::size_t count(const std::vector<std::uint8_t>& m) {
  std::size_t n = 0;
  for (auto v : m) n += v;
  return n;
}

}  // namespace

TEST_CASE("raster container") {
  CHECK(code_of([] { BevRaster(0, 4, 0.2); }) == ErrorCode::InvalidRaster);
  CHECK(code_of([] { BevRaster(4, 4, 0.0); }) == ErrorCode::InvalidRaster);
  BevRaster r(4, 3, 0.5);
  CHECK(r.width_m() == 2.0);
  CHECK(r.height_m() == 1.5);
  r.add_channel(make_u8_channel("a", 12));
  CHECK(code_of([&] { r.add_channel(make_u8_channel("a", 12)); }) == ErrorCode::InvalidRaster);
  CHECK(code_of([&] { r.add_channel(make_u8_channel("b", 11)); }) == ErrorCode::InvalidRaster);
  CHECK(code_of([&] { r.add_channel(make_u8_channel("", 12)); }) == ErrorCode::InvalidRaster);
  CHECK(code_of([&] { r.add_channel(make_u8_channel("seventeen_chars__", 12)); }) == ErrorCode::InvalidRaster);
  r.add_channel(make_f32_channel("sixteen_chars___", 12, 2.5f));
  CHECK(r.channel("sixteen_chars___").f32()[11] == 2.5f);
  CHECK(code_of([&] { (void)r.channel("zzz"); }) == ErrorCode::InvalidRaster);
}

TEST_CASE("pixel counts for metric extents") {
  CHECK(pixels_for_extent(51.2, 0.2) == 256);
  CHECK(pixels_for_extent(10.0, 0.2) == 50);
  CHECK(pixels_for_extent(10.05, 0.2) == 51);
}

TEST_CASE("rasterize_graph") {
  const Frame frame{0, 0, 20, 10};
  SUBCASE("empty graph") {
    const BevRaster r = rasterize_graph(build_graph({}, {}, frame));
    CHECK(r.width() == 100);
    CHECK(r.height() == 50);
    CHECK(count(r.channel("lane").u8()) == 0);
  }
  SUBCASE("10 m horizontal edge matches the pixel oracle") {
    // Endpoints on pixel centers.
    const LaneGraph g = build_graph({{0, 5.1, 5.1, 1}, {1, 15.1, 5.1, 1}}, {{0, 1, 1, false}}, frame);
    const BevRaster r = rasterize_graph(g, 0.2, 1.8);
    const auto& m = r.channel("lane").u8();
    CHECK(m == oracle::brute_lane_mask(g, 0.2, 1.8, r.width(), r.height()));
    // Column through the middle: 9 pixels tall.
    std::size_t column = 0;
    for (std::size_t row = 0; row < r.height(); ++row) column += m[row * r.width() + 50];
    CHECK(column == 9);
    // 51 columns between the endpoint centers inclusive times 9 rows, plus
    // two half discs minus their shared center column.
    std::size_t disc = 0;
    for (int i = -5; i <= 5; ++i) {
      for (int j = -5; j <= 5; ++j) disc += (i * i + j * j) * 0.04 <= 0.81 ? 1 : 0;
    }
    CHECK(count(m) == 51 * 9 + (disc - 9));
  }
  SUBCASE("random graphs match the oracle") {
    oracle::Rng rng(17);
    for (int t = 0; t < 10; ++t) {
      oracle::GraphOptions opts;
      opts.extent = 12.0;
      const LaneGraph g = oracle::random_graph(rng, opts);
      const BevRaster r = rasterize_graph(g, 0.2, oracle::uniform(rng, 0.3, 3.0));
      const double lw = 1.8;
      const BevRaster r2 = rasterize_graph(g, 0.2, lw);
      CHECK(r2.channel("lane").u8() == oracle::brute_lane_mask(g, 0.2, lw, r2.width(), r2.height()));
    }
  }
  SUBCASE("translation by one pixel shifts the mask") {
    oracle::Rng rng(23);
    for (int t = 0; t < 5; ++t) {
      oracle::GraphOptions opts;
      opts.extent = 10.0;
      const LaneGraph g = oracle::random_graph(rng, opts);
      std::vector<AnchorNode> moved = g.nodes();
      for (auto& n : moved) {
        n.x_m += 0.25;
        n.y_m -= 0.25;
      }
      const Frame f = g.frame();
      const LaneGraph h = build_graph(moved, g.edges(), {f.origin_x_m + 0.25, f.origin_y_m - 0.25, f.width_m, f.height_m});
      const auto a = rasterize_graph(g, 0.25, 1.0).channel("lane").u8();
      const auto b = rasterize_graph(h, 0.25, 1.0).channel("lane").u8();
      CHECK(a == b);
    }
  }
  SUBCASE("edge direction does not matter") {
    oracle::Rng rng(29);
    oracle::GraphOptions opts;
    opts.max_nodes = 12;
    const LaneGraph g = oracle::random_graph(rng, opts);
    std::vector<LaneSegment> flipped;
    for (auto e : g.edges()) flipped.push_back({e.dst, e.src, e.score, e.directed});
    const LaneGraph h = build_graph(g.nodes(), flipped, g.frame());
    CHECK(rasterize_graph(g) == rasterize_graph(h));
  }
}

TEST_CASE("distance transform") {
  SUBCASE("all ones") {
    const std::vector<std::uint8_t> m(20, 1);
    for (float v : distance_transform(m, 5, 4)) CHECK(v == 0.0f);
  }
  SUBCASE("no foreground") {
    const std::vector<std::uint8_t> m(6, 0);
    for (float v : distance_transform(m, 3, 2)) CHECK(std::isinf(v));
  }
  SUBCASE("single pixel") {
    std::vector<std::uint8_t> m(7 * 9, 0);
    m[3 * 7 + 2] = 1;
    const auto d = distance_transform(m, 7, 9);
    for (std::size_t r = 0; r < 9; ++r) {
      for (std::size_t c = 0; c < 7; ++c) {
        const double dr = static_cast<double>(r) - 3.0;
        const double dc = static_cast<double>(c) - 2.0;
        CHECK(static_cast<double>(d[r * 7 + c]) == doctest::Approx(std::sqrt(dr * dr + dc * dc)).epsilon(1e-7));
      }
    }
  }
  SUBCASE("random masks up to 48x48 match brute force") {
    oracle::Rng rng(31);
    for (int t = 0; t < 40; ++t) {
      const std::size_t w = 1 + oracle::pick(rng, 48);
      const std::size_t h = 1 + oracle::pick(rng, 48);
      const double density = oracle::uniform(rng, 0.0, 0.3);
      std::vector<std::uint8_t> m(w * h);
      for (auto& v : m) v = oracle::uniform(rng, 0, 1) < density ? 1 : 0;
      const auto d = distance_transform(m, w, h);
      const auto ref = oracle::brute_edt(m, w, h);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (std::isinf(ref[i])) {
          CHECK(std::isinf(d[i]));
        } else {
          CHECK(std::abs(static_cast<double>(d[i]) - ref[i]) <= 1e-6 * std::max(1.0, ref[i]));
        }
      }
    }
  }
}

TEST_CASE("gaussian blur") {
  const std::vector<float> flat(30, 3.0f);
  for (float v : gaussian_blur(flat, 6, 5, 1.5)) CHECK(v == doctest::Approx(3.0f));
  // Far enough from the border that no truncated kernel reaches the spike.
  std::vector<float> spike(15 * 15, 0.0f);
  spike[112] = 1.0f;
  const auto b = gaussian_blur(spike, 15, 15, 1.0);
  double sum = 0.0;
  for (float v : b) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(b[112] > b[113]);
  CHECK(b[113] == doctest::Approx(b[111]));
  CHECK(b[97] == doctest::Approx(b[127]));
  CHECK(b[112 + 4] == 0.0f);
  CHECK(gaussian_blur(spike, 15, 15, 0.0) == spike);
}

TEST_CASE("crop") {
  BevRaster r(300, 280, 0.2);
  Channel c = make_u8_channel("a", 300 * 280);
  for (std::size_t i = 0; i < c.u8().size(); ++i) c.u8()[i] = static_cast<std::uint8_t>(i % 251);
  r.add_channel(c);
  r.add_channel(make_f32_channel("b", 300 * 280, 1.5f));
  const BevRaster crop = extract_crop(r, 10, 20, 256);
  CHECK(crop.width() == 256);
  CHECK(crop.width_m() == doctest::Approx(51.2));
  CHECK(crop.channel("a").u8()[0] == r.channel("a").u8()[10 * 300 + 20]);
  CHECK(crop.channel("a").u8()[256 * 5 + 7] == r.channel("a").u8()[15 * 300 + 27]);
  CHECK(crop.channel("b").f32()[100] == 1.5f);
  BevRaster sq(16, 16, 0.2);
  sq.add_channel(make_u8_channel("a", 256, 4));
  CHECK(extract_crop(sq, 0, 0, 16) == sq);
  CHECK(code_of([&] { extract_crop(r, 30, 0, 256); }) == ErrorCode::OutOfBounds);
  CHECK(code_of([&] { extract_crop(r, 0, 45, 256); }) == ErrorCode::OutOfBounds);
}

TEST_CASE("lowest-z filter") {
  SUBCASE("one cell keeps the lowest point") {
    const PointCloud c{{{0.05, 0.05, 1.5, 0.2}, {0.1, 0.1, 0.1, 0.3}, {0.15, 0.01, 2.0, 0.4}}};
    const PointCloud out = accumulate_lowest_z(c, 0.2);
    REQUIRE(out.points.size() == 1);
    CHECK(out.points[0].z_m == 0.1);
  }
  SUBCASE("single point and separate cells") {
    const PointCloud one{{{1, 1, 1, 0}}};
    CHECK(accumulate_lowest_z(one, 0.2) == one);
    const PointCloud two{{{0.1, 0.1, 3, 0}, {5.1, 0.1, 4, 0}}};
    CHECK(accumulate_lowest_z(two, 0.2).points.size() == 2);
  }
  SUBCASE("ties keep the first occurrence") {
    const PointCloud c{{{0.1, 0.1, 1, 0.1}, {0.12, 0.1, 1, 0.9}}};
    CHECK(accumulate_lowest_z(c, 0.2).points[0].intensity == 0.1);
  }
  SUBCASE("errors") {
    CHECK(code_of([] { accumulate_lowest_z({}, 0.0); }) == ErrorCode::NonPositiveCell);
  }
  SUBCASE("random clouds") {
    oracle::Rng rng(37);
    for (int t = 0; t < 20; ++t) {
      PointCloud c;
      for (int i = 0; i < 300; ++i) {
        c.points.push_back({oracle::uniform(rng, -3, 3), oracle::uniform(rng, -3, 3), oracle::uniform(rng, -1, 2),
                            oracle::uniform(rng, 0, 1)});
      }
      const double cell = oracle::uniform(rng, 0.2, 1.5);
      const PointCloud out = accumulate_lowest_z(c, cell, -0.3, 0.1);
      std::map<std::pair<long, long>, double> lowest;
      for (const auto& p : c.points) {
        const std::pair<long, long> key{static_cast<long>(std::floor((p.x_m + 0.3) / cell)),
                                        static_cast<long>(std::floor((p.y_m - 0.1) / cell))};
        const auto it = lowest.find(key);
        if (it == lowest.end() || p.z_m < it->second) lowest[key] = p.z_m;
      }
      CHECK(out.points.size() == lowest.size());
      for (const auto& p : out.points) {
        const std::pair<long, long> key{static_cast<long>(std::floor((p.x_m + 0.3) / cell)),
                                        static_cast<long>(std::floor((p.y_m - 0.1) / cell))};
        CHECK(p.z_m == lowest.at(key));
      }
    }
  }
  SUBCASE("csv") {
    const PointCloud c{{{0.1, -2.5, 1e-3, 0.5}, {1.0 / 3.0, 2, 3, 1}}};
    CHECK(parse_point_csv(format_point_csv(c)) == c);
    CHECK(code_of([] { parse_point_csv("x,y,z\n1,2,3\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_point_csv("x_m,y_m,z_m,intensity\n1,2,x,0\n"); }) == ErrorCode::ParseError);
  }
}

TEST_CASE("vehicle layer") {
  const Frame f{0, 0, 4, 4};
  SUBCASE("no boxes") {
    const Channel c = encode_vehicle_layer({}, f, 0.2);
    CHECK(c.name == "vehicles");
    for (float v : c.f32()) CHECK(v == -1.0f);
  }
  SUBCASE("heading values") {
    const std::vector<VehicleBox> half{{2, 2, 1, 1, std::numbers::pi}};
    const Channel c = encode_vehicle_layer(half, f, 0.2);
    CHECK(c.f32()[10 * 20 + 10] == 0.5f);
    CHECK(c.f32()[0] == -1.0f);
    const std::vector<VehicleBox> full{{2, 2, 1, 1, 2 * std::numbers::pi}};
    CHECK(encode_vehicle_layer(full, f, 0.2).f32()[10 * 20 + 10] == 0.0f);
  }
  SUBCASE("oriented footprint and overlap order") {
    // A 3 x 0.4 box rotated 90 degrees covers a vertical strip.
    const std::vector<VehicleBox> boxes{{2, 2, 3, 0.4, std::numbers::pi / 2}, {2, 2, 0.4, 0.4, 0.0}};
    const Channel c = encode_vehicle_layer(boxes, f, 0.2);
    const auto at = [&](int row, int col) { return c.f32()[static_cast<std::size_t>(row * 20 + col)]; };
    CHECK(at(4, 9) == 0.25f);
    CHECK(at(4, 13) == -1.0f);
    CHECK(at(10, 10) == 0.0f);  // second box wins
  }
}

TEST_CASE("BVR1 files") {
  SUBCASE("random round trips are bit exact") {
    oracle::Rng rng(41);
    for (int t = 0; t < 100; ++t) {
      const std::size_t w = 1 + oracle::pick(rng, 20);
      const std::size_t h = 1 + oracle::pick(rng, 20);
      BevRaster r(w, h, oracle::uniform(rng, 0.01, 2.0));
      const std::size_t channels = oracle::pick(rng, 4);
      for (std::size_t k = 0; k < channels; ++k) {
        const std::string name = "c" + std::to_string(k);
        if (oracle::pick(rng, 2) == 0) {
          Channel c = make_u8_channel(name, w * h);
          for (auto& v : c.u8()) v = static_cast<std::uint8_t>(rng());
          r.add_channel(c);
        } else {
          Channel c = make_f32_channel(name, w * h);
          for (auto& v : c.f32()) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()) & 0x7f7fffffu);
          r.add_channel(c);
        }
      }
      const std::string bytes = write_bvr(r);
      const BevRaster back = read_bvr(bytes);
      CHECK(write_bvr(back) == bytes);
      CHECK(back.width() == w);
      CHECK(back.channels().size() == channels);
    }
  }
  SUBCASE("layout") {
    BevRaster r(2, 1, 0.5);
    r.add_channel({"m", std::vector<std::uint8_t>{7, 9}});
    const std::string b = write_bvr(r);
    CHECK(b.size() == 4 + 4 + 4 + 4 + 8 + 17 + 2);
    CHECK(b.substr(0, 4) == "BVR1");
    CHECK(static_cast<unsigned char>(b[4]) == 2);
    CHECK(static_cast<unsigned char>(b[b.size() - 1]) == 9);
  }
  SUBCASE("errors") {
    BevRaster r(3, 2, 0.2);
    r.add_channel(make_f32_channel("f", 6, 1.0f));
    const std::string b = write_bvr(r);
    CHECK(code_of([&] { read_bvr("BVR2" + b.substr(4)); }) == ErrorCode::BadMagic);
    CHECK(code_of([&] { read_bvr(b.substr(0, b.size() - 1)); }) == ErrorCode::TruncatedFile);
    CHECK(code_of([&] { read_bvr(b.substr(0, 10)); }) == ErrorCode::TruncatedFile);
    std::string bad = b;
    bad[24 + 16] = 7;
    CHECK(code_of([&] { read_bvr(bad); }) == ErrorCode::UnknownDtype);
    CHECK(code_of([&] { read_bvr(b + "x"); }) == ErrorCode::TrailingData);
  }
}
