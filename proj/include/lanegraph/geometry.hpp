#pragma once

#include <cmath>
#include <numbers>

namespace lanegraph {

/// Planar point or vector in meters. x grows to the right (raster column),
/// y grows downwards (raster row).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
constexpr double squared_norm(Point2 a) { return dot(a, a); }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
constexpr double squared_distance(Point2 a, Point2 b) { return squared_norm(b - a); }

/// Interpolates with exact endpoints and without overshooting [a, b].
inline Point2 lerp(Point2 a, Point2 b, double t) { return {std::lerp(a.x, b.x, t), std::lerp(a.y, b.y, t)}; }

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle into [0, 2π).
inline double canonical_angle(double theta) {
  double a = std::fmod(theta, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

/// Angle of a vector, counter-clockwise from +x, in [0, 2π).
inline double heading(Point2 v) { return canonical_angle(std::atan2(v.y, v.x)); }

/// Smallest absolute difference between two angles, in [0, π].
inline double angular_difference(double a, double b) {
  const double d = canonical_angle(a - b);
  return d > std::numbers::pi ? kTwoPi - d : d;
}

inline Point2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Squared distance from p to the closed segment [a, b].
inline double squared_distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = squared_norm(ab);
  if (len2 == 0.0) return squared_distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return squared_distance(p, a + ab * t);
}

}  // namespace lanegraph
