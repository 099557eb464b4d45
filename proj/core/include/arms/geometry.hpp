#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace arms {

/// Planar vector in meters (positions) or meters per second (velocities).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
constexpr Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double squared_norm(Vec2 v) { return dot(v, v); }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Unit vector along `v`, or the zero vector when `v` is (numerically) zero.
inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  return n > 1e-12 ? v / n : Vec2{};
}

inline Vec2 from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

inline Vec2 rotate(Vec2 v, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Componentwise clamp into the box [lo, hi].
constexpr Vec2 clamp_box(Vec2 v, Vec2 lo, Vec2 hi) {
  return {std::clamp(v.x, lo.x, hi.x), std::clamp(v.y, lo.y, hi.y)};
}

/// Scales `v` down so that its Euclidean norm does not exceed `max_norm`.
inline Vec2 clamp_norm(Vec2 v, double max_norm) {
  const double n = norm(v);
  return n > max_norm && n > 0.0 ? v * (max_norm / n) : v;
}

inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

struct Pose2 {
  Vec2 position;
  double heading = 0.0;
};

}  // namespace arms
