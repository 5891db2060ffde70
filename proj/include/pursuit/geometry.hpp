#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

namespace pursuit {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x{};
  double y{};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
};

inline Vec2 operator*(double k, const Vec2& v) { return v * k; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

inline Vec2 normalized(const Vec2& v) {
  const double n = norm(v);
  return n > 0.0 ? Vec2{v.x / n, v.y / n} : Vec2{0.0, 0.0};
}

// Rotate +90 degrees: the left normal of a tangent.
inline Vec2 rot90(const Vec2& v) { return {-v.y, v.x}; }

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

// World point into the frame of a pose (x, y, heading).
inline Vec2 to_body_frame(const Vec2& p, double px, double py, double heading) {
  const double dx = p.x - px, dy = p.y - py;
  const double c = std::cos(heading), s = std::sin(heading);
  return {c * dx + s * dy, -s * dx + c * dy};
}

// Proper segment intersection test (shared endpoints do not count).
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

// True if the closed or open polyline crosses itself. O(n^2) on segment pairs;
// neighbouring segments share an endpoint and are skipped.
inline bool polyline_self_intersects(const std::vector<Vec2>& pts, bool closed) {
  const std::size_t n = pts.size();
  if (n < 4) return false;
  const std::size_t nseg = closed ? n : n - 1;
  auto seg = [&](std::size_t i) -> std::pair<Vec2, Vec2> {
    return {pts[i], pts[(i + 1) % n]};
  };
  for (std::size_t i = 0; i < nseg; ++i) {
    for (std::size_t j = i + 2; j < nseg; ++j) {
      if (closed && i == 0 && j == nseg - 1) continue;  // adjacent across the seam
      auto [a, b] = seg(i);
      auto [c, d] = seg(j);
      if (segments_intersect(a, b, c, d)) return true;
    }
  }
  return false;
}

}  // namespace pursuit
