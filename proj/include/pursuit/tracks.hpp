#pragma once
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pursuit/error.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/track.hpp"

namespace pursuit {

// Builds closed centerlines from straight/arc chains. A half-chain whose net
// turn is pi is mirrored by the point reflection p -> D - p, which closes the
// loop exactly.
class TrackChain {
 public:
  explicit TrackChain(double sample_step = 0.5) : step_(sample_step) {
    pts_.push_back({0.0, 0.0});
  }

  TrackChain& straight(double length) {
    const Vec2 dir{std::cos(heading_), std::sin(heading_)};
    const int n = std::max(1, static_cast<int>(std::ceil(length / step_)));
    const Vec2 start = pts_.back();
    for (int i = 1; i <= n; ++i)
      pts_.push_back(start + dir * (length * static_cast<double>(i) / n));
    return *this;
  }

  // Positive angle turns left.
  TrackChain& arc(double radius, double angle_deg) {
    const double angle = angle_deg * kPi / 180.0;
    const double side = angle >= 0.0 ? 1.0 : -1.0;
    const Vec2 center = pts_.back() + rotate({0.0, side * radius}, heading_);
    const double a0 = std::atan2(pts_.back().y - center.y, pts_.back().x - center.x);
    const double arc_len = radius * std::abs(angle);
    const int n = std::max(2, static_cast<int>(std::ceil(arc_len / step_)));
    for (int i = 1; i <= n; ++i) {
      const double a = a0 + angle * static_cast<double>(i) / n;
      pts_.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    }
    heading_ = wrap_angle(heading_ + angle);
    return *this;
  }

  // Mirrors the half-chain into a closed loop and attaches constant widths.
  Centerline close_by_symmetry(double half_width) const {
    if (std::abs(wrap_angle(heading_ - kPi)) > 1e-9)
      throw GeometryError("half-chain net turn must be pi to close by symmetry");
    const Vec2 D = pts_.back();
    std::vector<Vec2> full(pts_.begin(), pts_.end() - 1);  // drop junction duplicate
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) full.push_back(D - pts_[i]);

    Centerline c;
    c.closed = true;
    for (const Vec2& p : full) {
      if (!c.points.empty() && dist(c.points.back(), p) <= 1e-9) continue;
      c.points.push_back(p);
    }
    if (c.points.size() >= 2 && dist(c.points.front(), c.points.back()) <= 1e-9)
      c.points.pop_back();
    c.w_left.assign(c.points.size(), half_width);
    c.w_right.assign(c.points.size(), half_width);
    return c;
  }

 private:
  double step_;
  double heading_ = 0.0;
  std::vector<Vec2> pts_;
};

// Stadium: two straights joined by 180-degree arcs.
inline Centerline make_oval_track(double straight_len = 25.0, double radius = 8.0,
                                  double half_width = 1.7) {
  return TrackChain().straight(straight_len).arc(radius, 180.0).close_by_symmetry(half_width);
}

// Long straights into tight 180-degree hairpins.
inline Centerline make_hairpin_track(double straight_len = 40.0, double radius = 2.4,
                                     double half_width = 1.6) {
  return TrackChain().straight(straight_len).arc(radius, 180.0).close_by_symmetry(half_width);
}

// Stadium with an S-bend on each straight.
inline Centerline make_chicane_track(double half_width = 1.6) {
  return TrackChain()
      .straight(10.0)
      .arc(5.0, 55.0)
      .arc(5.0, -55.0)
      .straight(6.0)
      .arc(5.0, -45.0)
      .arc(5.0, 45.0)
      .straight(10.0)
      .arc(7.0, 180.0)
      .close_by_symmetry(half_width);
}

// Training circuit: straights, an S-bend, fast sweepers, and a tight hairpin
// per half, covering the curvature and speed range of the evaluation tracks.
inline Centerline make_gp_track(double half_width = 1.7) {
  return TrackChain()
      .straight(14.0)
      .arc(5.0, 45.0)
      .arc(5.0, -45.0)
      .straight(12.0)
      .arc(7.0, 120.0)
      .straight(5.0)
      .arc(2.4, -120.0)
      .straight(5.0)
      .arc(6.0, 90.0)
      .straight(6.0)
      .arc(4.0, 90.0)
      .close_by_symmetry(half_width);
}

inline std::vector<std::pair<std::string, Centerline>> synthetic_corpus() {
  return {{"oval", make_oval_track()},
          {"chicane", make_chicane_track()},
          {"hairpin", make_hairpin_track()},
          {"gp", make_gp_track()}};
}

}  // namespace pursuit
