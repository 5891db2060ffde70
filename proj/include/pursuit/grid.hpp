#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "pursuit/error.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/track.hpp"

namespace pursuit {

struct OccupancyGrid {
  double resolution = 0.05;  // meters per cell
  double origin_x = 0.0;     // world position of cell (0, 0) corner
  double origin_y = 0.0;
  double origin_yaw = 0.0;   // kept for the map sidecar format; always 0 here
  int width = 0;             // cells
  int height = 0;
  std::vector<std::uint8_t> cells;  // 1 = wall

  bool occupied(int cx, int cy) const {
    if (cx < 0 || cy < 0 || cx >= width || cy >= height) return true;
    return cells[static_cast<std::size_t>(cy) * width + cx] != 0;
  }
  bool occupied_world(double x, double y) const {
    return occupied(static_cast<int>(std::floor((x - origin_x) / resolution)),
                    static_cast<int>(std::floor((y - origin_y) / resolution)));
  }
  void set(int cx, int cy, std::uint8_t v) {
    if (cx < 0 || cy < 0 || cx >= width || cy >= height) return;
    cells[static_cast<std::size_t>(cy) * width + cx] = v;
  }
  Vec2 cell_center(int cx, int cy) const {
    return {origin_x + (cx + 0.5) * resolution, origin_y + (cy + 0.5) * resolution};
  }
};

namespace detail {

// Scanline even-odd fill: marks cells whose center lies inside the closed polygon.
inline void fill_polygon(const std::vector<Vec2>& poly, const OccupancyGrid& g,
                         std::vector<std::uint8_t>& inside) {
  const std::size_t n = poly.size();
  std::vector<double> xs;
  for (int cy = 0; cy < g.height; ++cy) {
    const double y = g.origin_y + (cy + 0.5) * g.resolution;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % n];
      if ((a.y <= y && b.y > y) || (b.y <= y && a.y > y)) {
        xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      int c0 = static_cast<int>(std::ceil((xs[k] - g.origin_x) / g.resolution - 0.5));
      int c1 = static_cast<int>(std::floor((xs[k + 1] - g.origin_x) / g.resolution - 0.5));
      c0 = std::max(c0, 0);
      c1 = std::min(c1, g.width - 1);
      for (int cx = c0; cx <= c1; ++cx)
        inside[static_cast<std::size_t>(cy) * g.width + cx] ^= 1;
    }
  }
}

// Stamps cells whose center lies within `radius` of the polyline as occupied.
inline void stamp_polyline(const std::vector<Vec2>& poly, bool closed, double radius,
                           OccupancyGrid& g) {
  const std::size_t n = poly.size();
  const std::size_t nseg = closed ? n : n - 1;
  const double step = g.resolution * 0.5;
  const int reach = static_cast<int>(std::ceil(radius / g.resolution)) + 1;
  for (std::size_t i = 0; i < nseg; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double len = dist(a, b);
    const int samples = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k <= samples; ++k) {
      const Vec2 p = a + (b - a) * (static_cast<double>(k) / samples);
      const int cx = static_cast<int>(std::floor((p.x - g.origin_x) / g.resolution));
      const int cy = static_cast<int>(std::floor((p.y - g.origin_y) / g.resolution));
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const int qx = cx + dx, qy = cy + dy;
          if (qx < 0 || qy < 0 || qx >= g.width || qy >= g.height) continue;
          const Vec2 c = g.cell_center(qx, qy);
          // distance from cell center to the segment
          const Vec2 ab = b - a;
          const double tt = std::clamp(dot(c - a, ab) / std::max(dot(ab, ab), 1e-12), 0.0, 1.0);
          if (dist(c, a + ab * tt) < radius) g.set(qx, qy, 1);
        }
      }
    }
  }
}

}  // namespace detail

// Builds the occupancy grid: free between the boundary polylines, a band of
// occupied cells tracing each boundary, occupied everywhere else.
inline OccupancyGrid rasterize(const Track& track, double resolution = 0.05) {
  if (resolution < 0.01 || resolution > 0.5)
    throw IngestError("grid resolution out of range [0.01, 0.5]");

  const std::vector<Vec2> lb = left_boundary(track);
  const std::vector<Vec2> rb = right_boundary(track);

  double min_x = lb[0].x, max_x = lb[0].x, min_y = lb[0].y, max_y = lb[0].y;
  for (const auto* poly : {&lb, &rb}) {
    for (const Vec2& p : *poly) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
  const double pad = 1.0;
  OccupancyGrid g;
  g.resolution = resolution;
  g.origin_x = min_x - pad;
  g.origin_y = min_y - pad;
  g.width = static_cast<int>(std::ceil((max_x - min_x + 2.0 * pad) / resolution));
  g.height = static_cast<int>(std::ceil((max_y - min_y + 2.0 * pad) / resolution));
  g.cells.assign(static_cast<std::size_t>(g.width) * g.height, 1);

  // Drivable cells lie inside exactly one boundary polygon.
  std::vector<std::uint8_t> in_left(g.cells.size(), 0), in_right(g.cells.size(), 0);
  detail::fill_polygon(lb, g, in_left);
  detail::fill_polygon(rb, g, in_right);
  for (std::size_t i = 0; i < g.cells.size(); ++i)
    g.cells[i] = (in_left[i] ^ in_right[i]) ? 0 : 1;

  detail::stamp_polyline(lb, true, resolution, g);
  detail::stamp_polyline(rb, true, resolution, g);

  for (const Vec2& p : track.center.points) {
    if (g.occupied_world(p.x, p.y))
      throw GeometryError("centerline point rasterized as occupied; track too narrow for grid");
  }
  return g;
}

// DDA grid traversal: distance to the first occupied cell along the ray,
// capped at max_range.
inline double cast_ray(const OccupancyGrid& g, double x, double y, double angle,
                       double max_range) {
  int cx = static_cast<int>(std::floor((x - g.origin_x) / g.resolution));
  int cy = static_cast<int>(std::floor((y - g.origin_y) / g.resolution));
  if (g.occupied(cx, cy)) return 0.0;

  const double dx = std::cos(angle), dy = std::sin(angle);
  const int step_x = dx > 0.0 ? 1 : -1;
  const int step_y = dy > 0.0 ? 1 : -1;
  const double inv_dx = dx != 0.0 ? 1.0 / dx : std::numeric_limits<double>::infinity();
  const double inv_dy = dy != 0.0 ? 1.0 / dy : std::numeric_limits<double>::infinity();

  const double cell_x = g.origin_x + cx * g.resolution;
  const double cell_y = g.origin_y + cy * g.resolution;
  double t_max_x = dx > 0.0 ? (cell_x + g.resolution - x) * inv_dx
                            : (dx < 0.0 ? (cell_x - x) * inv_dx
                                        : std::numeric_limits<double>::infinity());
  double t_max_y = dy > 0.0 ? (cell_y + g.resolution - y) * inv_dy
                            : (dy < 0.0 ? (cell_y - y) * inv_dy
                                        : std::numeric_limits<double>::infinity());
  const double t_delta_x = std::abs(g.resolution * inv_dx);
  const double t_delta_y = std::abs(g.resolution * inv_dy);

  double t = 0.0;
  while (t <= max_range) {
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      cx += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      cy += step_y;
    }
    if (t > max_range) break;
    if (g.occupied(cx, cy)) return t;
  }
  return max_range;
}

inline std::vector<double> raycast(const OccupancyGrid& g, double x, double y, double heading,
                                   const std::vector<double>& angles, double max_range) {
  if (g.occupied_world(x, y))
    throw LocalizationInputError("raycast pose lies in an occupied cell");
  std::vector<double> out(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i)
    out[i] = cast_ray(g, x, y, heading + angles[i], max_range);
  return out;
}

// Evenly spaced beam angles across a field of view centred on the heading.
inline std::vector<double> beam_angles(int count, double fov) {
  std::vector<double> a(count);
  for (int i = 0; i < count; ++i)
    a[i] = -fov / 2.0 + fov * (count > 1 ? static_cast<double>(i) / (count - 1) : 0.5);
  return a;
}

// P5 graymap plus a plain-text sidecar with resolution and origin.
inline void save_pgm(const OccupancyGrid& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write file: " + path);
  out << "P5\n" << g.width << " " << g.height << "\n255\n";
  // image rows top-to-bottom = grid rows reversed
  for (int cy = g.height - 1; cy >= 0; --cy) {
    for (int cx = 0; cx < g.width; ++cx) {
      const char v = g.occupied(cx, cy) ? static_cast<char>(0) : static_cast<char>(255);
      out.put(v);
    }
  }
  std::ofstream meta(path + ".meta");
  meta.precision(17);
  meta << "resolution: " << g.resolution << "\n"
       << "origin: [" << g.origin_x << ", " << g.origin_y << ", " << g.origin_yaw << "]\n"
       << "width: " << g.width << "\nheight: " << g.height << "\n";
}

}  // namespace pursuit
