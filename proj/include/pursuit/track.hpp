#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pursuit/csv.hpp"
#include "pursuit/error.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/spline.hpp"

namespace pursuit {

// Centerline with per-point half-widths. Racetracks are closed loops; the
// closing segment (last -> first) is implicit, never duplicated.
struct Centerline {
  std::vector<Vec2> points;
  std::vector<double> w_left;
  std::vector<double> w_right;
  bool closed = true;
};

// Arc-length parameterization attached to a centerline.
struct ArcParam {
  std::vector<double> s;          // cumulative arc length, s[0] = 0
  double total_length = 0.0;      // S = s.back() + closing chord
  std::vector<Vec2> tangent;      // unit
  std::vector<Vec2> normal;       // unit left normal (tangent rotated +90 deg)
};

struct Track {
  Centerline center;
  ArcParam arc;

  std::size_t size() const { return center.points.size(); }
  double spacing() const { return arc.total_length / static_cast<double>(size()); }
};

inline void validate_centerline(const Centerline& c) {
  const std::size_t n = c.points.size();
  if (n < 16) throw IngestError("fewer than 16 points");
  if (c.w_left.size() != n || c.w_right.size() != n)
    throw IngestError("width arrays do not match point count");
  const std::size_t nseg = c.closed ? n : n - 1;
  for (std::size_t i = 0; i < nseg; ++i) {
    if (dist(c.points[i], c.points[(i + 1) % n]) <= 1e-9)
      throw IngestError("consecutive points not distinct at index " + std::to_string(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(c.w_left[i] > 0.0) || !(c.w_right[i] > 0.0))
      throw IngestError("non-positive track width at index " + std::to_string(i));
  }
  if (polyline_self_intersects(c.points, c.closed))
    throw IngestError("self-intersecting centerline");
}

inline ArcParam build_arc_param(const std::vector<Vec2>& pts, bool closed) {
  const std::size_t n = pts.size();
  ArcParam arc;
  arc.s.resize(n);
  arc.s[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) arc.s[i] = arc.s[i - 1] + dist(pts[i], pts[i - 1]);
  arc.total_length = closed ? arc.s[n - 1] + dist(pts[n - 1], pts[0]) : arc.s[n - 1];

  arc.tangent.resize(n);
  arc.normal.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 d;
    if (closed) {
      d = pts[(i + 1) % n] - pts[(i + n - 1) % n];
    } else if (i == 0) {
      d = pts[1] - pts[0];
    } else if (i == n - 1) {
      d = pts[n - 1] - pts[n - 2];
    } else {
      d = pts[i + 1] - pts[i - 1];
    }
    arc.tangent[i] = normalized(d);
    arc.normal[i] = rot90(arc.tangent[i]);
  }
  return arc;
}

// Signed curvature from non-uniform central differences on the chord-length
// grid. Left turns positive.
inline std::vector<double> curvature_profile(const std::vector<Vec2>& pts, bool closed) {
  const std::size_t n = pts.size();
  if (n < 8) throw GeometryError("curvature_profile needs >= 8 points");
  std::vector<double> kappa(n, 0.0);
  const std::size_t lo = closed ? 0 : 1;
  const std::size_t hi = closed ? n : n - 1;
  for (std::size_t i = lo; i < hi; ++i) {
    const Vec2& pm = pts[(i + n - 1) % n];
    const Vec2& p0 = pts[i];
    const Vec2& pp = pts[(i + 1) % n];
    const double h1 = dist(p0, pm);
    const double h2 = dist(pp, p0);
    const double denom = h1 * h2 * (h1 + h2);
    if (denom < 1e-18) throw GeometryError("degenerate segment at index " + std::to_string(i));
    const double dx = (h1 * h1 * pp.x + (h2 * h2 - h1 * h1) * p0.x - h2 * h2 * pm.x) / denom;
    const double dy = (h1 * h1 * pp.y + (h2 * h2 - h1 * h1) * p0.y - h2 * h2 * pm.y) / denom;
    const double ddx = 2.0 * (h1 * pp.x - (h1 + h2) * p0.x + h2 * pm.x) / denom;
    const double ddy = 2.0 * (h1 * pp.y - (h1 + h2) * p0.y + h2 * pm.y) / denom;
    const double speed2 = dx * dx + dy * dy;
    if (speed2 < 1e-12) throw GeometryError("degenerate tangent at index " + std::to_string(i));
    kappa[i] = (dx * ddy - dy * ddx) / (speed2 * std::sqrt(speed2));
  }
  if (!closed && n >= 2) {
    kappa[0] = kappa[1];
    kappa[n - 1] = kappa[n - 2];
  }
  return kappa;
}

struct PathProjection {
  std::size_t index = 0;
  double s = 0.0;
  double lateral = 0.0;  // signed by the path left-normal
};

// Nearest waypoint by Euclidean distance; ties break to the lower index.
inline PathProjection project_to_path(const std::vector<Vec2>& pts,
                                      const std::vector<Vec2>& normals,
                                      const std::vector<double>& s, const Vec2& point) {
  if (pts.empty()) throw GeometryError("project_to_path on empty path");
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 d = point - pts[i];
    const double d2 = d.x * d.x + d.y * d.y;
    if (d2 < best_d2 - 1e-15 || (std::abs(d2 - best_d2) <= 1e-15 && i < best)) {
      best_d2 = d2;
      best = i;
    }
  }
  return {best, s[best], dot(point - pts[best], normals[best])};
}

inline PathProjection project_to_path(const Track& track, const Vec2& point) {
  return project_to_path(track.center.points, track.arc.normal, track.arc.s, point);
}

namespace detail {

// Piecewise-linear periodic interpolation of per-knot values.
inline double lerp_periodic(const std::vector<double>& knots, const std::vector<double>& vals,
                            double period, double t) {
  const std::size_t n = knots.size();
  double tw = std::fmod(t - knots[0], period);
  if (tw < 0.0) tw += period;
  tw += knots[0];
  std::size_t lo = 0, hi = n;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (knots[mid] <= tw) lo = mid; else hi = mid;
  }
  const std::size_t j = (lo + 1) % n;
  const double h = (lo + 1 < n) ? knots[lo + 1] - knots[lo] : period - (knots[n - 1] - knots[0]);
  const double u = (tw - knots[lo]) / h;
  return (1.0 - u) * vals[lo] + u * vals[j];
}

}  // namespace detail

// Resamples a closed centerline to N = round(S / stepsize) points at uniform
// arc-length spacing, interpolating positions with periodic cubic splines and
// widths linearly.
inline Centerline resample_centerline(const Centerline& raw, double stepsize) {
  const std::size_t n = raw.points.size();
  std::vector<double> t(n);
  t[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) t[i] = t[i - 1] + dist(raw.points[i], raw.points[i - 1]);
  const double period = t[n - 1] + dist(raw.points[n - 1], raw.points[0]);

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = raw.points[i].x;
    ys[i] = raw.points[i].y;
  }
  PeriodicCubicSpline sx(t, xs, period);
  PeriodicCubicSpline sy(t, ys, period);

  // Dense arc-length table along the spline.
  const std::size_t subdiv = 24;
  std::vector<double> dense_t, dense_s;
  dense_t.reserve(n * subdiv + 1);
  dense_s.reserve(n * subdiv + 1);
  dense_t.push_back(0.0);
  dense_s.push_back(0.0);
  Vec2 prev{sx.eval(0.0), sy.eval(0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double t0 = t[i];
    const double t1 = (i + 1 < n) ? t[i + 1] : period;
    for (std::size_t k = 1; k <= subdiv; ++k) {
      const double tk = t0 + (t1 - t0) * static_cast<double>(k) / subdiv;
      const Vec2 p{sx.eval(tk), sy.eval(tk)};
      dense_s.push_back(dense_s.back() + dist(p, prev));
      dense_t.push_back(tk);
      prev = p;
    }
  }
  const double total_len = dense_s.back();

  const std::size_t count =
      std::max<std::size_t>(16, static_cast<std::size_t>(std::llround(total_len / stepsize)));

  Centerline out;
  out.closed = true;
  out.points.resize(count);
  out.w_left.resize(count);
  out.w_right.resize(count);
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = total_len * static_cast<double>(k) / static_cast<double>(count);
    while (cursor + 1 < dense_s.size() && dense_s[cursor + 1] < target) ++cursor;
    const double seg = dense_s[cursor + 1] - dense_s[cursor];
    const double u = seg > 0.0 ? (target - dense_s[cursor]) / seg : 0.0;
    const double tk = dense_t[cursor] + u * (dense_t[cursor + 1] - dense_t[cursor]);
    out.points[k] = {sx.eval(tk), sy.eval(tk)};
    out.w_left[k] = detail::lerp_periodic(t, raw.w_left, period, tk);
    out.w_right[k] = detail::lerp_periodic(t, raw.w_right, period, tk);
  }
  return out;
}

inline Track make_track(Centerline center) {
  validate_centerline(center);
  Track track;
  track.arc = build_arc_param(center.points, center.closed);
  track.center = std::move(center);
  return track;
}

// Ingests the public racetrack CSV layout (x_m, y_m, w_tr_right_m, w_tr_left_m)
// and resamples to uniform arc-length spacing.
inline Track load_track(const std::string& path, double stepsize = 0.25) {
  if (!(stepsize > 0.0)) throw IngestError("stepsize must be positive");
  const CsvTable table = read_csv(path, ',');
  const std::vector<double> xs = table.column("x_m");
  const std::vector<double> ys = table.column("y_m");
  const std::vector<double> wr = table.column("w_tr_right_m");
  const std::vector<double> wl = table.column("w_tr_left_m");

  Centerline raw;
  raw.closed = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    raw.points.push_back({xs[i], ys[i]});
    raw.w_right.push_back(wr[i]);
    raw.w_left.push_back(wl[i]);
  }
  // Tolerate an explicitly repeated closing point.
  if (raw.points.size() >= 2 && dist(raw.points.front(), raw.points.back()) <= 1e-9) {
    raw.points.pop_back();
    raw.w_right.pop_back();
    raw.w_left.pop_back();
  }
  validate_centerline(raw);
  Centerline resampled = resample_centerline(raw, stepsize);
  return make_track(std::move(resampled));
}

inline void save_track_csv(const std::string& path, const Centerline& c) {
  CsvWriter w(path, "# x_m,y_m,w_tr_right_m,w_tr_left_m");
  for (std::size_t i = 0; i < c.points.size(); ++i)
    w.row(c.points[i].x, c.points[i].y, c.w_right[i], c.w_left[i]);
}

// Left/right boundary polylines (centerline offset by the half-widths).
inline std::vector<Vec2> left_boundary(const Track& t) {
  std::vector<Vec2> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    out[i] = t.center.points[i] + t.center.w_left[i] * t.arc.normal[i];
  return out;
}

inline std::vector<Vec2> right_boundary(const Track& t) {
  std::vector<Vec2> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    out[i] = t.center.points[i] - t.center.w_right[i] * t.arc.normal[i];
  return out;
}

}  // namespace pursuit
