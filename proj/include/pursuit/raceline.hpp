#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pursuit/csv.hpp"
#include "pursuit/error.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/track.hpp"

namespace pursuit {

// Lateral-offset bounds for the raceline search, derived from the half-widths
// minus a safety margin. Positive offsets point along the left normal.
struct RacelineProblem {
  const Track* track = nullptr;
  std::vector<double> d_min;
  std::vector<double> d_max;
  double margin = 0.3;
};

inline RacelineProblem make_raceline_problem(const Track& track, double margin = 0.3) {
  RacelineProblem p;
  p.track = &track;
  p.margin = margin;
  const std::size_t n = track.size();
  p.d_min.resize(n);
  p.d_max.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.d_max[i] = track.center.w_left[i] - margin;
    p.d_min[i] = -(track.center.w_right[i] - margin);
    if (!(p.d_min[i] < p.d_max[i]) || p.d_min[i] > 0.0 || p.d_max[i] < 0.0)
      throw IngestError("track too narrow for margin at index " + std::to_string(i));
  }
  return p;
}

// Optimized reference trajectory: parallel periodic sequences plus derived
// frame data used by the controller and observation builder.
struct Raceline {
  std::vector<double> s;
  std::vector<Vec2> pts;
  std::vector<double> kappa;
  std::vector<double> v;  // speed limit m/s

  std::vector<Vec2> tangent;
  std::vector<Vec2> normal;
  double total_length = 0.0;
  double spacing = 0.0;

  std::size_t size() const { return pts.size(); }

  void finalize() {
    ArcParam arc = build_arc_param(pts, true);
    tangent = std::move(arc.tangent);
    normal = std::move(arc.normal);
    total_length = arc.total_length;
    spacing = total_length / static_cast<double>(pts.size());
  }

  PathProjection project(const Vec2& p) const { return project_to_path(pts, normal, s, p); }

  // waypoint index `ahead` meters further along the loop
  std::size_t index_ahead(std::size_t from, double ahead) const {
    const auto n = static_cast<long long>(pts.size());
    const long long k = static_cast<long long>(std::llround(ahead / spacing));
    return static_cast<std::size_t>(((static_cast<long long>(from) + k) % n + n) % n);
  }
};

namespace detail {

// Curvature stencil on the fixed uniform parameter grid (spacing h) used by
// the optimizer; returns kappa and, optionally, d kappa / d position for the
// three stencil points.
struct CurvatureStencil {
  double kappa;
  // derivative of kappa w.r.t. (x,y) of points i-1, i, i+1
  Vec2 d_prev, d_mid, d_next;
};

inline CurvatureStencil curvature_stencil(const Vec2& pm, const Vec2& p0, const Vec2& pp,
                                          double h, bool with_grad) {
  const double ax = (pp.x - pm.x) / (2.0 * h);
  const double ay = (pp.y - pm.y) / (2.0 * h);
  const double bx = (pp.x - 2.0 * p0.x + pm.x) / (h * h);
  const double by = (pp.y - 2.0 * p0.y + pm.y) / (h * h);
  const double n2 = ax * ax + ay * ay;
  if (n2 < 1e-12) throw GeometryError("degenerate tangent in curvature stencil");
  const double n15 = n2 * std::sqrt(n2);
  const double crossv = ax * by - ay * bx;
  CurvatureStencil out;
  out.kappa = crossv / n15;
  if (!with_grad) return out;

  const double dk_dax = by / n15 - 3.0 * out.kappa * ax / n2;
  const double dk_day = -bx / n15 - 3.0 * out.kappa * ay / n2;
  const double dk_dbx = -ay / n15;
  const double dk_dby = ax / n15;

  const double ca = 1.0 / (2.0 * h);
  const double cb = 1.0 / (h * h);
  out.d_prev = {-ca * dk_dax + cb * dk_dbx, -ca * dk_day + cb * dk_dby};
  out.d_mid = {-2.0 * cb * dk_dbx, -2.0 * cb * dk_dby};
  out.d_next = {ca * dk_dax + cb * dk_dbx, ca * dk_day + cb * dk_dby};
  return out;
}

}  // namespace detail

// Integrated squared curvature of the offset path p_i = c_i + d_i n_i on the
// fixed centerline grid, with its analytic gradient in d.
inline double curvature_objective(const RacelineProblem& prob, const std::vector<double>& d,
                                  std::vector<double>* grad = nullptr) {
  const Track& t = *prob.track;
  const std::size_t n = t.size();
  const double h = t.spacing();
  std::vector<Vec2> p(n);
  for (std::size_t i = 0; i < n; ++i)
    p[i] = t.center.points[i] + d[i] * t.arc.normal[i];

  if (grad) grad->assign(n, 0.0);
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t im = (i + n - 1) % n;
    const std::size_t ip = (i + 1) % n;
    const auto st = detail::curvature_stencil(p[im], p[i], p[ip], h, grad != nullptr);
    obj += st.kappa * st.kappa * h;
    if (grad) {
      const double w = 2.0 * st.kappa * h;
      (*grad)[im] += w * dot(st.d_prev, t.arc.normal[im]);
      (*grad)[i] += w * dot(st.d_mid, t.arc.normal[i]);
      (*grad)[ip] += w * dot(st.d_next, t.arc.normal[ip]);
    }
  }
  return obj;
}

namespace detail {

// Periodic [1/4, 1/2, 1/4] smoothing passes. The kernel is symmetric positive
// definite, so the smoothed gradient is still a descent direction; it damps
// the stiff oscillatory modes of the curvature stencil that throttle plain
// gradient steps.
inline std::vector<double> smooth_periodic(const std::vector<double>& x, int passes) {
  const std::size_t n = x.size();
  std::vector<double> a = x, b(n);
  for (int p = 0; p < passes; ++p) {
    for (std::size_t i = 0; i < n; ++i)
      b[i] = 0.25 * a[(i + n - 1) % n] + 0.5 * a[i] + 0.25 * a[(i + 1) % n];
    a.swap(b);
  }
  return a;
}

}  // namespace detail

// Projected gradient descent with backtracking line search on the discrete
// minimum-curvature problem. Steps follow the smoothed (preconditioned)
// gradient, falling back to the raw gradient if the line search stalls. The
// returned offsets satisfy the box bounds exactly and never increase the
// objective above the centerline's. When given, objective_trace records the
// value after every accepted step.
inline std::vector<double> optimize_min_curvature(const RacelineProblem& prob, int iters = 500,
                                                  double tol = 1e-7,
                                                  std::vector<double>* objective_trace = nullptr) {
  if (iters < 1) throw OptimizationError("iters must be >= 1", 0);
  const std::size_t n = prob.track->size();
  std::vector<double> d(n, 0.0), grad, trial(n);

  double obj = curvature_objective(prob, d, &grad);
  if (!std::isfinite(obj)) throw OptimizationError("non-finite objective", 0);
  if (objective_trace) objective_trace->push_back(obj);

  auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  const int passes = 64;
  std::vector<double> dir = detail::smooth_periodic(grad, passes);
  double step = max_abs(dir) > 0.0 ? 0.1 / max_abs(dir) : 1.0;

  for (int it = 1; it <= iters; ++it) {
    bool accepted = false;
    double obj_new = obj;
    bool raw_fallback = false;
    for (int bt = 0; bt < 80; ++bt) {
      double move2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::clamp(d[i] - step * dir[i], prob.d_min[i], prob.d_max[i]);
        const double diff = trial[i] - d[i];
        move2 += diff * diff;
      }
      if (move2 == 0.0) return d;  // projected step vanished: stationary
      obj_new = curvature_objective(prob, trial, nullptr);
      if (!std::isfinite(obj_new)) throw OptimizationError("non-finite objective", it);
      if (obj_new <= obj - 1e-4 * move2 / step) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (bt == 40 && !raw_fallback) {  // smoothed direction exhausted
        dir = grad;
        step = max_abs(dir) > 0.0 ? 1e-3 / max_abs(dir) : 1e-3;
        raw_fallback = true;
      }
    }
    if (!accepted) break;

    const double rel = (obj - obj_new) / std::max(obj, 1e-300);
    d.swap(trial);
    obj = obj_new;
    if (objective_trace) objective_trace->push_back(obj);
    curvature_objective(prob, d, &grad);
    for (double g : grad)
      if (!std::isfinite(g)) throw OptimizationError("non-finite gradient", it);
    dir = detail::smooth_periodic(grad, passes);
    step *= 2.0;
    if (rel < tol) break;
  }
  return d;
}

struct VelocityProfileParams {
  double mu = 0.8;
  double gravity = 9.81;
  double epsilon = 1e-3;    // curvature regularizer, 1/m
  double a_long_max = 6.0;  // m/s^2
  double v_cap = 12.0;      // m/s
};

// Pointwise lateral-grip speed cap, v = sqrt(mu g / (|kappa| + eps)).
inline std::vector<double> pointwise_speed_cap(const std::vector<double>& kappa,
                                               const VelocityProfileParams& p) {
  std::vector<double> v(kappa.size());
  const double mug = p.mu * p.gravity;
  for (std::size_t i = 0; i < kappa.size(); ++i)
    v[i] = std::min(p.v_cap, std::sqrt(mug / (std::abs(kappa[i]) + p.epsilon)));
  return v;
}

// Friction-circle-limited profile over a closed loop: pointwise cap, then
// forward (acceleration) and backward (braking) sweeps iterated to a fixed
// point. a_x is limited to the friction circle remainder intersected with
// a_long_max.
inline std::vector<double> velocity_profile(const std::vector<double>& kappa, double ds,
                                            const VelocityProfileParams& p) {
  const std::size_t n = kappa.size();
  const double mug = p.mu * p.gravity;
  const double mug2 = mug * mug;

  std::vector<double> u(n);  // v^2
  {
    const std::vector<double> cap = pointwise_speed_cap(kappa, p);
    for (std::size_t i = 0; i < n; ++i) u[i] = cap[i] * cap[i];
  }

  auto avail = [&](double ui, double ki) {
    const double lat = ui * ki;
    return std::sqrt(std::max(0.0, mug2 - lat * lat));
  };

  const double tol_u = 1e-12;
  for (int sweep = 0; sweep < 10; ++sweep) {
    bool changed = false;
    // forward: acceleration limit out of each point
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      const double bound = u[i] + 2.0 * ds * std::min(p.a_long_max, avail(u[i], kappa[i]));
      if (u[j] > bound + tol_u) {
        u[j] = bound;
        changed = true;
      }
    }
    // backward: braking limit into each point, friction bound solved in
    // closed form from (u - u1)^2 = 4 ds^2 (mug^2 - kappa^2 u^2)
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t i = k;
      const std::size_t j = (i + 1) % n;
      const double u1 = u[j];
      const double c = 4.0 * ds * ds * kappa[i] * kappa[i];
      const double disc = (1.0 + c) * 4.0 * ds * ds * mug2 - c * u1 * u1;
      double bound = u1 + 2.0 * ds * p.a_long_max;
      if (disc >= 0.0) {
        const double ufric = (u1 + std::sqrt(disc)) / (1.0 + c);
        bound = std::min(bound, ufric);
      }
      if (u[i] > bound + tol_u) {
        u[i] = bound;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::sqrt(std::max(0.0, u[i]));
  return v;
}

struct RacelineParams {
  double margin = 0.3;
  int opt_iters = 500;
  double opt_tol = 1e-7;
  double waypoint_spacing = 0.25;
  VelocityProfileParams profile;
  bool smooth_profile = true;  // false: pointwise cap only
};

// Full pipeline: min-curvature offsets -> resample to uniform spacing ->
// curvature -> speed profile.
inline Raceline build_raceline(const Track& track, const RacelineParams& params = {}) {
  const RacelineProblem prob = make_raceline_problem(track, params.margin);
  const std::vector<double> d = optimize_min_curvature(prob, params.opt_iters, params.opt_tol);

  Centerline offset;
  offset.closed = true;
  const std::size_t n = track.size();
  offset.points.resize(n);
  offset.w_left.assign(n, 1.0);  // widths unused past this point
  offset.w_right.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    offset.points[i] = track.center.points[i] + d[i] * track.arc.normal[i];

  const Centerline resampled = resample_centerline(offset, params.waypoint_spacing);

  Raceline rl;
  rl.pts = resampled.points;
  rl.kappa = curvature_profile(rl.pts, true);
  rl.finalize();
  rl.v = params.smooth_profile ? velocity_profile(rl.kappa, rl.spacing, params.profile)
                               : pointwise_speed_cap(rl.kappa, params.profile);
  rl.s.resize(rl.pts.size());
  for (std::size_t i = 0; i < rl.pts.size(); ++i) rl.s[i] = rl.spacing * static_cast<double>(i);
  return rl;
}

inline void save_raceline_csv(const std::string& path, const Raceline& rl) {
  CsvWriter w(path, "# s_m;x_m;y_m;kappa;v_mps");
  w.set_delim(';');
  for (std::size_t i = 0; i < rl.size(); ++i)
    w.row(rl.s[i], rl.pts[i].x, rl.pts[i].y, rl.kappa[i], rl.v[i]);
}

inline Raceline load_raceline_csv(const std::string& path) {
  const CsvTable t = read_csv(path, ';');
  Raceline rl;
  rl.s = t.column("s_m");
  const auto xs = t.column("x_m");
  const auto ys = t.column("y_m");
  rl.kappa = t.column("kappa");
  rl.v = t.column("v_mps");
  rl.pts.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) rl.pts[i] = {xs[i], ys[i]};
  if (rl.pts.size() < 2) throw IngestError("raceline file too short: " + path);
  rl.finalize();
  return rl;
}

}  // namespace pursuit
