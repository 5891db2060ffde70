#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pursuit/geometry.hpp"
#include "pursuit/raceline.hpp"
#include "pursuit/simulator.hpp"

namespace pursuit {

struct PurePursuitConfig {
  double wheelbase = 0.33;
  double beta = 0.4;  // curvature low-pass coefficient
  double gain_min = 0.55;
  double gain_max = 1.0;
  double gain_v_min = 2.0;   // m/s, schedule endpoints
  double gain_v_max = 10.0;
  double lookahead_min = 0.35;
  double lookahead_max = 4.0;
  double delta_max = 0.4189;
};

struct TargetPoint {
  Vec2 body;          // target in the vehicle frame (x forward, y left)
  std::size_t index;  // waypoint the walk landed on
};

// Walks forward along the periodic raceline from the pose projection until
// the cumulative chord reaches L_d, then places the target exactly L_d from
// the rear axle by circle-segment intersection on the final segment.
inline TargetPoint find_target(const Raceline& rl, double x, double y, double psi, double L_d) {
  const Vec2 pose{x, y};
  const std::size_t n = rl.size();
  const PathProjection proj = rl.project(pose);

  std::size_t i = proj.index;
  double cum = 0.0;
  Vec2 target = rl.pts[i];
  std::size_t landing = i;
  for (std::size_t steps = 0; steps < n + 1; ++steps) {
    const std::size_t j = (i + 1) % n;
    const Vec2& a = rl.pts[i];
    const Vec2& b = rl.pts[j];
    const double seg = dist(a, b);
    // stop once the segment end is at least L_d out (exact interpolation is
    // then possible), or after a full loop
    if (dist(pose, b) >= L_d || steps == n) {
      // ||a + t (b - a) - pose|| = L_d, larger root
      const Vec2 d = b - a;
      const Vec2 f = a - pose;
      const double qa = dot(d, d);
      const double qb = 2.0 * dot(f, d);
      const double qc = dot(f, f) - L_d * L_d;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0 && qa > 0.0) {
        const double t = std::clamp((-qb + std::sqrt(disc)) / (2.0 * qa), 0.0, 1.0);
        target = a + d * t;
      } else {
        const double t = seg > 0.0 ? std::clamp((L_d - cum) / seg, 0.0, 1.0) : 0.0;
        target = a + d * t;
      }
      landing = j;
      break;
    }
    cum += seg;
    i = j;
    landing = j;
  }
  return {to_body_frame(target, x, y, psi), landing};
}

// gamma = 2 y' / L^2
inline double curvature_command(double y_body, double L_d) { return 2.0 * y_body / (L_d * L_d); }

// First-order low-pass: gamma_bar = (1 - beta) previous + beta current.
inline double filter_curvature(double gamma, double gamma_bar_prev, double beta) {
  return (1.0 - beta) * gamma_bar_prev + beta * gamma;
}

// Clamped linear speed schedule for the steering gain.
inline double steering_gain(double v, const PurePursuitConfig& cfg) {
  const double m = (cfg.gain_min - cfg.gain_max) / (cfg.gain_v_max - cfg.gain_v_min);
  const double b = cfg.gain_max - m * cfg.gain_v_min;
  return std::max(std::min(m * v + b, cfg.gain_max), cfg.gain_min);
}

struct SteerOutput {
  double delta = 0.0;
  double v_target = 0.0;
  std::size_t target_index = 0;
};

// Pure Pursuit with filtered curvature and speed-scheduled steering gain.
// Holds the filter memory; one instance per vehicle.
class PurePursuit {
 public:
  explicit PurePursuit(const PurePursuitConfig& cfg = {}) : cfg_(cfg) {}

  void reset() { gamma_bar_ = 0.0; }

  SteerOutput steer(const VehicleState& state, const Raceline& rl, double L_d,
                    double speed_scale = 1.0) {
    L_d = std::clamp(L_d, cfg_.lookahead_min, cfg_.lookahead_max);
    const TargetPoint tp = find_target(rl, state.x, state.y, state.theta, L_d);
    const double gamma = curvature_command(tp.body.y, L_d);
    gamma_bar_ = filter_curvature(gamma, gamma_bar_, cfg_.beta);
    const double g = steering_gain(state.v, cfg_);
    const double delta =
        std::clamp(std::atan(cfg_.wheelbase * g * gamma_bar_), -cfg_.delta_max, cfg_.delta_max);
    return {delta, rl.v[tp.index] * speed_scale, tp.index};
  }

  double filter_state() const { return gamma_bar_; }
  const PurePursuitConfig& config() const { return cfg_; }

 private:
  PurePursuitConfig cfg_;
  double gamma_bar_ = 0.0;
};

}  // namespace pursuit
