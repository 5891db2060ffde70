#pragma once
#include <algorithm>
#include <cmath>
#include <vector>

#include "pursuit/error.hpp"
#include "pursuit/geometry.hpp"
#include "pursuit/grid.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // wrapped to (-pi, pi]
  double v = 0.0;      // >= 0, no reverse

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) && std::isfinite(v);
  }
};

struct ScanParams {
  int beams = 1080;
  double fov = 270.0 * kPi / 180.0;
  double max_range = 30.0;
  double noise_sigma = 0.01;
};

struct VehicleParams {
  double wheelbase = 0.33;
  double delta_max = 0.4189;
  double a_max = 6.0;   // m/s^2
  double a_min = -8.0;  // braking
  double dt = 0.01;     // physics step
  int substeps = 2;     // physics steps per control period
  double kp_speed = 8.0;
  double collision_range = 0.2;
  ScanParams scan;

  double control_dt() const { return dt * substeps; }
};

struct DriveCommand {
  double speed = 0.0;     // target m/s
  double steering = 0.0;  // radians
};

struct StepResult {
  VehicleState state;
  std::vector<double> scan;
  bool collided = false;
  double min_range = 0.0;
};

// One RK4 step of the kinematic bicycle with a proportional speed loop.
inline VehicleState integrate_bicycle(const VehicleState& s, const DriveCommand& cmd,
                                      const VehicleParams& p, double dt) {
  const double delta = std::clamp(cmd.steering, -p.delta_max, p.delta_max);
  const double tan_delta = std::tan(delta);

  struct Deriv {
    double dx, dy, dtheta, dv;
  };
  auto f = [&](double theta, double v) -> Deriv {
    const double a = std::clamp(p.kp_speed * (cmd.speed - v), p.a_min, p.a_max);
    return {v * std::cos(theta), v * std::sin(theta), v / p.wheelbase * tan_delta, a};
  };

  const Deriv k1 = f(s.theta, s.v);
  const Deriv k2 = f(s.theta + 0.5 * dt * k1.dtheta, s.v + 0.5 * dt * k1.dv);
  const Deriv k3 = f(s.theta + 0.5 * dt * k2.dtheta, s.v + 0.5 * dt * k2.dv);
  const Deriv k4 = f(s.theta + dt * k3.dtheta, s.v + dt * k3.dv);

  VehicleState out;
  out.x = s.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  out.y = s.y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  out.theta = wrap_angle(s.theta + dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta +
                                               k4.dtheta));
  out.v = std::max(0.0, s.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv));
  if (!out.finite()) throw SimulationFault("non-finite state after integration");
  return out;
}

// Steps the vehicle on an occupancy grid, renders a noisy LiDAR scan at the
// new pose, and reports collisions (min range below threshold or pose in a
// wall cell).
class Simulator {
 public:
  Simulator(const OccupancyGrid* grid, const VehicleParams& params, std::uint64_t seed)
      : grid_(grid), params_(params), rng_(seed, /*stream=*/17),
        angles_(beam_angles(params.scan.beams, params.scan.fov)) {}

  StepResult reset(const VehicleState& spawn) {
    if (grid_->occupied_world(spawn.x, spawn.y))
      throw SimulationFault("reset pose lies inside a wall");
    state_ = spawn;
    state_.v = 0.0;
    return render();
  }

  StepResult step(const DriveCommand& cmd) {
    for (int i = 0; i < params_.substeps; ++i)
      state_ = integrate_bicycle(state_, cmd, params_, params_.dt);
    return render();
  }

  const VehicleState& state() const { return state_; }
  const VehicleParams& params() const { return params_; }
  const OccupancyGrid& grid() const { return *grid_; }
  Rng& rng() { return rng_; }

 private:
  StepResult render() {
    StepResult r;
    r.state = state_;
    if (grid_->occupied_world(state_.x, state_.y)) {
      r.scan.assign(params_.scan.beams, 0.0);
      r.min_range = 0.0;
      r.collided = true;
      return r;
    }
    r.scan.resize(angles_.size());
    r.min_range = params_.scan.max_range;
    for (std::size_t i = 0; i < angles_.size(); ++i) {
      double d = cast_ray(*grid_, state_.x, state_.y, state_.theta + angles_[i],
                          params_.scan.max_range);
      if (params_.scan.noise_sigma > 0.0)
        d = std::clamp(d + rng_.gaussian(0.0, params_.scan.noise_sigma), 0.0,
                       params_.scan.max_range);
      r.scan[i] = d;
      r.min_range = std::min(r.min_range, d);
    }
    r.collided = r.min_range < params_.collision_range;
    return r;
  }

  const OccupancyGrid* grid_;
  VehicleParams params_;
  Rng rng_;
  std::vector<double> angles_;
  VehicleState state_;
};

}  // namespace pursuit
