#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pursuit/controller.hpp"
#include "pursuit/env_interface.hpp"
#include "pursuit/raceline.hpp"
#include "pursuit/rng.hpp"
#include "pursuit/simulator.hpp"

namespace pursuit {

// The 5-dimensional policy input: speed plus absolute curvatures at the
// closest, medium-horizon, and far-horizon waypoints, and the change ahead.
struct Observation {
  double v = 0.0;
  double k0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double dk = 0.0;  // k1 - k0

  std::array<double, 5> as_array() const { return {v, k0, k1, k2, dk}; }
  std::vector<double> as_vector() const { return {v, k0, k1, k2, dk}; }
};

inline Observation observe(const VehicleState& state, const Raceline& rl, double horizon_mid,
                           double horizon_far) {
  const PathProjection proj = rl.project({state.x, state.y});
  Observation o;
  o.v = state.v;
  o.k0 = std::abs(rl.kappa[proj.index]);
  o.k1 = std::abs(rl.kappa[rl.index_ahead(proj.index, horizon_mid)]);
  o.k2 = std::abs(rl.kappa[rl.index_ahead(proj.index, horizon_far)]);
  o.dk = o.k1 - o.k0;
  return o;
}

struct RewardConfig {
  double w_v = 0.35;
  double w_e = 1.0;
  double w_j = 0.8;
  double w_k = 0.5;
  double w_c = 30.0;
  double w_p = 0.9;
  double w_s = 5.0;
  double lstar_c0 = 0.50;  // L* = c0 + cv * v - ck * max(kappa)
  double lstar_cv = 0.28;
  double lstar_ck = 3.5;
  double clip_lo = -20.0;
  double clip_hi = 50.0;
  double stall_speed = 0.05;    // m/s
  double stall_duration = 2.0;  // s
};

// Heuristic ideal lookahead used as the shaping target.
inline double lookahead_heuristic(double v, double kappa_max, const RewardConfig& cfg) {
  return cfg.lstar_c0 + cfg.lstar_cv * v - cfg.lstar_ck * kappa_max;
}

struct RewardTransition {
  double v = 0.0;
  double L = 0.0;
  double L_prev = 0.0;
  double k0 = 0.0, k1 = 0.0, k2 = 0.0;
  bool collided = false;
  double waypoints_advanced = 0.0;
  bool stalled = false;
};

// Seven-term shaped reward, clipped to [clip_lo, clip_hi].
inline double reward(const RewardTransition& t, const RewardConfig& cfg) {
  const double kmax = std::max(t.k0, std::max(t.k1, t.k2));
  const double lstar = lookahead_heuristic(t.v, kmax, cfg);
  double r = cfg.w_v * t.v - cfg.w_e * std::abs(t.L - lstar) -
             cfg.w_j * std::abs(t.L - t.L_prev) - cfg.w_k * kmax -
             cfg.w_c * (t.collided ? 1.0 : 0.0) + cfg.w_p * t.waypoints_advanced -
             cfg.w_s * (t.stalled ? 1.0 : 0.0);
  return std::clamp(r, cfg.clip_lo, cfg.clip_hi);
}

// Maps a raw policy action in [-1, 1] onto the lookahead bounds.
inline double action_to_lookahead(double raw, double lo = 0.35, double hi = 4.0) {
  const double clamped = std::clamp(raw, -1.0, 1.0);
  return lo + (clamped + 1.0) * 0.5 * (hi - lo);
}

// Exponential smoother for the published lookahead; the first sample
// initializes the state.
class LookaheadSmoother {
 public:
  explicit LookaheadSmoother(double alpha = 0.3) : alpha_(alpha) {}

  double apply(double L) {
    smoothed_ = initialized_ ? (1.0 - alpha_) * smoothed_ + alpha_ * L : L;
    initialized_ = true;
    return smoothed_;
  }
  void reset() { initialized_ = false; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  double smoothed_ = 0.0;
  bool initialized_ = false;
};

// Signed minimal waypoint-index difference on a periodic path.
inline long long wrapped_index_delta(std::size_t from, std::size_t to, std::size_t n) {
  const auto nn = static_cast<long long>(n);
  long long d = (static_cast<long long>(to) - static_cast<long long>(from)) % nn;
  if (d > nn / 2) d -= nn;
  if (d < -(nn / 2)) d += nn;
  return d;
}

struct EnvConfig {
  double horizon_mid = 3.0;  // meters ahead for kappa_1
  double horizon_far = 8.0;  // meters ahead for kappa_2
  double action_smoothing = 0.3;
  double speed_scale = 1.0;
  int max_steps = 5000;
  int lap_limit = 0;  // 0 = no limit
  bool randomize_spawn = false;
  RewardConfig reward;
};

struct EpisodeInfo {
  int steps = 0;
  int laps = 0;
  std::vector<double> lap_times;
  double progress_waypoints = 0.0;  // cumulative signed waypoint advance
  bool collided = false;
  bool stalled = false;
  double last_lookahead = 0.0;
};

// Gym-style wrapper: lookahead action in, shaped reward out. Owns the
// controller + simulator pair and the per-episode bookkeeping.
class RaceEnv : public RolloutEnv {
 public:
  RaceEnv(const Raceline* raceline, const OccupancyGrid* grid, const VehicleParams& vparams,
          const PurePursuitConfig& ppcfg, const EnvConfig& cfg, std::uint64_t seed)
      : raceline_(raceline), cfg_(cfg), sim_(grid, vparams, seed), pp_(ppcfg),
        smoother_(cfg.action_smoothing), rng_(seed, /*stream=*/5) {}

  int obs_dim() const override { return 5; }

  std::vector<double> reset() override {
    const std::size_t n = raceline_->size();
    const std::size_t spawn = cfg_.randomize_spawn ? rng_.integer(n) : 0;
    return reset_at(spawn);
  }

  std::vector<double> reset_at(std::size_t waypoint) {
    const std::size_t n = raceline_->size();
    waypoint %= n;
    VehicleState s;
    s.x = raceline_->pts[waypoint].x;
    s.y = raceline_->pts[waypoint].y;
    s.theta = std::atan2(raceline_->tangent[waypoint].y, raceline_->tangent[waypoint].x);
    s.v = 0.0;
    last_result_ = sim_.reset(s);
    pp_.reset();
    smoother_.reset();
    info_ = {};
    prev_index_ = raceline_->project({s.x, s.y}).index;
    L_prev_ = 0.0;
    have_L_prev_ = false;
    stall_timer_ = 0.0;
    time_ = 0.0;
    lap_start_time_ = 0.0;
    return observe(s, *raceline_, cfg_.horizon_mid, cfg_.horizon_far).as_vector();
  }

  EnvStep step(double action) override {
    const double L_raw = action_to_lookahead(action, pp_.config().lookahead_min,
                                             pp_.config().lookahead_max);
    const double L = std::clamp(smoother_.apply(L_raw), pp_.config().lookahead_min,
                                pp_.config().lookahead_max);

    const SteerOutput cmd = pp_.steer(sim_.state(), *raceline_, L, cfg_.speed_scale);
    last_result_ = sim_.step({cmd.v_target, cmd.delta});
    const VehicleState& s = last_result_.state;
    time_ += sim_.params().control_dt();

    const Observation obs = observe(s, *raceline_, cfg_.horizon_mid, cfg_.horizon_far);

    // progress in waypoints, then lap bookkeeping off the cumulative counter
    const std::size_t idx = raceline_->project({s.x, s.y}).index;
    const long long dp = wrapped_index_delta(prev_index_, idx, raceline_->size());
    prev_index_ = idx;
    info_.progress_waypoints += static_cast<double>(dp);
    const auto laps_done = static_cast<int>(std::floor(
        info_.progress_waypoints / static_cast<double>(raceline_->size())));
    if (laps_done > info_.laps) {
      info_.laps = laps_done;
      info_.lap_times.push_back(time_ - lap_start_time_);
      lap_start_time_ = time_;
    }

    // stall accounting
    if (s.v < cfg_.reward.stall_speed) {
      stall_timer_ += sim_.params().control_dt();
    } else {
      stall_timer_ = 0.0;
    }
    const bool stalled = stall_timer_ >= cfg_.reward.stall_duration;

    RewardTransition tr;
    tr.v = s.v;
    tr.L = L;
    tr.L_prev = have_L_prev_ ? L_prev_ : L;
    tr.k0 = obs.k0;
    tr.k1 = obs.k1;
    tr.k2 = obs.k2;
    tr.collided = last_result_.collided;
    tr.waypoints_advanced = static_cast<double>(dp);
    tr.stalled = stalled;
    const double r = reward(tr, cfg_.reward);

    L_prev_ = L;
    have_L_prev_ = true;
    info_.steps += 1;
    info_.collided = last_result_.collided;
    info_.stalled = stalled;
    info_.last_lookahead = L;

    EnvStep out;
    out.obs = obs.as_vector();
    out.reward = r;
    out.done = last_result_.collided || stalled || info_.steps >= cfg_.max_steps ||
               (cfg_.lap_limit > 0 && info_.laps >= cfg_.lap_limit);
    return out;
  }

  const EpisodeInfo& info() const { return info_; }
  const VehicleState& state() const { return sim_.state(); }
  const StepResult& last_result() const { return last_result_; }
  const EnvConfig& config() const { return cfg_; }
  Simulator& simulator() { return sim_; }

 private:
  const Raceline* raceline_;
  EnvConfig cfg_;
  Simulator sim_;
  PurePursuit pp_;
  LookaheadSmoother smoother_;
  Rng rng_;
  StepResult last_result_;
  EpisodeInfo info_;
  std::size_t prev_index_ = 0;
  double L_prev_ = 0.0;
  bool have_L_prev_ = false;
  double stall_timer_ = 0.0;
  double time_ = 0.0;
  double lap_start_time_ = 0.0;
};

}  // namespace pursuit
