#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pursuit/geometry.hpp"
#include "pursuit/grid.hpp"
#include "pursuit/rng.hpp"
#include "pursuit/simulator.hpp"

namespace pursuit {

struct ParticleSet {
  std::vector<double> x, y, psi, w;

  std::size_t size() const { return x.size(); }

  void normalize() {
    double sum = 0.0;
    for (double wi : w) sum += wi;
    if (sum <= 0.0) {
      const double u = 1.0 / static_cast<double>(size());
      std::fill(w.begin(), w.end(), u);
      return;
    }
    for (double& wi : w) wi /= sum;
  }

  double ess() const {
    double s2 = 0.0;
    for (double wi : w) s2 += wi * wi;
    return s2 > 0.0 ? 1.0 / s2 : 0.0;
  }
};

inline ParticleSet init_particles_ball(double cx, double cy, double cpsi, double radius,
                                       double psi_spread, std::size_t n, Rng& rng) {
  ParticleSet p;
  p.x.resize(n);
  p.y.resize(n);
  p.psi.resize(n);
  p.w.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    // uniform in the disc
    double dx, dy;
    do {
      dx = rng.uniform(-radius, radius);
      dy = rng.uniform(-radius, radius);
    } while (dx * dx + dy * dy > radius * radius);
    p.x[i] = cx + dx;
    p.y[i] = cy + dy;
    p.psi[i] = wrap_angle(cpsi + rng.uniform(-psi_spread, psi_spread));
  }
  return p;
}

struct ProcessNoise {
  double sigma_xy = 0.02;
  double sigma_psi = 0.01;
  double sigma_v = 0.05;
};

// Propagates every particle through the bicycle kinematics with zero-mean
// process noise on position and heading; sigma_v perturbs the commanded speed.
inline void predict(ParticleSet& p, const DriveCommand& cmd, double dt, double wheelbase,
                    const ProcessNoise& noise, Rng& rng) {
  const double tan_delta = std::tan(cmd.steering);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = cmd.speed + (noise.sigma_v > 0.0 ? rng.gaussian(0.0, noise.sigma_v) : 0.0);
    p.x[i] += v * std::cos(p.psi[i]) * dt;
    p.y[i] += v * std::sin(p.psi[i]) * dt;
    p.psi[i] = wrap_angle(p.psi[i] + v / wheelbase * tan_delta * dt);
    if (noise.sigma_xy > 0.0) {
      p.x[i] += rng.gaussian(0.0, noise.sigma_xy);
      p.y[i] += rng.gaussian(0.0, noise.sigma_xy);
    }
    if (noise.sigma_psi > 0.0) p.psi[i] = wrap_angle(p.psi[i] + rng.gaussian(0.0, noise.sigma_psi));
  }
}

struct BeamModel {
  double sigma_hit = 0.1;
  double z_hit = 0.85;
  double z_rand = 0.1;
  double z_max = 0.05;
  int subsample = 60;
};

// Beam-based likelihood: Gaussian around the raycast prediction mixed with a
// uniform floor and a max-range mass. Weights are accumulated in log space
// with max-subtraction. Returns true when every particle scored zero and the
// weights were reset to uniform.
inline bool update_weights(ParticleSet& p, const std::vector<double>& scan,
                           const std::vector<double>& scan_angles, const OccupancyGrid& grid,
                           double max_range, const BeamModel& model) {
  const std::size_t beams = scan.size();
  const std::size_t m = std::min<std::size_t>(model.subsample, beams);
  std::vector<std::size_t> idx(m);
  for (std::size_t k = 0; k < m; ++k)
    idx[k] = m > 1 ? k * (beams - 1) / (m - 1) : beams / 2;

  const double inv_sqrt2pi = 0.3989422804014327;
  const double gauss_norm = inv_sqrt2pi / model.sigma_hit;
  const double p_rand = 1.0 / max_range;
  const double p_max_density = 1.0 / std::max(grid.resolution, 1e-6);

  std::vector<double> logw(p.size());
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (grid.occupied_world(p.x[i], p.y[i])) {
      logw[i] = -1e30;  // inside a wall: effectively impossible
      continue;
    }
    double acc = std::log(std::max(p.w[i], 1e-300));
    for (std::size_t k = 0; k < m; ++k) {
      const double expected =
          cast_ray(grid, p.x[i], p.y[i], p.psi[i] + scan_angles[idx[k]], max_range);
      const double z = scan[idx[k]];
      const double err = (z - expected) / model.sigma_hit;
      double like = model.z_hit * gauss_norm * std::exp(-0.5 * err * err) +
                    model.z_rand * p_rand;
      if (z >= max_range - 1e-6) like += model.z_max * p_max_density;
      acc += std::log(std::max(like, 1e-300));
    }
    logw[i] = acc;
    max_logw = std::max(max_logw, acc);
  }

  bool degenerate = false;
  if (!std::isfinite(max_logw)) {
    degenerate = true;
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p.w[i] = std::exp(logw[i] - max_logw);
      sum += p.w[i];
    }
    if (sum <= 0.0 || !std::isfinite(sum)) degenerate = true;
  }
  if (degenerate) {
    std::fill(p.w.begin(), p.w.end(), 1.0 / static_cast<double>(p.size()));
    return true;
  }
  p.normalize();
  return false;
}

// Systematic (low-variance) resampling when the effective sample size drops
// below threshold_frac * N.
inline bool resample_if_needed(ParticleSet& p, double threshold_frac, Rng& rng) {
  const std::size_t n = p.size();
  if (p.ess() >= threshold_frac * static_cast<double>(n)) return false;

  ParticleSet out;
  out.x.resize(n);
  out.y.resize(n);
  out.psi.resize(n);
  out.w.assign(n, 1.0 / static_cast<double>(n));

  const double step = 1.0 / static_cast<double>(n);
  double u = rng.uniform(0.0, step);
  double cum = p.w[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (u > cum && i + 1 < n) cum += p.w[++i];
    out.x[k] = p.x[i];
    out.y[k] = p.y[i];
    out.psi[k] = p.psi[i];
    u += step;
  }
  p = std::move(out);
  return true;
}

struct PoseEstimate {
  double x = 0.0, y = 0.0, psi = 0.0;
};

// Weighted mean pose; heading via the circular mean.
inline PoseEstimate estimate(const ParticleSet& p) {
  PoseEstimate e;
  double sin_sum = 0.0, cos_sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    e.x += p.w[i] * p.x[i];
    e.y += p.w[i] * p.y[i];
    sin_sum += p.w[i] * std::sin(p.psi[i]);
    cos_sum += p.w[i] * std::cos(p.psi[i]);
  }
  e.psi = std::atan2(sin_sum, cos_sum);
  return e;
}

struct MclConfig {
  int particles = 1000;
  BeamModel beam;
  ProcessNoise noise;
  double ess_threshold = 0.5;
  double init_radius = 2.0;
  double init_psi_spread = 0.3;
};

// Convenience wrapper wiring predict / update / resample / estimate.
class ParticleFilter {
 public:
  ParticleFilter(const OccupancyGrid* grid, const ScanParams& scan, const MclConfig& cfg,
                 std::uint64_t seed)
      : grid_(grid), scan_(scan), cfg_(cfg), rng_(seed, /*stream=*/29),
        angles_(beam_angles(scan.beams, scan.fov)) {}

  void init(double x, double y, double psi) {
    set_ = init_particles_ball(x, y, psi, cfg_.init_radius, cfg_.init_psi_spread,
                               static_cast<std::size_t>(cfg_.particles), rng_);
  }

  void step(const DriveCommand& cmd, double dt, double wheelbase,
            const std::vector<double>& scan) {
    predict(set_, cmd, dt, wheelbase, cfg_.noise, rng_);
    degenerate_ = update_weights(set_, scan, angles_, *grid_, scan_.max_range, cfg_.beam);
    resample_if_needed(set_, cfg_.ess_threshold, rng_);
  }

  PoseEstimate pose() const { return estimate(set_); }
  const ParticleSet& particles() const { return set_; }
  bool degenerate() const { return degenerate_; }

 private:
  const OccupancyGrid* grid_;
  ScanParams scan_;
  MclConfig cfg_;
  Rng rng_;
  std::vector<double> angles_;
  ParticleSet set_;
  bool degenerate_ = false;
};

}  // namespace pursuit
