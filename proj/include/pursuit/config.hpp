#pragma once
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>

#include "pursuit/csv.hpp"
#include "pursuit/environment.hpp"
#include "pursuit/error.hpp"
#include "pursuit/localization.hpp"
#include "pursuit/ppo.hpp"
#include "pursuit/raceline.hpp"
#include "pursuit/simulator.hpp"

namespace pursuit {

// Every knob of an experiment, file-driven as `key = value` lines. Runs embed
// the resolved config in their output directory.
struct ExperimentConfig {
  // io / run selection
  std::string track_path;
  std::string raceline_path;  // empty: built from the track
  std::string policy_path;
  std::string out_dir = "out";
  std::string strategy = "scheduled";  // fixed | scheduled | learned

  // ingestion + raceline
  double stepsize = 0.25;
  RacelineParams raceline;
  double grid_resolution = 0.05;

  // vehicle + scan
  VehicleParams vehicle;

  // controller
  PurePursuitConfig pp;
  double fixed_lookahead = 1.2;
  double sched_a = 0.30;
  double sched_b = 0.25;

  // environment
  EnvConfig env;

  // localization
  MclConfig mcl;
  bool use_mcl = false;

  // learning
  PpoConfig ppo;

  // harness
  int laps = 10;
  double speed_scale = 1.0;
  std::uint64_t seed = 0;
  double trial_timeout = 0.0;  // seconds; 0 = derived from track length
};

namespace detail {

using ConfigValue = std::variant<double*, int*, long long*, bool*, std::string*,
                                 std::uint64_t*>;

inline std::map<std::string, ConfigValue> config_bindings(ExperimentConfig& c) {
  std::map<std::string, ConfigValue> m;
  m["track"] = &c.track_path;
  m["raceline_csv"] = &c.raceline_path;
  m["policy"] = &c.policy_path;
  m["out"] = &c.out_dir;
  m["strategy"] = &c.strategy;
  m["stepsize"] = &c.stepsize;
  m["raceline.margin"] = &c.raceline.margin;
  m["raceline.opt_iters"] = &c.raceline.opt_iters;
  m["raceline.opt_tol"] = &c.raceline.opt_tol;
  m["raceline.spacing"] = &c.raceline.waypoint_spacing;
  m["raceline.mu"] = &c.raceline.profile.mu;
  m["raceline.gravity"] = &c.raceline.profile.gravity;
  m["raceline.epsilon"] = &c.raceline.profile.epsilon;
  m["raceline.a_long_max"] = &c.raceline.profile.a_long_max;
  m["raceline.v_cap"] = &c.raceline.profile.v_cap;
  m["raceline.smooth_profile"] = &c.raceline.smooth_profile;
  m["grid.resolution"] = &c.grid_resolution;
  m["vehicle.wheelbase"] = &c.vehicle.wheelbase;
  m["vehicle.delta_max"] = &c.vehicle.delta_max;
  m["vehicle.a_max"] = &c.vehicle.a_max;
  m["vehicle.a_min"] = &c.vehicle.a_min;
  m["vehicle.dt"] = &c.vehicle.dt;
  m["vehicle.substeps"] = &c.vehicle.substeps;
  m["vehicle.kp_speed"] = &c.vehicle.kp_speed;
  m["vehicle.collision_range"] = &c.vehicle.collision_range;
  m["scan.beams"] = &c.vehicle.scan.beams;
  m["scan.fov"] = &c.vehicle.scan.fov;
  m["scan.max_range"] = &c.vehicle.scan.max_range;
  m["scan.noise_sigma"] = &c.vehicle.scan.noise_sigma;
  m["pp.wheelbase"] = &c.pp.wheelbase;
  m["pp.beta"] = &c.pp.beta;
  m["pp.gain_min"] = &c.pp.gain_min;
  m["pp.gain_max"] = &c.pp.gain_max;
  m["pp.gain_v_min"] = &c.pp.gain_v_min;
  m["pp.gain_v_max"] = &c.pp.gain_v_max;
  m["pp.lookahead_min"] = &c.pp.lookahead_min;
  m["pp.lookahead_max"] = &c.pp.lookahead_max;
  m["pp.delta_max"] = &c.pp.delta_max;
  m["fixed_lookahead"] = &c.fixed_lookahead;
  m["sched.a"] = &c.sched_a;
  m["sched.b"] = &c.sched_b;
  m["env.horizon_mid"] = &c.env.horizon_mid;
  m["env.horizon_far"] = &c.env.horizon_far;
  m["env.action_smoothing"] = &c.env.action_smoothing;
  m["env.max_steps"] = &c.env.max_steps;
  m["env.lap_limit"] = &c.env.lap_limit;
  m["env.randomize_spawn"] = &c.env.randomize_spawn;
  m["reward.w_v"] = &c.env.reward.w_v;
  m["reward.w_e"] = &c.env.reward.w_e;
  m["reward.w_j"] = &c.env.reward.w_j;
  m["reward.w_k"] = &c.env.reward.w_k;
  m["reward.w_c"] = &c.env.reward.w_c;
  m["reward.w_p"] = &c.env.reward.w_p;
  m["reward.w_s"] = &c.env.reward.w_s;
  m["reward.lstar_c0"] = &c.env.reward.lstar_c0;
  m["reward.lstar_cv"] = &c.env.reward.lstar_cv;
  m["reward.lstar_ck"] = &c.env.reward.lstar_ck;
  m["reward.clip_lo"] = &c.env.reward.clip_lo;
  m["reward.clip_hi"] = &c.env.reward.clip_hi;
  m["reward.stall_speed"] = &c.env.reward.stall_speed;
  m["reward.stall_duration"] = &c.env.reward.stall_duration;
  m["mcl.particles"] = &c.mcl.particles;
  m["mcl.subsample"] = &c.mcl.beam.subsample;
  m["mcl.sigma_hit"] = &c.mcl.beam.sigma_hit;
  m["mcl.z_hit"] = &c.mcl.beam.z_hit;
  m["mcl.z_rand"] = &c.mcl.beam.z_rand;
  m["mcl.z_max"] = &c.mcl.beam.z_max;
  m["mcl.sigma_xy"] = &c.mcl.noise.sigma_xy;
  m["mcl.sigma_psi"] = &c.mcl.noise.sigma_psi;
  m["mcl.sigma_v"] = &c.mcl.noise.sigma_v;
  m["mcl.ess_threshold"] = &c.mcl.ess_threshold;
  m["mcl.init_radius"] = &c.mcl.init_radius;
  m["mcl.init_psi_spread"] = &c.mcl.init_psi_spread;
  m["use_mcl"] = &c.use_mcl;
  m["ppo.n_steps"] = &c.ppo.n_steps;
  m["ppo.batch_size"] = &c.ppo.batch_size;
  m["ppo.epochs"] = &c.ppo.epochs;
  m["ppo.gamma"] = &c.ppo.gamma;
  m["ppo.lambda"] = &c.ppo.lambda;
  m["ppo.clip_eps"] = &c.ppo.clip_eps;
  m["ppo.target_kl"] = &c.ppo.target_kl;
  m["ppo.ent_coef"] = &c.ppo.ent_coef;
  m["ppo.vf_coef"] = &c.ppo.vf_coef;
  m["ppo.lr0"] = &c.ppo.lr0;
  m["ppo.total_steps"] = &c.ppo.total_steps;
  m["ppo.max_grad_norm"] = &c.ppo.max_grad_norm;
  m["ppo.eval_every"] = &c.ppo.eval_every;
  m["ppo.eval_episodes"] = &c.ppo.eval_episodes;
  m["ppo.hidden"] = &c.ppo.hidden;
  m["ppo.normalize_obs"] = &c.ppo.normalize_obs;
  m["ppo.normalize_reward"] = &c.ppo.normalize_reward;
  m["laps"] = &c.laps;
  m["speed_scale"] = &c.speed_scale;
  m["seed"] = &c.seed;
  m["trial_timeout"] = &c.trial_timeout;
  return m;
}

inline void assign_config_value(const ConfigValue& slot, const std::string& value,
                                const std::string& key) {
  try {
    if (std::holds_alternative<double*>(slot)) {
      *std::get<double*>(slot) = std::stod(value);
    } else if (std::holds_alternative<int*>(slot)) {
      *std::get<int*>(slot) = std::stoi(value);
    } else if (std::holds_alternative<long long*>(slot)) {
      *std::get<long long*>(slot) = std::stoll(value);
    } else if (std::holds_alternative<std::uint64_t*>(slot)) {
      *std::get<std::uint64_t*>(slot) = std::stoull(value);
    } else if (std::holds_alternative<bool*>(slot)) {
      *std::get<bool*>(slot) = (value == "true" || value == "1" || value == "yes");
    } else {
      *std::get<std::string*>(slot) = value;
    }
  } catch (const std::exception&) {
    throw IngestError("bad config value for key '" + key + "': " + value);
  }
}

inline std::string config_value_string(const ConfigValue& slot) {
  std::ostringstream os;
  os.precision(17);
  if (std::holds_alternative<double*>(slot)) os << *std::get<double*>(slot);
  else if (std::holds_alternative<int*>(slot)) os << *std::get<int*>(slot);
  else if (std::holds_alternative<long long*>(slot)) os << *std::get<long long*>(slot);
  else if (std::holds_alternative<std::uint64_t*>(slot)) os << *std::get<std::uint64_t*>(slot);
  else if (std::holds_alternative<bool*>(slot)) os << (*std::get<bool*>(slot) ? "true" : "false");
  else os << *std::get<std::string*>(slot);
  return os.str();
}

}  // namespace detail

inline void set_config_key(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value) {
  auto m = detail::config_bindings(cfg);
  const auto it = m.find(key);
  if (it == m.end()) throw IngestError("unknown config key: " + key);
  detail::assign_config_value(it->second, value, key);
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw IngestError("bad config line: " + t);
    set_config_key(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

// Canonical `key = value` text, sorted by key (std::map ordering).
inline std::string serialize_config(const ExperimentConfig& cfg) {
  auto m = detail::config_bindings(const_cast<ExperimentConfig&>(cfg));
  std::ostringstream os;
  for (const auto& [key, slot] : m) os << key << " = " << detail::config_value_string(slot) << "\n";
  return os.str();
}

// FNV-1a over the canonical serialization; embedded in reports for provenance.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = serialize_config(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (const char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

inline void write_resolved_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write config: " + path);
  out << "# resolved experiment config (hash " << std::hex << config_hash(cfg) << std::dec
      << ")\n";
  out << serialize_config(cfg);
}

}  // namespace pursuit
