// Command-line front end: raceline building, policy training, trial
// evaluation, speed-scale sweeps, controller comparison, and an MCL demo.
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pursuit/harness.hpp"
#include "pursuit/tracks.hpp"

namespace {

using namespace pursuit;

std::vector<double> parse_scales(const std::string& csv) {
  std::vector<double> out;
  for (const auto& part : split(csv, ',')) out.push_back(std::stod(part));
  return out;
}

void add_common(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--track", cfg.track_path, "track CSV (x_m,y_m,w_tr_right_m,w_tr_left_m)");
  cmd->add_option("--raceline", cfg.raceline_path, "precomputed raceline CSV");
  cmd->add_option("--policy", cfg.policy_path, "policy bundle JSON");
  cmd->add_option("--strategy", cfg.strategy, "fixed | scheduled | learned");
  cmd->add_option("--lookahead", cfg.fixed_lookahead, "fixed strategy lookahead (m)");
  cmd->add_option("--speed-scale", cfg.speed_scale, "raceline speed profile multiplier");
  cmd->add_option("--laps", cfg.laps, "laps per trial");
  cmd->add_option("--seed", cfg.seed, "master RNG seed");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_flag("--mcl", cfg.use_mcl, "drive on the MCL pose estimate");
  cmd->add_option("--set", [&cfg](const std::vector<std::string>& kvs) {
        for (const auto& kv : kvs) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set expects key=value");
          set_config_key(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        }
        return true;
      },
      "override any config key (key=value, repeatable)");
}

std::optional<PolicyBundle> maybe_load_bundle(const ExperimentConfig& cfg) {
  if (cfg.policy_path.empty()) return std::nullopt;
  return load_policy_bundle(cfg.policy_path);
}

int cmd_tracks(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  for (const auto& [name, center] : synthetic_corpus()) {
    const std::string path = cfg.out_dir + "/" + name + ".csv";
    save_track_csv(path, center);
    std::printf("wrote %s (%zu points)\n", path.c_str(), center.points.size());
  }
  return 0;
}

int cmd_raceline(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const Track track = load_track(cfg.track_path, cfg.stepsize);
  const Raceline rl = build_raceline(track, cfg.raceline);
  const OccupancyGrid grid = rasterize(track, cfg.grid_resolution);

  save_raceline_csv(cfg.out_dir + "/raceline.csv", rl);
  save_pgm(grid, cfg.out_dir + "/map.pgm");
  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.txt");

  SvgPlot plot(900, 700);
  plot.polyline(left_boundary(track), "#222222", 1.2);
  plot.polyline(right_boundary(track), "#222222", 1.2);
  plot.polyline(track.center.points, "#bbbbbb", 1.0, true);
  plot.polyline(rl.pts, "#d62728", 1.5);
  plot.label("raceline (" + std::to_string(rl.size()) + " waypoints)");
  plot.save(cfg.out_dir + "/raceline.svg");

  double vmax = 0.0, kmax = 0.0;
  for (std::size_t i = 0; i < rl.size(); ++i) {
    vmax = std::max(vmax, rl.v[i]);
    kmax = std::max(kmax, std::abs(rl.kappa[i]));
  }
  std::printf("raceline: %zu waypoints, length %.2f m, v_max %.2f m/s, |kappa|_max %.3f\n",
              rl.size(), rl.total_length, vmax, kmax);
  return 0;
}

// Race environments for training and evaluation share the prepared artifacts.
struct TrainSetup {
  TrialArtifacts art;
  std::unique_ptr<RaceEnv> train_env;
  std::unique_ptr<RaceEnv> eval_env;
};

TrainSetup make_train_setup(const ExperimentConfig& cfg) {
  TrainSetup s;
  s.art = prepare_artifacts(cfg);
  EnvConfig train_cfg = cfg.env;
  train_cfg.speed_scale = cfg.speed_scale;
  train_cfg.randomize_spawn = true;
  EnvConfig eval_cfg = train_cfg;
  eval_cfg.randomize_spawn = false;

  // the env keeps pointers; TrainSetup owns the artifacts
  s.train_env = std::make_unique<RaceEnv>(&s.art.raceline, &s.art.grid, cfg.vehicle, cfg.pp,
                                          train_cfg, cfg.seed);
  s.eval_env = std::make_unique<RaceEnv>(&s.art.raceline, &s.art.grid, cfg.vehicle, cfg.pp,
                                         eval_cfg, cfg.seed + 1);
  return s;
}

int cmd_train(const ExperimentConfig& cfg) {
  TrainSetup s = make_train_setup(cfg);
  std::printf("training on %s (%zu waypoints, %.1f m)\n", cfg.track_path.c_str(),
              s.art.raceline.size(), s.art.raceline.total_length);

  TrainOptions opts;
  opts.seed = cfg.seed;
  opts.out_dir = cfg.out_dir;
  const TrainResult result = train(*s.train_env, *s.eval_env, cfg.ppo, opts);
  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.txt");
  std::printf("done: %lld steps, best eval reward %.3f\n", result.steps_done,
              result.best_eval_reward);
  std::printf("policy: %s/best_policy.json\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const TrialArtifacts art = prepare_artifacts(cfg);
  const auto bundle = maybe_load_bundle(cfg);
  const LookaheadSource strategy = make_strategy(cfg, bundle ? &*bundle : nullptr);

  const LapReport rep = run_trial(art, cfg, strategy);
  save_trace_csv(cfg.out_dir + "/trace.csv", rep.trace);
  save_lap_report_csv(cfg.out_dir + "/laps.csv", rep);
  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.txt");
  detail::plot_trial(art, rep, cfg.out_dir, cfg.strategy);

  if (rep.dnf) {
    std::printf("DNF (%s) after %d/%d laps\n", rep.dnf_cause.c_str(), rep.completed, cfg.laps);
    return 1;
  }
  std::printf("%d/%d laps  mean %.3f s  std %.3f  min %.3f  max %.3f\n", rep.completed,
              cfg.laps, rep.mean, rep.stddev, rep.t_min, rep.t_max);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& scales_csv) {
  std::filesystem::create_directories(cfg.out_dir);
  const TrialArtifacts art = prepare_artifacts(cfg);
  const auto bundle = maybe_load_bundle(cfg);
  const LookaheadSource strategy = make_strategy(cfg, bundle ? &*bundle : nullptr);

  const auto rows = sweep_speed_scale(art, cfg, strategy, parse_scales(scales_csv));
  CsvWriter w(cfg.out_dir + "/sweep.csv", "scale,completed,laps,mean_time,dnf_cause");
  std::printf("%-8s %-10s %-6s %-10s %s\n", "scale", "completed", "laps", "mean", "cause");
  for (const auto& r : rows) {
    w.row(r.scale, r.completed ? 1 : 0, r.laps_done, r.mean_time, r.dnf_cause);
    std::printf("%-8.3f %-10s %-6d %-10.3f %s\n", r.scale, r.completed ? "yes" : "no",
                r.laps_done, r.mean_time, r.dnf_cause.c_str());
  }
  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.txt");
  const double best = max_full_completion_scale(rows);
  std::printf("max full-completion scale: %.3f\n", best);
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
  const TrialArtifacts art = prepare_artifacts(cfg);
  const auto bundle = maybe_load_bundle(cfg);

  std::vector<std::pair<std::string, LookaheadSource>> strategies;
  ExperimentConfig fixed_cfg = cfg;
  fixed_cfg.strategy = "fixed";
  strategies.emplace_back("fixed", make_strategy(fixed_cfg, nullptr));
  ExperimentConfig sched_cfg = cfg;
  sched_cfg.strategy = "scheduled";
  strategies.emplace_back("scheduled", make_strategy(sched_cfg, nullptr));
  if (bundle) {
    ExperimentConfig learned_cfg = cfg;
    learned_cfg.strategy = "learned";
    strategies.emplace_back("learned", make_strategy(learned_cfg, &*bundle));
  }

  const ComparisonResult result = compare_controllers(art, cfg, std::move(strategies));
  std::printf("%s\n", result.markdown.c_str());
  for (const auto& e : result.entries) {
    if (e.name != "learned") continue;
    const auto [straight, corner] = lookahead_by_curvature(art, e.report);
    std::printf("learned L_d: straights %.3f m, corners %.3f m\n", straight, corner);
  }
  return 0;
}

int cmd_mcl_demo(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  ExperimentConfig demo_cfg = cfg;
  demo_cfg.use_mcl = true;
  const TrialArtifacts art = prepare_artifacts(demo_cfg);

  Simulator sim(&art.grid, demo_cfg.vehicle, demo_cfg.seed);
  PurePursuit pp(demo_cfg.pp);
  ParticleFilter pf(&art.grid, demo_cfg.vehicle.scan, demo_cfg.mcl, demo_cfg.seed);

  VehicleState spawn;
  spawn.x = art.raceline.pts[0].x;
  spawn.y = art.raceline.pts[0].y;
  spawn.theta = std::atan2(art.raceline.tangent[0].y, art.raceline.tangent[0].x);
  StepResult res = sim.reset(spawn);
  pf.init(spawn.x, spawn.y, spawn.theta);

  CsvWriter w(demo_cfg.out_dir + "/mcl_poses.csv",
              "t,true_x,true_y,true_psi,est_x,est_y,est_psi,err_pos,err_psi");
  const double dt = demo_cfg.vehicle.control_dt();
  ScheduledLookahead sched{demo_cfg.sched_a, demo_cfg.sched_b, demo_cfg.pp.lookahead_min,
                           demo_cfg.pp.lookahead_max};
  double t = 0.0;
  double err_sum = 0.0;
  const int steps = demo_cfg.env.max_steps;
  for (int i = 0; i < steps; ++i) {
    const PoseEstimate est = pf.pose();
    VehicleState ctrl = sim.state();
    ctrl.x = est.x;
    ctrl.y = est.y;
    ctrl.theta = est.psi;
    const Observation obs = observe(ctrl, art.raceline, demo_cfg.env.horizon_mid,
                                    demo_cfg.env.horizon_far);
    const SteerOutput cmd = pp.steer(ctrl, art.raceline, sched.lookahead(obs),
                                     demo_cfg.speed_scale);
    res = sim.step({cmd.v_target, cmd.delta});
    pf.step({cmd.v_target, cmd.delta}, dt, demo_cfg.vehicle.wheelbase, res.scan);
    t += dt;

    const PoseEstimate after = pf.pose();
    const double err_pos = std::hypot(after.x - res.state.x, after.y - res.state.y);
    const double err_psi = std::abs(wrap_angle(after.psi - res.state.theta));
    err_sum += err_pos;
    w.row(t, res.state.x, res.state.y, res.state.theta, after.x, after.y, after.psi, err_pos,
          err_psi);
    if (res.collided) {
      std::printf("collision at t=%.2f s\n", t);
      break;
    }
  }
  std::printf("mean position error %.4f m over %d steps\n", err_sum / steps, steps);
  write_resolved_config(demo_cfg, demo_cfg.out_dir + "/config.resolved.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autonomous-racing workbench: raceline optimization, pure pursuit with "
               "dynamic lookahead, PPO training, and evaluation trials"};
  app.require_subcommand(1);

  ExperimentConfig cfg;

  // the config file loads before flag overrides
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") load_config_file(cfg, argv[i + 1]);
  }
  std::string config_path, scales_csv = "1.0";
  app.add_option("--config", config_path, "experiment config file (key = value lines)");

  auto* tracks = app.add_subcommand("tracks", "write the synthetic track corpus");
  add_common(tracks, cfg);
  auto* raceline = app.add_subcommand("raceline", "build raceline + occupancy grid");
  add_common(raceline, cfg);
  auto* train = app.add_subcommand("train", "train the lookahead policy with PPO");
  add_common(train, cfg);
  auto* eval = app.add_subcommand("eval", "run a multi-lap trial");
  add_common(eval, cfg);
  auto* sweep = app.add_subcommand("sweep", "trials across speed-profile scales");
  add_common(sweep, cfg);
  sweep->add_option("--scales", scales_csv, "comma-separated scale list");
  auto* compare = app.add_subcommand("compare", "fixed vs scheduled vs learned");
  add_common(compare, cfg);
  auto* mcl_demo = app.add_subcommand("mcl-demo", "localization demo on one track");
  add_common(mcl_demo, cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tracks->parsed()) return cmd_tracks(cfg);
    if (raceline->parsed()) return cmd_raceline(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg, scales_csv);
    if (compare->parsed()) return cmd_compare(cfg);
    if (mcl_demo->parsed()) return cmd_mcl_demo(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
