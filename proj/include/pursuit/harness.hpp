#pragma once
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pursuit/config.hpp"
#include "pursuit/controller.hpp"
#include "pursuit/csv.hpp"
#include "pursuit/environment.hpp"
#include "pursuit/grid.hpp"
#include "pursuit/localization.hpp"
#include "pursuit/lookahead.hpp"
#include "pursuit/raceline.hpp"
#include "pursuit/simulator.hpp"
#include "pursuit/svg.hpp"
#include "pursuit/track.hpp"

namespace pursuit {

struct TrialArtifacts {
  Track track;
  Raceline raceline;
  OccupancyGrid grid;
};

// Loads the track, builds (or loads) the raceline, rasterizes the grid.
inline TrialArtifacts prepare_artifacts(const ExperimentConfig& cfg) {
  if (cfg.track_path.empty()) throw IngestError("no track file configured");
  TrialArtifacts art;
  art.track = load_track(cfg.track_path, cfg.stepsize);
  art.raceline = cfg.raceline_path.empty() ? build_raceline(art.track, cfg.raceline)
                                           : load_raceline_csv(cfg.raceline_path);
  art.grid = rasterize(art.track, cfg.grid_resolution);
  return art;
}

struct TraceRow {
  double t = 0.0, x = 0.0, y = 0.0, theta = 0.0, v = 0.0, delta = 0.0, L = 0.0;
};

struct LapReport {
  std::vector<double> lap_times;
  int completed = 0;
  bool dnf = false;
  std::string dnf_cause;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  double t_min = std::numeric_limits<double>::quiet_NaN();
  double t_max = std::numeric_limits<double>::quiet_NaN();
  std::vector<TraceRow> trace;

  // Statistics always recomputed from the raw list; DNF trials carry none.
  void compute_stats() {
    completed = static_cast<int>(lap_times.size());
    if (dnf || lap_times.empty()) {
      mean = stddev = t_min = t_max = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const double n = static_cast<double>(lap_times.size());
    mean = 0.0;
    for (double t : lap_times) mean += t / n;
    double ss = 0.0;
    for (double t : lap_times) ss += (t - mean) * (t - mean);
    stddev = lap_times.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    t_min = *std::min_element(lap_times.begin(), lap_times.end());
    t_max = *std::max_element(lap_times.begin(), lap_times.end());
  }
};

namespace detail {

// Start/finish line: the raceline's waypoint 0 normal segment spanning the
// local track width. Crossings are detected by a signed-side change while
// moving forward, timed with sub-step linear interpolation.
struct FinishLine {
  Vec2 point, tangent, normal;
  double span = 0.0;

  static FinishLine at_waypoint_zero(const TrialArtifacts& art) {
    FinishLine line;
    line.point = art.raceline.pts[0];
    line.tangent = art.raceline.tangent[0];
    line.normal = art.raceline.normal[0];
    const PathProjection proj = project_to_path(art.track, line.point);
    line.span = art.track.center.w_left[proj.index] + art.track.center.w_right[proj.index];
    return line;
  }

  std::optional<double> crossing(const Vec2& prev, const Vec2& cur, double heading,
                                 double t_prev, double dt) const {
    const double d_prev = dot(prev - point, tangent);
    const double d_cur = dot(cur - point, tangent);
    if (!(d_prev < 0.0 && d_cur >= 0.0)) return std::nullopt;
    const double lat = dot(cur - point, normal);
    if (std::abs(lat) > span) return std::nullopt;
    if (std::cos(heading) * tangent.x + std::sin(heading) * tangent.y <= 0.0)
      return std::nullopt;
    const double frac = d_prev / (d_prev - d_cur);
    return t_prev + frac * dt;
  }
};

}  // namespace detail

// Runs one multi-lap trial on prepared artifacts. The spawn sits half a lap
// before the start/finish line; the first crossing arms the timer so every
// counted lap is a flying lap.
inline LapReport run_trial(const TrialArtifacts& art, const ExperimentConfig& cfg,
                           LookaheadSource strategy) {
  const Raceline& rl = art.raceline;
  LapReport report;

  Simulator sim(&art.grid, cfg.vehicle, cfg.seed);
  PurePursuit pp(cfg.pp);
  source_reset(strategy);

  const std::size_t spawn_idx = rl.size() / 2;
  VehicleState spawn;
  spawn.x = rl.pts[spawn_idx].x;
  spawn.y = rl.pts[spawn_idx].y;
  spawn.theta = std::atan2(rl.tangent[spawn_idx].y, rl.tangent[spawn_idx].x);
  StepResult res = sim.reset(spawn);

  std::optional<ParticleFilter> pf;
  if (cfg.use_mcl) {
    pf.emplace(&art.grid, cfg.vehicle.scan, cfg.mcl, cfg.seed);
    pf->init(spawn.x, spawn.y, spawn.theta);
  }

  const detail::FinishLine line = detail::FinishLine::at_waypoint_zero(art);
  const double dt = cfg.vehicle.control_dt();
  const double timeout = cfg.trial_timeout > 0.0
                             ? cfg.trial_timeout
                             : 30.0 + (cfg.laps + 1) * rl.total_length / 2.0;

  double t = 0.0;
  double stall_timer = 0.0;
  double last_cross = -1.0;
  bool armed = false;
  Vec2 prev_pos{spawn.x, spawn.y};

  while (true) {
    const VehicleState& true_state = sim.state();
    VehicleState ctrl_state = true_state;
    if (pf) {
      const PoseEstimate est = pf->pose();
      ctrl_state.x = est.x;
      ctrl_state.y = est.y;
      ctrl_state.theta = est.psi;
    }

    const Observation obs = observe(ctrl_state, rl, cfg.env.horizon_mid, cfg.env.horizon_far);
    const double L = source_lookahead(strategy, obs);
    const SteerOutput cmd = pp.steer(ctrl_state, rl, L, cfg.speed_scale);
    res = sim.step({cmd.v_target, cmd.delta});
    if (pf) pf->step({cmd.v_target, cmd.delta}, dt, cfg.vehicle.wheelbase, res.scan);

    const Vec2 pos{res.state.x, res.state.y};
    report.trace.push_back({t + dt, res.state.x, res.state.y, res.state.theta, res.state.v,
                            cmd.delta, L});

    if (const auto cross = line.crossing(prev_pos, pos, res.state.theta, t, dt)) {
      if (*cross - last_cross > 1.0) {
        if (armed) {
          report.lap_times.push_back(*cross - last_cross);
        } else {
          armed = true;
        }
        last_cross = *cross;
      }
    }
    prev_pos = pos;
    t += dt;

    if (res.collided) {
      report.dnf = true;
      report.dnf_cause = "collision";
      break;
    }
    if (res.state.v < cfg.env.reward.stall_speed && t > 2.0) {
      stall_timer += dt;
      if (stall_timer >= cfg.env.reward.stall_duration) {
        report.dnf = true;
        report.dnf_cause = "stall";
        break;
      }
    } else {
      stall_timer = 0.0;
    }
    if (t > timeout) {
      report.dnf = true;
      report.dnf_cause = "timeout";
      break;
    }
    if (static_cast<int>(report.lap_times.size()) >= cfg.laps) break;
  }

  report.compute_stats();
  return report;
}

inline void save_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  CsvWriter w(path, "t,x,y,theta,v,delta,L_d");
  for (const auto& r : trace) w.row(r.t, r.x, r.y, r.theta, r.v, r.delta, r.L);
}

inline void save_lap_report_csv(const std::string& path, const LapReport& r) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write report: " + path);
  out.precision(17);
  out << "lap,time_s\n";
  for (std::size_t i = 0; i < r.lap_times.size(); ++i)
    out << i + 1 << "," << r.lap_times[i] << "\n";
  out << "# completed," << r.completed << "\n";
  out << "# dnf," << (r.dnf ? r.dnf_cause : "no") << "\n";
  if (!r.dnf)
    out << "# mean," << r.mean << "\n# std," << r.stddev << "\n# min," << r.t_min << "\n# max,"
        << r.t_max << "\n";
}

struct SweepRow {
  double scale = 1.0;
  bool completed = false;
  int laps_done = 0;
  double mean_time = std::numeric_limits<double>::quiet_NaN();
  std::string dnf_cause;
};

// Runs one trial per speed scale; output sorted by scale, with the 1.0
// baseline always present.
inline std::vector<SweepRow> sweep_speed_scale(const TrialArtifacts& art,
                                               const ExperimentConfig& base,
                                               const LookaheadSource& strategy,
                                               std::vector<double> scales) {
  if (scales.empty()) throw IngestError("sweep needs at least one scale");
  if (std::find(scales.begin(), scales.end(), 1.0) == scales.end()) scales.push_back(1.0);
  std::sort(scales.begin(), scales.end());

  std::vector<SweepRow> rows;
  for (const double scale : scales) {
    ExperimentConfig cfg = base;
    cfg.speed_scale = scale;
    const LapReport rep = run_trial(art, cfg, strategy);
    SweepRow row;
    row.scale = scale;
    row.completed = !rep.dnf && rep.completed >= cfg.laps;
    row.laps_done = rep.completed;
    row.mean_time = rep.mean;
    row.dnf_cause = rep.dnf ? rep.dnf_cause : "";
    rows.push_back(row);
  }
  return rows;
}

// Largest scale whose trial completed all laps; NaN if none did.
inline double max_full_completion_scale(const std::vector<SweepRow>& rows) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows)
    if (r.completed && (!(best == best) || r.scale > best)) best = r.scale;
  return best;
}

struct ComparisonEntry {
  std::string name;
  double scale = 1.0;
  LapReport report;
};

struct ComparisonResult {
  std::vector<ComparisonEntry> entries;
  std::string markdown;
};

namespace detail {

inline std::string format_time(double v) {
  if (!(v == v)) return "-";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

inline void plot_trial(const TrialArtifacts& art, const LapReport& rep,
                       const std::string& out_dir, const std::string& name) {
  SvgPlot overlay(900, 700);
  overlay.polyline(left_boundary(art.track), "#222222", 1.2);
  overlay.polyline(right_boundary(art.track), "#222222", 1.2);
  overlay.polyline(art.raceline.pts, "#999999", 1.0, /*dashed=*/true);
  std::vector<Vec2> traj(rep.trace.size());
  for (std::size_t i = 0; i < rep.trace.size(); ++i) traj[i] = {rep.trace[i].x, rep.trace[i].y};
  overlay.polyline(traj, "#d62728", 1.5);
  overlay.label(name + " trajectory");
  overlay.save(out_dir + "/overlay_" + name + ".svg");

  std::vector<double> ss(rep.trace.size()), Ls(rep.trace.size()), vs(rep.trace.size());
  for (std::size_t i = 0; i < rep.trace.size(); ++i) {
    ss[i] = art.raceline.project({rep.trace[i].x, rep.trace[i].y}).s;
    Ls[i] = rep.trace[i].L;
    vs[i] = rep.trace[i].v;
  }
  plot_series(out_dir + "/lookahead_" + name + ".svg", ss, Ls, name + ": L_d vs s", "#2ca02c");
  plot_series(out_dir + "/speed_" + name + ".svg", ss, vs, name + ": v vs s", "#1f77b4");
}

}  // namespace detail

// Runs all configured strategies on one track and emits the comparison table
// plus per-strategy plots.
inline ComparisonResult compare_controllers(const TrialArtifacts& art,
                                            const ExperimentConfig& cfg,
                                            std::vector<std::pair<std::string, LookaheadSource>>
                                                strategies,
                                            const std::vector<double>& scales = {}) {
  ComparisonResult result;
  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream md;
  md << "# Controller comparison\n\n";
  md << "track: `" << cfg.track_path << "`  laps: " << cfg.laps << "  config hash: `"
     << std::hex << config_hash(cfg) << std::dec << "`\n\n";
  md << "| Controller | Speed scale | Laps | Mean | Std | Min | Max |\n";
  md << "|---|---|---|---|---|---|---|\n";

  for (std::size_t i = 0; i < strategies.size(); ++i) {
    ExperimentConfig run_cfg = cfg;
    if (i < scales.size()) run_cfg.speed_scale = scales[i];
    ComparisonEntry e;
    e.name = strategies[i].first;
    e.scale = run_cfg.speed_scale;
    e.report = run_trial(art, run_cfg, strategies[i].second);
    const LapReport& r = e.report;
    md << "| " << e.name << " | " << e.scale << " | " << r.completed << "/" << cfg.laps << " | "
       << detail::format_time(r.mean) << " | " << detail::format_time(r.stddev) << " | "
       << detail::format_time(r.t_min) << " | " << detail::format_time(r.t_max) << " |";
    if (r.dnf) md << " DNF: " << r.dnf_cause;
    md << "\n";

    detail::plot_trial(art, e.report, cfg.out_dir, e.name);
    save_trace_csv(cfg.out_dir + "/trace_" + e.name + ".csv", e.report.trace);
    result.entries.push_back(std::move(e));
  }

  result.markdown = md.str();
  std::ofstream out(cfg.out_dir + "/comparison.md");
  out << result.markdown;
  write_resolved_config(cfg, cfg.out_dir + "/config.resolved.txt");
  return result;
}

// Builds the configured lookahead source. `bundle` must outlive the returned
// source when the strategy is "learned".
inline LookaheadSource make_strategy(const ExperimentConfig& cfg, const PolicyBundle* bundle) {
  if (cfg.strategy == "fixed")
    return FixedLookahead{cfg.fixed_lookahead, cfg.pp.lookahead_min, cfg.pp.lookahead_max};
  if (cfg.strategy == "scheduled")
    return ScheduledLookahead{cfg.sched_a, cfg.sched_b, cfg.pp.lookahead_min,
                              cfg.pp.lookahead_max};
  if (cfg.strategy == "learned") {
    if (!bundle) throw IngestError("strategy 'learned' needs a policy bundle (--policy)");
    return LearnedLookahead(bundle, cfg.env.action_smoothing, cfg.pp.lookahead_min,
                            cfg.pp.lookahead_max);
  }
  throw IngestError("unknown strategy: " + cfg.strategy);
}

// Mean lookahead split by local raceline curvature, for the
// straights-vs-corners audit of learned policies.
inline std::pair<double, double> lookahead_by_curvature(const TrialArtifacts& art,
                                                        const LapReport& rep,
                                                        double straight_kappa = 0.02,
                                                        double corner_kappa = 0.2) {
  double straight_sum = 0.0, corner_sum = 0.0;
  int straight_n = 0, corner_n = 0;
  for (const auto& row : rep.trace) {
    const PathProjection proj = art.raceline.project({row.x, row.y});
    const double k = std::abs(art.raceline.kappa[proj.index]);
    if (k < straight_kappa) {
      straight_sum += row.L;
      ++straight_n;
    } else if (k > corner_kappa) {
      corner_sum += row.L;
      ++corner_n;
    }
  }
  return {straight_n ? straight_sum / straight_n : std::numeric_limits<double>::quiet_NaN(),
          corner_n ? corner_sum / corner_n : std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace pursuit
