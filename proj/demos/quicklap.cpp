// Smallest end-to-end use of the library: generate an oval, build its
// raceline, and drive three laps with the speed-scheduled controller.
#include <cstdio>

#include "pursuit/harness.hpp"
#include "pursuit/tracks.hpp"

int main() {
  using namespace pursuit;

  const std::string track_csv = "quicklap_oval.csv";
  save_track_csv(track_csv, make_oval_track());

  ExperimentConfig cfg;
  cfg.track_path = track_csv;
  cfg.laps = 3;
  cfg.vehicle.scan.beams = 108;  // plenty for collision checks

  const TrialArtifacts art = prepare_artifacts(cfg);
  std::printf("track length %.1f m, raceline %zu waypoints\n", art.track.arc.total_length,
              art.raceline.size());

  const LapReport rep = run_trial(art, cfg, ScheduledLookahead{});
  if (rep.dnf) {
    std::printf("DNF (%s) after %d laps\n", rep.dnf_cause.c_str(), rep.completed);
    return 1;
  }
  for (std::size_t i = 0; i < rep.lap_times.size(); ++i)
    std::printf("lap %zu: %.2f s\n", i + 1, rep.lap_times[i]);
  std::printf("mean %.2f s  std %.3f s\n", rep.mean, rep.stddev);
  return 0;
}
