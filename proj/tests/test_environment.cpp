#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pursuit/environment.hpp"
#include "pursuit/grid.hpp"
#include "pursuit/raceline.hpp"
#include "pursuit/tracks.hpp"
#include "test_support.hpp"

using namespace pursuit;

namespace {

// Straight raceline with a crafted curvature array.
Raceline crafted_raceline(const std::vector<double>& kappa, double spacing = 0.25) {
  Raceline rl;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    rl.pts.push_back({static_cast<double>(i) * spacing, 0.0});
    rl.s.push_back(static_cast<double>(i) * spacing);
    rl.kappa.push_back(kappa[i]);
    rl.v.push_back(5.0);
  }
  rl.finalize();
  return rl;
}

struct OvalEnv {
  Track track;
  Raceline raceline;
  OccupancyGrid grid;

  OvalEnv() {
    track = make_track(make_oval_track());
    RacelineParams params;
    params.margin = 0.5;  // generous apex clearance for the episode tests
    raceline = build_raceline(track, params);
    grid = rasterize(track, 0.05);
  }

  RaceEnv make(EnvConfig cfg, std::uint64_t seed = 3) const {
    VehicleParams vp;
    vp.scan.beams = 108;
    return RaceEnv(&raceline, &grid, vp, PurePursuitConfig{}, cfg, seed);
  }
};

}  // namespace

TEST_CASE("observe extracts multi-horizon curvature features") {
  SECTION("straight everywhere") {
    const Raceline rl = crafted_raceline(std::vector<double>(400, 0.0));
    const Observation o = observe({30.0, 0.0, 0.0, 4.0}, rl, 3.0, 8.0);
    CHECK(o.v == 4.0);
    CHECK(o.k0 == 0.0);
    CHECK(o.k1 == 0.0);
    CHECK(o.k2 == 0.0);
    CHECK(o.dk == 0.0);
  }

  SECTION("corner beginning at the mid horizon") {
    std::vector<double> kappa(400, 0.0);
    // vehicle projects to index 120; horizon 3 m = 12 waypoints at 0.25 m
    for (std::size_t i = 132; i < 400; ++i) kappa[i] = -0.5;  // sign dropped by observe
    const Raceline rl = crafted_raceline(kappa);
    const Observation o = observe({30.0, 0.0, 0.0, 4.0}, rl, 3.0, 8.0);
    CHECK(o.k0 == 0.0);
    CHECK(o.k1 == Catch::Approx(0.5));
    CHECK(o.k2 == Catch::Approx(0.5));
    CHECK(o.dk == Catch::Approx(0.5));
  }

  SECTION("constant-curvature circle has zero curvature change") {
    Raceline rl;
    const int n = 360;
    for (int i = 0; i < n; ++i) {
      const double phi = 2.0 * kPi * i / n;
      rl.pts.push_back({12.0 * std::cos(phi), 12.0 * std::sin(phi)});
      rl.s.push_back(2.0 * kPi * 12.0 * i / n);
      rl.kappa.push_back(1.0 / 12.0);
      rl.v.push_back(4.0);
    }
    rl.finalize();
    const Observation o = observe({12.0, 0.0, kPi / 2.0, 4.0}, rl, 3.0, 8.0);
    CHECK(o.dk == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("observe is deterministic") {
    const Raceline rl = crafted_raceline(std::vector<double>(400, 0.1));
    const VehicleState s{17.3, 0.2, 0.05, 3.3};
    const Observation a = observe(s, rl, 3.0, 8.0);
    const Observation b = observe(s, rl, 3.0, 8.0);
    CHECK(a.as_array() == b.as_array());
  }
}

TEST_CASE("action mapping and smoothing") {
  CHECK(action_to_lookahead(-1.0) == Catch::Approx(0.35));
  CHECK(action_to_lookahead(1.0) == Catch::Approx(4.0));
  CHECK(action_to_lookahead(0.0) == Catch::Approx(2.175));
  CHECK(action_to_lookahead(-7.0) == Catch::Approx(0.35));  // clamped

  SECTION("alpha = 1 disables smoothing") {
    LookaheadSmoother sm(1.0);
    CHECK(sm.apply(2.0) == 2.0);
    CHECK(sm.apply(0.5) == 0.5);
  }

  SECTION("first sample initializes the state") {
    LookaheadSmoother sm(0.3);
    CHECK(sm.apply(3.0) == 3.0);
    CHECK(sm.apply(3.0) == 3.0);
    CHECK(sm.apply(1.0) == Catch::Approx(0.7 * 3.0 + 0.3 * 1.0));
  }
}

TEST_CASE("reward follows the seven-term form with clipping") {
  RewardConfig cfg;  // defaults: w_v=0.35 w_e=1 w_j=0.8 w_k=0.5 w_c=30 w_p=0.9 w_s=5

  SECTION("heuristic ideal lookahead hand case") {
    CHECK(lookahead_heuristic(4.0, 0.2, cfg) == Catch::Approx(0.92));
  }

  SECTION("collision alone clips to the floor") {
    RewardTransition t;
    t.L = lookahead_heuristic(0.0, 0.0, cfg);
    t.L_prev = t.L;
    t.collided = true;
    CHECK(reward(t, cfg) == Catch::Approx(-20.0));
  }

  SECTION("all terms vanish") {
    RewardTransition t;
    t.v = 0.0;
    t.k0 = t.k1 = t.k2 = 0.0;
    t.L = lookahead_heuristic(0.0, 0.0, cfg);
    t.L_prev = t.L;
    t.waypoints_advanced = 0.0;
    CHECK(reward(t, cfg) == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("reward always lies inside the clip range") {
    Rng rng(9);
    for (int i = 0; i < 2000; ++i) {
      RewardTransition t;
      t.v = rng.uniform(0.0, 20.0);
      t.L = rng.uniform(0.35, 4.0);
      t.L_prev = rng.uniform(0.35, 4.0);
      t.k0 = rng.uniform(0.0, 0.6);
      t.k1 = rng.uniform(0.0, 0.6);
      t.k2 = rng.uniform(0.0, 0.6);
      t.collided = rng.uniform() < 0.1;
      t.stalled = rng.uniform() < 0.1;
      t.waypoints_advanced = rng.uniform(-2.0, 90.0);
      const double r = reward(t, cfg);
      CHECK(r >= cfg.clip_lo);
      CHECK(r <= cfg.clip_hi);
    }
  }
}

TEST_CASE("wrapped index delta") {
  CHECK(wrapped_index_delta(10, 12, 400) == 2);
  CHECK(wrapped_index_delta(399, 1, 400) == 2);   // forward across the seam
  CHECK(wrapped_index_delta(1, 399, 400) == -2);  // backward across the seam
  CHECK(wrapped_index_delta(5, 5, 400) == 0);
}

TEST_CASE("race environment episodes") {
  const OvalEnv fixture;

  SECTION("constant mid-range action completes a lap with exact progress accounting") {
    EnvConfig cfg;
    cfg.lap_limit = 1;
    cfg.max_steps = 20000;
    RaceEnv env = fixture.make(cfg);
    env.reset();

    EnvStep step;
    int guard = 0;
    do {
      step = env.step(0.0);
      ++guard;
    } while (!step.done && guard < 20000);

    REQUIRE(step.done);
    CHECK(env.info().laps == 1);
    REQUIRE(env.info().lap_times.size() == 1);
    CHECK(env.info().lap_times[0] > 5.0);
    // cumulative waypoint advance equals the waypoint count at lap completion
    CHECK(env.info().progress_waypoints >= static_cast<double>(fixture.raceline.size()));
    CHECK(env.info().progress_waypoints <
          static_cast<double>(fixture.raceline.size()) + 8.0);
  }

  SECTION("zero speed scale stalls out with the stall penalty") {
    EnvConfig cfg;
    cfg.speed_scale = 0.0;
    RaceEnv env = fixture.make(cfg);
    env.reset();

    EnvStep step;
    int steps = 0;
    do {
      step = env.step(0.0);
      ++steps;
    } while (!step.done && steps < 1000);

    REQUIRE(step.done);
    CHECK(env.info().stalled);
    // stall penalty present in the final reward
    CHECK(step.reward < 0.0);
    // stall duration 2 s at 50 Hz
    CHECK(steps >= 100);
  }

  SECTION("reward trace stays inside the clip bounds and L_d inside its bounds") {
    EnvConfig cfg;
    cfg.max_steps = 400;
    RaceEnv env = fixture.make(cfg);
    env.reset();
    Rng rng(21);
    double prev_L = -1.0;
    for (int i = 0; i < 400; ++i) {
      const EnvStep step = env.step(rng.uniform(-1.0, 1.0));
      CHECK(step.reward >= cfg.reward.clip_lo);
      CHECK(step.reward <= cfg.reward.clip_hi);
      const double L = env.info().last_lookahead;
      CHECK(L >= 0.35);
      CHECK(L <= 4.0);
      if (prev_L >= 0.0)
        CHECK(std::abs(L - prev_L) <= cfg.action_smoothing * (4.0 - 0.35) + 1e-12);
      prev_L = L;
      if (step.done) break;
    }
  }

  SECTION("reset determinism under a fixed seed") {
    EnvConfig cfg;
    cfg.randomize_spawn = true;
    RaceEnv a = fixture.make(cfg, 123);
    RaceEnv b = fixture.make(cfg, 123);
    for (int episode = 0; episode < 5; ++episode) {
      const auto oa = a.reset();
      const auto ob = b.reset();
      REQUIRE(oa == ob);
      CHECK(a.state().x == b.state().x);
      CHECK(a.state().y == b.state().y);
    }
  }

  SECTION("collision ends the episode") {
    EnvConfig cfg;
    cfg.speed_scale = 2.5;  // hot enough to leave the track with a poor lookahead
    cfg.max_steps = 20000;
    RaceEnv env = fixture.make(cfg);
    env.reset();
    EnvStep step;
    int guard = 0;
    do {
      step = env.step(1.0);  // max lookahead everywhere: cuts the corners
      ++guard;
    } while (!step.done && guard < 20000);
    REQUIRE(step.done);
    CHECK(env.info().collided);
    CHECK(step.reward <= -10.0);  // the collision term dominates
  }
}
