#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pursuit/controller.hpp"
#include "pursuit/environment.hpp"
#include "pursuit/lookahead.hpp"
#include "test_support.hpp"

using namespace pursuit;
using test_support::circle_points;

namespace {

Raceline straight_raceline(double length = 200.0, double spacing = 0.25, double v = 3.0) {
  Raceline rl;
  const int n = static_cast<int>(length / spacing);
  for (int i = 0; i < n; ++i) {
    rl.pts.push_back({i * spacing, 0.0});
    rl.s.push_back(i * spacing);
    rl.kappa.push_back(0.0);
    rl.v.push_back(v);
  }
  rl.finalize();
  return rl;
}

Raceline circle_raceline(double radius, double spacing = 0.25, double v = 3.0) {
  Raceline rl;
  const int n = static_cast<int>(std::llround(2.0 * kPi * radius / spacing));
  rl.pts = circle_points(radius, n, true);
  for (int i = 0; i < n; ++i) {
    rl.s.push_back(2.0 * kPi * radius * i / n);
    rl.kappa.push_back(1.0 / radius);
    rl.v.push_back(v);
  }
  rl.finalize();
  return rl;
}

}  // namespace

TEST_CASE("find_target walks the exact lookahead distance") {
  SECTION("aligned on a straight") {
    const Raceline rl = straight_raceline();
    const TargetPoint tp = find_target(rl, 10.0, 0.0, 0.0, 2.0);
    CHECK(tp.body.x == Catch::Approx(2.0).margin(1e-6));
    CHECK(std::abs(tp.body.y) < 1e-6);
  }

  SECTION("tangent on a circle gives the chord offset L^2 / 2R") {
    const Raceline rl = circle_raceline(10.0);
    // start at angle 0: position (10, 0), CCW tangent points +y
    const TargetPoint tp = find_target(rl, 10.0, 0.0, kPi / 2.0, 2.0);
    CHECK(std::abs(dist({0.0, 0.0}, {10.0, 0.0}) - 10.0) < 1e-12);
    CHECK(tp.body.y == Catch::Approx(2.0 * 2.0 / (2.0 * 10.0)).epsilon(0.01));
    CHECK(std::hypot(tp.body.x, tp.body.y) == Catch::Approx(2.0).margin(1e-9));
  }

  SECTION("wraparound near the last waypoint") {
    const Raceline rl = circle_raceline(10.0);
    const std::size_t last = rl.size() - 1;
    const double ang = std::atan2(rl.pts[last].y, rl.pts[last].x);
    const TargetPoint tp =
        find_target(rl, rl.pts[last].x, rl.pts[last].y, ang + kPi / 2.0, 2.0);
    CHECK(std::hypot(tp.body.x, tp.body.y) == Catch::Approx(2.0).margin(1e-9));
    CHECK(tp.body.x > 0.0);  // ahead of the vehicle
  }
}

TEST_CASE("curvature command and filter follow the stated formulas") {
  CHECK(curvature_command(0.0, 2.0) == 0.0);
  CHECK(curvature_command(1.0, 2.0) == Catch::Approx(0.5));
  // chord identity: y' = L^2 / 2R recovers 1/R
  const double R = 17.0, L = 1.8;
  CHECK(curvature_command(L * L / (2.0 * R), L) == Catch::Approx(1.0 / R));

  CHECK(filter_curvature(0.7, 0.3, 1.0) == Catch::Approx(0.7));
  CHECK(filter_curvature(0.5, 0.0, 0.4) == Catch::Approx(0.2));

  SECTION("geometric convergence at rate 1 - beta") {
    const double beta = 0.4, target = 0.8;
    double bar = 0.0;
    for (int k = 1; k <= 12; ++k) {
      bar = filter_curvature(target, bar, beta);
      const double expected = target * (1.0 - std::pow(1.0 - beta, k));
      CHECK(bar == Catch::Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("steering gain schedule") {
  PurePursuitConfig cfg;
  cfg.gain_max = 1.0;
  cfg.gain_min = 0.5;
  cfg.gain_v_min = 2.0;
  cfg.gain_v_max = 10.0;

  // m = -0.0625, b = 1.125, g(6) = 0.75
  CHECK(steering_gain(6.0, cfg) == Catch::Approx(0.75));
  CHECK(steering_gain(1.0, cfg) == Catch::Approx(1.0));
  CHECK(steering_gain(2.0, cfg) == Catch::Approx(1.0));
  CHECK(steering_gain(10.0, cfg) == Catch::Approx(0.5));
  CHECK(steering_gain(15.0, cfg) == Catch::Approx(0.5));

  SECTION("non-increasing in speed") {
    double prev = steering_gain(0.0, cfg);
    for (double v = 0.25; v <= 14.0; v += 0.25) {
      const double g = steering_gain(v, cfg);
      CHECK(g <= prev + 1e-12);
      prev = g;
    }
  }
}

TEST_CASE("steer composes the pipeline") {
  SECTION("aligned on a straight gives zero steering") {
    const Raceline rl = straight_raceline();
    PurePursuit pp;
    const SteerOutput out = pp.steer({10.0, 0.0, 0.0, 3.0}, rl, 1.5);
    CHECK(out.delta == Catch::Approx(0.0).margin(1e-9));
    CHECK(out.v_target == Catch::Approx(3.0));
  }

  SECTION("converged filter on a circle matches arctan(Lw / R)") {
    const Raceline rl = circle_raceline(10.0);
    PurePursuitConfig cfg;
    cfg.gain_min = cfg.gain_max = 1.0;
    PurePursuit pp(cfg);
    SteerOutput out{};
    for (int i = 0; i < 60; ++i)
      out = pp.steer({10.0, 0.0, kPi / 2.0, 3.0}, rl, 2.0);
    CHECK(out.delta == Catch::Approx(std::atan(cfg.wheelbase / 10.0)).epsilon(0.02));
  }

  SECTION("huge filtered curvature saturates at delta_max") {
    const Raceline rl = circle_raceline(10.0);
    PurePursuitConfig cfg;
    PurePursuit pp(cfg);
    SteerOutput out{};
    // heading 90 degrees off the path: the target sits beside the vehicle
    for (int i = 0; i < 40; ++i)
      out = pp.steer({10.0, 0.0, 0.0, 1.0}, rl, 0.5);
    CHECK(std::abs(out.delta) == Catch::Approx(cfg.delta_max));
  }

  SECTION("speed target scales with the speed profile factor") {
    const Raceline rl = straight_raceline();
    PurePursuit pp;
    const SteerOutput out = pp.steer({10.0, 0.0, 0.0, 3.0}, rl, 1.5, 1.13);
    CHECK(out.v_target == Catch::Approx(3.0 * 1.13));
  }
}

namespace {

// closed-loop rollout without a grid: controller + RK4 bicycle
struct RolloutResult {
  std::vector<VehicleState> states;
};

RolloutResult roll(const Raceline& rl, VehicleState s, double L, const PurePursuitConfig& cfg,
                   double seconds, double v_cmd = 0.0) {
  VehicleParams vp;
  PurePursuit pp(cfg);
  RolloutResult out;
  const int steps = static_cast<int>(seconds / vp.control_dt());
  for (int i = 0; i < steps; ++i) {
    const SteerOutput cmd = pp.steer(s, rl, L);
    const double target = v_cmd > 0.0 ? v_cmd : cmd.v_target;
    for (int k = 0; k < vp.substeps; ++k)
      s = integrate_bicycle(s, {target, cmd.delta}, vp, vp.dt);
    out.states.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("closed-loop lateral regulation on a straight") {
  const Raceline rl = straight_raceline(200.0, 0.25, 3.0);
  PurePursuitConfig cfg;

  VehicleState s;
  s.x = 10.0;
  s.y = 0.5;  // half a meter off the line
  s.theta = 0.0;
  s.v = 3.0;

  const RolloutResult r = roll(rl, s, 1.5, cfg, 25.0);
  bool settled = false;
  for (const auto& st : r.states) {
    if (!settled && st.x >= 20.0) {
      settled = true;  // 10 m of travel from the start
      CHECK(std::abs(st.y) < 0.05);
    }
    if (settled) CHECK(std::abs(st.y) < 0.05);  // no divergence afterwards
  }
  CHECK(settled);
}

TEST_CASE("steady-state circle tracking error is bounded by the chord offset") {
  const double R = 10.0, L = 1.5;
  const Raceline rl = circle_raceline(R, 0.25, 3.0);
  PurePursuitConfig cfg;
  cfg.gain_min = cfg.gain_max = 1.0;  // schedule disabled

  VehicleState s;
  s.x = R;
  s.theta = kPi / 2.0;
  s.v = 0.0;

  const RolloutResult r = roll(rl, s, L, cfg, 40.0);
  // steady state: last quarter of the run
  double worst = 0.0;
  for (std::size_t i = 3 * r.states.size() / 4; i < r.states.size(); ++i) {
    const auto& st = r.states[i];
    worst = std::max(worst, std::abs(norm({st.x, st.y}) - R));
  }
  CHECK(worst <= L * L / (2.0 * R) + 0.05);
}

TEST_CASE("every strategy publishes lookaheads inside the bounds") {
  Rng rng(3);
  FixedLookahead fixed{9.0};  // deliberately out of range
  ScheduledLookahead sched{0.3, 0.25};
  for (int i = 0; i < 500; ++i) {
    Observation obs;
    obs.v = rng.uniform(0.0, 20.0);
    obs.k0 = rng.uniform(0.0, 0.6);
    obs.k1 = rng.uniform(0.0, 0.6);
    obs.k2 = rng.uniform(0.0, 0.6);
    obs.dk = obs.k1 - obs.k0;
    for (double L : {fixed.lookahead(obs), sched.lookahead(obs)}) {
      CHECK(L >= 0.35);
      CHECK(L <= 4.0);
    }
  }
}
