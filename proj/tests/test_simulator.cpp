#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pursuit/simulator.hpp"
#include "pursuit/tracks.hpp"
#include "test_support.hpp"

using namespace pursuit;
using test_support::disc_grid;

TEST_CASE("bicycle integration basics") {
  VehicleParams p;

  SECTION("straight line advances x by v dt") {
    VehicleState s;
    s.v = 1.0;
    const VehicleState out = integrate_bicycle(s, {1.0, 0.0}, p, 0.1);
    CHECK(out.x == Catch::Approx(0.1).margin(1e-12));
    CHECK(out.y == 0.0);
    CHECK(out.theta == 0.0);
    CHECK(out.v == Catch::Approx(1.0));
  }

  SECTION("constant steering traces the analytic turning radius") {
    // tan(delta)/L = 0.2  =>  radius 5 m
    const double delta = std::atan(0.2 * p.wheelbase);
    VehicleState s;
    s.v = 2.0;
    const double omega = 2.0 * 0.2;  // v / R
    const double period = 2.0 * kPi / omega;
    const int steps = static_cast<int>(std::llround(period / p.dt));
    const Vec2 center{0.0, 5.0};
    double max_err = 0.0;
    for (int i = 0; i < steps; ++i) {
      s = integrate_bicycle(s, {2.0, delta}, p, p.dt);
      max_err = std::max(max_err, std::abs(dist({s.x, s.y}, center) - 5.0));
    }
    CHECK(max_err / 5.0 < 0.001);
    CHECK(s.x == Catch::Approx(0.0).margin(0.01));
  }

  SECTION("speed and heading are exactly constant with zero inputs") {
    VehicleState s;
    s.v = 3.0;
    s.theta = 0.7;
    for (int i = 0; i < 1000; ++i) {
      s = integrate_bicycle(s, {3.0, 0.0}, p, p.dt);
      REQUIRE(s.v == 3.0);
      REQUIRE(s.theta == 0.7);
    }
  }

  SECTION("speed never goes negative") {
    VehicleState s;
    s.v = 0.3;
    for (int i = 0; i < 200; ++i) s = integrate_bicycle(s, {0.0, 0.0}, p, p.dt);
    CHECK(s.v >= 0.0);
    CHECK(s.v < 1e-6);
  }
}

TEST_CASE("halving the physics step moves the endpoint less than 1 cm") {
  // open-loop command replay on an oval-sized path
  VehicleParams coarse;  // dt = 0.01
  VehicleParams fine = coarse;
  fine.dt = 0.005;

  std::vector<DriveCommand> cmds;
  for (int i = 0; i < 3000; ++i) {
    const double phase = 0.002 * i;
    cmds.push_back({6.0, 0.25 * std::sin(phase)});
  }

  VehicleState a, b;
  for (const auto& c : cmds) a = integrate_bicycle(a, c, coarse, coarse.dt);
  for (const auto& c : cmds) {
    b = integrate_bicycle(b, c, fine, fine.dt);
    b = integrate_bicycle(b, c, fine, fine.dt);
  }
  CHECK(dist({a.x, a.y}, {b.x, b.y}) < 0.01);
}

TEST_CASE("simulator renders scans and flags collisions") {
  const OccupancyGrid g = disc_grid(10.0, 0.05);

  SECTION("pose near the wall collides via the scan") {
    VehicleParams p;
    p.scan.noise_sigma = 0.0;
    Simulator sim(&g, p, 1);
    VehicleState s;
    s.x = 9.85;  // 0.15 m from the wall, facing it
    s.theta = 0.0;
    const StepResult r = sim.reset(s);
    CHECK(r.min_range < 0.2);
    CHECK(r.collided);
  }

  SECTION("pose in open space does not collide") {
    VehicleParams p;
    Simulator sim(&g, p, 1);
    const StepResult r = sim.reset({0.0, 0.0, 0.0, 0.0});
    CHECK_FALSE(r.collided);
    CHECK(r.min_range > 5.0);
  }

  SECTION("reset inside a wall is rejected") {
    VehicleParams p;
    Simulator sim(&g, p, 1);
    CHECK_THROWS_AS(sim.reset({11.0, 0.0, 0.0, 0.0}), SimulationFault);
  }

  SECTION("reset zeroes the speed") {
    VehicleParams p;
    Simulator sim(&g, p, 1);
    const StepResult r = sim.reset({0.0, 0.0, 0.0, 5.0});
    CHECK(r.state.v == 0.0);
  }
}

TEST_CASE("identical seeds and commands give bit-identical trajectories") {
  const OccupancyGrid g = disc_grid(10.0, 0.05);
  VehicleParams p;
  p.scan.beams = 64;

  auto run = [&]() {
    Simulator sim(&g, p, 99);
    sim.reset({0.0, 0.0, 0.3, 0.0});
    std::vector<double> out;
    for (int i = 0; i < 200; ++i) {
      const StepResult r = sim.step({3.0, 0.1 * std::sin(0.01 * i)});
      out.push_back(r.state.x);
      out.push_back(r.state.y);
      out.push_back(r.state.theta);
      out.push_back(r.state.v);
      out.push_back(r.min_range);
    }
    return out;
  };

  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}
