#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "pursuit/track.hpp"
#include "pursuit/tracks.hpp"
#include "test_support.hpp"

using namespace pursuit;
using test_support::circle_centerline;
using test_support::circle_points;
using test_support::temp_path;
using test_support::write_circle_csv;

TEST_CASE("load_track resamples a circle to uniform spacing") {
  // 2 pi R = 125.6637 m; round(S / 1.0) = 126 points
  const std::string path = write_circle_csv("circle20.csv", 20.0, 252, 2.0);
  const Track t = load_track(path, 1.0);

  CHECK(t.size() == 126);
  CHECK(std::abs(t.arc.total_length - 2.0 * kPi * 20.0) < 0.05);

  SECTION("arc param invariants") {
    REQUIRE(t.arc.s.size() == t.size());
    CHECK(t.arc.s[0] == 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.arc.s[i] > t.arc.s[i - 1]);
    const double closing = dist(t.center.points.back(), t.center.points.front());
    CHECK(t.arc.total_length == Catch::Approx(t.arc.s.back() + closing));
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(std::abs(norm(t.arc.tangent[i]) - 1.0) < 1e-9);
      CHECK(std::abs(norm(t.arc.normal[i]) - 1.0) < 1e-9);
      const Vec2 rotated = rot90(t.arc.tangent[i]);
      CHECK(std::abs(rotated.x - t.arc.normal[i].x) < 1e-12);
      CHECK(std::abs(rotated.y - t.arc.normal[i].y) < 1e-12);
    }
  }
}

TEST_CASE("resampling is a fixed point on already-uniform input") {
  const int n = 126;
  const double radius = 20.0;
  const Centerline uniform = circle_centerline(radius, n, 2.0);
  const double spacing = 2.0 * kPi * radius / n;

  const Centerline out = resample_centerline(uniform, spacing);
  REQUIRE(out.points.size() == uniform.points.size());
  for (std::size_t i = 0; i < out.points.size(); ++i)
    CHECK(dist(out.points[i], uniform.points[i]) < 1e-6);
}

TEST_CASE("load_track ingestion errors name the violated constraint") {
  SECTION("missing column") {
    const std::string path = temp_path("missing_col.csv");
    {
      std::ofstream out(path);
      out << "# x_m,y_m,w_tr_right_m\n";
      for (int i = 0; i < 32; ++i) out << i << "," << i * i << ",2.0\n";
    }
    CHECK_THROWS_WITH(load_track(path, 0.5), Catch::Matchers::ContainsSubstring("missing column"));
  }

  SECTION("fewer than 16 points") {
    const std::string path = write_circle_csv("tiny_circle.csv", 10.0, 8, 2.0);
    CHECK_THROWS_WITH(load_track(path, 0.5),
                      Catch::Matchers::ContainsSubstring("fewer than 16 points"));
  }

  SECTION("self-intersecting centerline") {
    Centerline fig8;
    fig8.closed = true;
    for (int i = 0; i < 64; ++i) {
      const double t = 2.0 * kPi * i / 64;
      fig8.points.push_back({10.0 * std::sin(t), 6.0 * std::sin(2.0 * t)});
    }
    fig8.w_left.assign(64, 1.0);
    fig8.w_right.assign(64, 1.0);
    const std::string path = temp_path("fig8.csv");
    save_track_csv(path, fig8);
    CHECK_THROWS_WITH(load_track(path, 0.5),
                      Catch::Matchers::ContainsSubstring("self-intersecting"));
  }

  SECTION("duplicate consecutive points") {
    Centerline dup = circle_centerline(10.0, 32, 1.0);
    dup.points[5] = dup.points[4];
    CHECK_THROWS_AS(make_track(std::move(dup)), IngestError);
  }
}

TEST_CASE("curvature_profile matches 1/R on circles") {
  SECTION("counter-clockwise circle R=10 at 0.25 m spacing") {
    const int n = static_cast<int>(std::llround(2.0 * kPi * 10.0 / 0.25));
    const auto kappa = curvature_profile(circle_points(10.0, n, true), true);
    for (double k : kappa) CHECK(std::abs(k - 0.1) < 1e-3);
  }

  SECTION("clockwise circle flips the sign") {
    const int n = static_cast<int>(std::llround(2.0 * kPi * 10.0 / 0.25));
    const auto kappa = curvature_profile(circle_points(10.0, n, false), true);
    for (double k : kappa) CHECK(std::abs(k + 0.1) < 1e-3);
  }

  SECTION("1% pointwise accuracy for R in {5, 10, 50} at spacing R/40") {
    for (const double radius : {5.0, 10.0, 50.0}) {
      const int n = static_cast<int>(std::ceil(2.0 * kPi * radius / (radius / 40.0)));
      const auto kappa = curvature_profile(circle_points(radius, n, true), true);
      for (double k : kappa) CHECK(std::abs(k * radius - 1.0) < 0.01);
    }
  }

  SECTION("collinear open path has zero curvature") {
    std::vector<Vec2> line;
    for (int i = 0; i < 32; ++i) line.push_back({0.3 * i, 0.0});
    for (double k : curvature_profile(line, false)) CHECK(std::abs(k) < 1e-9);
  }

  SECTION("degenerate segment raises a geometry error") {
    std::vector<Vec2> pts = circle_points(5.0, 32, true);
    pts[7] = pts[6];
    CHECK_THROWS_AS(curvature_profile(pts, true), GeometryError);
  }
}

TEST_CASE("turning number of simple closed CCW centerlines is 2 pi") {
  for (const auto& [name, center] : synthetic_corpus()) {
    INFO(name);
    const Track t = make_track(Centerline(center));
    const auto kappa = curvature_profile(t.center.points, true);
    const std::size_t n = t.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ds = 0.5 * (dist(t.center.points[i], t.center.points[(i + n - 1) % n]) +
                               dist(t.center.points[(i + 1) % n], t.center.points[i]));
      total += kappa[i] * ds;
    }
    CHECK(std::abs(total - 2.0 * kPi) < 0.01 * 2.0 * kPi);
  }
}

TEST_CASE("resampling preserves total length within 0.1%") {
  for (const auto& [name, center] : synthetic_corpus()) {
    INFO(name);
    const std::string path = temp_path("corpus_" + name + ".csv");
    save_track_csv(path, center);

    // raw polyline length
    double raw_len = 0.0;
    for (std::size_t i = 0; i < center.points.size(); ++i)
      raw_len += dist(center.points[i], center.points[(i + 1) % center.points.size()]);

    const Track t = load_track(path, 0.25);
    CHECK(std::abs(t.arc.total_length - raw_len) / raw_len < 1e-3);
  }
}

TEST_CASE("project_to_path picks the nearest waypoint") {
  Centerline straight;
  straight.closed = true;
  for (int i = 0; i < 100; ++i) straight.points.push_back({static_cast<double>(i), 0.0});
  // close the loop far away so the straight section stays simple
  for (int i = 0; i < 50; ++i) straight.points.push_back({99.0 - 2.0 * i, 30.0});
  straight.w_left.assign(straight.points.size(), 1.0);
  straight.w_right.assign(straight.points.size(), 1.0);
  const Track t = make_track(std::move(straight));

  SECTION("exact hit") {
    const auto proj = project_to_path(t, t.center.points[7]);
    CHECK(proj.index == 7);
    CHECK(proj.s == Catch::Approx(t.arc.s[7]));
    CHECK(std::abs(proj.lateral) < 1e-12);
  }

  SECTION("half a meter left of the straight gives +0.5 lateral") {
    const auto proj = project_to_path(t, {20.0, 0.5});
    CHECK(proj.index == 20);
    CHECK(proj.lateral == Catch::Approx(0.5).margin(1e-6));
  }

  SECTION("equidistant tie breaks to the lower index") {
    const auto proj = project_to_path(t, {3.5, 0.0});
    CHECK(proj.index == 3);
  }
}
