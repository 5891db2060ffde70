#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pursuit/grid.hpp"
#include "pursuit/tracks.hpp"
#include "test_support.hpp"

using namespace pursuit;
using test_support::circle_centerline;
using test_support::disc_grid;
using test_support::temp_path;

TEST_CASE("rasterize builds a free annulus between the boundaries") {
  const double res = 0.05;
  const Track t = make_track(circle_centerline(20.0, 252, 2.0));
  const OccupancyGrid g = rasterize(t, res);

  SECTION("free radial extent is 4 m within 2 cells") {
    double extent_sum = 0.0;
    const int dirs = 32;
    for (int k = 0; k < dirs; ++k) {
      const double phi = 2.0 * kPi * k / dirs;
      double free_len = 0.0;
      for (double r = 16.0; r <= 24.0; r += res / 4.0) {
        if (!g.occupied_world(r * std::cos(phi), r * std::sin(phi))) free_len += res / 4.0;
      }
      extent_sum += free_len;
    }
    const double mean_extent = extent_sum / dirs;
    CHECK(mean_extent > 4.0 - 2.0 * res);
    CHECK(mean_extent < 4.0 + 2.0 * res);
  }

  SECTION("full corpus keeps every centerline point free") {
    for (const auto& [name, center] : synthetic_corpus()) {
      INFO(name);
      const Track track = make_track(Centerline(center));
      const OccupancyGrid grid = rasterize(track, res);
      for (const Vec2& p : track.center.points) CHECK_FALSE(grid.occupied_world(p.x, p.y));
    }
  }

  SECTION("points far outside are occupied") {
    CHECK(g.occupied_world(32.0, 0.0));   // 10 m beyond the outer wall
    CHECK(g.occupied_world(0.0, 0.0));    // inside the inner hole
    CHECK(g.occupied_world(100.0, 100.0));  // off-grid
  }

  SECTION("resolution outside [0.01, 0.5] is rejected") {
    CHECK_THROWS_AS(rasterize(t, 0.005), IngestError);
    CHECK_THROWS_AS(rasterize(t, 0.7), IngestError);
  }
}

TEST_CASE("raycast distance matches the analytic wall distance") {
  const double res = 0.05;
  const OccupancyGrid g = disc_grid(10.0, res);

  SECTION("rays from the centre hit the disc wall at 10 m") {
    for (int k = 0; k < 64; ++k) {
      const double a = 2.0 * kPi * k / 64;
      const double d = cast_ray(g, 0.0, 0.0, a, 30.0);
      CHECK(std::abs(d - 10.0) <= 2.0 * res);
    }
  }

  SECTION("max range caps the return exactly") {
    const double d = cast_ray(g, 0.0, 0.0, 0.3, 5.0);
    CHECK(d == 5.0);
  }

  SECTION("batch equals per-beam results") {
    const std::vector<double> angles = beam_angles(1080, 270.0 * kPi / 180.0);
    const std::vector<double> scan = raycast(g, 1.0, -2.0, 0.7, angles, 30.0);
    REQUIRE(scan.size() == angles.size());
    for (std::size_t i = 0; i < angles.size(); i += 97)
      CHECK(scan[i] == cast_ray(g, 1.0, -2.0, 0.7 + angles[i], 30.0));
  }

  SECTION("monotone in max range") {
    for (int k = 0; k < 32; ++k) {
      const double a = 2.0 * kPi * k / 32 + 0.01;
      const double d8 = cast_ray(g, 2.0, 1.0, a, 8.0);
      const double d12 = cast_ray(g, 2.0, 1.0, a, 12.0);
      CHECK(d12 >= d8);
      if (d8 < 8.0) CHECK(d12 == d8);
    }
  }

  SECTION("raycast from an occupied cell is rejected") {
    CHECK_THROWS_AS(raycast(g, 11.5, 0.0, 0.0, {0.0}, 30.0), LocalizationInputError);
  }
}

TEST_CASE("grid export writes a readable P5 graymap with sidecar") {
  const Track t = make_track(make_oval_track());
  const OccupancyGrid g = rasterize(t, 0.1);
  const std::string path = temp_path("oval_map.pgm");
  save_pgm(g, path);

  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == g.width);
  CHECK(h == g.height);
  CHECK(maxval == 255);
  CHECK(std::filesystem::file_size(path) >
        static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height));

  std::ifstream meta(path + ".meta");
  REQUIRE(meta.good());
  std::string line;
  std::getline(meta, line);
  CHECK(line.find("resolution") != std::string::npos);
}
