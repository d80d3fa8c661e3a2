#include <doctest.h>

#include "hgam/errors.hpp"
#include "hgam/world.hpp"

#include <cmath>
#include <numbers>

using namespace hgam;

namespace {

// Lens area by integrating horizontal chord overlaps, independent of the
// closed form under test.
double lens_by_integration(double d, double r, int n = 200000) {
  double area = 0.0;
  const double h = 2 * r / n;
  for (int i = 0; i < n; ++i) {
    const double y = -r + (i + 0.5) * h;
    const double s = std::sqrt(std::max(0.0, r * r - y * y));
    area += std::max(0.0, 2 * s - d) * h;
  }
  return area;
}

}  // namespace

TEST_SUITE("world") {
  TEST_CASE("default config is valid and matches the documented defaults") {
    WorldConfig c;
    CHECK_NOTHROW(validate(c));
    CHECK(c.area_width == 16.0);
    CHECK(c.num_uavs() == 3);
    CHECK(c.num_pois == 100);
    CHECK(c.step_length == 0.13);
    CHECK(c.effective_view_range() == 4.0);
    c.global_view = true;
    CHECK(c.effective_view_range() == doctest::Approx(std::hypot(16.0, 16.0)));
  }

  TEST_CASE("invalid configs are rejected") {
    WorldConfig c;
    c.sense_radius = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = WorldConfig{};
    c.view_range = 0.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = WorldConfig{};
    c.w_f = 1.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = WorldConfig{};
    c.max_steps = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = WorldConfig{};
    c.low_battery_frac = -0.1;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }

  TEST_CASE("scenario from defaults") {
    const WorldState s = generate_scenario(WorldConfig{}, 7);
    CHECK(s.pois.size() == 100);
    CHECK(s.uavs.size() == 3);
    CHECK(s.obstacles.size() == 6);
    CHECK(s.t == 0);
    CHECK_FALSE(s.done);
    CHECK(s.uavs[0].kind == UavKind::Muav);
    CHECK(s.uavs[1].kind == UavKind::Muav);
    CHECK(s.uavs[2].kind == UavKind::Cuav);
    for (const auto& u : s.uavs) {
      CHECK(u.energy_remaining == 50.0);
      CHECK(u.energy_charged == 0.0);
      CHECK(u.energy_consumed == 0.0);
    }
  }

  TEST_CASE("scenario generation is a pure function of config and seed") {
    const WorldConfig c;
    CHECK(generate_scenario(c, 11) == generate_scenario(c, 11));
    CHECK_FALSE(generate_scenario(c, 11) == generate_scenario(c, 12));
  }

  TEST_CASE("placement invariants hold over many seeds") {
    const WorldConfig c;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const WorldState s = generate_scenario(c, seed);
      for (const auto& ob : s.obstacles) {
        CHECK(ob.radius >= c.obstacle_radius_min);
        CHECK(ob.radius <= c.obstacle_radius_max);
        CHECK(ob.center.x() - ob.radius >= 0);
        CHECK(ob.center.y() + ob.radius <= c.area_height);
        for (const auto& u : s.uavs) CHECK((u.pos - ob.center).norm() > ob.radius + c.uav_radius);
      }
      for (const auto& u : s.uavs) {
        CHECK(u.pos.x() >= c.uav_radius);
        CHECK(u.pos.x() <= c.area_width - c.uav_radius);
      }
      for (const auto& p : s.pois) {
        CHECK(p.data_initial >= 0.0);
        CHECK(p.data_initial <= 1.0);
        CHECK(p.data_initial == p.data_remaining);
        CHECK(p.data_initial == quantize(p.data_initial));
      }
    }
  }

  TEST_CASE("no obstacles always succeeds") {
    WorldConfig c;
    c.num_obstacles = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      CHECK(generate_scenario(c, seed).obstacles.empty());
    }
  }

  TEST_CASE("impossible placement raises ScenarioInfeasible") {
    WorldConfig c;
    c.area_width = 2.0;
    c.area_height = 2.0;
    c.obstacle_radius_min = 0.9;
    c.obstacle_radius_max = 0.95;
    c.num_muavs = 4;
    c.num_cuavs = 4;
    c.num_obstacles = 5;
    CHECK_THROWS_AS(generate_scenario(c, 1), ScenarioInfeasible);
  }

  TEST_CASE("circle overlap examples") {
    CHECK(circle_overlap_area({0, 0}, {0, 0}, 1.0) == doctest::Approx(std::numbers::pi));
    CHECK(circle_overlap_area({0, 0}, {2, 0}, 1.0) == 0.0);
    CHECK(circle_overlap_area({0, 0}, {5, 0}, 1.0) == 0.0);
    CHECK(circle_overlap_area({0, 0}, {1, 0}, 1.0) == doctest::Approx(1.2284).epsilon(1e-4));
  }

  TEST_CASE("circle overlap matches numerical integration") {
    for (double r : {0.5, 1.0, 2.5}) {
      for (double f : {0.0, 0.1, 0.5, 1.0, 1.5, 1.9}) {
        const double d = f * r;
        CHECK(circle_overlap_area({0, 0}, {d, 0}, r) ==
              doctest::Approx(lens_by_integration(d, r)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("circle overlap is symmetric, bounded and non-increasing in distance") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 a(uniform(rng, -2, 2), uniform(rng, -2, 2));
      const Vec2 b(uniform(rng, -2, 2), uniform(rng, -2, 2));
      const double r = uniform(rng, 0.1, 2.0);
      const double ab = circle_overlap_area(a, b, r);
      CHECK(ab == circle_overlap_area(b, a, r));
      CHECK(ab >= 0.0);
      CHECK(ab <= std::numbers::pi * r * r + 1e-12);
    }
    double prev = circle_overlap_area({0, 0}, {0, 0}, 1.0);
    for (int i = 1; i <= 250; ++i) {
      const double cur = circle_overlap_area({0, 0}, {i * 0.01, 0}, 1.0);
      CHECK(cur <= prev);
      prev = cur;
    }
  }

  TEST_CASE("uniform draws stay in range") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
      const double x = uniform(rng, -1.0, 1.0);
      CHECK(x >= -1.0);
      CHECK(x < 1.0);
    }
  }
}
