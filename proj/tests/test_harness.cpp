#include <doctest.h>

#include "fixtures.hpp"
#include "hgam/config_io.hpp"
#include "hgam/errors.hpp"
#include "hgam/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hgam;
using hgam::testing::make_state;
using hgam::testing::open_config;

namespace {

WorldConfig mini_world() {
  WorldConfig c;
  c.area_width = 8.0;
  c.area_height = 8.0;
  c.num_pois = 20;
  c.num_muavs = 1;
  c.num_cuavs = 1;
  c.max_steps = 200;
  return c;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("greedy MUAV heads for the nearest PoI") {
    WorldConfig c = open_config(1, 0);
    auto s = make_state(c, {{1, 1}}, {{{4, 5}, 1.0}, {{9, 9}, 1.0}});
    const Action a = greedy_policy(s, 0);
    CHECK(a.ax == doctest::Approx(0.6));
    CHECK(a.ay == doctest::Approx(0.8));

    s.pois[0].data_remaining = 0.0;
    const Action b = greedy_policy(s, 0);
    CHECK(b.ax == doctest::Approx(std::sqrt(0.5)));
    CHECK(b.ay == doctest::Approx(std::sqrt(0.5)));

    s.pois[1].data_remaining = 0.0;
    CHECK(greedy_policy(s, 0) == Action{});
  }

  TEST_CASE("greedy MUAV hovers while a PoI is in range") {
    WorldConfig c = open_config(1, 0);
    auto s = make_state(c, {{1, 1}}, {{{1.5, 1.5}, 1.0}, {{9, 9}, 1.0}});
    CHECK(greedy_policy(s, 0) == Action{});
  }

  TEST_CASE("greedy CUAV serves the MUAV with least energy") {
    WorldConfig c = open_config(2, 1);
    auto s = make_state(c, {{2, 5}, {8, 5}, {5, 5}});
    s.uavs[1].energy_remaining = 10.0;
    const Action a = greedy_policy(s, 2);
    CHECK(a.ax == doctest::Approx(1.0));
    CHECK(a.ay == doctest::Approx(0.0));

    s.uavs[2].pos = {6.5, 5};
    CHECK(greedy_policy(s, 2) == Action{});

    s.uavs[1].energy_remaining = s.uavs[0].energy_remaining;
    const Action tie = greedy_policy(s, 2);
    CHECK(tie.ax == doctest::Approx(-1.0));
  }

  TEST_CASE("random policy stays in range and is seeded") {
    Rng a(5), b(5);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const Action x = random_policy(a);
      CHECK(x == random_policy(b));
      CHECK(std::abs(x.ax) <= 1.0);
      CHECK(std::abs(x.ay) <= 1.0);
      sum += x.ax + x.ay;
    }
    CHECK(std::abs(sum / 40000) < 0.02);
  }

  TEST_CASE("scripted policies never emit out-of-range actions") {
    const auto world = mini_world();
    WorldState s = generate_scenario(world, 4);
    Rng rng(1);
    while (!s.done) {
      const auto acts = policy_actions(Policy::scripted(PolicyKind::Greedy), s, rng);
      for (const auto& a : acts) {
        CHECK(std::abs(a.ax) <= 1.0);
        CHECK(std::abs(a.ay) <= 1.0);
      }
      step(s, acts);
    }
  }

  TEST_CASE("policy names") {
    CHECK(parse_policy_kind("hgam") == PolicyKind::Hgam);
    CHECK(parse_policy_kind("hgam_no_gat") == PolicyKind::HgamNoGat);
    CHECK(parse_policy_kind("greedy") == PolicyKind::Greedy);
    CHECK(parse_policy_kind("random") == PolicyKind::Random);
    CHECK_THROWS_AS(parse_policy_kind("maac"), ConfigError);
    for (auto k : {PolicyKind::Hgam, PolicyKind::HgamNoGat, PolicyKind::Greedy, PolicyKind::Random}) {
      CHECK(parse_policy_kind(policy_name(k)) == k);
    }
    CHECK_THROWS_AS(Policy::scripted(PolicyKind::Hgam), ConfigError);
  }

  TEST_CASE("evaluation report") {
    const auto world = mini_world();
    const auto r = evaluate(Policy::scripted(PolicyKind::Greedy), world, 20, 100);
    REQUIRE(r.episodes.size() == 20);
    const auto j = evaluation_json(r);
    CHECK(j["policy"] == "greedy");
    CHECK(j["episodes"].size() == 20);
    CHECK(j["episodes"][3]["seed"] == 103);

    double sum = 0.0;
    for (const auto& e : r.episodes) sum += e.metrics.C;
    const double mean = sum / 20;
    double sq = 0.0;
    for (const auto& e : r.episodes) sq += (e.metrics.C - mean) * (e.metrics.C - mean);
    CHECK(j["mean"]["C"].get<double>() == doctest::Approx(mean).epsilon(1e-14));
    CHECK(j["std"]["C"].get<double>() == doctest::Approx(std::sqrt(sq / 20)).epsilon(1e-12));

    const auto again = evaluate(Policy::scripted(PolicyKind::Greedy), world, 20, 100);
    CHECK(evaluation_json(again).dump() == j.dump());
    CHECK_THROWS_AS(evaluate(Policy::scripted(PolicyKind::Random), world, 0, 1), ContractViolation);
  }

  TEST_CASE("random evaluation is reproducible per seed") {
    const auto world = mini_world();
    const auto p = Policy::scripted(PolicyKind::Random);
    CHECK(evaluation_json(evaluate(p, world, 3, 9)).dump() ==
          evaluation_json(evaluate(p, world, 3, 9)).dump());
  }

  TEST_CASE("recorded trajectories") {
    const auto world = mini_world();
    const auto e = run_episode(Policy::scripted(PolicyKind::Greedy), world, 5, true);
    const int steps = e.metrics.episode_len;
    CHECK(e.trajectory.size() == static_cast<std::size_t>((steps + 1) * world.num_uavs()));
    CHECK(e.trajectory.front().t == 0);
    CHECK(e.trajectory.back().t == steps);
    CHECK(e.final_pois.size() == 20);
    REQUIRE(e.reward_totals.size() == 2);

    double collected = 0.0;
    for (const auto& row : e.trajectory) collected += row.collected;
    double drained = 0.0;
    for (const auto& p : e.final_pois) drained += p.data_initial - p.data_remaining;
    CHECK(collected == drained);

    std::ostringstream traj, pois;
    write_trajectory_csv(traj, e.trajectory);
    write_poi_csv(pois, e.final_pois);
    CHECK(first_line(traj.str()) == "t,uav_id,kind,x,y,Er,Ec,Ed,collected,charged_to,reward");
    CHECK(first_line(pois.str()) == "poi_id,x,y,m0,m_final");

    const auto rj = reward_components_json(e, world);
    CHECK(rj["uavs"][1]["kind"] == "cuav");
  }

  TEST_CASE("checkpoint policies refuse another world") {
    Rng rng(1);
    TrainConfig t;
    t.embed_dim = 4;
    t.head_hidden = 4;
    auto model = HgamModel::create(mini_world(), t, rng);
    const auto p = Policy::from_model(model);
    WorldConfig other = mini_world();
    other.num_muavs = 2;
    CHECK_THROWS_AS(run_episode(p, other, 1), CheckpointError);
    CHECK_NOTHROW(run_episode(p, mini_world(), 1));
    CHECK_FALSE(Policy::from_model(model, true).model->use_gat());
    CHECK_THROWS_AS(Policy::load(PolicyKind::Hgam, "/nonexistent/x.hgam", mini_world()),
                    CheckpointError);
  }

  TEST_CASE("config files") {
    WorldConfig w = mini_world();
    w.global_view = true;
    CHECK(world_config_from_json(to_json(w)) == w);
    TrainConfig t;
    t.batch_size = 7;
    t.share_actor_per_type = true;
    CHECK(train_config_from_json(to_json(t)) == t);

    CHECK(world_config_from_json(nlohmann::json::object()) == WorldConfig{});
    CHECK(world_config_from_json({{"num_pois", 5}}).num_pois == 5);
    CHECK_THROWS_AS(world_config_from_json({{"num_poi", 5}}), ConfigError);
    CHECK_THROWS_AS(world_config_from_json({{"num_pois", "five"}}), ConfigError);
    CHECK_THROWS_AS(world_config_from_json({{"num_pois", -1}}), ConfigError);
    CHECK_THROWS_AS(train_config_from_json({{"gamma", 2.0}}), ConfigError);

    const auto dir = std::filesystem::temp_directory_path() / "hgam_harness_tests";
    std::filesystem::create_directories(dir);
    { std::ofstream(dir / "bad.json") << "{not json"; }
    CHECK_THROWS_AS(load_world_config(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_train_config(dir / "absent.json"), ConfigError);
    { std::ofstream(dir / "w.json") << to_json(w).dump(); }
    CHECK(load_world_config(dir / "w.json") == w);
  }
}
