// hgam: train, evaluate and inspect heterogeneous UAV fleets.

#include "hgam/config_io.hpp"
#include "hgam/errors.hpp"
#include "hgam/harness.hpp"
#include "hgam/training.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace hgam;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kCheckpointError = 3, kContract = 4 };

struct Options {
  std::string config;
  std::string train_config;
  std::uint64_t seed = 0;
  std::optional<int> episodes;
  std::string policy = "greedy";
  std::string checkpoint;
  std::string out;
  bool no_gat = false;
};

WorldConfig world_from(const Options& o) {
  return o.config.empty() ? WorldConfig{} : load_world_config(o.config);
}

fs::path prepare_out(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

Policy policy_from(const Options& o, const WorldConfig& world) {
  PolicyKind kind = parse_policy_kind(o.policy);
  if (o.no_gat && kind == PolicyKind::Hgam) kind = PolicyKind::HgamNoGat;
  if (kind == PolicyKind::Hgam || kind == PolicyKind::HgamNoGat) {
    if (o.checkpoint.empty()) throw ConfigError("policy " + o.policy + " needs --checkpoint");
    return Policy::load(kind, o.checkpoint, world);
  }
  return Policy::scripted(kind);
}

int cmd_train(const Options& o) {
  const WorldConfig world = world_from(o);
  TrainConfig train = o.train_config.empty() ? TrainConfig{} : load_train_config(o.train_config);
  if (o.episodes) train.max_episodes = *o.episodes;
  if (o.no_gat) train.use_gat = false;
  validate(train);
  const fs::path dir = prepare_out(o);
  const fs::path ckpt = o.checkpoint.empty() ? dir / "checkpoint.hgam" : fs::path(o.checkpoint);

  Trainer trainer(world, train, o.seed);
  const TrainingReport report = trainer.train(ckpt);
  std::ofstream csv(dir / "training_report.csv", std::ios::binary);
  if (!csv) throw ConfigError("cannot write training report in " + dir.string());
  write_training_report_csv(csv, report);
  std::fprintf(stderr, "trained %d episodes, %ld updates; checkpoint %s\n", trainer.episodes_done(),
               trainer.updates_done(), ckpt.string().c_str());
  return kOk;
}

int cmd_evaluate(const Options& o) {
  const WorldConfig world = world_from(o);
  const Policy policy = policy_from(o, world);
  const auto report = evaluate(policy, world, o.episodes.value_or(20), o.seed);
  const std::string text = evaluation_json(report).dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(prepare_out(o) / "evaluation.json", text);
  }
  return kOk;
}

int cmd_export(const Options& o) {
  const WorldConfig world = world_from(o);
  const Policy policy = policy_from(o, world);
  const fs::path dir = prepare_out(o);
  const auto report = evaluate(policy, world, o.episodes.value_or(1), o.seed, true);
  for (std::size_t i = 0; i < report.episodes.size(); ++i) {
    const auto& e = report.episodes[i];
    const std::string tag = "_" + std::to_string(e.seed);
    std::ofstream traj(dir / ("trajectory" + tag + ".csv"), std::ios::binary);
    std::ofstream pois(dir / ("pois" + tag + ".csv"), std::ios::binary);
    if (!traj || !pois) throw ConfigError("cannot write exports in " + dir.string());
    write_trajectory_csv(traj, e.trajectory);
    write_poi_csv(pois, e.final_pois);
    write_text(dir / ("rewards" + tag + ".json"), reward_components_json(e, world).dump(2) + "\n");
  }
  write_text(dir / "evaluation.json", evaluation_json(report).dump(2) + "\n");
  return kOk;
}

int cmd_inspect(const Options& o) {
  if (o.checkpoint.empty()) throw ConfigError("inspect-checkpoint needs --checkpoint");
  const auto tensors = read_checkpoint(o.checkpoint);
  std::size_t values = 0;
  for (const auto& t : tensors) {
    std::printf("%-48s %4ld x %-4ld\n", t.name.c_str(), static_cast<long>(t.value.rows()),
                static_cast<long>(t.value.cols()));
    values += static_cast<std::size_t>(t.value.size());
  }
  std::printf("%zu tensors, %zu values\n", tensors.size(), values);
  if (!o.config.empty()) {
    HgamModel::from_tensors(world_from(o), tensors);
    std::printf("compatible with %s\n", o.config.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous UAV data collection and charging: training and evaluation"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "World config JSON");
    sub->add_option("--seed", o.seed, "Base seed");
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* train = app.add_subcommand("train", "Train actors and critics");
  common(train);
  train->add_option("--train-config", o.train_config, "Training config JSON");
  train->add_option("--episodes", o.episodes, "Override max_episodes");
  train->add_option("--checkpoint", o.checkpoint, "Checkpoint output path");
  train->add_flag("--no-gat", o.no_gat, "Train without graph attention");

  auto* eval = app.add_subcommand("evaluate", "Noise-free evaluation of a policy");
  auto* exp = app.add_subcommand("export-traj", "Write trajectory and PoI CSVs");
  for (auto* sub : {eval, exp}) {
    common(sub);
    sub->add_option("--episodes", o.episodes, "Number of episodes");
    sub->add_option("--policy", o.policy, "hgam | hgam_no_gat | greedy | random");
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint for hgam policies");
    sub->add_flag("--no-gat", o.no_gat, "Zero the attention aggregate");
  }

  auto* inspect = app.add_subcommand("inspect-checkpoint", "List checkpoint tensors");
  inspect->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  inspect->add_option("--config", o.config, "Also check compatibility with this world config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train) return cmd_train(o);
    if (*eval) return cmd_evaluate(o);
    if (*exp) return cmd_export(o);
    if (*inspect) return cmd_inspect(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kCheckpointError;
  } catch (const ScenarioInfeasible& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kContract;
  } catch (const UndefinedMetric& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
