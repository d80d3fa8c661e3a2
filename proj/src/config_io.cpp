#include "hgam/config_io.hpp"

#include "hgam/errors.hpp"

#include <fstream>
#include <map>
#include <variant>

namespace hgam {

namespace {

using FieldRef = std::variant<double*, int*, bool*>;
using FieldMap = std::map<std::string, FieldRef>;

FieldMap fields(WorldConfig& c) {
  return {{"area_width", &c.area_width},
          {"area_height", &c.area_height},
          {"num_muavs", &c.num_muavs},
          {"num_cuavs", &c.num_cuavs},
          {"num_pois", &c.num_pois},
          {"num_obstacles", &c.num_obstacles},
          {"obstacle_radius_min", &c.obstacle_radius_min},
          {"obstacle_radius_max", &c.obstacle_radius_max},
          {"sense_radius", &c.sense_radius},
          {"charge_radius", &c.charge_radius},
          {"view_range", &c.view_range},
          {"uav_radius", &c.uav_radius},
          {"poi_radius", &c.poi_radius},
          {"step_length", &c.step_length},
          {"collect_rate", &c.collect_rate},
          {"max_steps", &c.max_steps},
          {"initial_energy", &c.initial_energy},
          {"charge_per_step", &c.charge_per_step},
          {"e_max", &c.e_max},
          {"beta", &c.beta},
          {"kappa", &c.kappa},
          {"num_lasers", &c.num_lasers},
          {"laser_warn_dist", &c.laser_warn_dist},
          {"low_battery_frac", &c.low_battery_frac},
          {"w_c", &c.w_c},
          {"w_l", &c.w_l},
          {"w_e", &c.w_e},
          {"w_f", &c.w_f},
          {"w_d", &c.w_d},
          {"discovery_bonus", &c.discovery_bonus},
          {"rotation_penalty", &c.rotation_penalty},
          {"plow", &c.plow},
          {"collision_penalty", &c.collision_penalty},
          {"laser_penalty", &c.laser_penalty},
          {"dilemma_window", &c.dilemma_window},
          {"global_view", &c.global_view},
          {"comm_radius", &c.comm_radius}};
}

FieldMap fields(TrainConfig& c) {
  return {{"gamma", &c.gamma},
          {"tau", &c.tau},
          {"n_step", &c.n_step},
          {"f_soft", &c.f_soft},
          {"e_min", &c.e_min},
          {"buffer_capacity", &c.buffer_capacity},
          {"batch_size", &c.batch_size},
          {"per_alpha", &c.per_alpha},
          {"lr_critic", &c.lr_critic},
          {"lr_actor", &c.lr_actor},
          {"noise_sigma0", &c.noise_sigma0},
          {"noise_decay", &c.noise_decay},
          {"noise_min", &c.noise_min},
          {"max_episodes", &c.max_episodes},
          {"embed_dim", &c.embed_dim},
          {"head_hidden", &c.head_hidden},
          {"use_gat", &c.use_gat},
          {"share_actor_per_type", &c.share_actor_per_type},
          {"checkpoint_every", &c.checkpoint_every}};
}

nlohmann::json dump(const FieldMap& map) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, ref] : map) std::visit([&](auto* p) { j[name] = *p; }, ref);
  return j;
}

void assign(const FieldMap& map, const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = map.find(key);
    if (it == map.end()) throw ConfigError(std::string("unknown ") + what + " key '" + key + "'");
    const auto bad = [&](const char* type) {
      throw ConfigError(std::string(what) + " key '" + key + "' must be " + type);
    };
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, bool>) {
            if (!value.is_boolean()) bad("a boolean");
            *p = value.get<bool>();
          } else if constexpr (std::is_same_v<T, int>) {
            if (!value.is_number_integer()) bad("an integer");
            *p = value.get<int>();
          } else {
            if (!value.is_number()) bad("a number");
            *p = value.get<double>();
          }
        },
        it->second);
  }
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const WorldConfig& config) {
  WorldConfig c = config;
  return dump(fields(c));
}

nlohmann::json to_json(const TrainConfig& config) {
  TrainConfig c = config;
  return dump(fields(c));
}

WorldConfig world_config_from_json(const nlohmann::json& j) {
  WorldConfig c;
  assign(fields(c), j, "world config");
  validate(c);
  return c;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  assign(fields(c), j, "train config");
  validate(c);
  return c;
}

WorldConfig load_world_config(const std::filesystem::path& path) {
  return world_config_from_json(read_json(path));
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  return train_config_from_json(read_json(path));
}

}  // namespace hgam
