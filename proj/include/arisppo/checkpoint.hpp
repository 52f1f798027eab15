#pragma once

#include <array>
#include <fstream>
#include <string>

#include "arisppo/moppo.hpp"

namespace arisppo {

/// Checkpoint layout (JSON object, keys sorted on output):
///
///   format          "arisppo-checkpoint"
///   version         1
///   config_hash     16 hex digits, fnv1a64 of the resolved config document
///   variant         "moppo" | "hppo" | "random-ps" | "oma"
///   episodes_done   training episodes completed
///   network         {obs_dim, hidden, trunk_layers, critic_layers,
///                    discrete_dim, continuous_dim, shared_critic}
///   layout          {learn_maneuver, learn_phases, ris_elements, cells}
///   groups          {trunk, discrete_head, continuous_head, log_std, critic}
///                   each a flat array of parameters (see Mlp for order)
///   adam            same keys, each {step, m, v}; absent for eval-only dumps
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Agent agent;
  std::array<AdamState, ActorCritic::kNumGroups> adam{};
  bool has_adam = false;
  int episodes_done = 0;
  std::string config_hash;
};

namespace detail {

inline json vector_to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline VectorXd vector_from_json(const json& a, Eigen::Index expected, const std::string& field) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != expected) {
    throw ShapeError("checkpoint." + field + ": expected " + std::to_string(expected) + " values");
  }
  VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace detail

inline json checkpoint_to_json(const Agent& agent, const std::array<AdamState, ActorCritic::kNumGroups>* adam,
                               int episodes_done, const std::string& config_hash) {
  const auto& net = agent.net();
  const auto& c = net.config();
  const auto& l = agent.layout();
  json doc;
  doc["format"] = "arisppo-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["config_hash"] = config_hash;
  doc["variant"] = to_string(agent.variant());
  doc["episodes_done"] = episodes_done;
  doc["network"] = {{"obs_dim", c.obs_dim},           {"hidden", c.hidden},
                    {"trunk_layers", c.trunk_layers}, {"critic_layers", c.critic_layers},
                    {"discrete_dim", c.discrete_dim}, {"continuous_dim", c.continuous_dim},
                    {"shared_critic", c.shared_critic}};
  doc["layout"] = {{"learn_maneuver", l.learn_maneuver},
                   {"learn_phases", l.learn_phases},
                   {"ris_elements", l.ris_elements},
                   {"cells", l.cells}};
  for (int g = 0; g < ActorCritic::kNumGroups; ++g) {
    doc["groups"][ActorCritic::group_name(g)] = detail::vector_to_json(net.group(g));
    if (adam) {
      const auto& st = (*adam)[static_cast<std::size_t>(g)];
      doc["adam"][ActorCritic::group_name(g)] = {
          {"step", st.step}, {"m", detail::vector_to_json(st.m)}, {"v", detail::vector_to_json(st.v)}};
    }
  }
  return doc;
}

inline json checkpoint_to_json(const Trainer& t, const std::string& config_hash) {
  return checkpoint_to_json(t.agent(), &t.adam(), t.episodes_done(), config_hash);
}

/// Rebuilds an agent (and optimizer state when present). Every group is
/// checked against the sizes implied by the stored network description.
inline Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "arisppo-checkpoint") throw ConfigError("checkpoint: not an arisppo checkpoint");
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw ConfigError("checkpoint: unsupported version " + doc.at("version").dump());
    }
    const json& n = doc.at("network");
    ActorCriticConfig c;
    c.obs_dim = n.at("obs_dim").get<int>();
    c.hidden = n.at("hidden").get<int>();
    c.trunk_layers = n.at("trunk_layers").get<int>();
    c.critic_layers = n.at("critic_layers").get<int>();
    c.discrete_dim = n.at("discrete_dim").get<int>();
    c.continuous_dim = n.at("continuous_dim").get<int>();
    c.shared_critic = n.at("shared_critic").get<bool>();
    const json& lj = doc.at("layout");
    ActionLayout layout{lj.at("learn_maneuver").get<bool>(), lj.at("learn_phases").get<bool>(),
                        lj.at("ris_elements").get<int>(), lj.at("cells").get<int>()};
    if (layout.discrete_dim() != c.discrete_dim || layout.continuous_dim() != c.continuous_dim) {
      throw ShapeError("checkpoint: action layout does not match the network head sizes");
    }

    Rng unused(0);
    ActorCritic net(c, unused);
    Checkpoint cp;
    cp.has_adam = doc.contains("adam");
    for (int g = 0; g < ActorCritic::kNumGroups; ++g) {
      const std::string name = ActorCritic::group_name(g);
      const Eigen::Index size = net.group(g).size();
      net.mutable_group(g) = detail::vector_from_json(doc.at("groups").at(name), size, "groups." + name);
      if (cp.has_adam) {
        const json& a = doc.at("adam").at(name);
        auto& st = cp.adam[static_cast<std::size_t>(g)];
        st = AdamState(size, AdamConfig{});
        st.step = a.at("step").get<long>();
        st.m = detail::vector_from_json(a.at("m"), size, "adam." + name + ".m");
        st.v = detail::vector_from_json(a.at("v"), size, "adam." + name + ".v");
      }
    }
    cp.agent = Agent(variant_from_string(doc.at("variant").get<std::string>()), layout, std::move(net));
    cp.episodes_done = doc.at("episodes_done").get<int>();
    cp.config_hash = doc.at("config_hash").get<std::string>();
    return cp;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed document: ") + e.what());
  }
}

/// Throws ShapeError unless the agent fits the scenario's dimensions.
inline void check_compatible(const Agent& agent, const Scenario& s) {
  if (agent.net().config().obs_dim != s.observation_dim() || agent.layout().ris_elements != s.ris_elements ||
      agent.layout().cells != s.num_cells()) {
    throw ShapeError("checkpoint: network dimensions (obs " + std::to_string(agent.net().config().obs_dim) + ", K " +
                     std::to_string(agent.layout().ris_elements) + ") do not match the scenario (obs " +
                     std::to_string(s.observation_dim()) + ", K " + std::to_string(s.ris_elements) + ")");
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

inline void save_checkpoint(const std::string& path, const json& doc) { write_text_file(path, doc.dump(1) + "\n"); }

inline Checkpoint load_checkpoint(const std::string& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint " + path + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace arisppo
