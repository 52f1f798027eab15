#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arisppo/errors.hpp"

namespace arisppo {

using json = nlohmann::json;

struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position3&, const Position3&) = default;
};

inline double distance(const Position3& p, const Position3& q) noexcept {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double dz = p.z - q.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double horizontal_distance(const Position3& p, const Position3& q) noexcept {
  return std::hypot(p.x - q.x, p.y - q.y);
}

// Unit conversions. Everything past the config boundary is linear.
inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) noexcept { return 10.0 * std::log10(ratio); }
inline double dbm_to_linear(double dbm) noexcept { return db_to_linear(dbm); }  // mW
inline double linear_to_dbm(double mw) noexcept { return linear_to_db(mw); }

/// Thermal noise floor of -174 dBm/Hz integrated over the bandwidth.
inline double thermal_noise_dbm(double bandwidth_hz) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

struct PathLossExponents {
  double direct = 3.0;        // BS -> center user
  double reflect = 2.2;       // BS -> RIS and RIS -> user
  double interference = 3.5;  // neighbouring BS -> center user

  friend bool operator==(const PathLossExponents&, const PathLossExponents&) = default;
};

/// How the obstacle keep-out test measures distance.
enum class ZoneMetric { full_3d, horizontal_2d };

/// Immutable experiment description: geometry, radio parameters and the
/// environment's reward/observation knobs.
struct Scenario {
  double area_half_extent = 75.0;
  std::vector<Position3> bs_positions{{-35.0, -35.0, 25.0}, {35.0, 35.0, 25.0}};
  std::vector<std::vector<Position3>> center_user_positions{{{-50.0, -20.0, 0.0}},
                                                            {{20.0, 50.0, 0.0}}};
  std::vector<Position3> edge_user_positions{{50.0, -55.0, 0.0}};
  std::vector<Position3> obstacle_positions{{18.0, 28.0, 30.0}, {-40.0, 10.0, 30.0}};
  Position3 uav_initial{0.0, 35.0, 50.0};
  double uav_altitude = 50.0;
  double uav_step = 3.0;
  double d_min = 10.0;
  int slots_per_episode = 250;
  int ris_elements = 16;
  double pathloss_ref_db = -30.0;
  PathLossExponents exponents{};
  double rician_k_db = 3.0;
  double tx_power_dbm = 20.0;
  double bandwidth_hz = 10e6;
  double noise_dbm = thermal_noise_dbm(10e6);
  double qos_min_center = 0.5;
  double qos_min_edge = 0.2;
  double penalty_viol = 7.0;
  ZoneMetric zone_metric = ZoneMetric::full_3d;
  bool normalize_observations = true;
  double rate_scale = 10.0;
  // Carried for reference only; no computation depends on them.
  double slot_duration_s = 1.0;
  double carrier_frequency_hz = 2.4e9;
  std::uint64_t seed = 1;

  [[nodiscard]] int num_cells() const noexcept { return static_cast<int>(bs_positions.size()); }
  [[nodiscard]] int num_edge_users() const noexcept {
    return static_cast<int>(edge_user_positions.size());
  }
  [[nodiscard]] int num_obstacles() const noexcept {
    return static_cast<int>(obstacle_positions.size());
  }
  [[nodiscard]] int num_center_users() const noexcept {
    int n = 0;
    for (const auto& cell : center_user_positions) n += static_cast<int>(cell.size());
    return n;
  }
  [[nodiscard]] int num_users() const noexcept { return num_center_users() + num_edge_users(); }

  [[nodiscard]] double pathloss_ref_linear() const noexcept { return db_to_linear(pathloss_ref_db); }
  [[nodiscard]] double rician_k_linear() const noexcept { return db_to_linear(rician_k_db); }
  [[nodiscard]] double tx_power_mw() const noexcept { return dbm_to_linear(tx_power_dbm); }
  [[nodiscard]] double noise_mw() const noexcept { return dbm_to_linear(noise_dbm); }
  /// Per-BS transmit SNR, P_t / sigma^2.
  [[nodiscard]] double transmit_snr() const noexcept { return tx_power_mw() / noise_mw(); }

  /// Observation length: 2 + O + I + sum(C_i) + F.
  [[nodiscard]] int observation_dim() const noexcept {
    return 2 + num_obstacles() + num_cells() + num_users();
  }
  /// Hybrid action length: 2 + K + I.
  [[nodiscard]] int action_dim() const noexcept { return 2 + ris_elements + num_cells(); }

  [[nodiscard]] bool inside_area(double x, double y) const noexcept {
    return std::abs(x) <= area_half_extent && std::abs(y) <= area_half_extent;
  }

  [[nodiscard]] double obstacle_distance(const Position3& uav, const Position3& obstacle) const noexcept {
    return zone_metric == ZoneMetric::full_3d ? distance(uav, obstacle)
                                              : horizontal_distance(uav, obstacle);
  }

  [[nodiscard]] bool inside_forbidden_zone(const Position3& uav) const noexcept {
    for (const auto& o : obstacle_positions) {
      if (obstacle_distance(uav, o) < d_min) return true;
    }
    return false;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

inline bool finite(const Position3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

inline void require(bool ok, const std::string& field, const std::string& constraint) {
  if (!ok) throw ConfigError("scenario." + field + ": " + constraint);
}

inline void check_position(const Position3& p, const std::string& field) {
  require(finite(p), field, "coordinates must be finite");
  require(p.z >= 0.0, field, "height z must be >= 0");
}

inline json to_json(const Position3& p) { return json::array({p.x, p.y, p.z}); }

inline Position3 position_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("scenario." + field + ": expected [x, y, z]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError("scenario." + field + ": coordinates must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline std::vector<Position3> positions_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("scenario." + field + ": expected a list of positions");
  std::vector<Position3> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(position_from_json(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_number(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  } else {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    }
  }
  return v.get<T>();
}

}  // namespace detail

/// Throws ConfigError naming the first violated constraint.
inline void validate(const Scenario& s) {
  using detail::require;
  require(std::isfinite(s.area_half_extent) && s.area_half_extent > 0.0, "area_half_extent", "must be > 0");
  require(s.bs_positions.size() >= 2, "bs_positions", "need at least 2 base stations");
  for (std::size_t i = 0; i < s.bs_positions.size(); ++i) {
    detail::check_position(s.bs_positions[i], "bs_positions[" + std::to_string(i) + "]");
  }
  require(s.center_user_positions.size() == s.bs_positions.size(), "center_user_positions",
          "need one list of center users per base station");
  for (std::size_t i = 0; i < s.center_user_positions.size(); ++i) {
    require(!s.center_user_positions[i].empty(), "center_user_positions[" + std::to_string(i) + "]",
            "each cell needs at least one center user");
    for (const auto& p : s.center_user_positions[i]) {
      detail::check_position(p, "center_user_positions[" + std::to_string(i) + "]");
    }
  }
  require(!s.edge_user_positions.empty(), "edge_user_positions", "need at least one edge user");
  for (const auto& p : s.edge_user_positions) detail::check_position(p, "edge_user_positions");
  for (const auto& p : s.obstacle_positions) detail::check_position(p, "obstacle_positions");

  require(std::isfinite(s.uav_altitude) && s.uav_altitude > 0.0, "uav_altitude", "must be > 0");
  require(std::isfinite(s.uav_step) && s.uav_step > 0.0, "uav_step", "must be > 0");
  require(std::isfinite(s.d_min) && s.d_min > 0.0, "d_min", "must be > 0");
  require(s.slots_per_episode >= 1, "slots_per_episode", "must be >= 1");
  require(s.ris_elements >= 1, "ris_elements", "must be >= 1");
  require(std::isfinite(s.pathloss_ref_db), "pathloss_ref_db", "must be finite");
  require(s.exponents.direct >= 2.0, "pathloss_exponents.direct", "must be >= 2");
  require(s.exponents.reflect >= 2.0, "pathloss_exponents.reflect", "must be >= 2");
  require(s.exponents.interference >= 2.0, "pathloss_exponents.interference", "must be >= 2");
  require(std::isfinite(s.rician_k_db), "rician_k_db", "must be finite");
  require(std::isfinite(s.tx_power_dbm), "tx_power_dbm", "must be finite");
  require(std::isfinite(s.bandwidth_hz) && s.bandwidth_hz > 0.0, "bandwidth_hz", "must be > 0");
  require(std::isfinite(s.noise_dbm), "noise_dbm", "must be finite");
  require(std::isfinite(s.qos_min_center) && s.qos_min_center >= 0.0, "qos_min_center", "must be >= 0");
  require(std::isfinite(s.qos_min_edge) && s.qos_min_edge >= 0.0, "qos_min_edge", "must be >= 0");
  require(std::isfinite(s.penalty_viol) && s.penalty_viol >= 0.0, "penalty_viol", "must be >= 0");
  require(std::isfinite(s.rate_scale) && s.rate_scale > 0.0, "rate_scale", "must be > 0");

  detail::check_position(s.uav_initial, "uav_initial");
  require(s.uav_initial.z == s.uav_altitude, "uav_initial", "height must equal uav_altitude");
  require(s.inside_area(s.uav_initial.x, s.uav_initial.y), "uav_initial", "must lie inside the area");
  require(!s.inside_forbidden_zone(s.uav_initial), "uav_initial",
          "must lie outside every obstacle's forbidden zone");
}

/// Resolved configuration as a JSON object (every key explicit).
inline json to_json(const Scenario& s) {
  json cells = json::array();
  for (const auto& cell : s.center_user_positions) {
    json c = json::array();
    for (const auto& p : cell) c.push_back(detail::to_json(p));
    cells.push_back(c);
  }
  auto list = [](const std::vector<Position3>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back(detail::to_json(p));
    return a;
  };
  return json{
      {"area_half_extent", s.area_half_extent},
      {"bs_positions", list(s.bs_positions)},
      {"center_user_positions", cells},
      {"edge_user_positions", list(s.edge_user_positions)},
      {"obstacle_positions", list(s.obstacle_positions)},
      {"uav_initial", detail::to_json(s.uav_initial)},
      {"uav_altitude", s.uav_altitude},
      {"uav_step", s.uav_step},
      {"d_min", s.d_min},
      {"slots_per_episode", s.slots_per_episode},
      {"ris_elements", s.ris_elements},
      {"pathloss_ref_db", s.pathloss_ref_db},
      {"pathloss_exponents",
       {{"direct", s.exponents.direct},
        {"reflect", s.exponents.reflect},
        {"interference", s.exponents.interference}}},
      {"rician_k_db", s.rician_k_db},
      {"tx_power_dbm", s.tx_power_dbm},
      {"bandwidth_hz", s.bandwidth_hz},
      {"noise_dbm", s.noise_dbm},
      {"qos_min_center", s.qos_min_center},
      {"qos_min_edge", s.qos_min_edge},
      {"penalty_viol", s.penalty_viol},
      {"forbidden_zone_metric", s.zone_metric == ZoneMetric::full_3d ? "3d" : "2d"},
      {"observation", {{"normalize", s.normalize_observations}, {"rate_scale", s.rate_scale}}},
      {"slot_duration_s", s.slot_duration_s},
      {"carrier_frequency_hz", s.carrier_frequency_hz},
      {"seed", s.seed},
  };
}

/// Builds a Scenario from a JSON object of overrides on top of the defaults.
/// Unknown keys are rejected. When bandwidth_hz is overridden without
/// noise_dbm, the noise floor follows the new bandwidth.
inline Scenario scenario_from_json(const json& doc) {
  using detail::get_number;
  static const std::set<std::string> known{
      "area_half_extent", "bs_positions", "center_user_positions", "edge_user_positions",
      "obstacle_positions", "uav_initial", "uav_altitude", "uav_step", "d_min",
      "slots_per_episode", "ris_elements", "pathloss_ref_db", "pathloss_exponents",
      "rician_k_db", "tx_power_dbm", "bandwidth_hz", "noise_dbm", "qos_min_center",
      "qos_min_edge", "penalty_viol", "forbidden_zone_metric", "observation",
      "slot_duration_s", "carrier_frequency_hz", "seed"};
  const std::string where = "scenario";
  detail::reject_unknown(doc, known, where);

  Scenario s;
  s.area_half_extent = get_number(doc, "area_half_extent", s.area_half_extent, where);
  if (doc.contains("bs_positions")) s.bs_positions = detail::positions_from_json(doc["bs_positions"], "bs_positions");
  if (doc.contains("center_user_positions")) {
    const auto& cells = doc["center_user_positions"];
    if (!cells.is_array()) throw ConfigError("scenario.center_user_positions: expected a list per cell");
    s.center_user_positions.clear();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      s.center_user_positions.push_back(
          detail::positions_from_json(cells[i], "center_user_positions[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("edge_user_positions")) {
    s.edge_user_positions = detail::positions_from_json(doc["edge_user_positions"], "edge_user_positions");
  }
  if (doc.contains("obstacle_positions")) {
    s.obstacle_positions = detail::positions_from_json(doc["obstacle_positions"], "obstacle_positions");
  }
  s.uav_altitude = get_number(doc, "uav_altitude", s.uav_altitude, where);
  if (doc.contains("uav_initial")) {
    s.uav_initial = detail::position_from_json(doc["uav_initial"], "uav_initial");
  } else {
    s.uav_initial.z = s.uav_altitude;
  }
  s.uav_step = get_number(doc, "uav_step", s.uav_step, where);
  s.d_min = get_number(doc, "d_min", s.d_min, where);
  s.slots_per_episode = get_number(doc, "slots_per_episode", s.slots_per_episode, where);
  s.ris_elements = get_number(doc, "ris_elements", s.ris_elements, where);
  s.pathloss_ref_db = get_number(doc, "pathloss_ref_db", s.pathloss_ref_db, where);
  if (doc.contains("pathloss_exponents")) {
    const auto& e = doc["pathloss_exponents"];
    const std::string ew = where + ".pathloss_exponents";
    detail::reject_unknown(e, {"direct", "reflect", "interference"}, ew);
    s.exponents.direct = get_number(e, "direct", s.exponents.direct, ew);
    s.exponents.reflect = get_number(e, "reflect", s.exponents.reflect, ew);
    s.exponents.interference = get_number(e, "interference", s.exponents.interference, ew);
  }
  s.rician_k_db = get_number(doc, "rician_k_db", s.rician_k_db, where);
  s.tx_power_dbm = get_number(doc, "tx_power_dbm", s.tx_power_dbm, where);
  s.bandwidth_hz = get_number(doc, "bandwidth_hz", s.bandwidth_hz, where);
  s.noise_dbm = doc.contains("noise_dbm") ? get_number(doc, "noise_dbm", s.noise_dbm, where)
                                          : thermal_noise_dbm(s.bandwidth_hz);
  s.qos_min_center = get_number(doc, "qos_min_center", s.qos_min_center, where);
  s.qos_min_edge = get_number(doc, "qos_min_edge", s.qos_min_edge, where);
  s.penalty_viol = get_number(doc, "penalty_viol", s.penalty_viol, where);
  if (doc.contains("forbidden_zone_metric")) {
    const auto& m = doc["forbidden_zone_metric"];
    if (m == "3d") {
      s.zone_metric = ZoneMetric::full_3d;
    } else if (m == "2d") {
      s.zone_metric = ZoneMetric::horizontal_2d;
    } else {
      throw ConfigError("scenario.forbidden_zone_metric: expected \"3d\" or \"2d\"");
    }
  }
  if (doc.contains("observation")) {
    const auto& o = doc["observation"];
    const std::string ow = where + ".observation";
    detail::reject_unknown(o, {"normalize", "rate_scale"}, ow);
    s.normalize_observations = get_number(o, "normalize", s.normalize_observations, ow);
    s.rate_scale = get_number(o, "rate_scale", s.rate_scale, ow);
  }
  s.slot_duration_s = get_number(doc, "slot_duration_s", s.slot_duration_s, where);
  s.carrier_frequency_hz = get_number(doc, "carrier_frequency_hz", s.carrier_frequency_hz, where);
  s.seed = get_number<std::uint64_t>(doc, "seed", s.seed, where);

  validate(s);
  return s;
}

/// Parses a JSON document. An empty or whitespace-only document yields the
/// defaults.
inline Scenario load_scenario(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return scenario_from_json(json::object());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: parse failure: ") + e.what());
  }
  return scenario_from_json(doc);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 64-bit FNV-1a; used to fingerprint resolved configs in output headers.
inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace arisppo
