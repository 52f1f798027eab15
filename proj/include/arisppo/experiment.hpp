#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "arisppo/baselines.hpp"
#include "arisppo/checkpoint.hpp"
#include "arisppo/moppo.hpp"

namespace arisppo {

// ---------------------------------------------------------------------------
// Experiment description

struct OracleSettings {
  int positions_per_side = 3;
  double extent = 50.0;
  int phase_levels = 4;
  std::vector<double> lambda_levels{0.6, 0.75, 0.9};
  bool per_bs_lambda = true;
  double budget = 1e7;
  int slots = 100;

  [[nodiscard]] OracleGrid grid() const {
    OracleGrid g;
    g.positions = square_positions(positions_per_side, extent);
    g.phase_levels = phase_levels;
    g.lambda_levels = lambda_levels;
    g.per_bs_lambda = per_bs_lambda;
    g.budget = budget;
    return g;
  }
};

inline json to_json(const OracleSettings& o) {
  return json{{"positions_per_side", o.positions_per_side},
              {"extent", o.extent},
              {"phase_levels", o.phase_levels},
              {"lambda_levels", o.lambda_levels},
              {"per_bs_lambda", o.per_bs_lambda},
              {"budget", o.budget},
              {"slots", o.slots}};
}

inline OracleSettings oracle_settings_from_json(const json& doc) {
  using detail::get_number;
  const std::string w = "oracle";
  detail::reject_unknown(
      doc, {"positions_per_side", "extent", "phase_levels", "lambda_levels", "per_bs_lambda", "budget", "slots"}, w);
  OracleSettings o;
  o.positions_per_side = get_number(doc, "positions_per_side", o.positions_per_side, w);
  o.extent = get_number(doc, "extent", o.extent, w);
  o.phase_levels = get_number(doc, "phase_levels", o.phase_levels, w);
  o.per_bs_lambda = get_number(doc, "per_bs_lambda", o.per_bs_lambda, w);
  o.budget = get_number(doc, "budget", o.budget, w);
  o.slots = get_number(doc, "slots", o.slots, w);
  if (doc.contains("lambda_levels")) {
    const auto& a = doc.at("lambda_levels");
    if (!a.is_array()) throw ConfigError("oracle.lambda_levels: expected an array");
    o.lambda_levels.clear();
    for (const auto& v : a) {
      if (!v.is_number()) throw ConfigError("oracle.lambda_levels: expected numbers");
      o.lambda_levels.push_back(v.get<double>());
    }
  }
  if (o.positions_per_side < 1) throw ConfigError("oracle.positions_per_side: must be >= 1");
  if (o.slots < 1) throw ConfigError("oracle.slots: must be >= 1");
  return o;
}

enum class Command { train, eval, sweep_power, sweep_elements, oracle, baseline };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::train: return "train";
    case Command::eval: return "eval";
    case Command::sweep_power: return "sweep-power";
    case Command::sweep_elements: return "sweep-elements";
    case Command::oracle: return "oracle";
    case Command::baseline: return "baseline";
  }
  return "?";
}

/// Everything one CLI invocation needs. `scenario`, `train`, `eval` and
/// `oracle` are fully resolved (defaults, then config file, then flags).
struct ExperimentSpec {
  Command command = Command::train;
  Scenario scenario;
  TrainConfig train;
  int eval_episodes = 10;
  bool deterministic_eval = true;
  int trajectory_every = 0;  // 0: no trajectory output
  OracleSettings oracle;
  std::vector<std::uint64_t> seeds{1};
  std::vector<Variant> policies{Variant::moppo};
  std::vector<double> powers_dbm;  // sweep-power
  std::vector<int> elements;       // sweep-elements
  std::string out_dir = "out";

  void validate() const {
    arisppo::validate(scenario);
    train.validate(scenario);
    if (seeds.empty()) throw ConfigError("seeds: must not be empty");
    if (policies.empty()) throw ConfigError("policies: must not be empty");
    if (eval_episodes < 1) throw ConfigError("eval.episodes: must be >= 1");
    if (trajectory_every < 0) throw ConfigError("trajectory_every: must be >= 0");
    if (command == Command::sweep_power && powers_dbm.empty()) throw ConfigError("sweep-power: power list is empty");
    if (command == Command::sweep_elements && elements.empty()) {
      throw ConfigError("sweep-elements: element list is empty");
    }
    for (int k : elements) {
      if (k < 1) throw ConfigError("sweep-elements: element counts must be >= 1");
    }
  }
};

/// Applies a config document {"scenario": {...}, "train": {...},
/// "eval": {...}, "oracle": {...}} on top of the current values.
inline void apply_config(ExperimentSpec& spec, const json& doc) {
  detail::reject_unknown(doc, {"scenario", "train", "eval", "oracle"}, "config");
  if (doc.contains("scenario")) spec.scenario = scenario_from_json(doc.at("scenario"));
  if (doc.contains("train")) spec.train = train_config_from_json(doc.at("train"));
  if (doc.contains("oracle")) spec.oracle = oracle_settings_from_json(doc.at("oracle"));
  if (doc.contains("eval")) {
    const json& e = doc.at("eval");
    detail::reject_unknown(e, {"episodes", "deterministic", "trajectory_every"}, "eval");
    spec.eval_episodes = detail::get_number(e, "episodes", spec.eval_episodes, "eval");
    spec.deterministic_eval = detail::get_number(e, "deterministic", spec.deterministic_eval, "eval");
    spec.trajectory_every = detail::get_number(e, "trajectory_every", spec.trajectory_every, "eval");
  }
}

inline void load_config_file(ExperimentSpec& spec, const std::string& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  apply_config(spec, doc);
}

/// The resolved configuration as one document; its hash goes into every
/// output header.
inline json resolved_config(const ExperimentSpec& spec) {
  return json{{"scenario", to_json(spec.scenario)},
              {"train", to_json(spec.train)},
              {"eval",
               {{"episodes", spec.eval_episodes},
                {"deterministic", spec.deterministic_eval},
                {"trajectory_every", spec.trajectory_every}}},
              {"oracle", to_json(spec.oracle)}};
}

inline std::string config_hash(const json& resolved) { return hex64(fnv1a64(resolved.dump())); }

// ---------------------------------------------------------------------------
// Output helpers

/// Shortest round-trip decimal form.
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

/// Comma-separated table with '#' header lines carrying provenance.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(const std::string& line) { comments_.push_back(line); }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("CsvTable: row width differs from header");
    rows_.push_back(cells);
  }

  [[nodiscard]] std::string str() const {
    std::ostringstream out;
    for (const auto& c : comments_) out << "# " << c << "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << "\n";
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

/// Header lines shared by every output file.
inline void stamp(CsvTable& t, const ExperimentSpec& spec, const json& resolved, const std::string& what,
                  std::optional<std::uint64_t> seed) {
  t.comment("arisppo " + what);
  std::string line = "command=" + to_string(spec.command) + " config_hash=" + config_hash(resolved);
  if (seed) line += " seed=" + std::to_string(*seed);
  t.comment(line);
  t.comment("config=" + resolved.dump());
}

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{"episode",         "cumulative_reward", "mean_sum_rate",
                                             "qos_violation_fraction", "safety_violations", "loss_discrete",
                                             "loss_continuous", "value_loss",       "entropy_discrete",
                                             "entropy_continuous", "final_x",       "final_y"};
  return cols;
}

inline std::vector<double> metrics_values(const EpisodeMetrics& m) {
  return {static_cast<double>(m.episode), m.cumulative_reward, m.mean_sum_rate, m.qos_violation_fraction,
          static_cast<double>(m.safety_violations), m.loss_discrete, m.loss_continuous, m.value_loss,
          m.entropy_discrete, m.entropy_continuous, m.final_x, m.final_y};
}

inline std::vector<std::string> fmt_row(const std::vector<double>& xs) {
  std::vector<std::string> out;
  for (double x : xs) out.push_back(fmt_num(x));
  return out;
}

/// Per-episode mean and std across seeds of every metric column.
inline CsvTable aggregate_metrics(const std::vector<std::vector<EpisodeMetrics>>& per_seed) {
  std::vector<std::string> cols{"episode", "seeds"};
  const auto& names = metrics_columns();
  for (std::size_t c = 1; c < names.size(); ++c) {
    cols.push_back(names[c] + "_mean");
    cols.push_back(names[c] + "_std");
  }
  CsvTable t(cols);
  std::size_t episodes = per_seed.empty() ? 0 : per_seed.front().size();
  for (const auto& log : per_seed) episodes = std::min(episodes, log.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    std::vector<std::string> row{std::to_string(e + 1), std::to_string(per_seed.size())};
    for (std::size_t c = 1; c < names.size(); ++c) {
      std::vector<double> xs;
      for (const auto& log : per_seed) xs.push_back(metrics_values(log[e])[c]);
      const auto ms = mean_std(xs);
      row.push_back(fmt_num(ms.mean));
      row.push_back(fmt_num(ms.std));
    }
    t.row(row);
  }
  return t;
}

namespace fs = std::filesystem;

inline fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw std::runtime_error("cannot create output directory '" + dir + "'");
  return p;
}

inline std::string tag(Variant v, std::uint64_t seed) { return to_string(v) + "_seed" + std::to_string(seed); }

inline EvalConfig eval_config(const ExperimentSpec& spec, std::uint64_t seed) {
  EvalConfig e;
  e.episodes = spec.eval_episodes;
  e.deterministic = spec.deterministic_eval;
  e.seed = seed;
  return e;
}

/// Mean trajectory as JSON lines, one record every `every` slots (slot 0 is
/// the start position).
inline std::string trajectory_jsonl(const EvalResult& r, int every, const std::string& hash, std::uint64_t seed,
                                    Variant v) {
  std::ostringstream out;
  out << json{{"config_hash", hash}, {"seed", seed}, {"policy", to_string(v)}, {"every", every}}.dump() << "\n";
  for (std::size_t t = 0; t < r.mean_trajectory.size(); t += static_cast<std::size_t>(every)) {
    out << json{{"slot", t}, {"x", r.mean_trajectory[t][0]}, {"y", r.mean_trajectory[t][1]}}.dump() << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Commands

struct CommandResult {
  std::vector<std::string> files;  // paths written, in order
};

namespace detail {

inline void write(CommandResult& r, const fs::path& p, const std::string& text) {
  write_text_file(p.string(), text);
  r.files.push_back(p.string());
}

/// Trains one policy per seed; writes metrics, checkpoint and the
/// aggregate. Returns the trained agents in seed order.
inline std::vector<Agent> train_all(const ExperimentSpec& spec, Variant v, const json& resolved,
                                    CommandResult& res) {
  const fs::path out = prepare_out_dir(spec.out_dir);
  const std::string hash = config_hash(resolved);
  std::vector<std::vector<EpisodeMetrics>> logs;
  std::vector<Agent> agents;
  for (std::uint64_t seed : spec.seeds) {
    auto trained = train_policy(spec.scenario, spec.train, v, seed);
    CsvTable t(metrics_columns());
    stamp(t, spec, resolved, "training metrics policy=" + to_string(v), seed);
    for (const auto& m : trained.log) t.row(fmt_row(metrics_values(m)));
    write(res, out / ("metrics_" + tag(v, seed) + ".csv"), t.str());
    save_checkpoint((out / ("checkpoint_" + tag(v, seed) + ".json")).string(),
                    checkpoint_to_json(trained.agent, &trained.adam, spec.train.episodes, hash));
    res.files.push_back((out / ("checkpoint_" + tag(v, seed) + ".json")).string());
    logs.push_back(std::move(trained.log));
    agents.push_back(std::move(trained.agent));
  }
  CsvTable agg = aggregate_metrics(logs);
  stamp(agg, spec, resolved, "training metrics aggregate policy=" + to_string(v), std::nullopt);
  write(res, out / ("metrics_" + to_string(v) + "_aggregate.csv"), agg.str());
  return agents;
}

inline void eval_all(const ExperimentSpec& spec, Variant v, const std::vector<Agent>& agents, const json& resolved,
                     CommandResult& res) {
  const fs::path out = prepare_out_dir(spec.out_dir);
  const std::string hash = config_hash(resolved);
  std::vector<double> rewards;
  std::vector<double> rates;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::uint64_t seed = spec.seeds[i];
    const auto r = evaluate(agents[i], spec.scenario, eval_config(spec, seed));
    CsvTable t({"episode", "cumulative_reward", "mean_sum_rate"});
    stamp(t, spec, resolved, "evaluation policy=" + to_string(v), seed);
    for (std::size_t e = 0; e < r.episodes.size(); ++e) {
      t.row({std::to_string(e + 1), fmt_num(r.episodes[e].cumulative_reward), fmt_num(r.episodes[e].mean_sum_rate)});
    }
    write(res, out / ("eval_" + tag(v, seed) + ".csv"), t.str());
    if (spec.trajectory_every > 0) {
      write(res, out / ("trajectory_" + tag(v, seed) + ".jsonl"),
            trajectory_jsonl(r, spec.trajectory_every, hash, seed, v));
    }
    rewards.push_back(r.mean_cumulative_reward);
    rates.push_back(r.mean_sum_rate);
  }
  const auto mr = mean_std(rewards);
  const auto ms = mean_std(rates);
  CsvTable agg({"policy", "seeds", "cumulative_reward_mean", "cumulative_reward_std", "sum_rate_mean", "sum_rate_std"});
  stamp(agg, spec, resolved, "evaluation aggregate", std::nullopt);
  agg.row({to_string(v), std::to_string(agents.size()), fmt_num(mr.mean), fmt_num(mr.std), fmt_num(ms.mean),
           fmt_num(ms.std)});
  write(res, out / ("eval_" + to_string(v) + "_aggregate.csv"), agg.str());
}

}  // namespace detail

/// Trains every requested policy for every seed.
inline CommandResult cmd_train(const ExperimentSpec& spec) {
  spec.validate();
  const json resolved = resolved_config(spec);
  CommandResult res;
  for (Variant v : spec.policies) (void)detail::train_all(spec, v, resolved, res);
  return res;
}

/// Evaluates checkpoints previously written by `train` into the same
/// output directory.
inline CommandResult cmd_eval(const ExperimentSpec& spec) {
  spec.validate();
  const json resolved = resolved_config(spec);
  CommandResult res;
  const fs::path out = prepare_out_dir(spec.out_dir);
  for (Variant v : spec.policies) {
    std::vector<Agent> agents;
    for (std::uint64_t seed : spec.seeds) {
      auto cp = load_checkpoint((out / ("checkpoint_" + tag(v, seed) + ".json")).string());
      check_compatible(cp.agent, spec.scenario);
      agents.push_back(std::move(cp.agent));
    }
    detail::eval_all(spec, v, agents, resolved, res);
  }
  return res;
}

/// Trains and evaluates each requested comparator.
inline CommandResult cmd_baseline(const ExperimentSpec& spec) {
  spec.validate();
  const json resolved = resolved_config(spec);
  CommandResult res;
  for (Variant v : spec.policies) {
    const auto agents = detail::train_all(spec, v, resolved, res);
    detail::eval_all(spec, v, agents, resolved, res);
  }
  return res;
}

struct SweepPoint {
  double value = 0.0;  // P_t in dBm or K
  Variant policy = Variant::moppo;
  std::uint64_t seed = 0;
  double mean_sum_rate = 0.0;
  double mean_cumulative_reward = 0.0;
};

namespace detail {

/// Retrains per sweep point (the action space changes with K, and the
/// optimal policy changes with P_t).
template <typename Apply>
std::vector<SweepPoint> sweep(const ExperimentSpec& spec, const std::vector<double>& values, Apply apply) {
  std::vector<SweepPoint> pts;
  for (double value : values) {
    Scenario s = spec.scenario;
    apply(s, value);
    validate(s);
    for (Variant v : spec.policies) {
      for (std::uint64_t seed : spec.seeds) {
        const auto trained = train_policy(s, spec.train, v, seed);
        const auto r = evaluate(trained.agent, s, eval_config(spec, seed));
        pts.push_back({value, v, seed, r.mean_sum_rate, r.mean_cumulative_reward});
      }
    }
  }
  return pts;
}

inline void write_sweep(const ExperimentSpec& spec, const json& resolved, const std::string& name,
                        const std::string& column, const std::vector<SweepPoint>& pts,
                        const std::vector<std::string>& extra_cols,
                        const std::function<std::vector<std::string>(double)>& extra, CommandResult& res) {
  const fs::path out = prepare_out_dir(spec.out_dir);
  CsvTable per_seed({column, "policy", "seed", "mean_sum_rate", "mean_cumulative_reward"});
  stamp(per_seed, spec, resolved, name + " per seed", std::nullopt);
  for (const auto& p : pts) {
    per_seed.row({fmt_num(p.value), to_string(p.policy), std::to_string(p.seed), fmt_num(p.mean_sum_rate),
                  fmt_num(p.mean_cumulative_reward)});
  }
  write(res, out / (name + "_seeds.csv"), per_seed.str());

  std::vector<std::string> cols{column, "policy", "seeds", "sum_rate_mean", "sum_rate_std"};
  cols.insert(cols.end(), extra_cols.begin(), extra_cols.end());
  CsvTable table(cols);
  stamp(table, spec, resolved, name, std::nullopt);
  std::vector<double> values;
  for (const auto& p : pts) {
    if (std::find(values.begin(), values.end(), p.value) == values.end()) values.push_back(p.value);
  }
  for (double value : values) {
    const auto ex = extra ? extra(value) : std::vector<std::string>{};
    for (Variant v : spec.policies) {
      std::vector<double> xs;
      for (const auto& p : pts) {
        if (p.value == value && p.policy == v) xs.push_back(p.mean_sum_rate);
      }
      const auto ms = mean_std(xs);
      std::vector<std::string> row{fmt_num(value), to_string(v), std::to_string(xs.size()), fmt_num(ms.mean),
                                   fmt_num(ms.std)};
      row.insert(row.end(), ex.begin(), ex.end());
      table.row(row);
    }
  }
  write(res, out / (name + ".csv"), table.str());
}

}  // namespace detail

inline CommandResult cmd_sweep_power(const ExperimentSpec& spec) {
  spec.validate();
  const json resolved = resolved_config(spec);
  CommandResult res;
  const auto pts =
      detail::sweep(spec, spec.powers_dbm, [](Scenario& s, double p) { s.tx_power_dbm = p; });
  detail::write_sweep(spec, resolved, "sweep_power", "power_dbm", pts, {}, {}, res);
  return res;
}

/// Sum rate per K. The oracle columns hold the mean grid maximum over
/// `oracle.slots` fading draws when the grid fits the budget, else "na".
inline CommandResult cmd_sweep_elements(const ExperimentSpec& spec) {
  spec.validate();
  const json resolved = resolved_config(spec);
  CommandResult res;
  std::vector<double> ks(spec.elements.begin(), spec.elements.end());
  const auto pts =
      detail::sweep(spec, ks, [](Scenario& s, double k) { s.ris_elements = static_cast<int>(k); });
  auto oracle_cols = [&](double k) -> std::vector<std::string> {
    Scenario s = spec.scenario;
    s.ris_elements = static_cast<int>(k);
    const OracleGrid g = spec.oracle.grid();
    if (g.combinations(s.ris_elements, s.num_cells()) > g.budget) return {"na"};
    const auto run = run_oracle(s, g, spec.oracle.slots, spec.seeds.front());
    return {fmt_num(run.mean_max_sum_rate)};
  };
  detail::write_sweep(spec, resolved, "sweep_elements", "ris_elements", pts, {"oracle_sum_rate"}, oracle_cols, res);
  return res;
}

/// Per-slot oracle values and argmax controls, one file per seed.
inline CommandResult cmd_oracle(const ExperimentSpec& spec) {
  spec.validate();
  const json resolved = resolved_config(spec);
  CommandResult res;
  const fs::path out = prepare_out_dir(spec.out_dir);
  const OracleGrid g = spec.oracle.grid();
  std::vector<double> means;
  for (std::uint64_t seed : spec.seeds) {
    const auto run = run_oracle(spec.scenario, g, spec.oracle.slots, seed);
    CsvTable t({"slot", "max_sum_rate", "x", "y", "phase_levels", "lambda", "feasible", "max_feasible_sum_rate",
                "aligned_bound"});
    stamp(t, spec, resolved, "oracle", seed);
    auto join = [](const auto& xs) {
      std::string s;
      for (const auto& x : xs) {
        if (!s.empty()) s += ' ';
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>) {
          s += fmt_num(x);
        } else {
          s += std::to_string(x);
        }
      }
      return s;
    };
    for (std::size_t i = 0; i < run.slots.size(); ++i) {
      const auto& o = run.slots[i];
      const auto& pos = g.positions[static_cast<std::size_t>(o.argmax.position)];
      t.row({std::to_string(i + 1), fmt_num(o.max_sum_rate), fmt_num(pos[0]), fmt_num(pos[1]),
             join(o.argmax.phase_levels), join(o.argmax.lambda), o.feasible ? "1" : "0",
             fmt_num(o.max_feasible_sum_rate), fmt_num(o.aligned_bound)});
    }
    detail::write(res, out / ("oracle_seed" + std::to_string(seed) + ".csv"), t.str());
    means.push_back(run.mean_max_sum_rate);
  }
  const auto ms = mean_std(means);
  CsvTable agg({"seeds", "max_sum_rate_mean", "max_sum_rate_std"});
  stamp(agg, spec, resolved, "oracle aggregate", std::nullopt);
  agg.row({std::to_string(means.size()), fmt_num(ms.mean), fmt_num(ms.std)});
  detail::write(res, out / "oracle_aggregate.csv", agg.str());
  return res;
}

inline CommandResult run_command(const ExperimentSpec& spec) {
  switch (spec.command) {
    case Command::train: return cmd_train(spec);
    case Command::eval: return cmd_eval(spec);
    case Command::baseline: return cmd_baseline(spec);
    case Command::sweep_power: return cmd_sweep_power(spec);
    case Command::sweep_elements: return cmd_sweep_elements(spec);
    case Command::oracle: return cmd_oracle(spec);
  }
  throw ConfigError("unknown command");
}

}  // namespace arisppo
