#include "prefgame/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace prefgame {

namespace {

template <class T>
T field(const json& j, const char* key, const char* context) {
  if (!j.is_object() || !j.contains(key))
    throw std::invalid_argument(std::string(context) + ": missing field \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(context) + ": field \"" + key + "\" has the wrong type (" + e.what() + ")");
  }
}

json reward_json(const RewardVector& r) { return r.values; }

}  // namespace

json game_to_json(const PreferenceGame& game) { return {{"n", game.size()}, {"p", game.rows()}}; }

PreferenceGame game_from_json(const json& j) {
  const auto n = field<std::size_t>(j, "n", "game");
  auto p = field<std::vector<std::vector<double>>>(j, "p", "game");
  if (p.size() != n) throw std::invalid_argument("game: \"n\" does not match the number of rows in \"p\"");
  return validate_game(p);
}

json gen_spec_to_json(const GameGenSpec& spec) {
  json params = json::object();
  if (spec.kind == GameKind::bradley_terry) params["rewards"] = spec.rewards;
  if (spec.kind == GameKind::cycle) params["margin"] = spec.margin;
  return {{"kind", to_string(spec.kind)}, {"n", spec.n}, {"seed", spec.seed}, {"params", params}};
}

GameGenSpec gen_spec_from_json(const json& j) {
  GameGenSpec spec;
  spec.kind = game_kind_from_string(field<std::string>(j, "kind", "game spec"));
  spec.n = field<std::size_t>(j, "n", "game spec");
  spec.seed = j.value("seed", std::uint64_t{0});
  const json params = j.value("params", json::object());
  if (spec.kind == GameKind::bradley_terry) spec.rewards = field<std::vector<double>>(params, "rewards", "game spec params");
  if (spec.kind == GameKind::cycle) spec.margin = params.value("margin", 0.5);
  return spec;
}

json fit_config_to_json(const FitConfig& fit) {
  return {{"method", to_string(fit.method)},
          {"step_size", fit.step_size},
          {"max_iterations", fit.max_iterations},
          {"gradient_tolerance", fit.gradient_tolerance}};
}

FitConfig fit_config_from_json(const json& j) {
  FitConfig fit;
  if (j.contains("method")) fit.method = fit_method_from_string(j.at("method").get<std::string>());
  fit.step_size = j.value("step_size", fit.step_size);
  fit.max_iterations = j.value("max_iterations", fit.max_iterations);
  fit.gradient_tolerance = j.value("gradient_tolerance", fit.gradient_tolerance);
  fit.validate();
  return fit;
}

json solver_config_to_json(const SolverConfig& config) {
  json j{{"algorithm", to_string(config.algorithm)}, {"T", config.iterations}};
  j["eta"] = config.theorem_eta ? json("theorem") : json(config.eta);
  if (config.tau) j["tau"] = *config.tau;
  if (config.ref_policy) j["ref_policy"] = config.ref_policy->vec();
  if (config.initial_policy) j["initial_policy"] = config.initial_policy->vec();
  j["inner_opt"] = fit_config_to_json(config.inner_opt);
  return j;
}

SolverConfig solver_config_from_json(const json& j) {
  SolverConfig config;
  config.algorithm = algorithm_from_string(field<std::string>(j, "algorithm", "solver config"));
  config.iterations = field<std::size_t>(j, "T", "solver config");
  if (!j.contains("eta")) throw std::invalid_argument("solver config: missing field \"eta\"");
  const json& eta = j.at("eta");
  if (eta.is_string()) {
    if (eta.get<std::string>() != "theorem") throw std::invalid_argument("solver config: eta must be a number or \"theorem\"");
    config.theorem_eta = true;
  } else {
    config.eta = field<double>(j, "eta", "solver config");
  }
  if (j.contains("tau")) config.tau = j.at("tau").get<double>();
  if (j.contains("ref_policy")) config.ref_policy = Policy(j.at("ref_policy").get<std::vector<double>>());
  if (j.contains("initial_policy")) config.initial_policy = Policy(j.at("initial_policy").get<std::vector<double>>());
  if (j.contains("inner_opt")) config.inner_opt = fit_config_from_json(j.at("inner_opt"));
  return config;
}

json run_log_to_json(const RunLog& log) {
  json records = json::array();
  for (const auto& rec : log.records) {
    json r{{"t", rec.t},
           {"policy", rec.policy.vec()},
           {"reward", reward_json(rec.reward)},
           {"dualgap_last", rec.gap_last},
           {"dualgap_avg", rec.gap_avg},
           {"l1_step", rec.l1_step},
           {"eta", rec.eta},
           {"fit_converged", rec.fit_converged},
           {"fit_gradient_norm", rec.fit_gradient_norm}};
    if (rec.aux) r["aux_policy"] = rec.aux->vec();
    if (rec.predictor) r["predictor"] = reward_json(*rec.predictor);
    records.push_back(std::move(r));
  }
  std::ostringstream fp;
  fp << std::hex << std::setw(16) << std::setfill('0') << log.game_fingerprint;
  return {{"label", log.label},
          {"config", solver_config_to_json(log.config)},
          {"n", log.n},
          {"game_fingerprint", fp.str()},
          {"records", records},
          {"average_policy", log.average.vec()},
          {"output_policy", log.output_policy().vec()},
          {"wall_time_seconds", log.wall_time_seconds}};
}

RunLog run_log_from_json(const json& j) {
  RunLog log;
  log.label = field<std::string>(j, "label", "run log");
  log.config = solver_config_from_json(j.at("config"));
  log.n = field<std::size_t>(j, "n", "run log");
  log.game_fingerprint = std::stoull(field<std::string>(j, "game_fingerprint", "run log"), nullptr, 16);
  for (const auto& r : field<json>(j, "records", "run log")) {
    IterationRecord rec;
    rec.t = r.at("t").get<std::size_t>();
    rec.policy = Policy(r.at("policy").get<std::vector<double>>());
    rec.reward = {r.at("reward").get<std::vector<double>>()};
    rec.gap_last = r.at("dualgap_last").get<double>();
    rec.gap_avg = r.at("dualgap_avg").get<double>();
    rec.l1_step = r.at("l1_step").get<double>();
    rec.eta = r.at("eta").get<double>();
    rec.fit_converged = r.value("fit_converged", true);
    rec.fit_gradient_norm = r.value("fit_gradient_norm", 0.0);
    if (r.contains("aux_policy")) rec.aux = Policy(r.at("aux_policy").get<std::vector<double>>());
    if (r.contains("predictor")) rec.predictor = RewardVector{r.at("predictor").get<std::vector<double>>()};
    log.records.push_back(std::move(rec));
  }
  if (log.records.empty()) throw std::invalid_argument("run log: no records");
  log.average = Policy(field<std::vector<double>>(j, "average_policy", "run log"));
  log.wall_time_seconds = j.value("wall_time_seconds", 0.0);
  return log;
}

std::string run_log_to_csv(const RunLog& log) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,dualgap_last,dualgap_avg,l1_step,eta\n";
  for (const auto& rec : log.records)
    out << rec.t << ',' << rec.gap_last << ',' << rec.gap_avg << ',' << rec.l1_step << ',' << rec.eta << '\n';
  return out.str();
}

json dataset_to_json(const PreferenceDataset& data) {
  json pairs = json::array();
  for (const auto& p : data.pairs) pairs.push_back({p.winner, p.loser});
  return {{"seed", data.seed},
          {"mode", data.mode.kind == DatasetMode::Kind::pair ? "pair" : "tournament"},
          {"K", data.mode.tournament_size},
          {"source_policy", data.source_policy_id},
          {"pairs", pairs}};
}

PreferenceDataset dataset_from_json(const json& j) {
  PreferenceDataset data;
  data.seed = field<std::uint64_t>(j, "seed", "dataset");
  const auto mode = field<std::string>(j, "mode", "dataset");
  if (mode == "pair") {
    data.mode = DatasetMode::pairs();
  } else if (mode == "tournament") {
    data.mode = DatasetMode::tournament(field<std::size_t>(j, "K", "dataset"));
  } else {
    throw std::invalid_argument("dataset: unknown mode '" + mode + "'");
  }
  data.source_policy_id = j.value("source_policy", std::string{});
  for (const auto& p : field<json>(j, "pairs", "dataset"))
    data.pairs.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
  return data;
}

std::string dataset_to_csv(const PreferenceDataset& data) {
  std::ostringstream out;
  out << "winner,loser\n";
  for (const auto& p : data.pairs) out << p.winner << ',' << p.loser << '\n';
  return out.str();
}

json cmdp_to_json(const TabularCMDP& cmdp) {
  return {{"horizon", cmdp.horizon},
          {"states_per_step", cmdp.states_per_step},
          {"actions", cmdp.actions},
          {"transitions", cmdp.transitions},
          {"terminal_pref", cmdp.terminal_pref.rows()}};
}

TabularCMDP cmdp_from_json(const json& j) {
  TabularCMDP cmdp{
      field<std::size_t>(j, "horizon", "cmdp"),
      field<std::vector<std::size_t>>(j, "states_per_step", "cmdp"),
      field<std::vector<std::vector<std::size_t>>>(j, "actions", "cmdp"),
      field<std::vector<std::vector<std::vector<std::vector<double>>>>>(j, "transitions", "cmdp"),
      validate_game(field<std::vector<std::vector<double>>>(j, "terminal_pref", "cmdp")),
  };
  cmdp.validate();
  return cmdp;
}

json cmdp_gen_spec_to_json(const CmdpGenSpec& spec) {
  return {{"kind", "cmdp"},
          {"horizon", spec.horizon},
          {"max_states", spec.max_states},
          {"max_actions", spec.max_actions},
          {"seed", spec.seed}};
}

CmdpGenSpec cmdp_gen_spec_from_json(const json& j) {
  CmdpGenSpec spec;
  spec.horizon = field<std::size_t>(j, "horizon", "cmdp spec");
  spec.max_states = j.value("max_states", spec.max_states);
  spec.max_actions = j.value("max_actions", spec.max_actions);
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing file: " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace prefgame
