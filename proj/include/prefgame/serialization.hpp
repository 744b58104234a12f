#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "prefgame/cmdp.hpp"
#include "prefgame/game.hpp"
#include "prefgame/run_log.hpp"
#include "prefgame/stochastic.hpp"

namespace prefgame {

using nlohmann::json;

// {"n": int, "p": [[...]]}
json game_to_json(const PreferenceGame& game);
PreferenceGame game_from_json(const json& j);

// {"kind": ..., "n": ..., "seed": ..., "params": {"rewards": [...]} | {"margin": m}}
json gen_spec_to_json(const GameGenSpec& spec);
GameGenSpec gen_spec_from_json(const json& j);

json fit_config_to_json(const FitConfig& fit);
FitConfig fit_config_from_json(const json& j);

// eta is a number or the string "theorem".
json solver_config_to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const json& j);

// Full trace.
json run_log_to_json(const RunLog& log);
RunLog run_log_from_json(const json& j);

// Columns: t,dualgap_last,dualgap_avg,l1_step,eta
std::string run_log_to_csv(const RunLog& log);

json dataset_to_json(const PreferenceDataset& data);
PreferenceDataset dataset_from_json(const json& j);
// Columns: winner,loser
std::string dataset_to_csv(const PreferenceDataset& data);

// {"horizon", "states_per_step", "actions", "transitions", "terminal_pref"}
json cmdp_to_json(const TabularCMDP& cmdp);
TabularCMDP cmdp_from_json(const json& j);

json cmdp_gen_spec_to_json(const CmdpGenSpec& spec);
CmdpGenSpec cmdp_gen_spec_from_json(const json& j);

// File helpers; throw std::runtime_error naming the path on I/O failure.
json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace prefgame
