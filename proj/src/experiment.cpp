#include "prefgame/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "prefgame/mirror.hpp"
#include "prefgame/parallel.hpp"
#include "prefgame/serialization.hpp"
#include "prefgame/solvers.hpp"

namespace prefgame {

namespace {

const std::set<std::string> kGameAlgorithms{"omd", "onpo", "nash_md", "sppo", "online_ipo", "onpo_stochastic"};
const std::set<std::string> kCmdpAlgorithms{"multi_turn_omd", "multi_turn_onpo"};

std::string short_number(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

bool needs_game(const ExperimentConfig& c) {
  return std::any_of(c.algorithms.begin(), c.algorithms.end(), [](const auto& a) { return kGameAlgorithms.count(a); });
}

bool needs_cmdp(const ExperimentConfig& c) {
  return std::any_of(c.algorithms.begin(), c.algorithms.end(), [](const auto& a) { return kCmdpAlgorithms.count(a); });
}

}  // namespace

std::size_t EtaSpec::count() const { return kind == Kind::inverse_grid ? inverse_grid.size() : 1; }

std::string EtaSpec::label(std::size_t index) const {
  switch (kind) {
    case Kind::theorem:
      return "theorem";
    case Kind::value:
      return short_number(value);
    case Kind::inverse_grid:
      return "inv" + short_number(inverse_grid.at(index));
  }
  return {};
}

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw std::invalid_argument("config.algorithms must be nonempty");
  for (const auto& a : algorithms)
    if (!kGameAlgorithms.count(a) && !kCmdpAlgorithms.count(a))
      throw std::invalid_argument("config.algorithms: unknown algorithm '" + a + "'");
  if (iterations.empty()) throw std::invalid_argument("config.T must be nonempty");
  for (auto t : iterations)
    if (t == 0) throw std::invalid_argument("config.T: every T must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config.seeds must be nonempty");

  switch (eta.kind) {
    case EtaSpec::Kind::value:
      if (!(eta.value > 0.0) || !std::isfinite(eta.value)) throw std::invalid_argument("config.eta must be positive");
      break;
    case EtaSpec::Kind::inverse_grid:
      if (eta.inverse_grid.empty()) throw std::invalid_argument("config.eta.inverse_grid must be nonempty");
      for (double v : eta.inverse_grid)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("config.eta.inverse_grid values must be positive");
      break;
    case EtaSpec::Kind::theorem:
      for (const auto& a : algorithms)
        if (a != "omd" && a != "onpo")
          throw std::invalid_argument("config.eta: \"theorem\" applies only to omd and onpo, not '" + a + "'");
      break;
  }

  if (needs_game(*this)) {
    if (game_spec.has_value() == game_file.has_value())
      throw std::invalid_argument("config: exactly one of \"game\" and \"game_file\" is required");
  }
  if (needs_cmdp(*this)) {
    if (cmdp_spec.has_value() == cmdp_file.has_value())
      throw std::invalid_argument("config: exactly one of \"cmdp\" and \"cmdp_file\" is required");
  }
  for (const auto& a : algorithms)
    if ((a == "nash_md" || a == "online_ipo") && !tau)
      throw std::invalid_argument("config.tau is required for " + a);
  if (tau && !(*tau > 0.0)) throw std::invalid_argument("config.tau must be positive");
  if (ref_policy && !ref_policy->is_interior()) throw std::invalid_argument("config.ref_policy must be interior");
  inner_opt.validate();
  stochastic.fit.validate();
  if (stochastic.pairs_per_iteration == 0) throw std::invalid_argument("config.stochastic.n_per_iter must be >= 1");
}

namespace {

const std::set<std::string> kConfigKeys{"game",   "game_file",  "cmdp",  "cmdp_file", "algorithms",
                                        "T",      "eta",        "tau",   "ref_policy", "inner_opt",
                                        "seeds",  "output_dir", "stochastic", "parallel"};

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

template <class T>
T get_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config.") + key + " has the wrong type (" + e.what() + ")");
  }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kConfigKeys.count(key)) throw std::invalid_argument("config: unknown field \"" + key + "\"");

  ExperimentConfig c;
  if (j.contains("game")) c.game_spec = gen_spec_from_json(j.at("game"));
  if (j.contains("game_file")) c.game_file = resolve(get_field<std::string>(j, "game_file"), base_dir);
  if (j.contains("cmdp")) c.cmdp_spec = cmdp_gen_spec_from_json(j.at("cmdp"));
  if (j.contains("cmdp_file")) c.cmdp_file = resolve(get_field<std::string>(j, "cmdp_file"), base_dir);
  if (j.contains("algorithms")) c.algorithms = get_field<std::vector<std::string>>(j, "algorithms");
  if (j.contains("T")) {
    const auto& t = j.at("T");
    c.iterations = t.is_array() ? get_field<std::vector<std::size_t>>(j, "T") : std::vector{get_field<std::size_t>(j, "T")};
  }
  if (j.contains("eta")) {
    const auto& e = j.at("eta");
    if (e.is_string()) {
      const auto s = e.get<std::string>();
      if (s == "theorem") {
        c.eta.kind = EtaSpec::Kind::theorem;
      } else if (s == "grid") {
        c.eta.kind = EtaSpec::Kind::inverse_grid;
        c.eta.inverse_grid = kDefaultInverseEtaGrid;
      } else {
        throw std::invalid_argument("config.eta: expected a number, \"theorem\", \"grid\" or {\"inverse_grid\": [...]}");
      }
    } else if (e.is_number()) {
      c.eta.kind = EtaSpec::Kind::value;
      c.eta.value = e.get<double>();
    } else if (e.is_object() && e.contains("inverse_grid")) {
      c.eta.kind = EtaSpec::Kind::inverse_grid;
      c.eta.inverse_grid = get_field<std::vector<double>>(e, "inverse_grid");
    } else {
      throw std::invalid_argument("config.eta: expected a number, \"theorem\", \"grid\" or {\"inverse_grid\": [...]}");
    }
  }
  if (j.contains("tau")) c.tau = get_field<double>(j, "tau");
  if (j.contains("ref_policy")) c.ref_policy = Policy(get_field<std::vector<double>>(j, "ref_policy"));
  if (j.contains("inner_opt")) c.inner_opt = fit_config_from_json(j.at("inner_opt"));
  if (j.contains("seeds")) c.seeds = get_field<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("output_dir")) c.output_dir = resolve(get_field<std::string>(j, "output_dir"), base_dir);
  if (j.contains("parallel")) c.parallel = get_field<bool>(j, "parallel");
  if (j.contains("stochastic")) {
    const auto& s = j.at("stochastic");
    if (!s.is_object()) throw std::invalid_argument("config.stochastic must be an object");
    if (s.contains("n_per_iter")) c.stochastic.pairs_per_iteration = get_field<std::size_t>(s, "n_per_iter");
    const auto mode = s.value("mode", std::string("pair"));
    if (mode == "pair") {
      c.stochastic.mode = DatasetMode::pairs();
    } else if (mode == "tournament") {
      c.stochastic.mode = DatasetMode::tournament(s.value("K", std::size_t{8}));
    } else {
      throw std::invalid_argument("config.stochastic.mode: unknown mode '" + mode + "'");
    }
    if (s.contains("fit")) c.stochastic.fit = fit_config_from_json(s.at("fit"));
  }
  c.validate();
  return c;
}

namespace {

struct Job {
  std::string algorithm;
  std::size_t iterations = 0;
  std::size_t eta_index = 0;
  std::uint64_t seed = 0;
};

struct JobOutput {
  nlohmann::json entry;  // summary row
  nlohmann::json log;    // per-run JSON without wall time
  std::string csv;
  std::string stem;
  double wall_time = 0.0;
};

std::vector<Job> enumerate_jobs(const ExperimentConfig& c) {
  std::vector<Job> jobs;
  for (const auto& a : c.algorithms)
    for (auto t : c.iterations)
      for (std::size_t e = 0; e < c.eta.count(); ++e)
        for (auto s : c.seeds) jobs.push_back({a, t, e, s});
  return jobs;
}

double eta_value(const EtaSpec& spec, std::size_t index) {
  switch (spec.kind) {
    case EtaSpec::Kind::value:
      return spec.value;
    case EtaSpec::Kind::inverse_grid:
      return 1.0 / spec.inverse_grid.at(index);
    case EtaSpec::Kind::theorem:
      break;
  }
  throw std::logic_error("eta_value: theorem eta has no fixed value");
}

std::string game_stem(const ExperimentConfig& c, std::uint64_t seed) {
  return c.game_spec ? "game_seed" + std::to_string(seed) : "game";
}

std::string cmdp_stem(const ExperimentConfig& c, std::uint64_t seed) {
  return c.cmdp_spec ? "cmdp_seed" + std::to_string(seed) : "cmdp";
}

PreferenceGame load_game(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.game_spec) {
    auto spec = *c.game_spec;
    spec.seed = seed;
    return make_game(spec);
  }
  return game_from_json(read_json_file(*c.game_file));
}

TabularCMDP load_cmdp(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.cmdp_spec) {
    auto spec = *c.cmdp_spec;
    spec.seed = seed;
    return make_random_cmdp(spec);
  }
  return cmdp_from_json(read_json_file(*c.cmdp_file));
}

std::string run_stem(const ExperimentConfig& c, const Job& job) {
  return job.algorithm + "_T" + std::to_string(job.iterations) + "_eta-" + c.eta.label(job.eta_index) + "_seed" +
         std::to_string(job.seed);
}

JobOutput run_game_job(const ExperimentConfig& c, const Job& job, const PreferenceGame& game) {
  JobOutput out;
  RunLog log;
  const std::size_t n = game.size();
  double eta = 0.0;
  if (job.algorithm == "onpo_stochastic") {
    StochasticConfig sc;
    sc.start = Policy::uniform(n);
    sc.iterations = job.iterations;
    sc.eta = eta_value(c.eta, job.eta_index);
    sc.pairs_per_iteration = c.stochastic.pairs_per_iteration;
    sc.mode = c.stochastic.mode;
    sc.fit = c.stochastic.fit;
    sc.seed = job.seed;
    log = onpo_stochastic_run(game, sc);
    eta = sc.eta;
  } else {
    SolverConfig sc;
    sc.algorithm = algorithm_from_string(job.algorithm);
    sc.iterations = job.iterations;
    sc.theorem_eta = c.eta.kind == EtaSpec::Kind::theorem;
    if (!sc.theorem_eta) sc.eta = eta_value(c.eta, job.eta_index);
    if (sc.algorithm == Algorithm::nash_md || sc.algorithm == Algorithm::online_ipo) {
      sc.tau = c.tau;
      sc.ref_policy = c.ref_policy ? *c.ref_policy : Policy::uniform(n);
    }
    sc.inner_opt = c.inner_opt;
    log = run_solver(game, sc);
    eta = sc.resolved_eta(n);
  }

  out.stem = run_stem(c, job);
  out.wall_time = log.wall_time_seconds;
  out.log = run_log_to_json(log);
  out.log.erase("wall_time_seconds");
  out.csv = run_log_to_csv(log);

  const auto& last = log.records.back();
  auto& e = out.entry;
  e["algorithm"] = job.algorithm;
  e["T"] = job.iterations;
  e["eta_label"] = c.eta.label(job.eta_index);
  e["eta"] = eta;
  e["seed"] = job.seed;
  e["n"] = n;
  e["game_file"] = "games/" + game_stem(c, job.seed) + ".json";
  e["run_file"] = "runs/" + out.stem + ".json";
  e["dualgap_avg"] = last.gap_avg;
  e["dualgap_last"] = last.gap_last;
  e["nonconverged_fits"] = log.nonconverged_fits();
  if (c.eta.kind == EtaSpec::Kind::theorem) {
    const double radius = kl_radius(log.config.start(n));
    const double bound = job.algorithm == "omd" ? omd_gap_bound(radius, job.iterations)
                                                : onpo_gap_bound(radius, job.iterations);
    e["bound"] = bound;
    e["bound_ok"] = last.gap_avg <= bound + 1e-12;
  }
  return out;
}

JobOutput run_cmdp_job(const ExperimentConfig& c, const Job& job, const TabularCMDP& cmdp) {
  JobOutput out;
  const double eta = eta_value(c.eta, job.eta_index);
  const auto variant = job.algorithm == "multi_turn_omd" ? UpdateVariant::omd : UpdateVariant::onpo;
  const auto trace = run_multi_turn(cmdp, job.iterations, eta, variant);
  const double initial = exploitability(cmdp, uniform_state_policy(cmdp));

  out.stem = run_stem(c, job);
  out.log = {{"label", job.algorithm},
             {"T", job.iterations},
             {"eta", eta},
             {"exploit_initial", initial},
             {"exploit_last", trace.exploit_last},
             {"exploit_avg", trace.exploit_avg}};
  std::ostringstream csv;
  csv << std::setprecision(17) << "t,exploit_last,exploit_avg\n";
  for (std::size_t t = 0; t < trace.exploit_last.size(); ++t)
    csv << t + 1 << ',' << trace.exploit_last[t] << ',' << trace.exploit_avg[t] << '\n';
  out.csv = csv.str();

  auto& e = out.entry;
  e["algorithm"] = job.algorithm;
  e["T"] = job.iterations;
  e["eta_label"] = c.eta.label(job.eta_index);
  e["eta"] = eta;
  e["seed"] = job.seed;
  e["cmdp_file"] = "games/" + cmdp_stem(c, job.seed) + ".json";
  e["run_file"] = "runs/" + out.stem + ".json";
  e["exploit_initial"] = initial;
  e["exploit_avg"] = trace.exploit_avg.back();
  e["exploit_last"] = trace.exploit_last.back();
  return out;
}

struct Execution {
  std::vector<JobOutput> outputs;
  std::vector<std::pair<std::string, nlohmann::json>> instances;  // games/<stem>.json
};

Execution execute(const ExperimentConfig& c) {
  c.validate();
  Execution ex;
  // Instances are loaded up front so a missing file fails before any run starts.
  std::vector<std::optional<PreferenceGame>> games(c.seeds.size());
  std::vector<std::optional<TabularCMDP>> cmdps(c.seeds.size());
  for (std::size_t k = 0; k < c.seeds.size(); ++k) {
    const bool shared_game = k > 0 && !c.game_spec;
    const bool shared_cmdp = k > 0 && !c.cmdp_spec;
    if (needs_game(c)) {
      games[k] = shared_game ? *games[0] : load_game(c, c.seeds[k]);
      if (!shared_game) ex.instances.emplace_back(game_stem(c, c.seeds[k]), game_to_json(*games[k]));
    }
    if (needs_cmdp(c)) {
      cmdps[k] = shared_cmdp ? *cmdps[0] : load_cmdp(c, c.seeds[k]);
      if (!shared_cmdp) ex.instances.emplace_back(cmdp_stem(c, c.seeds[k]), cmdp_to_json(*cmdps[k]));
    }
  }

  const auto jobs = enumerate_jobs(c);
  auto seed_index = [&](std::uint64_t seed) {
    return static_cast<std::size_t>(std::find(c.seeds.begin(), c.seeds.end(), seed) - c.seeds.begin());
  };
  auto work = [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto k = seed_index(job.seed);
    if (kCmdpAlgorithms.count(job.algorithm)) return run_cmdp_job(c, job, *cmdps[k]);
    return run_game_job(c, job, *games[k]);
  };
  ex.outputs = c.parallel ? parallel_map(jobs.size(), work) : serial_map(jobs.size(), work);
  return ex;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const auto ex = execute(config);
  const auto& dir = config.output_dir;
  for (const auto& [stem, j] : ex.instances) write_json_file(dir / "games" / (stem + ".json"), j);

  ExperimentReport report;
  nlohmann::json runs = nlohmann::json::array();
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& out : ex.outputs) {
    write_json_file(dir / "runs" / (out.stem + ".json"), out.log);
    write_text_file(dir / "runs" / (out.stem + ".csv"), out.csv);
    timings[out.stem] = out.wall_time;
    if (out.entry.contains("bound_ok")) {
      ++report.bound_checks;
      if (!out.entry.at("bound_ok").get<bool>()) ++report.bound_violations;
    }
    runs.push_back(out.entry);
  }
  report.runs = ex.outputs.size();
  report.summary = {{"runs", runs},
                    {"run_count", report.runs},
                    {"bound_checks", report.bound_checks},
                    {"bound_violations", report.bound_violations}};
  write_json_file(dir / "summary.json", report.summary);
  write_json_file(dir / "timings.json", timings);
  return report;
}

std::string sweep_eta(const ExperimentConfig& config) {
  const auto ex = execute(config);
  std::ostringstream csv;
  csv << std::setprecision(17) << "algorithm,T,eta_label,eta,seed,final_last,final_avg,nonconverged_fits\n";
  for (const auto& out : ex.outputs) {
    const auto& e = out.entry;
    const bool cmdp = e.contains("exploit_avg");
    csv << e.at("algorithm").get<std::string>() << ',' << e.at("T").get<std::size_t>() << ','
        << e.at("eta_label").get<std::string>() << ',' << e.at("eta").get<double>() << ','
        << e.at("seed").get<std::uint64_t>() << ',' << e.at(cmdp ? "exploit_last" : "dualgap_last").get<double>() << ','
        << e.at(cmdp ? "exploit_avg" : "dualgap_avg").get<double>() << ','
        << (cmdp ? 0 : e.at("nonconverged_fits").get<std::size_t>()) << '\n';
  }
  write_text_file(config.output_dir / "sweep.csv", csv.str());
  return csv.str();
}

RateFit fit_rate(std::vector<std::pair<double, double>> curve, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("fit_rate: tail fraction must be in (0, 1]");
  std::sort(curve.begin(), curve.end());
  RateFit fit;
  fit.tail_fraction = tail_fraction;
  std::vector<std::pair<double, double>> usable;
  for (const auto& [t, gap] : curve) {
    if (!(t > 0.0) || !std::isfinite(t) || !std::isfinite(gap) || gap < 0.0)
      throw std::invalid_argument("fit_rate: points need T > 0 and a finite gap >= 0");
    if (gap == 0.0) {
      ++fit.zero_gaps_excluded;
      continue;
    }
    usable.emplace_back(std::log(t), std::log(gap));
  }
  if (usable.size() < 3) throw std::invalid_argument("fit_rate: fewer than 3 points with positive gap");
  const auto m = usable.size();
  const auto k = std::min(m, std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(tail_fraction * m))));
  const std::vector<std::pair<double, double>> tail(usable.end() - static_cast<std::ptrdiff_t>(k), usable.end());

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : tail) mx += x, my += y;
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : tail) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: the tail points share a single T");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.points_used = k;
  return fit;
}

VerifyReport verify_reports(const std::filesystem::path& output_dir) {
  VerifyReport report;
  const auto summary = read_json_file(output_dir / "summary.json");
  std::size_t violations = 0;
  for (const auto& e : summary.at("runs")) {
    if (!e.contains("bound_ok")) continue;
    const auto run_file = e.at("run_file").get<std::string>();
    const auto log = run_log_from_json(read_json_file(output_dir / run_file));
    const auto game = game_from_json(read_json_file(output_dir / e.at("game_file").get<std::string>()));
    ++report.checked;

    if (log.game_fingerprint != game.fingerprint()) {
      ++report.mismatches;
      report.messages.push_back(run_file + ": run log does not belong to " + e.at("game_file").get<std::string>());
      continue;
    }
    const std::size_t n = game.size();
    const std::size_t t_count = log.records.size();

    // Average iterate and its gap, recomputed from the logged policies.
    std::vector<double> avg(n, 0.0);
    for (const auto& rec : log.records)
      for (std::size_t i = 0; i < n; ++i) avg[i] += rec.policy[i];
    for (auto& v : avg) v /= static_cast<double>(t_count);
    double best = 0.0, worst = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row += game(i, j) * avg[j];
        col += avg[j] * game(j, i);
      }
      best = std::max(best, row);
      worst = std::min(worst, col);
    }
    const double gap = std::max(0.0, best - worst);

    const Policy start = log.config.start(n);
    double radius = 0.0;
    for (std::size_t i = 0; i < n; ++i) radius = std::max(radius, -std::log(start[i]));
    const auto algorithm = e.at("algorithm").get<std::string>();
    const double bound = algorithm == "omd" ? 4.0 * std::sqrt(radius) / std::sqrt(static_cast<double>(t_count))
                                            : 4.0 * std::sqrt(radius) / static_cast<double>(t_count);
    const bool ok = gap <= bound + 1e-12;

    if (std::abs(gap - e.at("dualgap_avg").get<double>()) > 1e-9) {
      ++report.mismatches;
      report.messages.push_back(run_file + ": recomputed average gap " + short_number(gap) + " differs from summary");
    }
    if (std::abs(bound - e.at("bound").get<double>()) > 1e-12 * std::max(1.0, bound)) {
      ++report.mismatches;
      report.messages.push_back(run_file + ": recomputed bound " + short_number(bound) + " differs from summary");
    }
    if (ok != e.at("bound_ok").get<bool>()) {
      ++report.mismatches;
      report.messages.push_back(run_file + ": bound flag differs from summary");
    }
    if (!ok) {
      ++report.bound_failures;
      report.messages.push_back(run_file + ": average gap " + short_number(gap) + " exceeds bound " + short_number(bound));
    }
    if (e.at("bound_ok").get<bool>() == false) ++violations;
  }
  if (summary.contains("bound_violations") && summary.at("bound_violations").get<std::size_t>() != violations) {
    ++report.mismatches;
    report.messages.push_back("summary.json: bound_violations does not match its rows");
  }
  return report;
}

}  // namespace prefgame
