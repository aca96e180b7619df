// Command-line front end: fit, simulate, tabulate, backtest and decide.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "standings/backtest.hpp"
#include "standings/data_io.hpp"
#include "standings/decisions.hpp"
#include "standings/errors.hpp"

using namespace standings;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::int64_t n_sims = 100000;
  double half_period = 390.0;
  std::string weights = "uniform";
  std::string ordering = "points";
  unsigned workers = 1;
};

std::uint64_t resolve_seed(const Globals& g) {
  if (g.seed) return *g.seed;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << seed << "\n";
  return seed;
}

LeagueRules rules_from(const Globals& g) {
  LeagueRules rules;
  rules.ordering = g.ordering == "points-per-match" ? OrderingMode::points_per_match : OrderingMode::total_points;
  return rules;
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

StandingMatrix load_matrix(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return standing_matrix_from_json(nlohmann::json::parse(text));
  std::istringstream in(text);
  return read_matrix_csv(in);
}

std::vector<TeamId> teams_of(const std::vector<MatchRecord>& matches) {
  std::set<TeamId> seen;
  for (const auto& m : matches) {
    seen.insert(m.home_team);
    seen.insert(m.away_team);
  }
  return {seen.begin(), seen.end()};
}

std::vector<MatchRecord> played_only(const std::vector<MatchRecord>& matches) {
  std::vector<MatchRecord> out;
  for (const auto& m : matches)
    if (m.played()) out.push_back(m);
  return out;
}

Date latest(const std::vector<MatchRecord>& matches) {
  if (matches.empty()) throw InputError("no played matches");
  Date d = matches.front().date;
  for (const auto& m : matches) d = std::max(d, m.date);
  return d;
}

// Played matches up to `as_of` (all when absent), optionally restricted to
// the last `window_days` days, plus the weighting that goes with them.
std::pair<std::vector<MatchRecord>, WeightScheme> training_set(const Globals& g,
                                                               const std::vector<MatchRecord>& results,
                                                               const std::string& as_of, int window_days) {
  std::vector<MatchRecord> played;
  const std::optional<Date> cutoff = as_of.empty() ? std::nullopt : std::optional<Date>(parse_date(as_of));
  for (const auto& m : results)
    if (m.played() && (!cutoff || m.date <= *cutoff)) played.push_back(m);
  const Date reference = cutoff ? *cutoff : latest(played);
  if (window_days > 0)
    std::erase_if(played, [&](const MatchRecord& m) { return days_between(m.date, reference) >= window_days; });
  const WeightScheme scheme =
      g.weights == "decay" ? WeightScheme::decay(reference, g.half_period) : WeightScheme::uniform();
  return {played, scheme};
}

// Played matches from the results file; remaining fixtures from the
// unplayed rows, an explicit fixtures file, or the double round-robin
// completion, in that order of preference.
LeagueState league_state(const Globals& g, const std::string& results_path, const std::string& fixtures_path) {
  const auto results = load_results(std::filesystem::path(results_path));
  auto state = LeagueState::from_matches(results, rules_from(g));
  if (!fixtures_path.empty()) {
    for (const auto& m : load_results(std::filesystem::path(fixtures_path)))
      if (!m.played()) state.remaining.push_back(m);
    state.teams = teams_of([&] {
      auto all = state.played;
      all.insert(all.end(), state.remaining.begin(), state.remaining.end());
      return all;
    }());
  } else if (state.remaining.empty()) {
    const Date next = state.played.empty() ? Date{} : latest(state.played) + std::chrono::days{1};
    state.remaining = derive_fixtures(state.teams, state.played, next);
  }
  return state;
}

std::string matrix_text(const StandingMatrix& m, const std::string& format, bool percent) {
  std::ostringstream out;
  if (format == "json") {
    out << to_json(m).dump(2) << "\n";
  } else {
    write_matrix_csv(out, m, percent);
  }
  return out.str();
}

std::string table_text(const std::vector<TableRow>& table) {
  std::ostringstream out;
  out << "rank,team,played,won,drawn,lost,goals_for,goals_against,goal_difference,points,points_per_match\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    out << i + 1 << ',' << r.team << ',' << r.played << ',' << r.won << ',' << r.drawn << ',' << r.lost << ','
        << r.goals_for << ',' << r.goals_against << ',' << r.goal_difference() << ',' << r.points << ','
        << std::fixed << std::setprecision(4) << r.points_per_match() << '\n';
  }
  return out.str();
}

std::vector<MatchEvents> load_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return load_match_events(in, path);
}

int run(int argc, char** argv) {
  CLI::App app{"Football season standings: fit, simulate, evaluate, decide"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed (drawn and printed when omitted)");
  app.add_option("--n-sims", g.n_sims, "Monte Carlo replications")->check(CLI::PositiveNumber);
  app.add_option("--half-period", g.half_period, "Half period of the time decay, days")->check(CLI::PositiveNumber);
  app.add_option("--weights", g.weights, "Match weighting")->check(CLI::IsMember({"uniform", "decay"}));
  app.add_option("--ordering", g.ordering, "Table ordering")->check(CLI::IsMember({"points", "points-per-match"}));
  app.add_option("--workers", g.workers, "Simulation threads, 0 for all cores");
  app.fallthrough();

  std::string output;
  auto out_opt = [&](CLI::App* sub) { sub->add_option("-o,--output", output, "Output file (default stdout)"); };

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit team strengths to played matches");
  std::string fit_results, fit_as_of;
  int fit_window = 0;
  fit_cmd->add_option("results", fit_results, "Results CSV")->required();
  fit_cmd->add_option("--as-of", fit_as_of, "Ignore matches after this date");
  fit_cmd->add_option("--window-days", fit_window, "Only matches from the last N days (0 = all)");
  out_opt(fit_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the rest of the season");
  std::string sim_model, sim_results, sim_fixtures, sim_format = "csv";
  bool sim_percent = false;
  sim_cmd->add_option("--model", sim_model, "Strength model JSON")->required();
  sim_cmd->add_option("results", sim_results, "Results CSV")->required();
  sim_cmd->add_option("--fixtures", sim_fixtures, "CSV of remaining fixtures");
  sim_cmd->add_option("--format", sim_format)->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_flag("--percent", sim_percent, "Whole percentages in CSV output");
  out_opt(sim_cmd);

  // table
  auto* table_cmd = app.add_subcommand("table", "Current league table");
  std::string table_results;
  table_cmd->add_option("results", table_results, "Results CSV")->required();
  out_opt(table_cmd);

  // backtest
  auto* bt_cmd = app.add_subcommand("backtest", "Stop a finished season after every matchday and score predictors");
  std::string bt_season, bt_history, bt_events;
  std::vector<std::string> bt_predictors{"pfsc"};
  std::vector<int> bt_matchdays;
  int bt_history_days = 730;
  bt_cmd->add_option("season", bt_season, "Results CSV of the finished season")->required();
  bt_cmd->add_option("--history", bt_history, "Results CSV of earlier matches for the benchmarks");
  bt_cmd->add_option("--events", bt_events, "Line-up and event CSV for plus-minus");
  bt_cmd->add_option("--predictors", bt_predictors, "pfsc, current_strength, plus_minus")->delimiter(',');
  bt_cmd->add_option("--matchdays", bt_matchdays, "Only these matchdays")->delimiter(',');
  bt_cmd->add_option("--history-days", bt_history_days, "Benchmark training window, days");
  out_opt(bt_cmd);

  // decide
  auto* decide_cmd = app.add_subcommand("decide", "Expected ranks and threshold verdicts");
  std::string decide_matrix;
  double decide_c = 0.0;
  int relegation_spots = 0;
  decide_cmd->add_option("matrix", decide_matrix, "Standing matrix (CSV or JSON)")->required();
  decide_cmd->add_option("--C", decide_c, "Threshold percentage for a verdict")->required();
  decide_cmd->add_option("--relegation", relegation_spots, "Number of relegation places");
  out_opt(decide_cmd);

  // compensate
  auto* comp_cmd = app.add_subcommand("compensate", "Compensation fund transfers");
  std::string comp_matrix, comp_schedule;
  comp_cmd->add_option("matrix", comp_matrix, "Standing matrix (CSV or JSON)")->required();
  comp_cmd->add_option("--schedule", comp_schedule, "Profit schedule CSV (rank,amount)")->required();
  out_opt(comp_cmd);

  // pm-fit
  auto* pmfit_cmd = app.add_subcommand("pm-fit", "Fit plus-minus player ratings");
  std::string pm_events, pm_results, pm_as_of;
  double pm_ridge = 1.0, pm_unavailable = 0.1;
  pmfit_cmd->add_option("--events", pm_events, "Line-up and event CSV");
  pmfit_cmd->add_option("--results", pm_results, "Results CSV (team-level fallback without line-ups)");
  pmfit_cmd->add_option("--as-of", pm_as_of, "Reference date for decay weights");
  pmfit_cmd->add_option("--ridge", pm_ridge, "Ridge penalty on ratings")->check(CLI::PositiveNumber);
  pmfit_cmd->add_option("--unavailable", pm_unavailable, "Per-player absence probability")->check(CLI::Range(0.0, 1.0));
  out_opt(pmfit_cmd);

  // pm-simulate
  auto* pmsim_cmd = app.add_subcommand("pm-simulate", "Simulate the season with plus-minus forecasts");
  std::string pms_predictor, pms_results, pms_fixtures, pms_format = "csv";
  bool pms_percent = false;
  pmsim_cmd->add_option("--predictor", pms_predictor, "Plus-minus predictor JSON")->required();
  pmsim_cmd->add_option("results", pms_results, "Results CSV")->required();
  pmsim_cmd->add_option("--fixtures", pms_fixtures, "CSV of remaining fixtures");
  pmsim_cmd->add_option("--format", pms_format)->check(CLI::IsMember({"csv", "json"}));
  pmsim_cmd->add_flag("--percent", pms_percent, "Whole percentages in CSV output");
  out_opt(pmsim_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  if (*fit_cmd) {
    const auto results = load_results(std::filesystem::path(fit_results));
    const auto [played, scheme] = training_set(g, results, fit_as_of, fit_window);
    const auto model = fit(played, teams_of(played), scheme);
    emit(output, to_json(model).dump(2) + "\n");
  } else if (*sim_cmd) {
    const auto model = strength_model_from_json(read_json(sim_model));
    const auto state = league_state(g, sim_results, sim_fixtures);
    const auto matrix = simulate_standings(state, PoissonSampler(model), {g.n_sims, resolve_seed(g), g.workers});
    emit(output, matrix_text(matrix, sim_format, sim_percent));
  } else if (*table_cmd) {
    const auto results = load_results(std::filesystem::path(table_results));
    emit(output, table_text(compute_table(LeagueState::from_matches(results, rules_from(g)))));
  } else if (*bt_cmd) {
    BacktestConfig cfg;
    cfg.season_id = bt_season;
    cfg.predictors.clear();
    for (const auto& p : bt_predictors) cfg.predictors.push_back(parse_predictor(p));
    cfg.n_sims = g.n_sims;
    cfg.seed = resolve_seed(g);
    cfg.workers = g.workers;
    cfg.half_period_days = g.half_period;
    cfg.history_days = bt_history_days;
    cfg.rules = rules_from(g);
    cfg.matchdays = bt_matchdays;
    SeasonData data;
    data.season = load_results(std::filesystem::path(bt_season));
    if (!bt_history.empty()) data.history = played_only(load_results(std::filesystem::path(bt_history)));
    if (!bt_events.empty()) data.events = load_events_file(bt_events);
    std::ostringstream out;
    write_report_csv(out, run_backtest(cfg, data));
    emit(output, out.str());
  } else if (*decide_cmd) {
    const auto matrix = load_matrix(decide_matrix);
    matrix.check_stochastic(1e-6);
    const auto standing = expected_ranks(matrix);
    const auto champion = champion_verdict(matrix, decide_c);
    nlohmann::json out{{"threshold_percent", decide_c},
                       {"champion", champion ? nlohmann::json(*champion) : nlohmann::json(nullptr)},
                       {"expected_ranks", to_json(standing)}};
    if (relegation_spots > 0) {
      out["relegation_spots"] = relegation_spots;
      out["relegated"] = relegation_verdict(matrix, relegation_spots, decide_c);
    }
    emit(output, out.dump(2) + "\n");
  } else if (*comp_cmd) {
    const auto matrix = load_matrix(comp_matrix);
    matrix.check_stochastic(1e-6);
    std::ifstream sched(comp_schedule);
    if (!sched) throw InputError("cannot open " + comp_schedule);
    const auto standing = expected_ranks(matrix);
    const auto fund = compensation_fund(matrix, standing, load_profit_schedule(sched));
    nlohmann::json transfers = nlohmann::json::array();
    for (const auto& r : standing.order)
      transfers.push_back({{"team", r.team}, {"assigned_rank", standing.assigned_rank(r.team)},
                           {"transfer", fund.at(r.team)}});
    emit(output, nlohmann::json{{"transfers", transfers}}.dump(2) + "\n");
  } else if (*pmfit_cmd) {
    if (pm_events.empty() == pm_results.empty()) throw InputError("pm-fit needs exactly one of --events or --results");
    RatingOptions opts;
    opts.ridge = pm_ridge;
    PlusMinusPredictor predictor;
    if (!pm_events.empty()) {
      const auto events = load_events_file(pm_events);
      if (g.weights == "decay") {
        Date ref = pm_as_of.empty() ? events.front().date : parse_date(pm_as_of);
        if (pm_as_of.empty())
          for (const auto& e : events) ref = std::max(ref, e.date);
        opts.weights = WeightScheme::decay(ref, g.half_period);
      }
      predictor = fit_plus_minus(events, opts);
    } else {
      const auto results = load_results(std::filesystem::path(pm_results));
      const auto [played, scheme] = training_set(g, results, pm_as_of, 0);
      opts.weights = scheme;
      predictor = fit_plus_minus_degraded(played, opts);
    }
    predictor.unavailable_prob = pm_unavailable;
    emit(output, to_json(predictor).dump(2) + "\n");
  } else if (*pmsim_cmd) {
    const auto predictor = plus_minus_from_json(read_json(pms_predictor));
    const auto state = league_state(g, pms_results, pms_fixtures);
    const auto matrix =
        simulate_standings(state, PlusMinusSampler(predictor), {g.n_sims, resolve_seed(g), g.workers});
    emit(output, matrix_text(matrix, pms_format, pms_percent));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
