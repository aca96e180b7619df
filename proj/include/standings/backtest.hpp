#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "standings/plusminus.hpp"
#include "standings/season_sim.hpp"

namespace standings {

enum class Predictor { pfsc, current_strength, plus_minus };

std::string to_string(Predictor p);
Predictor parse_predictor(std::string_view text);

struct BacktestConfig {
  std::string league_id;
  std::string season_id;
  std::vector<Predictor> predictors{Predictor::pfsc};
  std::int64_t n_sims = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  // Benchmarks train on matches at most this many days before the stop.
  int history_days = 730;
  double half_period_days = 390.0;
  LeagueRules rules;
  RatingOptions plus_minus;
  // Restrict the evaluation to these matchdays; empty means all of them.
  std::vector<int> matchdays;

  void validate() const;
};

/// Everything the harness reads. `season` must be fully played. `history`
/// holds earlier matches for the benchmarks. `events`, when present, covers
/// season and history matches and switches plus-minus to line-up mode.
struct SeasonData {
  std::vector<MatchRecord> season;
  std::vector<MatchRecord> history;
  std::vector<MatchEvents> events;
};

struct BacktestRow {
  int matchday = 0;
  Predictor predictor = Predictor::pfsc;
  std::optional<double> mean_rps;  // absent when nothing remains or skipped
  std::optional<double> trps;      // absent when skipped
  int n_remaining = 0;
  std::string note;                // skip diagnostic or flag, empty otherwise
};

struct BacktestReport {
  std::vector<BacktestRow> rows;
};

/// Matchday index (1-based) for every season match: the round when every
/// match carries one, otherwise the ordinal of its calendar date.
std::vector<int> assign_matchdays(const std::vector<MatchRecord>& season);

/// Stops the season after every matchday, fits each predictor on what was
/// known at that point, and scores the remaining-match forecasts (mean RPS)
/// and the simulated final standing (TRPS) against what really happened.
BacktestReport run_backtest(const BacktestConfig& config, const SeasonData& data);

/// Realised final ranks of a fully played season under `rules`.
std::map<TeamId, int> final_ranks(const std::vector<MatchRecord>& season, const LeagueRules& rules);

/// Home win, draw and away win probabilities under the bivariate Poisson
/// model. Exact up to a tail truncation far beyond double precision.
OutcomeForecast outcome_probabilities(const ScoreDistributionParams& params);

}  // namespace standings
