#include "standings/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>

namespace standings {
namespace {

std::string match_key(const Date& d, const TeamId& home, const TeamId& away) {
  return format_iso(d) + "|" + home + "|" + away;
}

MatchRecord unplayed(MatchRecord m) {
  m.home_goals.reset();
  m.away_goals.reset();
  return m;
}

struct PreparedPredictor {
  std::unique_ptr<ScoreSampler> sampler;
  std::function<OutcomeForecast(const MatchRecord&)> forecast;
  std::string note;
};

PreparedPredictor prepare_pfsc(const std::vector<TeamId>& teams, const std::vector<MatchRecord>& played) {
  std::set<TeamId> seen;
  for (const auto& m : played) {
    seen.insert(m.home_team);
    seen.insert(m.away_team);
  }
  for (const auto& t : teams)
    if (!seen.count(t)) throw InputError("team " + t + " has not played yet");
  auto sampler = std::make_unique<PoissonSampler>(fit(played, teams, WeightScheme::uniform()));
  const auto* model = &sampler->model();
  PreparedPredictor out;
  out.forecast = [model](const MatchRecord& m) {
    return outcome_probabilities(expected_goals(*model, m.home_team, m.away_team, m.neutral_venue));
  };
  out.sampler = std::move(sampler);
  return out;
}

std::vector<MatchRecord> training_window(const std::vector<MatchRecord>& history,
                                         const std::vector<MatchRecord>& played, Date stop, int days) {
  std::vector<MatchRecord> out;
  const Date earliest = stop - std::chrono::days{days};
  for (const auto* src : {&history, &played})
    for (const auto& m : *src)
      if (m.date > earliest && m.date <= stop) out.push_back(m);
  return out;
}

std::string absent_note(const std::vector<TeamId>& absent) {
  if (absent.empty()) return {};
  std::string note = "no training matches for";
  for (const auto& t : absent) note += " " + t;
  return note + "; rated at league mean";
}

PreparedPredictor prepare_current_strength(const BacktestConfig& cfg, const std::vector<TeamId>& teams,
                                           const std::vector<MatchRecord>& training, Date stop) {
  std::set<TeamId> seen;
  for (const auto& m : training) {
    seen.insert(m.home_team);
    seen.insert(m.away_team);
  }
  const std::vector<TeamId> fitted(seen.begin(), seen.end());
  StrengthModel model = fit(training, fitted, WeightScheme::decay(stop, cfg.half_period_days));

  // Teams outside the window enter at the mean of the league's teams; the
  // league's strengths are then re-centred so they sum to zero again.
  std::vector<TeamId> absent;
  double league_mean = 0.0;
  int known = 0;
  for (const auto& t : teams) {
    if (model.has_team(t)) {
      league_mean += model.strengths.at(t);
      ++known;
    } else {
      absent.push_back(t);
    }
  }
  league_mean = known ? league_mean / known : 0.0;
  for (const auto& t : absent) model.strengths[t] = league_mean;
  double mean = 0.0;
  for (const auto& [t, r] : model.strengths) mean += r;
  mean /= static_cast<double>(model.strengths.size());
  for (auto& [t, r] : model.strengths) r -= mean;

  auto sampler = std::make_unique<PoissonSampler>(std::move(model));
  const auto* fitted_model = &sampler->model();
  PreparedPredictor out;
  out.forecast = [fitted_model](const MatchRecord& m) {
    return outcome_probabilities(expected_goals(*fitted_model, m.home_team, m.away_team, m.neutral_venue));
  };
  out.sampler = std::move(sampler);
  out.note = absent_note(absent);
  return out;
}

PreparedPredictor prepare_plus_minus(const BacktestConfig& cfg, const SeasonData& data,
                                     const std::vector<TeamId>& teams,
                                     const std::vector<MatchRecord>& training, Date stop) {
  RatingOptions options = cfg.plus_minus;
  options.weights = WeightScheme::decay(stop, cfg.half_period_days);

  PlusMinusPredictor predictor;
  std::vector<TeamId> absent;
  if (data.events.empty()) {
    predictor = fit_plus_minus_degraded(training, options);
    for (const auto& t : teams) {
      if (!predictor.covers(t)) {
        absent.push_back(t);
        predictor.ratings.ratings[team_player(t)] = 0.0;
      }
    }
  } else {
    std::set<std::string> keys;
    for (const auto& m : training) keys.insert(match_key(m.date, m.home_team, m.away_team));
    std::vector<MatchEvents> used;
    for (const auto& e : data.events)
      if (keys.count(match_key(e.date, e.home_team, e.away_team))) used.push_back(e);
    if (used.empty()) throw InputError("no line-up data inside the training window");
    predictor = fit_plus_minus(used, options);
    for (const auto& t : teams)
      if (!predictor.covers(t)) throw InputError("no squad information for " + t);
  }

  auto sampler = std::make_unique<PlusMinusSampler>(std::move(predictor));
  const auto* pm = &sampler->predictor();
  PreparedPredictor out;
  out.forecast = [pm](const MatchRecord& m) { return pm->forecast(m.home_team, m.away_team); };
  out.sampler = std::move(sampler);
  out.note = absent_note(absent);
  return out;
}

}  // namespace

std::string to_string(Predictor p) {
  switch (p) {
    case Predictor::pfsc: return "pfsc";
    case Predictor::current_strength: return "current_strength";
    case Predictor::plus_minus: return "plus_minus";
  }
  return "pfsc";
}

Predictor parse_predictor(std::string_view text) {
  if (text == "pfsc") return Predictor::pfsc;
  if (text == "current_strength") return Predictor::current_strength;
  if (text == "plus_minus") return Predictor::plus_minus;
  throw InputError("unknown predictor '" + std::string(text) +
                   "' (expected pfsc, current_strength or plus_minus)");
}

void BacktestConfig::validate() const {
  if (n_sims < 1) throw InputError("n_sims must be at least 1");
  if (predictors.empty()) throw InputError("at least one predictor is required");
  if (history_days <= 0) throw InputError("history window must be positive");
  rules.validate();
}

OutcomeForecast outcome_probabilities(const ScoreDistributionParams& params) {
  if (!params.valid()) throw std::invalid_argument("invalid score distribution parameters");
  if (params.lambda_home > 1e6 || params.lambda_away > 1e6)
    throw NumericalError("goal rates too large to evaluate outcome probabilities");
  // Home minus away goals is U - V; the shared component cancels, so the
  // outcome only depends on the two independent Poisson parts.
  auto poisson_masses = [](double lambda) {
    const int limit = static_cast<int>(std::ceil(lambda + 12.0 * std::sqrt(lambda + 1.0) + 15.0));
    std::vector<double> mass(static_cast<std::size_t>(limit) + 1);
    mass[0] = std::exp(-lambda);
    for (int k = 1; k <= limit; ++k) mass[k] = mass[k - 1] * lambda / k;
    return mass;
  };
  const auto u = poisson_masses(params.lambda_home);
  const auto v = poisson_masses(params.lambda_away);
  double home = 0.0, draw = 0.0, away = 0.0;
  for (std::size_t x = 0; x < u.size(); ++x) {
    for (std::size_t y = 0; y < v.size(); ++y) {
      const double p = u[x] * v[y];
      if (x > y) {
        home += p;
      } else if (x < y) {
        away += p;
      } else {
        draw += p;
      }
    }
  }
  const double total = home + draw + away;
  return {{home / total, draw / total, away / total}};
}

std::vector<int> assign_matchdays(const std::vector<MatchRecord>& season) {
  std::vector<int> out(season.size());
  const bool rounds = !season.empty() && std::all_of(season.begin(), season.end(),
                                                     [](const MatchRecord& m) { return m.round.has_value(); });
  if (rounds) {
    std::set<int> distinct;
    for (const auto& m : season) distinct.insert(*m.round);
    const std::vector<int> sorted(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i < season.size(); ++i)
      out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), *season[i].round) - sorted.begin()) + 1;
  } else {
    std::set<Date> distinct;
    for (const auto& m : season) distinct.insert(m.date);
    const std::vector<Date> sorted(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i < season.size(); ++i)
      out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), season[i].date) - sorted.begin()) + 1;
  }
  return out;
}

std::map<TeamId, int> final_ranks(const std::vector<MatchRecord>& season, const LeagueRules& rules) {
  const auto state = LeagueState::from_matches(season, rules);
  if (!state.remaining.empty()) throw InputError("season is not fully played");
  std::map<TeamId, int> ranks;
  const auto table = compute_table(state);
  for (std::size_t i = 0; i < table.size(); ++i) ranks[table[i].team] = static_cast<int>(i) + 1;
  return ranks;
}

BacktestReport run_backtest(const BacktestConfig& config, const SeasonData& data) {
  config.validate();
  if (data.season.empty()) throw InputError("season has no matches");
  for (const auto& m : data.season)
    if (!m.played()) throw InputError("incomplete season: " + m.home_team + " - " + m.away_team + " has no result");
  const bool wants_history = std::any_of(config.predictors.begin(), config.predictors.end(),
                                         [](Predictor p) { return p == Predictor::current_strength; });
  if (wants_history && data.history.empty())
    throw InputError("current_strength needs history matches before the season");

  const auto realised = final_ranks(data.season, config.rules);
  std::vector<TeamId> teams;
  for (const auto& [t, r] : realised) teams.push_back(t);

  const auto matchday = assign_matchdays(data.season);
  const int last = *std::max_element(matchday.begin(), matchday.end());

  BacktestReport report;
  for (int k = 1; k <= last; ++k) {
    if (!config.matchdays.empty() &&
        std::find(config.matchdays.begin(), config.matchdays.end(), k) == config.matchdays.end())
      continue;

    LeagueState state;
    state.teams = teams;
    state.rules = config.rules;
    std::vector<MatchRecord> remaining_results;
    for (std::size_t i = 0; i < data.season.size(); ++i) {
      if (matchday[i] <= k) {
        state.played.push_back(data.season[i]);
      } else {
        remaining_results.push_back(data.season[i]);
        state.remaining.push_back(unplayed(data.season[i]));
      }
    }
    const Date stop = std::max_element(state.played.begin(), state.played.end(),
                                       [](const MatchRecord& a, const MatchRecord& b) { return a.date < b.date; })
                          ->date;

    for (Predictor p : config.predictors) {
      BacktestRow row;
      row.matchday = k;
      row.predictor = p;
      row.n_remaining = static_cast<int>(state.remaining.size());
      try {
        PreparedPredictor prepared;
        switch (p) {
          case Predictor::pfsc:
            prepared = prepare_pfsc(teams, state.played);
            break;
          case Predictor::current_strength:
            prepared = prepare_current_strength(
                config, teams, training_window(data.history, state.played, stop, config.history_days), stop);
            break;
          case Predictor::plus_minus:
            prepared = prepare_plus_minus(config, data, teams,
                                          training_window(data.history, state.played, stop, config.history_days),
                                          stop);
            break;
        }
        row.note = prepared.note;
        if (!remaining_results.empty()) {
          std::vector<OutcomeForecast> forecasts;
          std::vector<Outcome> observed;
          for (const auto& m : remaining_results) {
            forecasts.push_back(prepared.forecast(m));
            observed.push_back(outcome_of(*m.home_goals, *m.away_goals));
          }
          row.mean_rps = mean_rps(forecasts, observed);
        }
        const auto matrix =
            simulate_standings(state, *prepared.sampler, {config.n_sims, config.seed, config.workers});
        row.trps = trps(matrix, realised);
      } catch (const std::runtime_error& e) {
        row.mean_rps.reset();
        row.trps.reset();
        row.note = std::string("skipped: ") + e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace standings
