#include "standings/plusminus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "standings/optimize.hpp"

namespace standings {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  return x < 0.0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
}

// F(b) - F(a) for a < b without cancellation.
double logistic_interval(double a, double b) {
  return sigmoid(b) * sigmoid(-a) * -std::expm1(a - b);
}

std::vector<PlayerId> ids_of(const std::vector<LineupPlayer>& lineup) {
  std::vector<PlayerId> out;
  for (const auto& p : lineup) out.push_back(p.id);
  return out;
}

}  // namespace

std::string to_string(Position p) {
  switch (p) {
    case Position::goalkeeper: return "GK";
    case Position::defender: return "DF";
    case Position::midfielder: return "MF";
    case Position::forward: return "FW";
  }
  return "MF";
}

Position parse_position(std::string_view text) {
  if (text == "GK" || text == "G") return Position::goalkeeper;
  if (text == "DF" || text == "D") return Position::defender;
  if (text == "MF" || text == "M") return Position::midfielder;
  if (text == "FW" || text == "F") return Position::forward;
  throw InputError("unknown position '" + std::string(text) + "' (expected GK, DF, MF or FW)");
}

int MatchEvents::home_goals() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(), [](const MatchEvent& e) {
    return e.kind == EventKind::goal && e.side == Side::home;
  }));
}

int MatchEvents::away_goals() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(), [](const MatchEvent& e) {
    return e.kind == EventKind::goal && e.side == Side::away;
  }));
}

std::vector<SegmentData> build_segments(std::span<const MatchEvents> matches) {
  std::vector<SegmentData> out;
  for (const auto& m : matches) {
    const std::string where = "match " + m.match_id + ": ";
    if (!(m.duration_minutes > 0.0)) throw InputError(where + "duration must be positive");
    if (m.home_lineup.empty() || m.away_lineup.empty()) throw InputError(where + "empty line-up");

    std::vector<PlayerId> on[2] = {ids_of(m.home_lineup), ids_of(m.away_lineup)};
    std::set<PlayerId> used;
    for (const auto& side : on)
      for (const auto& p : side)
        if (!used.insert(p).second) throw InputError(where + "player " + p + " listed twice");

    const std::size_t first = out.size();
    double start = 0.0, last_minute = 0.0;
    int goal_diff = 0;
    auto close = [&](double end) {
      if (end > start) {
        out.push_back({m.match_id, end - start, on[0], on[1], goal_diff, m.date});
        goal_diff = 0;
        start = end;
      }
    };

    for (const auto& e : m.events) {
      if (e.minute < last_minute) throw InputError(where + "events out of order");
      if (e.minute < 0.0 || e.minute > m.duration_minutes)
        throw InputError(where + "event outside the match duration");
      last_minute = e.minute;
      auto& pitch = on[e.side == Side::home ? 0 : 1];
      switch (e.kind) {
        case EventKind::goal:
          goal_diff += e.side == Side::home ? 1 : -1;
          break;
        case EventKind::substitution: {
          close(e.minute);
          auto it = std::find(pitch.begin(), pitch.end(), e.player);
          if (it == pitch.end()) throw InputError(where + "substituted player " + e.player + " is not on the pitch");
          if (e.player_in.empty() || !used.insert(e.player_in).second)
            throw InputError(where + "player " + e.player_in + " cannot come on");
          *it = e.player_in;
          break;
        }
        case EventKind::red_card: {
          close(e.minute);
          auto it = std::find(pitch.begin(), pitch.end(), e.player);
          if (it == pitch.end()) throw InputError(where + "sent-off player " + e.player + " is not on the pitch");
          pitch.erase(it);
          if (pitch.empty()) throw InputError(where + "no players left on the pitch");
          break;
        }
      }
    }
    close(m.duration_minutes);
    // Goals after a change at the final whistle belong to the last stretch.
    if (goal_diff != 0) {
      if (out.size() == first) throw InputError(where + "no playing time");
      out.back().goal_diff += goal_diff;
    }
  }
  return out;
}

PlayerId team_player(const TeamId& team) { return "team:" + team; }

std::vector<SegmentData> single_segments(std::span<const MatchRecord> played, double duration_minutes) {
  std::vector<SegmentData> out;
  for (const auto& m : played) {
    if (!m.played()) throw InputError("unplayed match " + m.home_team + " - " + m.away_team);
    out.push_back({format_iso(m.date) + " " + m.home_team + " - " + m.away_team, duration_minutes,
                   {team_player(m.home_team)}, {team_player(m.away_team)},
                   *m.home_goals - *m.away_goals, m.date});
  }
  return out;
}

double PlayerRatings::rating(const PlayerId& player) const {
  auto it = ratings.find(player);
  if (it == ratings.end()) throw InputError("unrated player: " + player);
  return it->second;
}

namespace {

double segment_weight(const SegmentData& s, const WeightScheme& scheme) {
  MatchRecord stub;
  stub.date = s.date;
  return match_weight(stub, scheme);
}

}  // namespace

PlayerRatings fit_ratings(std::span<const SegmentData> segments, const RatingOptions& options) {
  if (segments.empty()) throw InputError("no segments to fit ratings on");
  if (!(options.ridge > 0.0)) throw InputError("ridge penalty must be positive");
  double total_duration = 0.0;
  for (const auto& s : segments) {
    if (!(s.duration_minutes > 0.0)) throw InputError("segment with non-positive duration in " + s.match_id);
    total_duration += s.duration_minutes;
  }
  if (!(total_duration > 0.0)) throw InputError("segments have zero total duration");

  std::unordered_map<PlayerId, int> index;
  std::vector<PlayerId> players;
  for (const auto& s : segments) {
    for (const auto* side : {&s.home_players, &s.away_players})
      for (const auto& p : *side)
        if (index.emplace(p, static_cast<int>(players.size())).second) players.push_back(p);
  }
  const int n = static_cast<int>(players.size());
  const int dim = n + 1;  // last column: home advantage

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  std::vector<std::pair<int, double>> row;
  for (const auto& s : segments) {
    const double f = s.duration_minutes / options.full_duration_minutes;
    const double w = segment_weight(s, options.weights);
    row.clear();
    for (const auto& p : s.home_players) row.emplace_back(index.at(p), f);
    for (const auto& p : s.away_players) row.emplace_back(index.at(p), -f);
    row.emplace_back(n, f);
    for (const auto& [i, a] : row) {
      rhs[i] += w * a * s.goal_diff;
      for (const auto& [j, b] : row) normal(i, j) += w * a * b;
    }
  }
  for (int i = 0; i < n; ++i) normal(i, i) += options.ridge;

  const Eigen::VectorXd solution = normal.ldlt().solve(rhs);
  if (!solution.allFinite()) throw NumericalError("plus-minus normal equations could not be solved");

  PlayerRatings out;
  for (int i = 0; i < n; ++i) out.ratings[players[i]] = solution[i];
  out.home_advantage = solution[n];
  out.fitted_at = std::max_element(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
                    return a.date < b.date;
                  })->date;
  return out;
}

double ratings_objective(std::span<const SegmentData> segments, const PlayerRatings& ratings,
                         const RatingOptions& options) {
  auto value_of = [&](const PlayerId& p) {
    auto it = ratings.ratings.find(p);
    return it == ratings.ratings.end() ? 0.0 : it->second;
  };
  double total = 0.0;
  for (const auto& s : segments) {
    double v = ratings.home_advantage;
    for (const auto& p : s.home_players) v += value_of(p);
    for (const auto& p : s.away_players) v -= value_of(p);
    const double r = s.duration_minutes / options.full_duration_minutes * v - s.goal_diff;
    total += segment_weight(s, options.weights) * r * r;
  }
  for (const auto& [p, b] : ratings.ratings) total += options.ridge * b * b;
  return total;
}

OutcomeForecast OrderedLogitModel::predict(double value) const {
  const double z = coefficient * value;
  OutcomeForecast f;
  f.probs[2] = sigmoid(c1 - z);
  f.probs[0] = sigmoid(z - c2);
  f.probs[1] = logistic_interval(c1 - z, c2 - z);
  double sum = 0.0;
  for (auto& p : f.probs) {
    p = std::max(p, std::numeric_limits<double>::min());
    sum += p;
  }
  for (auto& p : f.probs) p /= sum;
  return f;
}

OrderedLogitModel fit_ordered_logit(std::span<const double> values, std::span<const Outcome> outcomes,
                                    double l2_penalty) {
  if (values.size() != outcomes.size()) throw InputError("value/outcome count mismatch");
  if (values.empty()) throw InputError("no matches to fit the ordered logit on");

  // theta = (coefficient, c1, log(c2 - c1))
  Objective objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const double a = th[0], c1 = th[1], gap = std::exp(th[2]), c2 = c1 + gap;
    double nll = l2_penalty * (a * a + c1 * c1 + c2 * c2);
    double ga = 2.0 * l2_penalty * a;
    double gc1 = 2.0 * l2_penalty * c1;
    double gc2 = 2.0 * l2_penalty * c2;  // d/dc2, mapped to theta below
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = values[i];
      const double z = a * v;
      switch (outcomes[i]) {
        case Outcome::away_win: {
          // log F(c1 - z)
          nll -= log_sigmoid(c1 - z);
          const double s = sigmoid(z - c1);  // 1 - F(c1 - z)
          gc1 -= s;
          ga += s * v;
          break;
        }
        case Outcome::home_win: {
          // log F(z - c2)
          nll -= log_sigmoid(z - c2);
          const double s = sigmoid(c2 - z);
          gc2 += s;
          ga -= s * v;
          break;
        }
        case Outcome::draw: {
          const double p = logistic_interval(c1 - z, c2 - z);
          nll -= std::log(p);
          const double f2 = sigmoid(c2 - z) * sigmoid(z - c2);
          const double f1 = sigmoid(c1 - z) * sigmoid(z - c1);
          gc2 -= f2 / p;
          gc1 += f1 / p;
          ga -= (-f2 + f1) * v / p;
          break;
        }
      }
    }
    grad.resize(3);
    grad[0] = ga;
    grad[1] = gc1 + gc2;
    grad[2] = gc2 * gap;
    return nll;
  };

  Eigen::VectorXd theta0(3);
  theta0 << 1.0, -0.5, 0.0;
  const auto res = minimize_bfgs(objective, theta0, {500, 1e-12, 1e-8});
  if (!res.x.allFinite()) throw NumericalError("ordered logit fit diverged");
  return {res.x[0], res.x[1], res.x[1] + std::exp(res.x[2])};
}

double match_value(const PlayerRatings& ratings, std::span<const PlayerId> home_lineup,
                   std::span<const PlayerId> away_lineup) {
  double v = ratings.home_advantage;
  for (const auto& p : home_lineup) v += ratings.rating(p);
  for (const auto& p : away_lineup) v -= ratings.rating(p);
  return v;
}

OutcomeForecast predict_outcome(const OrderedLogitModel& model, const PlayerRatings& ratings,
                                std::span<const PlayerId> home_lineup,
                                std::span<const PlayerId> away_lineup) {
  return model.predict(match_value(ratings, home_lineup, away_lineup));
}

namespace {

bool can_field_eleven(std::span<const SquadPlayer> squad, const std::vector<bool>& available) {
  int count[4] = {0, 0, 0, 0};
  int total = 0;
  for (std::size_t i = 0; i < squad.size(); ++i) {
    if (!available[i]) continue;
    ++count[static_cast<int>(squad[i].position)];
    ++total;
  }
  const int outfield = count[1] + count[2] + count[3];
  return count[0] >= 1 && count[1] >= 3 && count[2] >= 3 && count[3] >= 1 && outfield >= 10 && total >= 11;
}

std::vector<PlayerId> pick_best(std::span<const SquadPlayer> squad, const PlayerRatings& ratings,
                                const std::vector<bool>& available) {
  std::vector<std::pair<double, std::size_t>> by_pos[4];
  for (std::size_t i = 0; i < squad.size(); ++i) {
    if (!available[i]) continue;
    by_pos[static_cast<int>(squad[i].position)].emplace_back(ratings.rating(squad[i].id), i);
  }
  auto better = [&](const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return squad[a.second].id < squad[b.second].id;
  };
  for (auto& v : by_pos) std::sort(v.begin(), v.end(), better);

  // The top players of each position fill the minimum quota; the remaining
  // three outfield places go to the best of everyone left.
  const std::size_t quota[4] = {1, 3, 3, 1};
  std::vector<PlayerId> starters;
  std::vector<std::pair<double, std::size_t>> rest;
  for (int pos = 0; pos < 4; ++pos) {
    for (std::size_t k = 0; k < by_pos[pos].size(); ++k) {
      if (k < quota[pos]) {
        starters.push_back(squad[by_pos[pos][k].second].id);
      } else if (pos != 0) {
        rest.push_back(by_pos[pos][k]);
      }
    }
  }
  std::sort(rest.begin(), rest.end(), better);
  for (std::size_t k = 0; starters.size() < 11; ++k) starters.push_back(squad[rest[k].second].id);
  return starters;
}

}  // namespace

std::vector<PlayerId> best_lineup(std::span<const SquadPlayer> squad, const PlayerRatings& ratings) {
  const std::vector<bool> all(squad.size(), true);
  if (!can_field_eleven(squad, all)) throw InputError("squad cannot field a legal eleven");
  return pick_best(squad, ratings, all);
}

Lineup simulate_lineup(std::span<const SquadPlayer> squad, const PlayerRatings& ratings,
                       double unavailable_prob, Rng& rng) {
  if (!(unavailable_prob >= 0.0 && unavailable_prob < 1.0))
    throw InputError("unavailability probability must lie in [0, 1)");
  std::vector<bool> available(squad.size(), true);
  if (!can_field_eleven(squad, available)) throw InputError("squad cannot field a legal eleven");

  std::bernoulli_distribution missing(unavailable_prob);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (std::size_t i = 0; i < squad.size(); ++i) available[i] = !missing(rng);
    if (!can_field_eleven(squad, available)) continue;
    Lineup out;
    out.starters = pick_best(squad, ratings, available);
    for (std::size_t i = 0; i < squad.size(); ++i)
      if (!available[i]) out.unavailable.push_back(squad[i].id);
    return out;
  }
  throw InputError("no legal eleven after 100 availability draws");
}

std::pair<int, int> simulate_match_pm(const OutcomeForecast& forecast, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> winner_goals(1, 3);
  const double u = unit(rng);
  if (u < forecast.home_win()) return {winner_goals(rng), 0};
  if (u < forecast.home_win() + forecast.draw()) return {1, 1};
  return {0, winner_goals(rng)};
}

bool PlusMinusPredictor::covers(const TeamId& team) const {
  if (degraded) return ratings.ratings.count(team_player(team)) != 0;
  return squads.count(team) != 0;
}

OutcomeForecast PlusMinusPredictor::forecast(const TeamId& home, const TeamId& away) const {
  if (degraded) {
    const PlayerId h[] = {team_player(home)};
    const PlayerId a[] = {team_player(away)};
    return predict_outcome(logit, ratings, h, a);
  }
  auto hs = squads.find(home);
  auto as = squads.find(away);
  if (hs == squads.end() || as == squads.end()) throw InputError("no squad for " + home + " or " + away);
  const auto hl = best_lineup(hs->second, ratings);
  const auto al = best_lineup(as->second, ratings);
  return predict_outcome(logit, ratings, hl, al);
}

std::pair<int, int> PlusMinusPredictor::sample(const TeamId& home, const TeamId& away, Rng& rng) const {
  if (degraded) return simulate_match_pm(forecast(home, away), rng);
  auto hs = squads.find(home);
  auto as = squads.find(away);
  if (hs == squads.end() || as == squads.end()) throw InputError("no squad for " + home + " or " + away);
  const auto hl = simulate_lineup(hs->second, ratings, unavailable_prob, rng);
  const auto al = simulate_lineup(as->second, ratings, unavailable_prob, rng);
  return simulate_match_pm(predict_outcome(logit, ratings, hl.starters, al.starters), rng);
}

PlusMinusPredictor fit_plus_minus(std::span<const MatchEvents> matches, const RatingOptions& options) {
  PlusMinusPredictor out;
  const auto segments = build_segments(matches);
  out.ratings = fit_ratings(segments, options);

  std::vector<double> values;
  std::vector<Outcome> outcomes;
  for (const auto& m : matches) {
    values.push_back(match_value(out.ratings, ids_of(m.home_lineup), ids_of(m.away_lineup)));
    outcomes.push_back(outcome_of(m.home_goals(), m.away_goals()));
  }
  out.logit = fit_ordered_logit(values, outcomes);

  // Squads keep each player's most recently listed position.
  std::map<TeamId, std::map<PlayerId, Position>> seen;
  for (const auto& m : matches) {
    for (const auto& p : m.home_lineup) seen[m.home_team][p.id] = p.position;
    for (const auto& p : m.away_lineup) seen[m.away_team][p.id] = p.position;
    for (const auto& e : m.events) {
      if (e.kind != EventKind::substitution) continue;
      auto& team = seen[e.side == Side::home ? m.home_team : m.away_team];
      if (e.position_in) {
        team[e.player_in] = *e.position_in;
      } else {
        team.emplace(e.player_in, Position::midfielder);
      }
    }
  }
  for (const auto& [team, players] : seen)
    for (const auto& [id, pos] : players) out.squads[team].push_back({id, pos});
  return out;
}

PlusMinusPredictor fit_plus_minus_degraded(std::span<const MatchRecord> played, const RatingOptions& options) {
  PlusMinusPredictor out;
  out.degraded = true;
  const auto segments = single_segments(played, options.full_duration_minutes);
  out.ratings = fit_ratings(segments, options);
  std::vector<double> values;
  std::vector<Outcome> outcomes;
  for (const auto& s : segments) {
    values.push_back(match_value(out.ratings, s.home_players, s.away_players));
    outcomes.push_back(outcome_of(s.goal_diff, 0));
  }
  out.logit = fit_ordered_logit(values, outcomes);
  return out;
}

}  // namespace standings
