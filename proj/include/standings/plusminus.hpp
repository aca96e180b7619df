#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "standings/metrics.hpp"
#include "standings/model_core.hpp"
#include "standings/rng.hpp"
#include "standings/season_sim.hpp"

namespace standings {

using PlayerId = std::string;

enum class Position { goalkeeper, defender, midfielder, forward };
enum class Side { home, away };

/// A stretch of a match during which nobody enters or leaves the pitch.
/// goal_diff is home goals minus away goals scored during the stretch.
struct SegmentData {
  std::string match_id;
  double duration_minutes = 0.0;
  std::vector<PlayerId> home_players;
  std::vector<PlayerId> away_players;
  int goal_diff = 0;
  Date date{};
};

struct LineupPlayer {
  PlayerId id;
  Position position = Position::midfielder;
};

enum class EventKind { goal, substitution, red_card };

struct MatchEvent {
  double minute = 0.0;
  EventKind kind = EventKind::goal;
  Side side = Side::home;
  // Scorer (optional) for goals, the player leaving for substitutions and
  // red cards.
  PlayerId player;
  PlayerId player_in;
  std::optional<Position> position_in;
};

/// Starting line-ups plus the time-ordered events of one match.
struct MatchEvents {
  std::string match_id;
  Date date{};
  TeamId home_team;
  TeamId away_team;
  double duration_minutes = 90.0;
  std::vector<LineupPlayer> home_lineup;
  std::vector<LineupPlayer> away_lineup;
  std::vector<MatchEvent> events;

  int home_goals() const;
  int away_goals() const;
};

/// Splits every match at each substitution and red card. Throws InputError
/// for out-of-order events, events past the final whistle, substitutions of
/// players not on the pitch, or a player entering twice.
std::vector<SegmentData> build_segments(std::span<const MatchEvents> matches);

/// Pseudo-player standing in for a whole team when no line-up data exists.
PlayerId team_player(const TeamId& team);

/// One full-length segment per played match, with the two team
/// pseudo-players as the line-ups.
std::vector<SegmentData> single_segments(std::span<const MatchRecord> played,
                                         double duration_minutes = 90.0);

struct RatingOptions {
  // L2 penalty on every player rating; the home advantage is unpenalised.
  double ridge = 1.0;
  // Segment contributions are scaled by duration / full_duration.
  double full_duration_minutes = 90.0;
  WeightScheme weights = WeightScheme::uniform();
};

struct PlayerRatings {
  std::map<PlayerId, double> ratings;
  double home_advantage = 0.0;
  Date fitted_at{};

  // Throws InputError naming the player when unrated.
  double rating(const PlayerId& player) const;
};

/// Minimises
///   sum_s w_s (f_s (sum_home b - sum_away b + home_adv) - g_s)^2 + ridge |b|^2
/// with f_s = duration_s / full_duration and w_s the recency weight.
PlayerRatings fit_ratings(std::span<const SegmentData> segments, const RatingOptions& options = {});

/// The objective above evaluated at `ratings`; unrated players count as 0.
double ratings_objective(std::span<const SegmentData> segments, const PlayerRatings& ratings,
                         const RatingOptions& options = {});

/// Logistic latent-variable model: away win below c1, draw between c1 and
/// c2, home win above c2, with latent coefficient * value + noise.
struct OrderedLogitModel {
  double coefficient = 1.0;
  double c1 = -0.5;
  double c2 = 0.5;

  OutcomeForecast predict(double value) const;
};

/// Fit by maximum likelihood with a small L2 penalty keeping the
/// parameters finite on separable data.
OrderedLogitModel fit_ordered_logit(std::span<const double> values, std::span<const Outcome> outcomes,
                                    double l2_penalty = 1e-4);

/// Sum of home ratings minus sum of away ratings plus home advantage.
double match_value(const PlayerRatings& ratings, std::span<const PlayerId> home_lineup,
                   std::span<const PlayerId> away_lineup);

OutcomeForecast predict_outcome(const OrderedLogitModel& model, const PlayerRatings& ratings,
                                std::span<const PlayerId> home_lineup,
                                std::span<const PlayerId> away_lineup);

struct SquadPlayer {
  PlayerId id;
  Position position = Position::midfielder;
};

struct Lineup {
  std::vector<PlayerId> starters;
  std::vector<PlayerId> unavailable;
};

/// Highest-rated eleven with one goalkeeper and at least three defenders,
/// three midfielders and one forward. Throws InputError if impossible.
std::vector<PlayerId> best_lineup(std::span<const SquadPlayer> squad, const PlayerRatings& ratings);

/// Marks each player unavailable with probability `unavailable_prob`, then
/// picks the best legal eleven from the rest. Redraws availability up to 100
/// times when the remaining players cannot field a legal eleven.
Lineup simulate_lineup(std::span<const SquadPlayer> squad, const PlayerRatings& ratings,
                       double unavailable_prob, Rng& rng);

/// Draws home win / draw / away win from the forecast. Draws end 1-1; the
/// loser scores 0 and the winner 1, 2 or 3 with equal probability.
std::pair<int, int> simulate_match_pm(const OutcomeForecast& forecast, Rng& rng);

/// Everything needed to forecast and simulate matches from player ratings.
struct PlusMinusPredictor {
  PlayerRatings ratings;
  OrderedLogitModel logit;
  std::map<TeamId, std::vector<SquadPlayer>> squads;
  // True when ratings are for team pseudo-players (no line-up data).
  bool degraded = false;
  double unavailable_prob = 0.1;

  bool covers(const TeamId& team) const;
  // Forecast using each side's best available eleven.
  OutcomeForecast forecast(const TeamId& home, const TeamId& away) const;
  std::pair<int, int> sample(const TeamId& home, const TeamId& away, Rng& rng) const;
};

/// Ratings from segments, ordered logit from the starting line-ups of the
/// same matches, squads from everyone who appeared.
PlusMinusPredictor fit_plus_minus(std::span<const MatchEvents> matches, const RatingOptions& options = {});

/// Fallback without line-up data: one segment per match, team pseudo-players.
PlusMinusPredictor fit_plus_minus_degraded(std::span<const MatchRecord> played,
                                           const RatingOptions& options = {});

class PlusMinusSampler final : public ScoreSampler {
 public:
  explicit PlusMinusSampler(PlusMinusPredictor predictor) : predictor_(std::move(predictor)) {}
  std::pair<int, int> sample(const MatchRecord& match, Rng& rng) const override {
    return predictor_.sample(match.home_team, match.away_team, rng);
  }
  bool covers(const TeamId& team) const override { return predictor_.covers(team); }
  const PlusMinusPredictor& predictor() const { return predictor_; }

 private:
  PlusMinusPredictor predictor_;
};

std::string to_string(Position p);
Position parse_position(std::string_view text);

}  // namespace standings
