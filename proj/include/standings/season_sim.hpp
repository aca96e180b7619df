#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "standings/model_core.hpp"
#include "standings/rng.hpp"

namespace standings {

enum class Tiebreaker { goal_difference, goals_scored, seeded_random };
enum class OrderingMode { total_points, points_per_match };

struct LeagueRules {
  int points_win = 3;
  int points_draw = 1;
  int points_loss = 0;
  // Must end in seeded_random so that the order is total.
  std::vector<Tiebreaker> tiebreakers{Tiebreaker::goal_difference, Tiebreaker::goals_scored,
                                      Tiebreaker::seeded_random};
  OrderingMode ordering = OrderingMode::total_points;
  // Seed for the seeded_random tiebreaker in deterministic tables.
  std::uint64_t tiebreak_seed = 0;

  void validate() const;
};

struct LeagueState {
  std::vector<TeamId> teams;
  std::vector<MatchRecord> played;
  std::vector<MatchRecord> remaining;
  LeagueRules rules;

  // Splits `matches` on whether goals are present. Teams default to every
  // team seen in the matches, sorted by name.
  static LeagueState from_matches(std::span<const MatchRecord> matches, LeagueRules rules,
                                  std::vector<TeamId> teams = {});
  void validate() const;
};

struct TableRow {
  TeamId team;
  int played = 0;
  int won = 0;
  int drawn = 0;
  int lost = 0;
  int goals_for = 0;
  int goals_against = 0;
  int points = 0;

  int goal_difference() const { return goals_for - goals_against; }
  double points_per_match() const { return played ? static_cast<double>(points) / played : 0.0; }
};

/// Current table, best team first, ordered per `state.rules`.
std::vector<TableRow> compute_table(const LeagueState& state);

/// Team x rank probability matrix. probs is row-major: probs[t * n + r] is
/// the probability that teams[t] finishes in rank r + 1.
struct StandingMatrix {
  std::vector<TeamId> teams;
  std::vector<double> probs;
  std::int64_t n_sims = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return teams.size(); }
  double operator()(std::size_t team, std::size_t rank) const { return probs[team * teams.size() + rank]; }
  double& operator()(std::size_t team, std::size_t rank) { return probs[team * teams.size() + rank]; }
  std::size_t index_of(const TeamId& team) const;

  // Checks entries in [0, 1] and row/column sums within tol. Throws InputError.
  void check_stochastic(double tol = 1e-9) const;
};

/// Draws a final score for a scheduled match. Implementations must be
/// immutable so one instance can serve every worker.
class ScoreSampler {
 public:
  virtual ~ScoreSampler() = default;
  virtual std::pair<int, int> sample(const MatchRecord& match, Rng& rng) const = 0;
  virtual bool covers(const TeamId& team) const = 0;
};

/// Trivariate reduction: W ~ Poi(lc), U ~ Poi(lh), V ~ Poi(la); (U+W, V+W).
std::pair<int, int> sample_match(const ScoreDistributionParams& params, Rng& rng);

class PoissonSampler final : public ScoreSampler {
 public:
  explicit PoissonSampler(StrengthModel model) : model_(std::move(model)) {}
  std::pair<int, int> sample(const MatchRecord& match, Rng& rng) const override;
  bool covers(const TeamId& team) const override { return model_.has_team(team); }
  const StrengthModel& model() const { return model_; }

 private:
  StrengthModel model_;
};

struct SimulationOptions {
  std::int64_t n_sims = 100000;
  std::uint64_t seed = 0;
  // 0 picks the hardware concurrency. Never affects the result.
  unsigned workers = 1;
};

/// Monte Carlo completion of the season. Replication r uses the stream
/// make_stream(seed, r) for every random choice it makes.
StandingMatrix simulate_standings(const LeagueState& state, const ScoreSampler& sampler,
                                  const SimulationOptions& options);

}  // namespace standings
