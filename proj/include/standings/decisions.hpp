#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "standings/season_sim.hpp"

namespace standings {

struct RankedTeam {
  TeamId team;
  double expected_rank = 0.0;
};

/// Teams ordered by ascending expected rank; position i is assigned rank i+1.
struct DeterminedStanding {
  std::vector<RankedTeam> order;

  // 1-based assigned rank of `team`. Throws InputError for unknown teams.
  int assigned_rank(const TeamId& team) const;
};

/// Monetary value of finishing in each rank (1-based keys).
struct ProfitSchedule {
  std::map<int, double> by_rank;
};

/// Ties in expected rank go to the higher P(rank 1), then to a random
/// order drawn from `tiebreak_seed`.
DeterminedStanding expected_ranks(const StandingMatrix& matrix, std::uint64_t tiebreak_seed = 0);

/// The team whose P(rank 1) exceeds threshold_percent / 100, if any.
std::optional<TeamId> champion_verdict(const StandingMatrix& matrix, double threshold_percent);

/// Teams whose probability of finishing in the bottom `spots` ranks exceeds
/// threshold_percent / 100, in matrix order.
std::vector<TeamId> relegation_verdict(const StandingMatrix& matrix, int spots,
                                       double threshold_percent);

/// Net payment of each team into the compensation fund: the profit of its
/// assigned rank minus its probability-weighted expected profit. Positive
/// values pay in, negative values are paid out.
std::map<TeamId, double> compensation_fund(const StandingMatrix& matrix,
                                           const DeterminedStanding& standing,
                                           const ProfitSchedule& schedule);

}  // namespace standings
