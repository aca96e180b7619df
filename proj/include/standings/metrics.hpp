#pragma once

#include <array>
#include <map>
#include <span>

#include "standings/season_sim.hpp"

namespace standings {

enum class Outcome { home_win = 0, draw = 1, away_win = 2 };

/// Probabilities of home win, draw and away win, in that order.
struct OutcomeForecast {
  std::array<double, 3> probs{};

  double home_win() const { return probs[0]; }
  double draw() const { return probs[1]; }
  double away_win() const { return probs[2]; }
  bool valid(double tol = 1e-9) const;
};

Outcome outcome_of(int home_goals, int away_goals);

/// Ranked probability score over the ordered outcomes home/draw/away.
/// 0 is a perfect forecast, 1 the worst possible one.
double rps(const OutcomeForecast& forecast, Outcome observed);

/// Unweighted mean of rps over the pairs. Throws InputError when empty or
/// when the spans differ in length.
double mean_rps(std::span<const OutcomeForecast> forecasts, std::span<const Outcome> observed);

/// Tournament RPS of a standing matrix against realised final ranks
/// (1-based). Cumulative columns are compared for ranks 1..R-1.
double trps(const StandingMatrix& prediction, const std::map<TeamId, int>& final_ranks);

}  // namespace standings
