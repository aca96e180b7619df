#include "standings/metrics.hpp"

#include <cmath>
#include <vector>

namespace standings {

bool OutcomeForecast::valid(double tol) const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

Outcome outcome_of(int home_goals, int away_goals) {
  if (home_goals > away_goals) return Outcome::home_win;
  if (home_goals < away_goals) return Outcome::away_win;
  return Outcome::draw;
}

double rps(const OutcomeForecast& forecast, Outcome observed) {
  if (!forecast.valid()) throw InputError("outcome forecast is not a probability vector");
  const int obs = static_cast<int>(observed);
  double cum_obs = 0.0, cum_fc = 0.0, total = 0.0;
  // The third cumulative term is (1 - 1)^2 = 0 and is skipped.
  for (int r = 0; r < 2; ++r) {
    cum_obs += (r == obs) ? 1.0 : 0.0;
    cum_fc += forecast.probs[r];
    const double d = cum_obs - cum_fc;
    total += d * d;
  }
  return total / 2.0;
}

double mean_rps(std::span<const OutcomeForecast> forecasts, std::span<const Outcome> observed) {
  if (forecasts.size() != observed.size()) throw InputError("forecast/outcome count mismatch");
  if (forecasts.empty()) throw InputError("mean RPS of no matches");
  double sum = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) sum += rps(forecasts[i], observed[i]);
  return sum / static_cast<double>(forecasts.size());
}

double trps(const StandingMatrix& prediction, const std::map<TeamId, int>& final_ranks) {
  const std::size_t n = prediction.size();
  if (prediction.probs.size() != n * n) throw InputError("standing matrix is not square");
  if (final_ranks.size() != n) throw InputError("final ranks do not cover the predicted teams");
  if (n < 2) throw InputError("TRPS needs at least two ranks");
  std::vector<bool> taken(n + 1, false);
  for (const auto& [team, rank] : final_ranks) {
    if (rank < 1 || rank > static_cast<int>(n) || taken[rank])
      throw InputError("final ranks are not a permutation of 1.." + std::to_string(n));
    taken[rank] = true;
  }

  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    auto it = final_ranks.find(prediction.teams[t]);
    if (it == final_ranks.end()) throw InputError("no final rank for " + prediction.teams[t]);
    const std::size_t achieved = static_cast<std::size_t>(it->second) - 1;
    double cumulative = 0.0, team_sum = 0.0;
    for (std::size_t r = 0; r + 1 < n; ++r) {
      cumulative += prediction(t, r);
      const double observed = r >= achieved ? 1.0 : 0.0;
      const double d = observed - cumulative;
      team_sum += d * d;
    }
    total += team_sum / static_cast<double>(n - 1);
  }
  return total / static_cast<double>(n);
}

}  // namespace standings
