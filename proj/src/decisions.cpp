#include "standings/decisions.hpp"

#include <algorithm>
#include <numeric>

#include "standings/rng.hpp"

namespace standings {
namespace {

void check_threshold(double threshold_percent) {
  if (!(threshold_percent > 0.0 && threshold_percent <= 100.0))
    throw InputError("threshold C must lie in (0, 100]");
}

}  // namespace

int DeterminedStanding::assigned_rank(const TeamId& team) const {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i].team == team) return static_cast<int>(i) + 1;
  throw InputError("team not in determined standing: " + team);
}

DeterminedStanding expected_ranks(const StandingMatrix& matrix, std::uint64_t tiebreak_seed) {
  const std::size_t n = matrix.size();
  std::vector<double> expected(n, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t r = 0; r < n; ++r) expected[t] += static_cast<double>(r + 1) * matrix(t, r);

  Rng rng = make_stream(tiebreak_seed, 0);
  std::vector<std::uint64_t> key(n);
  for (auto& k : key) k = rng();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (expected[a] != expected[b]) return expected[a] < expected[b];
    if (matrix(a, 0) != matrix(b, 0)) return matrix(a, 0) > matrix(b, 0);
    if (key[a] != key[b]) return key[a] < key[b];
    return a < b;
  });

  DeterminedStanding out;
  for (std::size_t i : idx) out.order.push_back({matrix.teams[i], expected[i]});
  return out;
}

std::optional<TeamId> champion_verdict(const StandingMatrix& matrix, double threshold_percent) {
  check_threshold(threshold_percent);
  const double cut = threshold_percent / 100.0;
  for (std::size_t t = 0; t < matrix.size(); ++t)
    if (matrix(t, 0) > cut) return matrix.teams[t];
  return std::nullopt;
}

std::vector<TeamId> relegation_verdict(const StandingMatrix& matrix, int spots,
                                       double threshold_percent) {
  check_threshold(threshold_percent);
  const std::size_t n = matrix.size();
  if (spots < 1 || static_cast<std::size_t>(spots) > n) throw InputError("invalid number of relegation spots");
  const double cut = threshold_percent / 100.0;
  std::vector<TeamId> out;
  for (std::size_t t = 0; t < n; ++t) {
    double p = 0.0;
    for (std::size_t r = n - static_cast<std::size_t>(spots); r < n; ++r) p += matrix(t, r);
    if (p > cut) out.push_back(matrix.teams[t]);
  }
  return out;
}

std::map<TeamId, double> compensation_fund(const StandingMatrix& matrix,
                                           const DeterminedStanding& standing,
                                           const ProfitSchedule& schedule) {
  const std::size_t n = matrix.size();
  if (standing.order.size() != n) throw InputError("determined standing does not match the matrix");
  std::vector<double> profit(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto it = schedule.by_rank.find(static_cast<int>(r) + 1);
    if (it == schedule.by_rank.end())
      throw InputError("profit schedule has no amount for rank " + std::to_string(r + 1));
    profit[r] = it->second;
  }

  std::map<TeamId, double> transfers;
  for (std::size_t t = 0; t < n; ++t) {
    double expected = 0.0;
    for (std::size_t r = 0; r < n; ++r) expected += matrix(t, r) * profit[r];
    const int assigned = standing.assigned_rank(matrix.teams[t]);
    transfers[matrix.teams[t]] = profit[static_cast<std::size_t>(assigned) - 1] - expected;
  }
  return transfers;
}

}  // namespace standings
