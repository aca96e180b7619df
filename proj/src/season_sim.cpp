#include "standings/season_sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <set>
#include <thread>
#include <unordered_map>

namespace standings {
namespace {

struct Totals {
  std::int64_t points = 0;
  std::int64_t played = 0;
  std::int64_t goals_for = 0;
  std::int64_t goals_against = 0;
  std::int64_t won = 0;
  std::int64_t drawn = 0;
  std::int64_t lost = 0;
};

// a_num / a_den versus b_num / b_den with nonnegative denominators; an empty
// denominator counts as the value 0. Returns <0, 0, >0.
int compare_ratio(std::int64_t a_num, std::int64_t a_den, std::int64_t b_num, std::int64_t b_den) {
  if (a_den == 0) a_num = 0, a_den = 1;
  if (b_den == 0) b_num = 0, b_den = 1;
  const std::int64_t lhs = a_num * b_den;
  const std::int64_t rhs = b_num * a_den;
  return (lhs > rhs) - (lhs < rhs);
}

int compare_value(std::int64_t a, std::int64_t b) { return (a > b) - (a < b); }

class TableOrder {
 public:
  TableOrder(const LeagueRules& rules, const std::vector<Totals>& totals,
             const std::vector<std::uint32_t>& random_key)
      : rules_(rules), totals_(totals), key_(random_key) {}

  // True if team a ranks above team b.
  bool operator()(std::size_t a, std::size_t b) const {
    const Totals& ta = totals_[a];
    const Totals& tb = totals_[b];
    const bool per_match = rules_.ordering == OrderingMode::points_per_match;
    int c = per_match ? compare_ratio(ta.points, ta.played, tb.points, tb.played)
                      : compare_value(ta.points, tb.points);
    if (c != 0) return c > 0;
    for (Tiebreaker tb_kind : rules_.tiebreakers) {
      switch (tb_kind) {
        case Tiebreaker::goal_difference: {
          const auto gda = ta.goals_for - ta.goals_against;
          const auto gdb = tb.goals_for - tb.goals_against;
          c = per_match ? compare_ratio(gda, ta.played, gdb, tb.played) : compare_value(gda, gdb);
          break;
        }
        case Tiebreaker::goals_scored:
          c = per_match ? compare_ratio(ta.goals_for, ta.played, tb.goals_for, tb.played)
                        : compare_value(ta.goals_for, tb.goals_for);
          break;
        case Tiebreaker::seeded_random:
          c = compare_value(key_[b], key_[a]);
          break;
      }
      if (c != 0) return c > 0;
    }
    return a < b;
  }

 private:
  const LeagueRules& rules_;
  const std::vector<Totals>& totals_;
  const std::vector<std::uint32_t>& key_;
};

void apply_result(const LeagueRules& rules, Totals& home, Totals& away, int hg, int ag) {
  ++home.played;
  ++away.played;
  home.goals_for += hg;
  home.goals_against += ag;
  away.goals_for += ag;
  away.goals_against += hg;
  if (hg > ag) {
    home.points += rules.points_win;
    away.points += rules.points_loss;
    ++home.won;
    ++away.lost;
  } else if (hg < ag) {
    home.points += rules.points_loss;
    away.points += rules.points_win;
    ++home.lost;
    ++away.won;
  } else {
    home.points += rules.points_draw;
    away.points += rules.points_draw;
    ++home.drawn;
    ++away.drawn;
  }
}

std::vector<std::uint32_t> random_keys(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> keys(n);
  std::iota(keys.begin(), keys.end(), 0u);
  // Fisher-Yates with an explicit draw so the permutation is identical on
  // every standard library.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(keys[i - 1], keys[j]);
  }
  return keys;
}

struct IndexedState {
  std::unordered_map<TeamId, std::size_t> index;
  std::vector<Totals> base;
  struct Fixture {
    std::size_t home;
    std::size_t away;
  };
  std::vector<Fixture> remaining;
};

IndexedState index_state(const LeagueState& state) {
  IndexedState s;
  for (std::size_t i = 0; i < state.teams.size(); ++i) s.index.emplace(state.teams[i], i);
  s.base.assign(state.teams.size(), {});
  for (const auto& m : state.played) {
    apply_result(state.rules, s.base[s.index.at(m.home_team)], s.base[s.index.at(m.away_team)],
                 *m.home_goals, *m.away_goals);
  }
  for (const auto& m : state.remaining) {
    s.remaining.push_back({s.index.at(m.home_team), s.index.at(m.away_team)});
  }
  return s;
}

std::vector<std::size_t> order_teams(const LeagueRules& rules, const std::vector<Totals>& totals,
                                     const std::vector<std::uint32_t>& keys) {
  std::vector<std::size_t> order(totals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), TableOrder(rules, totals, keys));
  return order;
}

}  // namespace

void LeagueRules::validate() const {
  if (tiebreakers.empty() || tiebreakers.back() != Tiebreaker::seeded_random)
    throw InputError("tiebreaker list must end with seeded_random");
}

LeagueState LeagueState::from_matches(std::span<const MatchRecord> matches, LeagueRules rules,
                                      std::vector<TeamId> teams) {
  LeagueState s;
  s.rules = std::move(rules);
  if (teams.empty()) {
    std::set<TeamId> seen;
    for (const auto& m : matches) {
      seen.insert(m.home_team);
      seen.insert(m.away_team);
    }
    teams.assign(seen.begin(), seen.end());
  }
  s.teams = std::move(teams);
  for (const auto& m : matches) (m.played() ? s.played : s.remaining).push_back(m);
  s.validate();
  return s;
}

void LeagueState::validate() const {
  rules.validate();
  std::set<TeamId> known(teams.begin(), teams.end());
  if (known.size() != teams.size()) throw InputError("duplicate team in league state");
  std::set<std::pair<TeamId, TeamId>> pairs;
  auto check = [&](const MatchRecord& m, bool want_played) {
    if (m.home_team == m.away_team) throw InputError("team plays itself: " + m.home_team);
    if (!known.count(m.home_team)) throw InputError("unknown team " + m.home_team);
    if (!known.count(m.away_team)) throw InputError("unknown team " + m.away_team);
    if (m.played() != want_played)
      throw InputError(std::string(want_played ? "played" : "remaining") + " match " + m.home_team +
                       " - " + m.away_team + " has inconsistent goals");
    if (!pairs.emplace(m.home_team, m.away_team).second)
      throw InputError("fixture " + m.home_team + " - " + m.away_team + " appears twice");
  };
  for (const auto& m : played) check(m, true);
  for (const auto& m : remaining) check(m, false);
}

std::vector<TableRow> compute_table(const LeagueState& state) {
  state.validate();
  const auto s = index_state(state);
  Rng rng = make_stream(state.rules.tiebreak_seed, 0);
  const auto keys = random_keys(state.teams.size(), rng);
  std::vector<TableRow> table;
  for (std::size_t i : order_teams(state.rules, s.base, keys)) {
    const Totals& t = s.base[i];
    table.push_back({state.teams[i], static_cast<int>(t.played), static_cast<int>(t.won),
                     static_cast<int>(t.drawn), static_cast<int>(t.lost),
                     static_cast<int>(t.goals_for), static_cast<int>(t.goals_against),
                     static_cast<int>(t.points)});
  }
  return table;
}

std::size_t StandingMatrix::index_of(const TeamId& team) const {
  auto it = std::find(teams.begin(), teams.end(), team);
  if (it == teams.end()) throw InputError("team not in standing matrix: " + team);
  return static_cast<std::size_t>(it - teams.begin());
}

void StandingMatrix::check_stochastic(double tol) const {
  const std::size_t n = teams.size();
  if (probs.size() != n * n) throw InputError("standing matrix is not square");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (*this)(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw InputError("standing matrix entry outside [0, 1]");
      row += v;
      col += (*this)(j, i);
    }
    if (std::abs(row - 1.0) > tol) throw InputError("row of " + teams[i] + " does not sum to 1");
    if (std::abs(col - 1.0) > tol)
      throw InputError("column for rank " + std::to_string(i + 1) + " does not sum to 1");
  }
}

std::pair<int, int> sample_match(const ScoreDistributionParams& params, Rng& rng) {
  auto draw = [&rng](double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<int> dist(mean);
    return dist(rng);
  };
  const int shared = draw(params.lambda_c);
  const int home = draw(params.lambda_home);
  const int away = draw(params.lambda_away);
  return {home + shared, away + shared};
}

std::pair<int, int> PoissonSampler::sample(const MatchRecord& match, Rng& rng) const {
  return sample_match(expected_goals(model_, match.home_team, match.away_team, match.neutral_venue), rng);
}

StandingMatrix simulate_standings(const LeagueState& state, const ScoreSampler& sampler,
                                  const SimulationOptions& options) {
  if (options.n_sims < 1) throw InputError("n_sims must be at least 1");
  state.validate();
  for (const auto& t : state.teams)
    if (!sampler.covers(t)) throw InputError("model does not cover team " + t);

  const std::size_t n = state.teams.size();
  StandingMatrix out;
  out.teams = state.teams;
  out.n_sims = options.n_sims;
  out.seed = options.seed;
  out.probs.assign(n * n, 0.0);

  if (state.remaining.empty()) {
    const auto table = compute_table(state);
    for (std::size_t r = 0; r < n; ++r) out(out.index_of(table[r].team), r) = 1.0;
    return out;
  }

  const auto indexed = index_state(state);
  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, options.n_sims));

  std::vector<std::vector<std::int64_t>> counts(workers, std::vector<std::int64_t>(n * n, 0));
  auto run = [&](unsigned w) {
    const std::int64_t begin = options.n_sims * w / workers;
    const std::int64_t end = options.n_sims * (w + 1) / workers;
    auto& local = counts[w];
    std::vector<Totals> totals;
    for (std::int64_t rep = begin; rep < end; ++rep) {
      Rng rng = make_stream(options.seed, static_cast<std::uint64_t>(rep));
      totals = indexed.base;
      for (std::size_t k = 0; k < indexed.remaining.size(); ++k) {
        const auto& fx = indexed.remaining[k];
        const auto [hg, ag] = sampler.sample(state.remaining[k], rng);
        apply_result(state.rules, totals[fx.home], totals[fx.away], hg, ag);
      }
      const auto keys = random_keys(n, rng);
      const auto order = order_teams(state.rules, totals, keys);
      for (std::size_t r = 0; r < n; ++r) ++local[order[r] * n + r];
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<std::int64_t> total(n * n, 0);
  for (const auto& c : counts)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += c[i];
  for (std::size_t i = 0; i < total.size(); ++i)
    out.probs[i] = static_cast<double>(total[i]) / static_cast<double>(options.n_sims);
  return out;
}

}  // namespace standings
