// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. The Ligue 1 reproduction checks live in acceptance_ligue1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "standings/backtest.hpp"
#include "standings/data_io.hpp"
#include "standings/decisions.hpp"
#include "standings/metrics.hpp"
#include "standings/model_core.hpp"
#include "standings/plusminus.hpp"
#include "standings/season_sim.hpp"
#include "test_support.hpp"

using namespace standings;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

MatchRecord result(const TeamId& home, const TeamId& away, int hg, int ag, int offset) {
  MatchRecord m;
  m.date = testing::day(offset);
  m.home_team = home;
  m.away_team = away;
  m.home_goals = hg;
  m.away_goals = ag;
  return m;
}

MatchRecord fixture(const TeamId& home, const TeamId& away, int offset) {
  MatchRecord m;
  m.date = testing::day(offset);
  m.home_team = home;
  m.away_team = away;
  return m;
}

StandingMatrix indicator(const std::vector<TeamId>& teams) {
  StandingMatrix m;
  m.teams = teams;
  m.probs.assign(teams.size() * teams.size(), 0.0);
  for (std::size_t i = 0; i < teams.size(); ++i) m(i, i) = 1.0;
  return m;
}

void metric_units() {
  const double r = rps({{0.5, 0.3, 0.2}}, Outcome::home_win);
  const std::vector<TeamId> teams{"A", "B", "C", "D"};
  const double perfect = trps(indicator(teams), {{"A", 1}, {"B", 2}, {"C", 3}, {"D", 4}});
  StandingMatrix uniform;
  uniform.teams = {"A", "B"};
  uniform.probs = {0.5, 0.5, 0.5, 0.5};
  const double half = trps(uniform, {{"A", 1}, {"B", 2}});
  report(4, "metric units", r == 0.145 && perfect == 0.0 && half == 0.25,
         fmt("rps %.17g, perfect trps %.17g, uniform two-team trps %.17g", r, perfect, half));
}

void oracle_equivalence() {
  StrengthModel model;
  model.strengths = {{"A", 0.4}, {"B", 0.0}, {"C", -0.4}};
  model.intercept = 0.15;
  model.home_effect = 0.25;
  model.lambda_c = 0.12;
  LeagueState state;
  state.teams = {"A", "B", "C"};
  state.played = {result("A", "B", 1, 1, 0), result("B", "C", 2, 0, 7), result("C", "A", 1, 0, 14),
                  result("A", "C", 0, 0, 21)};
  state.remaining = {fixture("B", "A", 28), fixture("C", "B", 35)};
  const auto oracle = testing::enumerate_standings(state.teams, state.played, state.remaining, model, 24);
  const std::int64_t n = 1000000;
  const auto m = simulate_standings(state, PoissonSampler(model), {n, 2024, 0});
  double worst = 0.0;
  bool ok = true;
  for (int i = 0; i < 3; ++i)
    for (int r = 0; r < 3; ++r) {
      const double p = oracle[i * 3 + r];
      const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
      const double dev = std::abs(m(i, r) - p);
      if (dev > 3 * se + 1e-12) ok = false;
      if (se > 0) worst = std::max(worst, dev / se);
    }
  report(5, "oracle equivalence", ok, fmt("10^6 replications, largest deviation %.2f standard errors", worst));
}

void numerical_soundness() {
  double min_mass = 1.0, max_mass = 0.0;
  const std::vector<double> rates{0.01, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  for (double l1 : rates)
    for (double l2 : rates)
      for (double lc : {0.0, 0.01, 0.2, 1.0, 2.5, 4.0}) {
        double s = 0.0;
        for (int x = 0; x <= 40; ++x)
          for (int y = 0; y <= 40; ++y) s += bivariate_poisson_pmf(x, y, {l1, l2, lc});
        min_mass = std::min(min_mass, s);
        max_mass = std::max(max_mass, s);
      }
  const bool mass_ok = min_mass >= 1 - 1e-10 && max_mass <= 1 + 1e-10;

  const auto teams = testing::team_names(10);
  auto season = testing::double_round_robin(teams);
  std::mt19937_64 rng(31);
  testing::play_out(season, testing::spread_model(teams, 1.0, 0.15), rng);
  const auto model = fit(season, teams, WeightScheme::uniform());
  const double base = log_likelihood(season, model, WeightScheme::uniform());
  double shift_err = 0.0;
  for (double c : {-5.0, -0.3, 0.001, 2.0, 11.0}) {
    StrengthModel shifted = model;
    for (auto& [t, r] : shifted.strengths) r += c;
    shift_err = std::max(shift_err, std::abs(log_likelihood(season, shifted, WeightScheme::uniform()) - base));
  }
  const bool shift_ok = shift_err <= 1e-10;

  const detail::LikelihoodProblem problem(season, teams, WeightScheme::decay(testing::day(200), 390.0));
  std::uniform_real_distribution<double> coord(-0.7, 0.7);
  double grad_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd theta(problem.dimension());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = coord(rng);
    theta[theta.size() - 1] = std::log(0.01 + std::abs(coord(rng)));
    Eigen::VectorXd grad;
    problem.evaluate(theta, &grad);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-5;
      Eigen::VectorXd up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (problem.evaluate(up, nullptr) - problem.evaluate(down, nullptr)) / (2 * h);
      grad_err = std::max(grad_err, std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i])));
    }
  }
  const bool grad_ok = grad_err <= 1e-5;
  report(6, "numerical soundness", mass_ok && shift_ok && grad_ok,
         fmt("smallest truncated mass 1-%.3g, shift error %.3g, ", 1 - min_mass, shift_err) +
             fmt("worst relative gradient error %.3g", grad_err));
}

void zero_sum_fund() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 23);
    StandingMatrix m;
    m.teams = testing::team_names(n);
    m.probs.assign(n * n, 0.0);
    for (int r = 0; r < n; ++r) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += m(i, r) = u(rng);
      for (int i = 0; i < n; ++i) m(i, r) /= s;
    }
    ProfitSchedule schedule;
    double scale = 0.0;
    for (int r = 1; r <= n; ++r) {
      schedule.by_rank[r] = std::pow(10.0, 6 * u(rng)) * (u(rng) < 0.1 ? -1.0 : 1.0);
      scale = std::max(scale, std::abs(schedule.by_rank[r]));
    }
    const auto transfers = compensation_fund(m, expected_ranks(m, trial), schedule);
    double sum = 0.0;
    for (const auto& [t, x] : transfers) sum += x;
    if (std::abs(sum) > 1e-9 * scale) ok = false;
    worst = std::max(worst, std::abs(sum) / scale);
  }
  report(7, "zero-sum fund", ok, fmt("100 random leagues, largest |sum of transfers| / max|P| = %.3g", worst));
}

SeasonData synthetic_season(int n_teams, std::uint64_t seed) {
  const auto teams = testing::team_names(n_teams);
  std::mt19937_64 rng(seed);
  // Strengths vary from season to season around an even spread.
  auto truth = testing::spread_model(teams, 1.2, 0.1);
  std::normal_distribution<double> jitter(0.0, 0.1);
  for (auto& [t, r] : truth.strengths) r += jitter(rng);
  SeasonData data;
  data.season = testing::double_round_robin(teams);
  testing::play_out(data.season, truth, rng);
  data.history = testing::double_round_robin(teams, -364);
  for (auto& m : data.history) m.round.reset();
  testing::play_out(data.history, truth, rng);
  return data;
}

void reproducibility() {
  const auto teams = testing::team_names(12);
  auto all = testing::double_round_robin(teams);
  std::mt19937_64 rng(8);
  const auto truth = testing::spread_model(teams, 1.0);
  std::vector<MatchRecord> played(all.begin(), all.begin() + 70);
  testing::play_out(played, truth, rng);
  std::copy(played.begin(), played.end(), all.begin());
  const auto state = LeagueState::from_matches(all, LeagueRules{});
  const auto model = fit(state.played, teams, WeightScheme::decay(testing::day(200)));

  auto matrix_bytes = [&](unsigned workers) {
    const auto m = simulate_standings(state, PoissonSampler(model), {20000, 4242, workers});
    std::ostringstream out;
    write_matrix_csv(out, m);
    return out.str() + to_json(m).dump();
  };
  auto report_bytes = [&](unsigned workers) {
    BacktestConfig cfg;
    cfg.predictors = {Predictor::pfsc, Predictor::current_strength, Predictor::plus_minus};
    cfg.n_sims = 500;
    cfg.seed = 4242;
    cfg.workers = workers;
    std::ostringstream out;
    write_report_csv(out, run_backtest(cfg, synthetic_season(8, 5)));
    return out.str();
  };
  const auto m1 = matrix_bytes(1), r1 = report_bytes(1);
  bool ok = true;
  for (unsigned w : {2u, 8u}) ok = ok && matrix_bytes(w) == m1 && report_bytes(w) == r1;
  report(8, "reproducibility", ok,
         fmt("matrix CSV+JSON (%.0f bytes) and backtest report (%.0f bytes) compared across 1, 2 and 8 workers",
             static_cast<double>(m1.size()), static_cast<double>(r1.size())));
}

void synthetic_backtest() {
  const int seasons = 50;
  double early = 0.0, late = 0.0;
  int used = 0, final_rows = 0, final_zero = 0;
  std::vector<std::string> problems;
  for (int s = 0; s < seasons; ++s) {
    BacktestConfig cfg;
    cfg.predictors = {Predictor::pfsc, Predictor::current_strength, Predictor::plus_minus};
    cfg.n_sims = 200;
    cfg.seed = 1000 + s;
    cfg.workers = 0;
    cfg.matchdays = {5, 30, 38};
    const auto report = run_backtest(cfg, synthetic_season(20, 500 + s));
    std::optional<double> at5, at30;
    for (const auto& row : report.rows) {
      if (row.predictor == Predictor::pfsc && row.matchday == 5) at5 = row.mean_rps;
      if (row.predictor == Predictor::pfsc && row.matchday == 30) at30 = row.mean_rps;
      if (row.matchday == 38) {
        ++final_rows;
        if (row.trps && *row.trps == 0.0) ++final_zero;
        else problems.push_back("season " + std::to_string(s) + " " + to_string(row.predictor) + ": " + row.note);
      }
    }
    if (at5 && at30) {
      early += *at5;
      late += *at30;
      ++used;
    } else {
      problems.push_back("season " + std::to_string(s) + ": PFSC row missing at matchday 5 or 30");
    }
  }
  const double mean5 = used ? early / used : std::numeric_limits<double>::quiet_NaN();
  const double mean30 = used ? late / used : std::numeric_limits<double>::quiet_NaN();
  const bool ok = used >= 50 && mean30 <= mean5 && final_rows == 3 * seasons && final_zero == final_rows;
  std::string detail = fmt("%.0f seasons, PFSC mean RPS matchday 5 %.5f, matchday 30 %.5f", used, mean5, mean30) +
                       fmt("; final-matchday TRPS zero for %.0f of %.0f predictor rows", final_zero, final_rows);
  for (std::size_t i = 0; i < std::min<std::size_t>(problems.size(), 5); ++i) detail += "; " + problems[i];
  report(9, "synthetic backtest", ok, detail);
}

SegmentData segment(std::vector<PlayerId> home, std::vector<PlayerId> away, int gd, double minutes) {
  SegmentData s;
  s.match_id = "m";
  s.duration_minutes = minutes;
  s.home_players = std::move(home);
  s.away_players = std::move(away);
  s.goal_diff = gd;
  s.date = testing::day(0);
  return s;
}

void plus_minus_path() {
  const std::vector<SegmentData> segs{
      segment({"a", "b", "c"}, {"d", "e", "f"}, 1, 35), segment({"a", "b", "g"}, {"d", "e", "f"}, 0, 55),
      segment({"d", "e", "f"}, {"a", "b", "c"}, -1, 90), segment({"c", "g", "h"}, {"a", "d", "e"}, 2, 20),
      segment({"c", "g", "h"}, {"a", "d", "f"}, -1, 70), segment({"b", "f", "h"}, {"c", "e", "g"}, 0, 90),
      segment({"a", "e", "h"}, {"b", "d", "g"}, 3, 90),
  };
  const auto oracle = testing::dense_ridge(segs, 1.0);
  const auto ratings = fit_ratings(segs);
  double ls_err = std::abs(ratings.home_advantage - oracle.at("#home"));
  for (const auto& [id, v] : oracle)
    if (id != "#home") ls_err = std::max(ls_err, std::abs(ratings.rating(id) - v));

  Rng rng = make_stream(10, 0);
  const int n = 100000;
  bool draws_ok = true;
  for (int i = 0; i < n; ++i) draws_ok = draws_ok && simulate_match_pm({{0.0, 1.0, 0.0}}, rng) == std::pair{1, 1};
  std::map<int, int> home_goals, away_goals;
  bool losers_ok = true;
  for (int i = 0; i < n; ++i) {
    const auto [h, a] = simulate_match_pm({{1.0, 0.0, 0.0}}, rng);
    losers_ok = losers_ok && a == 0;
    ++home_goals[h];
    const auto [h2, a2] = simulate_match_pm({{0.0, 0.0, 1.0}}, rng);
    losers_ok = losers_ok && h2 == 0;
    ++away_goals[a2];
  }
  double freq_err = 0.0;
  const bool support_ok = home_goals.size() == 3 && away_goals.size() == 3;
  for (int g = 1; g <= 3; ++g) {
    freq_err = std::max(freq_err, std::abs(home_goals[g] / double(n) - 1.0 / 3.0));
    freq_err = std::max(freq_err, std::abs(away_goals[g] / double(n) - 1.0 / 3.0));
  }
  const bool ok = ls_err <= 1e-6 && draws_ok && losers_ok && support_ok && freq_err <= 0.01;
  report(10, "plus-minus path", ok,
         fmt("least squares vs dense solve %.3g; draws all 1-1: ", ls_err) + (draws_ok ? "yes" : "no") +
             fmt("; largest winner-goal frequency error %.4f over 10^5 draws", freq_err));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<void (*)()> checks{metric_units,  oracle_equivalence, numerical_soundness, zero_sum_fund,
                                       reproducibility, synthetic_backtest, plus_minus_path};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i) + 4, "exception", false, e.what());
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of %zu criteria failed (%.1f s)\n", failures, checks.size(), secs);
  std::printf("criteria 1-3 need the Ligue 1 results file and run in acceptance_ligue1\n");
  return failures ? 1 : 0;
}
