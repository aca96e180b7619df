#include "standings/model_core.hpp"

#include <catch_amalgamated.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"

using namespace standings;
using Catch::Approx;

TEST_CASE("pmf at (0,0) keeps only the exponential factor", "[model_core][pmf]") {
  const ScoreDistributionParams p{1.3, 0.7, 0.2};
  CHECK(bivariate_poisson_pmf(0, 0, p) == Approx(std::exp(-2.2)).epsilon(1e-14));
}

TEST_CASE("pmf with lambda_c = 0 factorises into independent Poissons", "[model_core][pmf]") {
  const ScoreDistributionParams p{1.6, 0.9, 0.0};
  auto poisson = [](int k, double l) { return std::exp(k * std::log(l) - l - std::lgamma(k + 1.0)); };
  for (int x = 0; x <= 12; ++x)
    for (int y = 0; y <= 12; ++y)
      CHECK(bivariate_poisson_pmf(x, y, p) == Approx(poisson(x, 1.6) * poisson(y, 0.9)).epsilon(1e-12));
}

TEST_CASE("pmf agrees with the binomial closed form", "[model_core][pmf]") {
  // Closed form at (1,1), l = (1, 1, 0.1): e^{-2.1} (1 + 0.1).
  CHECK(bivariate_poisson_pmf(1, 1, {1.0, 1.0, 0.1}) == Approx(0.1347020710782801).epsilon(1e-13));
  CHECK(testing::closed_form_pmf(1, 1, 1.0, 1.0, 0.1) == Approx(0.1347020710782801).epsilon(1e-13));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0.05, 3.5);
  for (int trial = 0; trial < 40; ++trial) {
    const double l1 = lam(rng), l2 = lam(rng), lc = lam(rng) / 3.0;
    for (int x = 0; x <= 8; ++x)
      for (int y = 0; y <= 8; ++y)
        CHECK(bivariate_poisson_pmf(x, y, {l1, l2, lc}) ==
              Approx(testing::closed_form_pmf(x, y, l1, l2, lc)).epsilon(1e-11));
  }
}

TEST_CASE("pmf handles zero rates and large counts", "[model_core][pmf]") {
  // Only the shared component: scores must be equal.
  CHECK(bivariate_poisson_pmf(2, 2, {0.0, 0.0, 1.0}) == Approx(std::exp(-1.0) / 2.0));
  CHECK(bivariate_poisson_pmf(2, 1, {0.0, 0.0, 1.0}) == 0.0);
  CHECK(bivariate_poisson_log_pmf(3, 0, {0.0, 1.0, 0.0}) == -std::numeric_limits<double>::infinity());

  const double lp = bivariate_poisson_log_pmf(400, 380, {150.0, 140.0, 200.0});
  CHECK(std::isfinite(lp));
  CHECK(lp < 0.0);
}

TEST_CASE("pmf rejects negative input", "[model_core][pmf]") {
  CHECK_THROWS_AS(bivariate_poisson_pmf(-1, 0, {1, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(bivariate_poisson_pmf(0, 0, {-1, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(bivariate_poisson_pmf(0, 0, {1, 1, -0.1}), std::invalid_argument);
}

TEST_CASE("truncated pmf mass exceeds 1 - 1e-10 on the 0..40 grid", "[model_core][pmf][property]") {
  for (double l1 : {0.1, 1.0, 2.5, 4.0})
    for (double l2 : {0.1, 1.7, 4.0})
      for (double lc : {0.0, 0.3, 4.0}) {
        double mass = 0.0;
        for (int x = 0; x <= 40; ++x)
          for (int y = 0; y <= 40; ++y) mass += bivariate_poisson_pmf(x, y, {l1, l2, lc});
        CHECK(mass >= 1.0 - 1e-10);
        CHECK(mass <= 1.0 + 1e-10);
      }
}

TEST_CASE("log-pmf gradient matches central differences", "[model_core][gradient]") {
  const ScoreDistributionParams p{1.4, 0.8, 0.3};
  const double h = 1e-6;
  for (auto [x, y] : {std::pair{0, 0}, {2, 1}, {1, 3}, {4, 4}}) {
    const auto g = bivariate_poisson_log_pmf_gradient(x, y, p);
    auto f = [&](double a, double b, double c) { return bivariate_poisson_log_pmf(x, y, {a, b, c}); };
    CHECK(g.d_lambda_home == Approx((f(1.4 + h, 0.8, 0.3) - f(1.4 - h, 0.8, 0.3)) / (2 * h)).epsilon(1e-7));
    CHECK(g.d_lambda_away == Approx((f(1.4, 0.8 + h, 0.3) - f(1.4, 0.8 - h, 0.3)) / (2 * h)).epsilon(1e-7));
    CHECK(g.d_lambda_c == Approx((f(1.4, 0.8, 0.3 + h) - f(1.4, 0.8, 0.3 - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("expected goals follow the log link", "[model_core]") {
  StrengthModel m;
  m.strengths = {{"A", 0.3}, {"B", -0.3}};
  m.intercept = 0.1;
  m.home_effect = 0.2;
  m.lambda_c = 0.07;

  SECTION("equal teams on neutral ground score e^beta0") {
    StrengthModel eq = m;
    eq.strengths = {{"A", 0.0}, {"B", 0.0}};
    const auto p = expected_goals(eq, "A", "B", true);
    CHECK(p.lambda_home == Approx(std::exp(0.1)));
    CHECK(p.lambda_away == Approx(std::exp(0.1)));
  }
  SECTION("without home effect swapping sides swaps the rates") {
    StrengthModel nh = m;
    nh.home_effect = 0.0;
    const auto ab = expected_goals(nh, "A", "B", false);
    const auto ba = expected_goals(nh, "B", "A", false);
    CHECK(ab.lambda_home == Approx(ba.lambda_away));
    CHECK(ab.lambda_away == Approx(ba.lambda_home));
  }
  SECTION("home effect and covariance") {
    const auto p = expected_goals(m, "A", "B", false);
    CHECK(p.lambda_home == Approx(std::exp(0.1 + 0.6 + 0.2)));
    CHECK(p.lambda_away == Approx(std::exp(0.1 - 0.6)));
    CHECK(p.lambda_c == 0.07);
  }
  SECTION("plugging in table-style strengths") {
    StrengthModel t = m;
    t.strengths = {{"PSG", 0.85}, {"Toulouse", -0.59}};
    CHECK(expected_goals(t, "PSG", "Toulouse", false).lambda_home == Approx(std::exp(0.1 + 1.44 + 0.2)));
  }
  SECTION("unknown team") { CHECK_THROWS_AS(expected_goals(m, "A", "Z", false), InputError); }
}

TEST_CASE("match weights decay by half every half period", "[model_core][weights]") {
  const Date ref = testing::day(1000);
  const auto scheme = WeightScheme::decay(ref, 390.0);
  MatchRecord m;
  m.date = ref - std::chrono::days{390};
  CHECK(match_weight(m, scheme) == Approx(0.5).epsilon(1e-15));
  m.date = ref - std::chrono::days{3 * 390};
  CHECK(match_weight(m, scheme) == Approx(0.125).epsilon(1e-15));
  m.date = ref;
  CHECK(match_weight(m, scheme) == 1.0);
  CHECK(match_weight(m, WeightScheme::uniform()) == 1.0);

  m.date = ref + std::chrono::days{1};
  CHECK_THROWS_AS(match_weight(m, scheme), InputError);

  // Older never weighs more.
  double previous = 2.0;
  for (int age = 0; age < 3000; age += 17) {
    m.date = ref - std::chrono::days{age};
    const double w = match_weight(m, scheme);
    CHECK(w > 0.0);
    CHECK(w <= previous);
    previous = w;
  }
}

namespace {

MatchRecord played(const std::string& h, const std::string& a, int hg, int ag, int d = 0) {
  MatchRecord m;
  m.home_team = h;
  m.away_team = a;
  m.home_goals = hg;
  m.away_goals = ag;
  m.date = testing::day(d);
  return m;
}

StrengthModel three_team_model() {
  StrengthModel m;
  m.strengths = {{"A", 0.4}, {"B", -0.1}, {"C", -0.3}};
  m.intercept = 0.15;
  m.home_effect = 0.25;
  m.lambda_c = 0.12;
  return m;
}

}  // namespace

TEST_CASE("log-likelihood identities", "[model_core][likelihood]") {
  const auto model = three_team_model();
  const auto uniform = WeightScheme::uniform();

  SECTION("0-0 match gives minus the total rate") {
    const std::vector<MatchRecord> ms{played("A", "B", 0, 0)};
    const auto p = expected_goals(model, "A", "B", false);
    CHECK(log_likelihood(ms, model, uniform) == Approx(-(p.lambda_home + p.lambda_away + p.lambda_c)));
  }
  SECTION("halving every weight halves the value") {
    std::vector<MatchRecord> ms{played("A", "B", 2, 1, 0), played("C", "A", 0, 3, 0), played("B", "C", 1, 1, 0)};
    const double full = log_likelihood(ms, model, WeightScheme::decay(testing::day(0)));
    const double half = log_likelihood(ms, model, WeightScheme::decay(testing::day(390)));
    CHECK(half == Approx(0.5 * full).epsilon(1e-14));
  }
  SECTION("independent matches add up") {
    const std::vector<MatchRecord> one{played("A", "B", 2, 1)};
    const std::vector<MatchRecord> two{played("C", "A", 0, 3)};
    const std::vector<MatchRecord> both{one[0], two[0]};
    CHECK(log_likelihood(both, model, uniform) ==
          Approx(log_likelihood(one, model, uniform) + log_likelihood(two, model, uniform)));
  }
  SECTION("shifting every strength by a constant changes nothing") {
    std::vector<MatchRecord> ms{played("A", "B", 2, 1), played("C", "A", 0, 3), played("B", "C", 4, 2)};
    const double base = log_likelihood(ms, model, uniform);
    for (double c : {-3.0, -0.01, 0.5, 7.0}) {
      StrengthModel shifted = model;
      for (auto& [t, r] : shifted.strengths) r += c;
      CHECK(std::abs(log_likelihood(ms, shifted, uniform) - base) <= 1e-10);
    }
  }
  SECTION("errors") {
    CHECK_THROWS_AS(log_likelihood({}, model, uniform), InputError);
    MatchRecord sched = played("A", "B", 0, 0);
    sched.home_goals.reset();
    const std::vector<MatchRecord> ms{sched};
    CHECK_THROWS_AS(log_likelihood(ms, model, uniform), InputError);
  }
}

TEST_CASE("analytic likelihood gradient matches central differences", "[model_core][gradient][property]") {
  const auto teams = testing::team_names(6);
  auto fixtures = testing::double_round_robin(teams);
  std::mt19937_64 rng(5);
  testing::play_out(fixtures, testing::spread_model(teams, 1.0), rng);
  const detail::LikelihoodProblem problem(fixtures, teams, WeightScheme::decay(testing::day(400), 120.0));

  std::uniform_real_distribution<double> coord(-0.6, 0.6);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd theta(problem.dimension());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = coord(rng);
    theta[theta.size() - 1] = std::log(0.02 + std::abs(coord(rng)));
    Eigen::VectorXd grad;
    problem.evaluate(theta, &grad);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-5;
      Eigen::VectorXd up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (problem.evaluate(up, nullptr) - problem.evaluate(down, nullptr)) / (2 * h);
      const double rel = std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i]));
      CHECK(rel <= 1e-5);
    }
  }
}

TEST_CASE("fit on symmetric data yields equal strengths", "[model_core][fit]") {
  SECTION("single 1-1 on neutral ground") {
    MatchRecord m = played("A", "B", 1, 1);
    m.neutral_venue = true;
    const std::vector<MatchRecord> ms{m};
    const std::vector<TeamId> teams{"A", "B"};
    const auto model = fit(ms, teams, WeightScheme::uniform());
    CHECK(std::abs(model.strengths.at("A")) < 1e-6);
    CHECK(std::abs(model.strengths.at("B")) < 1e-6);
  }
  SECTION("1-1 home and away") {
    const std::vector<MatchRecord> ms{played("A", "B", 1, 1), played("B", "A", 1, 1, 7)};
    const std::vector<TeamId> teams{"A", "B"};
    const auto model = fit(ms, teams, WeightScheme::uniform());
    CHECK(std::abs(model.strengths.at("A")) < 1e-5);
    CHECK(std::abs(model.strengths.at("A") + model.strengths.at("B")) < 1e-12);
  }
}

TEST_CASE("fit recovers a generating model and is a local maximum", "[model_core][fit]") {
  const auto teams = testing::team_names(20);
  const auto truth = testing::spread_model(teams, 1.2, 0.1);
  std::vector<MatchRecord> all;
  std::mt19937_64 rng(2024);
  for (int season = 0; season < 6; ++season) {
    auto fx = testing::double_round_robin(teams, season * 400);
    testing::play_out(fx, truth, rng);
    all.insert(all.end(), fx.begin(), fx.end());
  }
  const auto model = fit(all, teams, WeightScheme::uniform());

  double sum = 0.0;
  for (const auto& [t, r] : model.strengths) sum += r;
  CHECK(std::abs(sum) <= 1e-8);
  CHECK(model.lambda_c >= 0.0);
  CHECK(model.log_likelihood == Approx(log_likelihood(all, model, WeightScheme::uniform())));
  for (const auto& t : teams) CHECK(model.strengths.at(t) == Approx(truth.strengths.at(t)).margin(0.12));
  CHECK(model.home_effect == Approx(truth.home_effect).margin(0.06));

  // No coordinate move of 1e-4 improves the likelihood.
  const detail::LikelihoodProblem problem(all, teams, WeightScheme::uniform());
  const Eigen::VectorXd best = problem.from_model(model);
  const double at_best = problem.evaluate(best, nullptr);
  for (Eigen::Index i = 0; i < best.size(); ++i) {
    for (double step : {-1e-4, 1e-4}) {
      Eigen::VectorXd moved = best;
      moved[i] += step;
      CHECK(problem.evaluate(moved, nullptr) <= at_best + 1e-9);
    }
  }
}

TEST_CASE("fit clamps a vanishing covariance to zero", "[model_core][fit]") {
  const auto teams = testing::team_names(10);
  const auto truth = testing::spread_model(teams, 1.0, 0.0);
  std::vector<MatchRecord> all;
  std::mt19937_64 rng(99);
  for (int season = 0; season < 8; ++season) {
    auto fx = testing::double_round_robin(teams, season * 300);
    testing::play_out(fx, truth, rng);
    all.insert(all.end(), fx.begin(), fx.end());
  }
  const auto model = fit(all, teams, WeightScheme::uniform());
  CHECK(model.lambda_c >= 0.0);
  CHECK(model.lambda_c < 0.15);
}

TEST_CASE("fit rejects unidentifiable teams and bad input", "[model_core][fit]") {
  const std::vector<MatchRecord> ms{played("A", "B", 1, 0)};
  const std::vector<TeamId> with_c{"A", "B", "C"};
  CHECK_THROWS_WITH(fit(ms, with_c, WeightScheme::uniform()), Catch::Matchers::ContainsSubstring("C has no played matches"));
  const std::vector<TeamId> ab{"A", "B"};
  CHECK_THROWS_AS(fit({}, ab, WeightScheme::uniform()), InputError);
  const std::vector<TeamId> a_only{"A", "Z"};
  CHECK_THROWS_AS(fit(ms, a_only, WeightScheme::uniform()), InputError);
}

TEST_CASE("iteration cap surfaces the best iterate", "[model_core][fit]") {
  const auto teams = testing::team_names(8);
  auto fx = testing::double_round_robin(teams);
  std::mt19937_64 rng(3);
  testing::play_out(fx, testing::spread_model(teams, 1.0), rng);
  FitOptions opts;
  opts.max_iterations = 2;
  try {
    fit(fx, teams, WeightScheme::uniform(), opts);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.best().strengths.size() == teams.size());
    CHECK(std::isfinite(e.best().log_likelihood));
  }
}

TEST_CASE("likelihood is minus infinity where the rates leave double range", "[model_core]") {
  const auto teams = testing::team_names(4);
  auto fixtures = testing::double_round_robin(teams);
  std::mt19937_64 rng(3);
  testing::play_out(fixtures, testing::spread_model(teams, 1.0), rng);
  const detail::LikelihoodProblem problem(fixtures, teams, WeightScheme::uniform());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(problem.dimension());
  Eigen::VectorXd grad;
  for (double beta0 : {-800.0, 800.0}) {
    theta[teams.size() - 1] = beta0;
    CHECK(problem.evaluate(theta, &grad) == -std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("fit refuses data without a finite maximum", "[model_core][fit]") {
  // B has never scored, so its attacking rate wants to reach zero.
  const std::vector<MatchRecord> ms{played("A", "B", 2, 0), played("B", "A", 0, 1)};
  const std::vector<TeamId> ab{"A", "B"};
  CHECK_THROWS_MATCHES(fit(ms, ab, WeightScheme::uniform()), FitError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("diverge")));
}
