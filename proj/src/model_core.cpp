#include "standings/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "standings/optimize.hpp"

namespace standings {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// k * log(lambda) with the convention 0 * log(0) = 0.
double scaled_log(int k, double lambda) {
  if (k == 0) return 0.0;
  return lambda > 0.0 ? k * std::log(lambda) : kNegInf;
}

void check_params(const ScoreDistributionParams& p) {
  if (!p.valid()) throw std::invalid_argument("bivariate Poisson parameters must be finite and >= 0");
}

}  // namespace

bool ScoreDistributionParams::valid() const {
  return std::isfinite(lambda_home) && std::isfinite(lambda_away) && std::isfinite(lambda_c) &&
         lambda_home >= 0.0 && lambda_away >= 0.0 && lambda_c >= 0.0;
}

double bivariate_poisson_log_pmf(int x, int y, const ScoreDistributionParams& p) {
  if (x < 0 || y < 0) throw std::invalid_argument("goal counts must be nonnegative");
  check_params(p);

  // Sum over the shared component k: Poi(x-k; l1) Poi(y-k; l2) Poi(k; lc),
  // accumulated as a running log-sum-exp.
  double max_term = kNegInf;
  double acc = 0.0;
  const int kmax = std::min(x, y);
  for (int k = 0; k <= kmax; ++k) {
    const double term = scaled_log(x - k, p.lambda_home) + scaled_log(y - k, p.lambda_away) +
                        scaled_log(k, p.lambda_c) - std::lgamma(x - k + 1.0) -
                        std::lgamma(y - k + 1.0) - std::lgamma(k + 1.0);
    if (term == kNegInf) continue;
    if (term > max_term) {
      acc = acc * std::exp(max_term - term) + 1.0;
      max_term = term;
    } else {
      acc += std::exp(term - max_term);
    }
  }
  if (max_term == kNegInf) return kNegInf;
  return max_term + std::log(acc) - (p.lambda_home + p.lambda_away + p.lambda_c);
}

double bivariate_poisson_pmf(int x, int y, const ScoreDistributionParams& params) {
  return std::exp(bivariate_poisson_log_pmf(x, y, params));
}

LogPmfGradient bivariate_poisson_log_pmf_gradient(int x, int y,
                                                  const ScoreDistributionParams& p) {
  // dP(x,y)/dl1 = P(x-1,y) - P(x,y), dP/dl2 = P(x,y-1) - P, dP/dlc = P(x-1,y-1) - P.
  const double lp = bivariate_poisson_log_pmf(x, y, p);
  if (lp == kNegInf) throw std::domain_error("log-pmf gradient undefined at zero probability");
  auto ratio = [&](int a, int b) {
    if (a < 0 || b < 0) return 0.0;
    return std::exp(bivariate_poisson_log_pmf(a, b, p) - lp);
  };
  return {ratio(x - 1, y) - 1.0, ratio(x, y - 1) - 1.0, ratio(x - 1, y - 1) - 1.0};
}

ScoreDistributionParams expected_goals(const StrengthModel& model, const TeamId& home_team,
                                       const TeamId& away_team, bool neutral) {
  auto hi = model.strengths.find(home_team);
  if (hi == model.strengths.end()) throw InputError("team not in model: " + home_team);
  auto ai = model.strengths.find(away_team);
  if (ai == model.strengths.end()) throw InputError("team not in model: " + away_team);
  const double diff = hi->second - ai->second;
  return {std::exp(model.intercept + diff + (neutral ? 0.0 : model.home_effect)),
          std::exp(model.intercept - diff), model.lambda_c};
}

double match_weight(const MatchRecord& match, const WeightScheme& scheme) {
  if (scheme.mode == WeightMode::uniform) return 1.0;
  if (!(scheme.half_period_days > 0.0)) throw InputError("half period must be positive");
  const long age = days_between(match.date, scheme.reference_date);
  if (age < 0)
    throw InputError("match " + match.home_team + " - " + match.away_team + " on " +
                     format_iso(match.date) + " is after the reference date " +
                     format_iso(scheme.reference_date));
  return std::pow(0.5, static_cast<double>(age) / scheme.half_period_days);
}

double log_likelihood(std::span<const MatchRecord> matches, const StrengthModel& model,
                      const WeightScheme& scheme) {
  if (matches.empty()) throw InputError("log-likelihood of an empty match list");
  double total = 0.0;
  for (const auto& m : matches) {
    if (!m.played()) throw InputError("unplayed match in likelihood: " + m.home_team + " - " + m.away_team);
    const auto params = expected_goals(model, m.home_team, m.away_team, m.neutral_venue);
    total += match_weight(m, scheme) * bivariate_poisson_log_pmf(*m.home_goals, *m.away_goals, params);
  }
  return total;
}

namespace detail {

LikelihoodProblem::LikelihoodProblem(std::span<const MatchRecord> matches,
                                     std::span<const TeamId> team_list,
                                     const WeightScheme& scheme)
    : teams(team_list.begin(), team_list.end()) {
  std::unordered_map<TeamId, int> index;
  for (int i = 0; i < static_cast<int>(teams.size()); ++i) {
    if (!index.emplace(teams[i], i).second) throw InputError("duplicate team: " + teams[i]);
  }
  rows.reserve(matches.size());
  for (const auto& m : matches) {
    if (!m.played()) throw InputError("unplayed match passed to fit: " + m.home_team + " - " + m.away_team);
    auto h = index.find(m.home_team);
    auto a = index.find(m.away_team);
    if (h == index.end()) throw InputError("match references unknown team " + m.home_team);
    if (a == index.end()) throw InputError("match references unknown team " + m.away_team);
    rows.push_back({h->second, a->second, *m.home_goals, *m.away_goals, m.neutral_venue,
                    match_weight(m, scheme)});
  }
}

double LikelihoodProblem::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
  const int n = static_cast<int>(teams.size());
  std::vector<double> r(n);
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    r[i] = theta[i];
    sum += theta[i];
  }
  r[n - 1] = -sum;
  const double beta0 = theta[n - 1];
  const double home = theta[n];
  const double lambda_c = std::exp(theta[n + 1]);

  // Gradient with respect to the full strength vector first, then reduced.
  std::vector<double> g_r(n, 0.0);
  double g_beta0 = 0.0, g_home = 0.0, g_loglc = 0.0;
  double total = 0.0;
  for (const auto& row : rows) {
    const double diff = r[row.home] - r[row.away];
    const double eta_h = beta0 + diff + (row.neutral ? 0.0 : home);
    const double eta_a = beta0 - diff;
    const ScoreDistributionParams p{std::exp(eta_h), std::exp(eta_a), lambda_c};
    // Trial points of a line search may overflow or underflow the rates.
    if (!p.valid()) return -std::numeric_limits<double>::infinity();
    const double lp = bivariate_poisson_log_pmf(row.home_goals, row.away_goals, p);
    if (lp == -std::numeric_limits<double>::infinity()) return lp;
    total += row.weight * lp;
    if (grad) {
      const auto d = bivariate_poisson_log_pmf_gradient(row.home_goals, row.away_goals, p);
      const double gh = row.weight * d.d_lambda_home * p.lambda_home;  // d/d eta_h
      const double ga = row.weight * d.d_lambda_away * p.lambda_away;  // d/d eta_a
      g_r[row.home] += gh - ga;
      g_r[row.away] += ga - gh;
      g_beta0 += gh + ga;
      if (!row.neutral) g_home += gh;
      g_loglc += row.weight * d.d_lambda_c * lambda_c;
    }
  }
  if (grad) {
    grad->resize(dimension());
    for (int i = 0; i + 1 < n; ++i) (*grad)[i] = g_r[i] - g_r[n - 1];
    (*grad)[n - 1] = g_beta0;
    (*grad)[n] = g_home;
    (*grad)[n + 1] = g_loglc;
  }
  return total;
}

StrengthModel LikelihoodProblem::to_model(const Eigen::VectorXd& theta) const {
  const int n = static_cast<int>(teams.size());
  StrengthModel m;
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    m.strengths[teams[i]] = theta[i];
    sum += theta[i];
  }
  m.strengths[teams[n - 1]] = -sum;
  m.intercept = theta[n - 1];
  m.home_effect = theta[n];
  m.lambda_c = std::exp(theta[n + 1]);
  return m;
}

Eigen::VectorXd LikelihoodProblem::from_model(const StrengthModel& model) const {
  const int n = static_cast<int>(teams.size());
  Eigen::VectorXd theta(dimension());
  double mean = 0.0;
  for (const auto& t : teams) mean += model.strengths.at(t);
  mean /= n;
  for (int i = 0; i + 1 < n; ++i) theta[i] = model.strengths.at(teams[i]) - mean;
  theta[n - 1] = model.intercept;
  theta[n] = model.home_effect;
  theta[n + 1] = std::log(std::max(model.lambda_c, 1e-300));
  return theta;
}

}  // namespace detail

StrengthModel fit(std::span<const MatchRecord> matches, std::span<const TeamId> teams,
                  const WeightScheme& scheme, const FitOptions& options) {
  if (matches.empty()) throw InputError("cannot fit a model without played matches");
  if (teams.size() < 2) throw InputError("need at least two teams to fit strengths");
  detail::LikelihoodProblem problem(matches, teams, scheme);

  std::vector<int> appearances(teams.size(), 0);
  double goals = 0.0, weight = 0.0;
  for (const auto& row : problem.rows) {
    ++appearances[row.home];
    ++appearances[row.away];
    goals += row.weight * (row.home_goals + row.away_goals);
    weight += row.weight;
  }
  for (std::size_t i = 0; i < teams.size(); ++i) {
    if (appearances[i] == 0)
      throw InputError("team " + teams[i] + " has no played matches; its strength is unidentifiable");
  }

  const int n = static_cast<int>(teams.size());
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(problem.dimension());
  theta0[n - 1] = std::log(std::max(goals / (2.0 * weight), 0.05));
  theta0[n] = 0.1;
  theta0[n + 1] = std::log(0.05);

  Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const double ll = problem.evaluate(theta, &grad);
    grad = -grad;
    return -ll;
  };
  const auto result = minimize_bfgs(
      objective, theta0,
      {options.max_iterations, options.relative_tolerance, options.gradient_tolerance});

  StrengthModel model = problem.to_model(result.x);
  if (model.lambda_c < options.lambda_c_floor) model.lambda_c = 0.0;
  // Separable data (say, a team that has never conceded) has no finite
  // maximum; the optimiser then stalls at absurd strength gaps. The
  // intercept may drift to -inf harmlessly when the shared component
  // explains every goal.
  const double kDivergence = 10.0;
  bool diverged = false;
  for (const auto& [team, r] : model.strengths) diverged = diverged || !(std::abs(r) <= kDivergence);
  if (diverged) throw FitError("strength estimates diverge: the matches do not determine finite strengths", model);
  model.log_likelihood = log_likelihood(matches, model, scheme);
  model.fitted_at = scheme.mode == WeightMode::exponential_decay
                        ? scheme.reference_date
                        : std::max_element(matches.begin(), matches.end(),
                                           [](const MatchRecord& a, const MatchRecord& b) {
                                             return a.date < b.date;
                                           })->date;
  if (!result.converged)
    throw FitError("strength fit did not converge within " + std::to_string(options.max_iterations) +
                       " iterations",
                   model);
  return model;
}

}  // namespace standings
