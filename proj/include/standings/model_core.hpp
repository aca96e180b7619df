#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "standings/date.hpp"
#include "standings/errors.hpp"

namespace standings {

using TeamId = std::string;

/// Parameters of one bivariate Poisson score distribution. The home and away
/// goal counts are U + W and V + W with U ~ Poi(lambda_home),
/// V ~ Poi(lambda_away) and the shared component W ~ Poi(lambda_c).
struct ScoreDistributionParams {
  double lambda_home = 0.0;
  double lambda_away = 0.0;
  double lambda_c = 0.0;

  bool valid() const;
};

/// One played or scheduled fixture. Goals are absent for scheduled matches.
struct MatchRecord {
  Date date{};
  TeamId home_team;
  TeamId away_team;
  std::optional<int> home_goals;
  std::optional<int> away_goals;
  bool neutral_venue = false;
  // Round index when the fixture list carries one.
  std::optional<int> round;

  bool played() const { return home_goals.has_value() && away_goals.has_value(); }
};

/// Fitted team strengths. Strengths sum to zero; only differences matter.
struct StrengthModel {
  std::map<TeamId, double> strengths;
  double intercept = 0.0;
  double home_effect = 0.0;
  double lambda_c = 0.0;
  Date fitted_at{};
  double log_likelihood = 0.0;

  bool independent() const { return lambda_c == 0.0; }
  bool has_team(const TeamId& t) const { return strengths.count(t) != 0; }
};

enum class WeightMode { uniform, exponential_decay };

struct WeightScheme {
  WeightMode mode = WeightMode::uniform;
  double half_period_days = 390.0;
  Date reference_date{};

  static WeightScheme uniform() { return {}; }
  static WeightScheme decay(Date reference, double half_period_days = 390.0) {
    return {WeightMode::exponential_decay, half_period_days, reference};
  }
};

struct FitOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-9;
  double gradient_tolerance = 1e-6;
  // Below this the covariance parameter is clamped to exactly zero.
  double lambda_c_floor = 1e-8;
};

/// Thrown when the optimiser hits its iteration cap. Carries the best iterate.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, StrengthModel best)
      : NumericalError(what), best_(std::move(best)) {}
  const StrengthModel& best() const { return best_; }

 private:
  StrengthModel best_;
};

double bivariate_poisson_log_pmf(int x, int y, const ScoreDistributionParams& params);

/// P(home = x, away = y). Evaluated in log space so large counts do not
/// overflow.
double bivariate_poisson_pmf(int x, int y, const ScoreDistributionParams& params);

/// Partial derivatives of log P(x, y) with respect to the three lambdas.
struct LogPmfGradient {
  double d_lambda_home = 0.0;
  double d_lambda_away = 0.0;
  double d_lambda_c = 0.0;
};
LogPmfGradient bivariate_poisson_log_pmf_gradient(int x, int y,
                                                  const ScoreDistributionParams& params);

ScoreDistributionParams expected_goals(const StrengthModel& model, const TeamId& home_team,
                                       const TeamId& away_team, bool neutral);

double match_weight(const MatchRecord& match, const WeightScheme& scheme);

double log_likelihood(std::span<const MatchRecord> matches, const StrengthModel& model,
                      const WeightScheme& scheme);

/// Maximum likelihood fit of strengths, intercept, home effect and lambda_c.
/// Throws InputError if a team has no matches, FitError on non-convergence.
StrengthModel fit(std::span<const MatchRecord> matches, std::span<const TeamId> teams,
                  const WeightScheme& scheme, const FitOptions& options = {});

namespace detail {

// Flat parametrisation used by `fit`: (n-1) free strengths, intercept,
// home effect, log lambda_c. The last strength is minus the sum of the rest.
struct LikelihoodProblem {
  struct Row {
    int home;
    int away;
    int home_goals;
    int away_goals;
    bool neutral;
    double weight;
  };
  std::vector<TeamId> teams;
  std::vector<Row> rows;

  LikelihoodProblem(std::span<const MatchRecord> matches, std::span<const TeamId> teams,
                    const WeightScheme& scheme);

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(teams.size()) + 2; }
  // Weighted log-likelihood and its gradient in the flat parametrisation.
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const;
  StrengthModel to_model(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd from_model(const StrengthModel& model) const;
};

}  // namespace detail

}  // namespace standings
