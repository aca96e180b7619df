#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "standings/backtest.hpp"
#include "standings/decisions.hpp"
#include "standings/model_core.hpp"
#include "standings/plusminus.hpp"
#include "standings/season_sim.hpp"

namespace standings {

// Splits one CSV record. Handles double-quoted fields with embedded commas
// and doubled quotes; strips a trailing '\r'.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads football-data style results: Date, HomeTeam, AwayTeam, FTHG, FTAG
/// required; an optional Round (or Matchday) column; everything else is
/// ignored. Rows with both goal cells empty are scheduled fixtures.
/// Duplicate (home, away, date) rows and malformed rows raise InputError
/// with the line number.
std::vector<MatchRecord> load_results(std::istream& in, const std::string& source = "<stream>");
std::vector<MatchRecord> load_results(const std::filesystem::path& path);

/// Writes Date (dd/mm/yyyy), HomeTeam, AwayTeam, FTHG, FTAG and, when any
/// match has one, Round.
void write_results(std::ostream& out, const std::vector<MatchRecord>& matches);

/// Double round-robin completion: every ordered pair of distinct teams not
/// yet played. Remaining fixtures carry `date` and no round.
std::vector<MatchRecord> derive_fixtures(const std::vector<TeamId>& teams,
                                         const std::vector<MatchRecord>& played, Date date);

nlohmann::json to_json(const StrengthModel& model);
StrengthModel strength_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StandingMatrix& matrix);
StandingMatrix standing_matrix_from_json(const nlohmann::json& j);

/// Header "team,1,2,...,n"; probabilities with six decimals, or whole
/// percentages when `percent` is set.
void write_matrix_csv(std::ostream& out, const StandingMatrix& matrix, bool percent = false);
StandingMatrix read_matrix_csv(std::istream& in);

/// Two columns: rank, amount. A header row is optional.
ProfitSchedule load_profit_schedule(std::istream& in);

/// Line-up and event rows:
///   MatchId,Date,HomeTeam,AwayTeam,Event,Minute,Side,Player,Position,PlayerIn
/// Event is one of start, sub, red, goal, end. `start` rows list a starter
/// with Position; `sub` rows name the player leaving in Player and the one
/// entering in PlayerIn (Position is the entering player's); `goal` rows need
/// only Side; `end` rows give the match duration in Minute (default 90).
std::vector<MatchEvents> load_match_events(std::istream& in, const std::string& source = "<stream>");

nlohmann::json to_json(const PlusMinusPredictor& predictor);
PlusMinusPredictor plus_minus_from_json(const nlohmann::json& j);

/// Columns: matchday, predictor, mean_rps, trps, n_remaining, note.
/// Missing values are empty cells; numbers use 10 decimals.
void write_report_csv(std::ostream& out, const BacktestReport& report);

nlohmann::json to_json(const DeterminedStanding& standing);

}  // namespace standings
