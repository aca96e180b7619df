#include "standings/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace standings {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string strip_bom(std::string line) {
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);
  return line;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

class HeaderIndex {
 public:
  explicit HeaderIndex(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) columns_[trim(header[i])] = i;
  }
  std::optional<std::size_t> find(std::initializer_list<const char*> names) const {
    for (const char* n : names) {
      auto it = columns_.find(n);
      if (it != columns_.end()) return it->second;
    }
    return std::nullopt;
  }
  std::size_t require(const char* name, const std::string& source) const {
    auto c = find({name});
    if (!c) throw InputError(source + ": missing required column " + name);
    return *c;
  }

 private:
  std::map<std::string, std::size_t> columns_;
};

bool blank(const std::vector<std::string>& fields) {
  return std::all_of(fields.begin(), fields.end(), [](const std::string& f) { return trim(f).empty(); });
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::vector<MatchRecord> load_results(std::istream& in, const std::string& source) {
  std::vector<MatchRecord> out;
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": no header row");
  const HeaderIndex header(split_csv_line(strip_bom(line)));
  const std::size_t c_date = header.require("Date", source);
  const std::size_t c_home = header.require("HomeTeam", source);
  const std::size_t c_away = header.require("AwayTeam", source);
  const std::size_t c_hg = header.require("FTHG", source);
  const std::size_t c_ag = header.require("FTAG", source);
  const auto c_round = header.find({"Round", "Matchday"});
  const std::size_t needed = std::max({c_date, c_home, c_away, c_hg, c_ag});

  std::set<std::string> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_csv_line(line);
    if (blank(fields)) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (fields.size() <= needed) throw InputError(where + "too few columns");

    MatchRecord m;
    try {
      m.date = parse_date(fields[c_date]);
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
    m.home_team = trim(fields[c_home]);
    m.away_team = trim(fields[c_away]);
    if (m.home_team.empty() || m.away_team.empty()) throw InputError(where + "empty team name");
    if (m.home_team == m.away_team) throw InputError(where + "team plays itself");

    const std::string hg = trim(fields[c_hg]);
    const std::string ag = trim(fields[c_ag]);
    if (!hg.empty() || !ag.empty()) {
      int h = 0, a = 0;
      if (!parse_int(hg, h) || h < 0) throw InputError(where + "bad FTHG value '" + hg + "'");
      if (!parse_int(ag, a) || a < 0) throw InputError(where + "bad FTAG value '" + ag + "'");
      m.home_goals = h;
      m.away_goals = a;
    }
    if (c_round && *c_round < fields.size()) {
      const std::string r = trim(fields[*c_round]);
      int round = 0;
      if (!r.empty()) {
        if (!parse_int(r, round)) throw InputError(where + "bad round value '" + r + "'");
        m.round = round;
      }
    }
    const std::string key = format_iso(m.date) + "|" + m.home_team + "|" + m.away_team;
    if (!seen.insert(key).second) throw InputError(where + "duplicate fixture " + m.home_team + " - " + m.away_team);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MatchRecord> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return load_results(in, path.string());
}

void write_results(std::ostream& out, const std::vector<MatchRecord>& matches) {
  const bool rounds = std::any_of(matches.begin(), matches.end(), [](const MatchRecord& m) { return m.round.has_value(); });
  out << "Date,HomeTeam,AwayTeam,FTHG,FTAG" << (rounds ? ",Round" : "") << '\n';
  for (const auto& m : matches) {
    out << format_dmy(m.date) << ',' << m.home_team << ',' << m.away_team << ',';
    if (m.played()) out << *m.home_goals << ',' << *m.away_goals;
    else out << ',';
    if (rounds) {
      out << ',';
      if (m.round) out << *m.round;
    }
    out << '\n';
  }
}

std::vector<MatchRecord> derive_fixtures(const std::vector<TeamId>& teams,
                                         const std::vector<MatchRecord>& played, Date date) {
  std::set<std::pair<TeamId, TeamId>> done;
  for (const auto& m : played) {
    if (!done.emplace(m.home_team, m.away_team).second)
      throw InputError("fixture " + m.home_team + " - " + m.away_team + " was played twice");
  }
  std::vector<MatchRecord> out;
  for (const auto& h : teams) {
    for (const auto& a : teams) {
      if (h == a || done.count({h, a})) continue;
      MatchRecord m;
      m.date = date;
      m.home_team = h;
      m.away_team = a;
      out.push_back(std::move(m));
    }
  }
  return out;
}

nlohmann::json to_json(const StrengthModel& model) {
  nlohmann::json strengths = nlohmann::json::object();
  for (const auto& [t, r] : model.strengths) strengths[t] = r;
  return {{"strengths", strengths},
          {"intercept", model.intercept},
          {"home_effect", model.home_effect},
          {"lambda_c", model.lambda_c},
          {"fitted_at", format_iso(model.fitted_at)},
          {"log_likelihood", model.log_likelihood}};
}

StrengthModel strength_model_from_json(const nlohmann::json& j) {
  try {
    StrengthModel m;
    for (const auto& [t, r] : j.at("strengths").items()) m.strengths[t] = r.get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.home_effect = j.at("home_effect").get<double>();
    m.lambda_c = j.at("lambda_c").get<double>();
    m.fitted_at = parse_date(j.at("fitted_at").get<std::string>());
    m.log_likelihood = j.value("log_likelihood", 0.0);
    if (m.lambda_c < 0.0) throw InputError("lambda_c must be nonnegative");
    if (m.strengths.size() < 2) throw InputError("model needs at least two teams");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

nlohmann::json to_json(const StandingMatrix& matrix) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < matrix.size(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t r = 0; r < matrix.size(); ++r) row.push_back(matrix(t, r));
    rows.push_back(std::move(row));
  }
  return {{"teams", matrix.teams}, {"n_sims", matrix.n_sims}, {"seed", matrix.seed}, {"probs", rows}};
}

StandingMatrix standing_matrix_from_json(const nlohmann::json& j) {
  try {
    StandingMatrix m;
    m.teams = j.at("teams").get<std::vector<TeamId>>();
    m.n_sims = j.value("n_sims", std::int64_t{0});
    m.seed = j.value("seed", std::uint64_t{0});
    const auto& rows = j.at("probs");
    const std::size_t n = m.teams.size();
    if (rows.size() != n) throw InputError("matrix JSON: row count differs from team count");
    for (const auto& row : rows) {
      if (row.size() != n) throw InputError("matrix JSON: row length differs from team count");
      for (const auto& v : row) m.probs.push_back(v.get<double>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed matrix JSON: ") + e.what());
  }
}

void write_matrix_csv(std::ostream& out, const StandingMatrix& matrix, bool percent) {
  out << "team";
  for (std::size_t r = 1; r <= matrix.size(); ++r) out << ',' << r;
  out << '\n';
  for (std::size_t t = 0; t < matrix.size(); ++t) {
    out << matrix.teams[t];
    for (std::size_t r = 0; r < matrix.size(); ++r)
      out << ',' << (percent ? fixed(std::round(100.0 * matrix(t, r)), 0) : fixed(matrix(t, r), 6));
    out << '\n';
  }
}

StandingMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("matrix CSV is empty");
  const auto header = split_csv_line(strip_bom(line));
  const std::size_t n = header.size() - 1;
  StandingMatrix m;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_csv_line(line);
    if (blank(fields)) continue;
    if (fields.size() != n + 1)
      throw InputError("matrix CSV line " + std::to_string(line_no) + ": expected " + std::to_string(n + 1) + " cells");
    m.teams.push_back(trim(fields[0]));
    for (std::size_t r = 1; r <= n; ++r) {
      double v = 0.0;
      if (!parse_double(trim(fields[r]), v))
        throw InputError("matrix CSV line " + std::to_string(line_no) + ": bad probability '" + fields[r] + "'");
      m.probs.push_back(v);
    }
  }
  if (m.teams.size() != n) throw InputError("matrix CSV is not square");
  return m;
}

ProfitSchedule load_profit_schedule(std::istream& in) {
  ProfitSchedule s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_csv_line(line_no == 1 ? strip_bom(line) : line);
    if (blank(fields)) continue;
    if (fields.size() < 2) throw InputError("profit schedule line " + std::to_string(line_no) + ": expected rank,amount");
    int rank = 0;
    double amount = 0.0;
    const bool ok = parse_int(trim(fields[0]), rank) && parse_double(trim(fields[1]), amount);
    if (!ok) {
      if (line_no == 1) continue;  // header
      throw InputError("profit schedule line " + std::to_string(line_no) + ": bad rank or amount");
    }
    if (rank < 1) throw InputError("profit schedule line " + std::to_string(line_no) + ": rank must be >= 1");
    if (!s.by_rank.emplace(rank, amount).second)
      throw InputError("profit schedule repeats rank " + std::to_string(rank));
  }
  return s;
}

std::vector<MatchEvents> load_match_events(std::istream& in, const std::string& source) {
  std::string line;
  std::vector<MatchEvents> out;
  if (!std::getline(in, line)) throw InputError(source + ": no header row");
  const HeaderIndex header(split_csv_line(strip_bom(line)));
  const std::size_t c_id = header.require("MatchId", source);
  const std::size_t c_date = header.require("Date", source);
  const std::size_t c_home = header.require("HomeTeam", source);
  const std::size_t c_away = header.require("AwayTeam", source);
  const std::size_t c_event = header.require("Event", source);
  const std::size_t c_minute = header.require("Minute", source);
  const std::size_t c_side = header.require("Side", source);
  const std::size_t c_player = header.require("Player", source);
  const std::size_t c_pos = header.require("Position", source);
  const std::size_t c_in = header.require("PlayerIn", source);
  const std::size_t needed = std::max({c_id, c_date, c_home, c_away, c_event, c_minute, c_side, c_player, c_pos, c_in});

  std::map<std::string, std::size_t> by_id;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_csv_line(line);
    if (blank(f)) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (f.size() <= needed) throw InputError(where + "too few columns");
    const std::string id = trim(f[c_id]);
    auto [it, fresh] = by_id.emplace(id, out.size());
    if (fresh) {
      MatchEvents m;
      m.match_id = id;
      try {
        m.date = parse_date(f[c_date]);
      } catch (const InputError& e) {
        throw InputError(where + e.what());
      }
      m.home_team = trim(f[c_home]);
      m.away_team = trim(f[c_away]);
      out.push_back(std::move(m));
    }
    MatchEvents& m = out[it->second];
    if (trim(f[c_home]) != m.home_team || trim(f[c_away]) != m.away_team)
      throw InputError(where + "teams differ from earlier rows of match " + id);

    const std::string kind = trim(f[c_event]);
    const std::string side_text = trim(f[c_side]);
    auto side = [&]() {
      if (side_text == "home" || side_text == "H") return Side::home;
      if (side_text == "away" || side_text == "A") return Side::away;
      throw InputError(where + "side must be home or away");
    };
    auto minute = [&]() {
      double v = 0.0;
      if (!parse_double(trim(f[c_minute]), v)) throw InputError(where + "bad minute '" + f[c_minute] + "'");
      return v;
    };
    auto position = [&]() {
      try {
        return parse_position(trim(f[c_pos]));
      } catch (const InputError& e) {
        throw InputError(where + e.what());
      }
    };

    if (kind == "start") {
      LineupPlayer p{trim(f[c_player]), position()};
      if (p.id.empty()) throw InputError(where + "starter without a name");
      (side() == Side::home ? m.home_lineup : m.away_lineup).push_back(std::move(p));
    } else if (kind == "sub") {
      MatchEvent e;
      e.kind = EventKind::substitution;
      e.minute = minute();
      e.side = side();
      e.player = trim(f[c_player]);
      e.player_in = trim(f[c_in]);
      if (!trim(f[c_pos]).empty()) e.position_in = position();
      m.events.push_back(std::move(e));
    } else if (kind == "red") {
      MatchEvent e;
      e.kind = EventKind::red_card;
      e.minute = minute();
      e.side = side();
      e.player = trim(f[c_player]);
      m.events.push_back(std::move(e));
    } else if (kind == "goal") {
      MatchEvent e;
      e.kind = EventKind::goal;
      e.minute = minute();
      e.side = side();
      e.player = trim(f[c_player]);
      m.events.push_back(std::move(e));
    } else if (kind == "end") {
      m.duration_minutes = minute();
    } else {
      throw InputError(where + "unknown event '" + kind + "' (expected start, sub, red, goal, end)");
    }
  }
  return out;
}

nlohmann::json to_json(const PlusMinusPredictor& p) {
  nlohmann::json ratings = nlohmann::json::object();
  for (const auto& [id, r] : p.ratings.ratings) ratings[id] = r;
  nlohmann::json squads = nlohmann::json::object();
  for (const auto& [team, players] : p.squads) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& sp : players) list.push_back({{"player", sp.id}, {"position", to_string(sp.position)}});
    squads[team] = std::move(list);
  }
  return {{"ratings", ratings},
          {"home_advantage", p.ratings.home_advantage},
          {"fitted_at", format_iso(p.ratings.fitted_at)},
          {"logit", {{"coefficient", p.logit.coefficient}, {"c1", p.logit.c1}, {"c2", p.logit.c2}}},
          {"squads", squads},
          {"degraded", p.degraded},
          {"unavailable_prob", p.unavailable_prob}};
}

PlusMinusPredictor plus_minus_from_json(const nlohmann::json& j) {
  try {
    PlusMinusPredictor p;
    for (const auto& [id, r] : j.at("ratings").items()) p.ratings.ratings[id] = r.get<double>();
    p.ratings.home_advantage = j.at("home_advantage").get<double>();
    p.ratings.fitted_at = parse_date(j.at("fitted_at").get<std::string>());
    const auto& l = j.at("logit");
    p.logit = {l.at("coefficient").get<double>(), l.at("c1").get<double>(), l.at("c2").get<double>()};
    if (!(p.logit.c1 < p.logit.c2)) throw InputError("ordered logit thresholds must satisfy c1 < c2");
    for (const auto& [team, list] : j.at("squads").items())
      for (const auto& sp : list)
        p.squads[team].push_back({sp.at("player").get<std::string>(),
                                  parse_position(sp.at("position").get<std::string>())});
    p.degraded = j.at("degraded").get<bool>();
    p.unavailable_prob = j.value("unavailable_prob", 0.1);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed plus-minus JSON: ") + e.what());
  }
}

void write_report_csv(std::ostream& out, const BacktestReport& report) {
  out << "matchday,predictor,mean_rps,trps,n_remaining,note\n";
  for (const auto& r : report.rows) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), '"', '\'');
    out << r.matchday << ',' << to_string(r.predictor) << ',' << (r.mean_rps ? fixed(*r.mean_rps, 10) : "") << ','
        << (r.trps ? fixed(*r.trps, 10) : "") << ',' << r.n_remaining << ','
        << (note.empty() ? "" : "\"" + note + "\"") << '\n';
  }
}

nlohmann::json to_json(const DeterminedStanding& standing) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < standing.order.size(); ++i)
    out.push_back({{"rank", i + 1}, {"team", standing.order[i].team}, {"expected_rank", standing.order[i].expected_rank}});
  return out;
}

}  // namespace standings
