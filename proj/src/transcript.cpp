#include "drhai/transcript.hpp"

#include <sstream>

#include "drhai/errors.hpp"

namespace drhai {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

}  // namespace

std::string format_move(const Move& m) {
  std::string out = std::to_string(m.t) + " | " + std::string(to_string(m.agent)) + " | " +
                    std::string(to_string(m.locution)) + " | " +
                    (m.target ? format_formula(*m.target) : "-") + " | ";
  if (!m.argument) return out + "-";
  std::string premises;
  for (std::size_t i = 0; i < m.argument->premises.size(); ++i) {
    if (i) premises += ", ";
    premises += format_formula(m.argument->premises[i]);
  }
  return out + (premises.empty() ? "-" : premises) + " => " + format_formula(m.argument->claim);
}

std::string format_transcript(const std::vector<Move>& moves) {
  std::string out;
  for (const auto& m : moves) out += format_move(m) + "\n";
  return out;
}

Move parse_move(const std::string& line) {
  const auto fields = split(line, "|");
  if (fields.size() != 5) throw ParseError("transcript line needs 5 fields", 1, 0);
  Move m;
  try {
    m.t = std::stoul(trim(fields[0]));
    m.agent = parse_agent(trim(fields[1]));
    m.locution = parse_locution(trim(fields[2]));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad transcript line: ") + e.what(), 1, 0);
  }
  const std::string target = trim(fields[3]);
  if (target != "-") m.target = parse_formula(target);
  const std::string content = trim(fields[4]);
  if (content != "-") {
    const auto sides = split(content, "=>");
    if (sides.size() != 2) throw ParseError("argument needs 'premises => claim'", 1, 0);
    Argument a{{}, parse_formula(trim(sides[1]))};
    const std::string premises = trim(sides[0]);
    if (premises != "-") {
      for (const auto& p : split(premises, ",")) a.premises.push_back(parse_formula(trim(p)));
    }
    m.argument = std::move(a);
  }
  return m;
}

std::vector<Move> parse_transcript(const std::string& text) {
  std::vector<Move> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    try {
      out.push_back(parse_move(line));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), number, e.column());
    }
  }
  return out;
}

nlohmann::json argument_to_json(const Argument& a) {
  nlohmann::json premises = nlohmann::json::array();
  for (const auto& p : a.premises) premises.push_back(format_formula(p));
  return {{"premises", premises}, {"claim", format_formula(a.claim)}};
}

Argument argument_from_json(const nlohmann::json& j) {
  Argument a{{}, parse_formula(j.at("claim").get<std::string>())};
  for (const auto& p : j.at("premises")) a.premises.push_back(parse_formula(p.get<std::string>()));
  return a;
}

nlohmann::json move_to_json(const Move& m) {
  nlohmann::json j{{"t", m.t},
                   {"agent", std::string(to_string(m.agent))},
                   {"locution", std::string(to_string(m.locution))}};
  j["target"] = m.target ? nlohmann::json(format_formula(*m.target)) : nlohmann::json();
  j["argument"] = m.argument ? argument_to_json(*m.argument) : nlohmann::json();
  return j;
}

Move move_from_json(const nlohmann::json& j) {
  Move m;
  m.t = j.value("t", std::size_t{0});
  m.agent = parse_agent(j.at("agent").get<std::string>());
  m.locution = parse_locution(j.at("locution").get<std::string>());
  if (j.contains("target") && !j["target"].is_null()) {
    m.target = parse_formula(j["target"].get<std::string>());
  }
  if (j.contains("argument") && !j["argument"].is_null()) m.argument = argument_from_json(j["argument"]);
  return m;
}

nlohmann::json dialogue_to_json(const DialogueState& s) {
  nlohmann::json topic = nlohmann::json::array();
  for (const auto& f : s.topic()) topic.push_back(format_formula(f));
  nlohmann::json moves = nlohmann::json::array();
  for (const auto& m : s.history()) moves.push_back(move_to_json(m));
  auto store = [](const CommitmentStore& cs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : cs.entries()) {
      nlohmann::json item{{"t", e.t}, {"kind", std::string(to_string(e.kind))}};
      if (e.query) item["query"] = format_formula(*e.query);
      if (e.argument) item["argument"] = argument_to_json(*e.argument);
      out.push_back(item);
    }
    return out;
  };
  return {{"topic", topic},
          {"moves", moves},
          {"cs_e", store(s.store(Agent::Explainee))},
          {"cs_r", store(s.store(Agent::Explainer))},
          {"terminated", s.terminated()}};
}

}  // namespace drhai
