#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "drhai/dialogue.hpp"

namespace drhai {

/// `t | agent | locution | target | premises => claim`, with `-` for absent
/// fields.
std::string format_move(const Move& m);
std::string format_transcript(const std::vector<Move>& moves);

/// Inverse of format_move. Throws ParseError.
Move parse_move(const std::string& line);
std::vector<Move> parse_transcript(const std::string& text);

nlohmann::json argument_to_json(const Argument& a);
Argument argument_from_json(const nlohmann::json& j);
nlohmann::json move_to_json(const Move& m);
Move move_from_json(const nlohmann::json& j);

/// Structured export: topic, moves, both commitment stores, terminated.
nlohmann::json dialogue_to_json(const DialogueState& s);

}  // namespace drhai
