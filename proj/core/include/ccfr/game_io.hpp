#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ccfr/game_tree.hpp"

namespace ccfr {

/// Game files are JSON documents:
///
///   {"format": "ccfr-game/1", "name": "...",
///    "infosets": [{"player": 1, "label": "J", "actions": ["check", "bet"]}, ...],
///    "nodes": [{"kind": "chance", "probs": [...], "children": [...]},
///              {"kind": "decision", "infoset": 0, "children": [...]},
///              {"kind": "terminal", "utility": -1.0}, ...]}
///
/// Node 0 is the root, children are listed in action order and utilities are
/// player one's. Numbers use the shortest round-trip decimal form, so any
/// double survives a write/read cycle bit for bit.
std::string write_game_json(const GameTree& tree);
GameTree read_game_json(const std::string& text);

void save_game(const GameTree& tree, const std::filesystem::path& path);
GameTree load_game(const std::filesystem::path& path);

/// FNV-1a hash over topology, infoset partition, chance probabilities and
/// utilities, formatted as "fnv1a64:<16 hex digits>". The name is excluded.
std::string game_hash(const GameTree& tree);

/// Same hash format over an arbitrary canonical description.
std::string text_hash(std::string_view text);

}  // namespace ccfr
