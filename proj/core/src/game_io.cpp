#include "ccfr/game_io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ccfr {

using nlohmann::json;

std::string write_game_json(const GameTree& tree) {
  json doc;
  doc["format"] = "ccfr-game/1";
  doc["name"] = tree.name();
  json infosets = json::array();
  for (const auto& info : tree.infosets()) {
    infosets.push_back({{"player", index_of(info.player) + 1}, {"label", info.label}, {"actions", info.actions}});
  }
  doc["infosets"] = std::move(infosets);
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json j;
    switch (n.kind) {
      case NodeKind::Chance:
        j = {{"kind", "chance"}, {"probs", n.chance_probs}, {"children", n.children}};
        break;
      case NodeKind::Decision:
        j = {{"kind", "decision"}, {"infoset", n.infoset}, {"children", n.children}};
        break;
      case NodeKind::Terminal:
        j = {{"kind", "terminal"}, {"utility", n.utility}};
        break;
    }
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(1);
}

GameTree read_game_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw GameError(std::string("game file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "ccfr-game/1") throw GameError("unsupported game format");
    const auto& infosets = doc.at("infosets");
    const auto& nodes = doc.at("nodes");
    if (nodes.empty()) throw GameError("game has no nodes");

    GameTreeBuilder builder(doc.value("name", std::string("game")));
    // Depth-first in child order: reproduces the ids of trees built the same way.
    struct Pending {
      std::size_t file_id;
      NodeId parent;
    };
    std::vector<Pending> stack{{0, kNoNode}};
    std::vector<bool> seen(nodes.size(), false);
    while (!stack.empty()) {
      const auto [fid, parent] = stack.back();
      stack.pop_back();
      if (fid >= nodes.size()) throw GameError("child index out of range");
      if (seen[fid]) throw GameError("node reachable twice; not a tree");
      seen[fid] = true;
      const auto& n = nodes[fid];
      const auto kind = n.at("kind").get<std::string>();
      NodeId id;
      if (kind == "terminal") {
        builder.add_terminal(parent, n.at("utility").get<double>());
        continue;
      } else if (kind == "chance") {
        id = builder.add_chance(parent, n.at("probs").get<std::vector<double>>());
      } else if (kind == "decision") {
        const auto& info = infosets.at(n.at("infoset").get<std::size_t>());
        const auto actions = info.at("actions").get<std::vector<std::string>>();
        id = builder.add_decision(parent, player_from_number(info.at("player").get<int>()),
                                  info.at("label").get<std::string>(), actions);
      } else {
        throw GameError("unknown node kind '" + kind + "'");
      }
      const auto children = n.at("children").get<std::vector<std::size_t>>();
      for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back({*it, id});
    }
    for (bool s : seen) {
      if (!s) throw GameError("game file contains unreachable nodes");
    }
    return std::move(builder).build();
  } catch (const json::exception& e) {
    throw GameError(std::string("malformed game file: ") + e.what());
  }
}

void save_game(const GameTree& tree, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GameError("cannot write " + path.string());
  out << write_game_json(tree) << '\n';
}

GameTree load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GameError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return read_game_json(ss.str());
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void byte(unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    for (char c : s) byte(static_cast<unsigned char>(c));
  }
  std::string hex() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
    return buf;
  }
};

}  // namespace

std::string game_hash(const GameTree& tree) {
  Fnv1a f;
  f.u64(tree.num_infosets());
  for (const auto& info : tree.infosets()) {
    f.u64(static_cast<std::uint64_t>(index_of(info.player)));
    f.str(info.label);
    f.u64(info.actions.size());
    for (const auto& a : info.actions) f.str(a);
  }
  f.u64(tree.num_nodes());
  for (const auto& n : tree.nodes()) {
    f.u64(static_cast<std::uint64_t>(n.kind));
    f.u64(static_cast<std::uint64_t>(n.parent + 1));
    switch (n.kind) {
      case NodeKind::Chance:
        for (double p : n.chance_probs) f.f64(p);
        break;
      case NodeKind::Decision:
        f.u64(static_cast<std::uint64_t>(n.infoset));
        break;
      case NodeKind::Terminal:
        f.f64(n.utility);
        break;
    }
  }
  return f.hex();
}

std::string text_hash(std::string_view text) {
  Fnv1a f;
  for (char c : text) f.byte(static_cast<unsigned char>(c));
  return f.hex();
}

}  // namespace ccfr
