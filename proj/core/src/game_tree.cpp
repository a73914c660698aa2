#include "ccfr/game_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace ccfr {

std::string to_string(Player p) { return p == Player::One ? "1" : "2"; }

Player player_from_number(int number) {
  if (number == 1) return Player::One;
  if (number == 2) return Player::Two;
  throw GameError("player must be 1 or 2, got " + std::to_string(number));
}

std::optional<InfosetId> GameTree::find_infoset(Player p, std::string_view label) const {
  for (InfosetId id : player_infosets_[index_of(p)]) {
    if (infosets_[static_cast<std::size_t>(id)].label == label) return id;
  }
  return std::nullopt;
}

GameTreeBuilder::GameTreeBuilder(std::string name) { tree_.name_ = std::move(name); }

NodeId GameTreeBuilder::attach(NodeId parent, Node node) {
  const auto id = static_cast<NodeId>(tree_.nodes_.size());
  if (parent == kNoNode) {
    if (!tree_.nodes_.empty()) throw GameError("root already exists");
  } else {
    if (parent < 0 || parent >= id) throw GameError("unknown parent node");
    Node& p = tree_.nodes_[static_cast<std::size_t>(parent)];
    if (p.kind == NodeKind::Terminal) throw GameError("terminal nodes cannot have children");
    const std::size_t capacity = p.kind == NodeKind::Chance
                                     ? p.chance_probs.size()
                                     : tree_.infosets_[static_cast<std::size_t>(p.infoset)].actions.size();
    if (p.children.size() >= capacity) throw GameError("too many children for node");
    node.parent = parent;
    node.parent_action = static_cast<std::int32_t>(p.children.size());
    p.children.push_back(id);
  }
  tree_.nodes_.push_back(std::move(node));
  return id;
}

NodeId GameTreeBuilder::add_chance(NodeId parent, std::vector<double> probabilities) {
  if (probabilities.empty()) throw GameError("chance node needs at least one outcome");
  Node node;
  node.kind = NodeKind::Chance;
  node.chance_probs = std::move(probabilities);
  return attach(parent, std::move(node));
}

NodeId GameTreeBuilder::add_decision(NodeId parent, Player player, std::string_view infoset_label,
                                     std::span<const std::string> actions) {
  if (actions.empty()) throw GameError("decision node needs at least one action");
  auto& lookup = infoset_lookup_[index_of(player)];
  InfosetId id;
  if (auto it = lookup.find(std::string(infoset_label)); it != lookup.end()) {
    id = it->second;
    const Infoset& existing = tree_.infosets_[static_cast<std::size_t>(id)];
    if (!std::equal(existing.actions.begin(), existing.actions.end(), actions.begin(), actions.end())) {
      throw GameError("infoset '" + std::string(infoset_label) + "' has inconsistent action lists");
    }
  } else {
    id = static_cast<InfosetId>(tree_.infosets_.size());
    Infoset info;
    info.player = player;
    info.local_index = static_cast<std::int32_t>(tree_.player_infosets_[index_of(player)].size());
    info.label = std::string(infoset_label);
    info.actions.assign(actions.begin(), actions.end());
    tree_.infosets_.push_back(std::move(info));
    tree_.player_infosets_[index_of(player)].push_back(id);
    lookup.emplace(std::string(infoset_label), id);
  }
  Node node;
  node.kind = NodeKind::Decision;
  node.player = player;
  node.infoset = id;
  const NodeId nid = attach(parent, std::move(node));
  tree_.infosets_[static_cast<std::size_t>(id)].members.push_back(nid);
  return nid;
}

NodeId GameTreeBuilder::add_terminal(NodeId parent, double utility_player_one) {
  if (!std::isfinite(utility_player_one)) throw GameError("terminal utility must be finite");
  Node node;
  node.kind = NodeKind::Terminal;
  node.utility = utility_player_one;
  return attach(parent, std::move(node));
}

GameTree GameTreeBuilder::build() && {
  GameTree& t = tree_;
  if (t.nodes_.empty()) throw GameError("empty game");

  t.max_utility_ = -std::numeric_limits<double>::infinity();
  t.min_utility_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    const Node& n = t.nodes_[i];
    switch (n.kind) {
      case NodeKind::Chance: {
        if (n.children.size() != n.chance_probs.size()) throw GameError("chance node with missing children");
        double sum = 0.0;
        for (double p : n.chance_probs) {
          if (!(p >= 0.0)) throw GameError("negative chance probability");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw GameError("chance probabilities do not sum to 1");
        break;
      }
      case NodeKind::Decision: {
        const auto& info = t.infosets_[static_cast<std::size_t>(n.infoset)];
        if (n.children.size() != info.actions.size()) throw GameError("decision node with missing children");
        break;
      }
      case NodeKind::Terminal:
        t.terminals_.push_back(static_cast<NodeId>(i));
        t.max_utility_ = std::max(t.max_utility_, n.utility);
        t.min_utility_ = std::min(t.min_utility_, n.utility);
        break;
    }
  }
  if (t.terminals_.empty()) throw GameError("game has no terminal nodes");

  t.topological_.resize(t.nodes_.size());
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) t.topological_[i] = static_cast<NodeId>(i);

  // Own-history ids: two members of an infoset must share the same sequence of
  // the owner's past (infoset, action) pairs for the owner to have perfect recall.
  for (Player p : {Player::One, Player::Two}) {
    std::map<std::tuple<int, InfosetId, int>, int> trie;
    std::vector<int> history(t.nodes_.size(), 0);
    for (std::size_t i = 1; i < t.nodes_.size(); ++i) {
      const Node& n = t.nodes_[i];
      const Node& parent = t.nodes_[static_cast<std::size_t>(n.parent)];
      int h = history[static_cast<std::size_t>(n.parent)];
      if (parent.kind == NodeKind::Decision && parent.player == p) {
        auto key = std::make_tuple(h, parent.infoset, n.parent_action);
        auto [it, inserted] = trie.emplace(key, static_cast<int>(trie.size()) + 1);
        h = it->second;
      }
      history[i] = h;
    }
    bool recall = true;
    for (InfosetId id : t.player_infosets_[index_of(p)]) {
      const auto& members = t.infosets_[static_cast<std::size_t>(id)].members;
      for (NodeId m : members) {
        if (history[static_cast<std::size_t>(m)] != history[static_cast<std::size_t>(members.front())]) {
          recall = false;
        }
      }
    }
    t.perfect_recall_[index_of(p)] = recall;
  }
  return std::move(t);
}

}  // namespace ccfr
