#include "ccfr/tree_game.hpp"

#include <algorithm>
#include <cmath>

#include "ccfr/game_io.hpp"

namespace ccfr {

SequenceIndex::SequenceIndex(const GameTree& tree, Player p) : player_(p) {
  const auto own = tree.infosets_of(p);
  const auto n = own.size();
  local_of_global_.assign(tree.num_infosets(), -1);
  first_of_local_.resize(n);
  infoset_of_.push_back(-1);
  action_of_.push_back(-1);
  for (std::size_t i = 0; i < n; ++i) {
    const InfosetId g = own[i];
    local_of_global_[static_cast<std::size_t>(g)] = static_cast<std::int32_t>(i);
    first_of_local_[i] = static_cast<std::int32_t>(infoset_of_.size());
    for (int a = 0; a < tree.infoset(g).num_actions(); ++a) {
      infoset_of_.push_back(g);
      action_of_.push_back(a);
    }
  }

  last_.assign(tree.num_nodes(), 0);
  for (std::size_t id = 1; id < tree.num_nodes(); ++id) {
    const Node& node = tree.node(static_cast<NodeId>(id));
    const Node& parent = tree.node(node.parent);
    std::int32_t last = last_[static_cast<std::size_t>(node.parent)];
    if (parent.kind == NodeKind::Decision && parent.player == p) {
      last = first_of_local_[static_cast<std::size_t>(local_of_global_[static_cast<std::size_t>(parent.infoset)])] +
             node.parent_action;
    }
    last_[id] = last;
  }

  parent_of_local_.resize(n);
  std::vector<std::vector<InfosetId>> after(infoset_of_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& info = tree.infoset(own[i]);
    const auto parent = last_[static_cast<std::size_t>(info.members.front())];
    parent_of_local_[i] = parent;
    after[static_cast<std::size_t>(parent)].push_back(own[i]);
  }
  after_begin_.push_back(0);
  for (const auto& list : after) {
    after_.insert(after_.end(), list.begin(), list.end());
    after_begin_.push_back(static_cast<std::int32_t>(after_.size()));
  }
}

std::int32_t SequenceIndex::first_sequence(InfosetId global) const {
  const auto local = local_of_global_.at(static_cast<std::size_t>(global));
  if (local < 0) throw GameError("infoset does not belong to player " + to_string(player_));
  return first_of_local_[static_cast<std::size_t>(local)];
}

std::int32_t SequenceIndex::sequence(InfosetId global, int action) const {
  const auto first = first_sequence(global);
  if (action < 0 || first + action >= size() || infoset_of_[static_cast<std::size_t>(first + action)] != global) {
    throw GameError("action index out of range");
  }
  return first + action;
}

std::int32_t SequenceIndex::parent_sequence(InfosetId global) const {
  const auto local = local_of_global_.at(static_cast<std::size_t>(global));
  if (local < 0) throw GameError("infoset does not belong to player " + to_string(player_));
  return parent_of_local_[static_cast<std::size_t>(local)];
}

std::span<const InfosetId> SequenceIndex::infosets_after(std::int32_t seq) const {
  const auto s = static_cast<std::size_t>(seq);
  return std::span<const InfosetId>(after_).subspan(static_cast<std::size_t>(after_begin_.at(s)),
                                                      static_cast<std::size_t>(after_begin_.at(s + 1) - after_begin_[s]));
}

TreeGame::TreeGame(GameTree tree) : tree_(std::move(tree)) {
  for (Player p : {Player::One, Player::Two}) {
    auto& idx = index_[index_of(p)];
    idx = SequenceIndex(tree_, p);
    const auto own = tree_.infosets_of(p);
    std::vector<std::int32_t> counts;
    counts.reserve(own.size());
    for (InfosetId g : own) counts.push_back(tree_.infoset(g).num_actions());
    std::vector<std::vector<std::pair<std::int32_t, double>>> successors(static_cast<std::size_t>(idx.size()));
    for (std::int32_t s = 0; s < idx.size(); ++s) {
      for (InfosetId g : idx.infosets_after(s)) {
        successors[static_cast<std::size_t>(s)].emplace_back(tree_.infoset(g).local_index, 1.0);
      }
    }
    layout_[index_of(p)] = DecisionLayout::from_successors(std::move(counts), successors);
  }

  chance_reach_.assign(tree_.num_nodes(), 1.0);
  for (std::size_t id = 1; id < tree_.num_nodes(); ++id) {
    const Node& node = tree_.node(static_cast<NodeId>(id));
    const Node& parent = tree_.node(node.parent);
    double r = chance_reach_[static_cast<std::size_t>(node.parent)];
    if (parent.kind == NodeKind::Chance) r *= parent.chance_probs[static_cast<std::size_t>(node.parent_action)];
    chance_reach_[id] = r;
  }

  std::vector<PayoffEntry> raw;
  raw.reserve(tree_.terminals().size());
  for (NodeId z : tree_.terminals()) {
    raw.push_back({index_[0].last_sequence(z), index_[1].last_sequence(z),
                   chance_reach_[static_cast<std::size_t>(z)] * tree_.node(z).utility});
  }
  std::stable_sort(raw.begin(), raw.end(), [](const PayoffEntry& a, const PayoffEntry& b) {
    return a.seq1 != b.seq1 ? a.seq1 < b.seq1 : a.seq2 < b.seq2;
  });
  for (const auto& e : raw) {
    if (!payoff_.empty() && payoff_.back().seq1 == e.seq1 && payoff_.back().seq2 == e.seq2) {
      payoff_.back().value += e.value;
    } else {
      payoff_.push_back(e);
    }
  }
  hash_ = game_hash(tree_);
}

void TreeGame::immediate_values(Player p, std::span<const double> opponent_behavioral,
                                std::span<double> out) const {
  const Player o = opponent(p);
  std::vector<double> y(static_cast<std::size_t>(layout(o).num_sequences()));
  realization(layout(o), opponent_behavioral, y);
  std::fill(out.begin(), out.end(), 0.0);
  if (p == Player::One) {
    for (const auto& e : payoff_) out[static_cast<std::size_t>(e.seq1)] += e.value * y[static_cast<std::size_t>(e.seq2)];
  } else {
    for (const auto& e : payoff_) out[static_cast<std::size_t>(e.seq2)] -= e.value * y[static_cast<std::size_t>(e.seq1)];
  }
}

std::string TreeGame::sequence_label(Player p, std::int32_t sequence) const {
  if (sequence == 0) return "-";
  const auto& idx = index(p);
  const auto& info = tree_.infoset(idx.infoset_of(sequence));
  return info.label + ":" + info.actions[static_cast<std::size_t>(idx.action_of(sequence))];
}

SequenceFormStrategy seq_of(const TreeGame& game, const BehavioralStrategy& behavioral) {
  const Player p = behavioral.owner;
  const auto& tree = game.tree();
  if (!tree.perfect_recall(p)) throw GameError("sequence form is undefined for an imperfect-recall player");
  const auto& idx = game.index(p);
  if (behavioral.probs.size() != static_cast<std::size_t>(idx.size())) {
    throw GameError("behavioral strategy has the wrong number of entries");
  }
  for (InfosetId g : tree.infosets_of(p)) {
    const auto first = static_cast<std::size_t>(idx.first_sequence(g));
    double total = 0.0;
    for (int a = 0; a < tree.infoset(g).num_actions(); ++a) {
      const double v = behavioral.probs[first + static_cast<std::size_t>(a)];
      if (!(v >= 0.0)) throw GameError("negative probability at infoset '" + tree.infoset(g).label + "'");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw GameError("distribution at infoset '" + tree.infoset(g).label + "' does not sum to 1");
    }
  }

  SequenceFormStrategy x;
  x.owner = p;
  x.x.assign(static_cast<std::size_t>(idx.size()), 0.0);
  x.x[0] = 1.0;
  std::vector<double> reach(tree.num_nodes(), 1.0);
  for (std::size_t id = 1; id < tree.num_nodes(); ++id) {
    const Node& node = tree.node(static_cast<NodeId>(id));
    const Node& parent = tree.node(node.parent);
    double r = reach[static_cast<std::size_t>(node.parent)];
    if (parent.kind == NodeKind::Decision && parent.player == p) {
      r *= behavioral.probs[static_cast<std::size_t>(idx.sequence(parent.infoset, node.parent_action))];
    }
    reach[id] = r;
  }
  for (InfosetId g : tree.infosets_of(p)) {
    const NodeId h = tree.infoset(g).members.front();
    for (int a = 0; a < tree.infoset(g).num_actions(); ++a) {
      const auto s = static_cast<std::size_t>(idx.sequence(g, a));
      x.x[s] = reach[static_cast<std::size_t>(h)] * behavioral.probs[s];
    }
  }
  return x;
}

BehavioralStrategy behavioral_of(const TreeGame& game, const SequenceFormStrategy& x) {
  return behavioral_from_realization(game.layout(x.owner), x);
}

ReachProbability reach_probability(const TreeGame& game, const Profile& profile, NodeId node) {
  const auto& tree = game.tree();
  ReachProbability r;
  NodeId cur = node;
  while (cur != tree.root()) {
    const Node& n = tree.node(cur);
    const Node& parent = tree.node(n.parent);
    if (parent.kind == NodeKind::Chance) {
      r.chance *= parent.chance_probs[static_cast<std::size_t>(n.parent_action)];
    } else if (parent.kind == NodeKind::Decision) {
      const Player p = parent.player;
      const auto s = game.index(p).sequence(parent.infoset, n.parent_action);
      r.player[static_cast<std::size_t>(index_of(p))] *= profile[p].probs[static_cast<std::size_t>(s)];
    }
    cur = n.parent;
  }
  r.total = r.chance * r.player[0] * r.player[1];
  return r;
}

double expected_utility(const TreeGame& game, const SequenceFormStrategy& x, const SequenceFormStrategy& y,
                        Player perspective) {
  if (x.owner != Player::One || y.owner != Player::Two) throw GameError("expected_utility takes (player 1, player 2)");
  const auto& tree = game.tree();
  double total = 0.0;
  for (NodeId z : tree.terminals()) {
    total += game.chance_reach(z) * x.x[static_cast<std::size_t>(game.index(Player::One).last_sequence(z))] *
             y.x[static_cast<std::size_t>(game.index(Player::Two).last_sequence(z))] * tree.node(z).utility;
  }
  return perspective_sign(perspective) * total;
}

ValidationReport validate(const TreeGame& game, const SequenceFormStrategy& x) {
  return validate(game.layout(x.owner), x.x);
}

}  // namespace ccfr
