#include "ccfr/poker.hpp"

#include <algorithm>
#include <map>

namespace ccfr {

PokerRules kuhn_rules() {
  PokerRules r;
  r.name = "kuhn";
  r.rank_names = {"J", "Q", "K"};
  r.suits = 1;
  r.ante = 1.0;
  r.bet_sizes = {1.0};
  r.max_bets_per_round = 1;
  return r;
}

PokerRules leduc_rules() {
  PokerRules r;
  r.name = "leduc";
  r.rank_names = {"J", "Q", "K"};
  r.suits = 2;
  r.ante = 1.0;
  r.bet_sizes = {2.0, 4.0};
  r.max_bets_per_round = 2;
  return r;
}

PokerGame::PokerGame(PokerRules rules, std::shared_ptr<const TreeGame> game, std::vector<PokerNodeInfo> nodes,
                     std::vector<PublicState> public_states)
    : rules_(std::move(rules)),
      game_(std::move(game)),
      nodes_(std::move(nodes)),
      public_states_(std::move(public_states)) {}

bool PokerGame::public_prefix(std::int32_t prefix, std::int32_t public_state) const {
  for (auto s = public_state; s >= 0; s = public_states_.at(static_cast<std::size_t>(s)).parent) {
    if (s == prefix) return true;
  }
  return false;
}

bool PokerGame::is_entry(NodeId id) const {
  const auto& info = node_info(id);
  if (info.hand[0] < 0 || info.hand[1] < 0) return false;
  const Node& n = tree().node(id);
  if (n.parent == kNoNode) return false;
  const Node& parent = tree().node(n.parent);
  return parent.kind == NodeKind::Chance || node_info(n.parent).public_state != info.public_state;
}

bool PokerGame::is_fold_action(InfosetId infoset, int action) const {
  return tree().infoset(infoset).actions.at(static_cast<std::size_t>(action)) == "fold";
}

CardAbstraction identity_abstraction(const PokerRules& rules) {
  CardAbstraction a;
  a.name = "none";
  const auto n = rules.rank_names.size();
  a.preflop = rules.rank_names;
  a.postflop.assign(n, std::vector<std::string>(n, ""));
  return a;
}

CardAbstraction named_abstraction(const std::string& name, const PokerRules& rules) {
  if (name == "none") return identity_abstraction(rules);
  if (name != "JQ.K/pair.nopair") throw GameError("unknown abstraction '" + name + "'");
  if (rules.rank_names != std::vector<std::string>{"J", "Q", "K"}) {
    throw GameError("abstraction JQ.K/pair.nopair needs ranks J, Q, K");
  }
  CardAbstraction a;
  a.name = name;
  a.preflop = {"JQ", "JQ", "K"};
  a.postflop.assign(3, std::vector<std::string>(3));
  for (int r = 0; r < 3; ++r) {
    for (int b = 0; b < 3; ++b) a.postflop[static_cast<std::size_t>(r)][static_cast<std::size_t>(b)] = r == b ? "pair" : "nopair";
  }
  return a;
}

namespace {

class PokerBuilder {
 public:
  PokerBuilder(const PokerRules& rules, const CardAbstraction& abstraction)
      : rules_(rules), abs_(abstraction), builder_(rules.name + (abstraction.name == "none" ? "" : "[" + abstraction.name + "]")) {
    if (rules.bet_sizes.empty() || rules.bet_sizes.size() > 2) throw GameError("poker rules need one or two rounds");
    if (rules.suits < 1 || rules.rank_names.size() < 2) throw GameError("deck too small");
    if (rules.max_bets_per_round < 1) throw GameError("max_bets_per_round must be positive");
    deck_ = static_cast<int>(rules.rank_names.size()) * rules.suits;
    const int needed = rules.bet_sizes.size() == 2 ? 3 : 2;
    if (deck_ < needed) throw GameError("deck too small for the number of dealt cards");
    public_states_.push_back({"", -1, false, TerminalKind::None});
    public_ids_.emplace("", 0);
  }

  PokerGame build() && {
    std::vector<double> probs;
    std::vector<std::pair<int, int>> deals;
    for (int a = 0; a < deck_; ++a) {
      for (int b = 0; b < deck_; ++b) {
        if (a != b) deals.emplace_back(a, b);
      }
    }
    probs.assign(deals.size(), 1.0 / static_cast<double>(deals.size()));
    const NodeId root = builder_.add_chance(kNoNode, probs);
    info_.push_back({});
    for (const auto& [a, b] : deals) {
      State s;
      s.cards = {a, b};
      s.contrib = {rules_.ante, rules_.ante};
      betting(root, s);
    }
    auto tree = std::move(builder_).build();
    auto game = std::make_shared<const TreeGame>(std::move(tree));
    return PokerGame(rules_, std::move(game), std::move(info_), std::move(public_states_));
  }

 private:
  struct State {
    std::array<int, 2> cards = {-1, -1};
    int board = -1;
    std::size_t round = 0;
    std::string history;  // public label so far
    std::string round_actions;
    std::array<double, 2> contrib = {0.0, 0.0};
    int bets = 0;
    int to_act = 0;
  };

  int rank(int card) const { return card / rules_.suits; }

  std::int32_t public_id(const std::string& label, std::int32_t parent) {
    auto [it, inserted] = public_ids_.emplace(label, static_cast<std::int32_t>(public_states_.size()));
    if (inserted) public_states_.push_back({label, parent, false, TerminalKind::None});
    return it->second;
  }

  PokerNodeInfo annotate(const State& s, std::int32_t pub) const {
    PokerNodeInfo info;
    info.hand = {s.cards[0] < 0 ? -1 : rank(s.cards[0]), s.cards[1] < 0 ? -1 : rank(s.cards[1])};
    info.board = s.board < 0 ? -1 : rank(s.board);
    info.public_state = pub;
    return info;
  }

  std::string key(const State& s, int p) const {
    const int r = rank(s.cards[static_cast<std::size_t>(p)]);
    std::string k = abs_.preflop[static_cast<std::size_t>(r)];
    if (s.board >= 0) {
      const auto& post = abs_.postflop[static_cast<std::size_t>(r)][static_cast<std::size_t>(rank(s.board))];
      if (!post.empty()) k += "." + post;
    }
    return k;
  }

  void terminal(NodeId parent, const State& s, std::int32_t pub, TerminalKind kind, double u1) {
    builder_.add_terminal(parent, u1);
    auto info = annotate(s, pub);
    info.terminal = kind;
    info_.push_back(info);
    auto& ps = public_states_[static_cast<std::size_t>(pub)];
    ps.terminal = true;
    ps.kind = kind;
  }

  double showdown(const State& s) const {
    auto strength = [&](int p) {
      const int r = rank(s.cards[static_cast<std::size_t>(p)]);
      const bool pair = s.board >= 0 && r == rank(s.board);
      return (pair ? 1000 : 0) + r;
    };
    const int a = strength(0);
    const int b = strength(1);
    if (a > b) return s.contrib[1];
    if (a < b) return -s.contrib[0];
    return 0.0;
  }

  void end_round(NodeId parent, const State& s, std::int32_t pub) {
    if (s.round + 1 < rules_.bet_sizes.size()) {
      std::vector<int> cards;
      for (int c = 0; c < deck_; ++c) {
        if (c != s.cards[0] && c != s.cards[1]) cards.push_back(c);
      }
      const NodeId chance =
          builder_.add_chance(parent, std::vector<double>(cards.size(), 1.0 / static_cast<double>(cards.size())));
      info_.push_back(annotate(s, pub));
      for (int c : cards) {
        State next = s;
        next.board = c;
        next.round = s.round + 1;
        next.history = s.history + "/" + rules_.rank_names[static_cast<std::size_t>(rank(c))] + ":";
        next.round_actions.clear();
        next.bets = 0;
        next.to_act = 0;
        public_id(next.history, pub);
        betting(chance, next);
      }
    } else {
      terminal(parent, s, pub, TerminalKind::Showdown, showdown(s));
    }
  }

  void betting(NodeId parent, const State& s) {
    const std::int32_t pub = public_ids_.at(s.history);
    const int p = s.to_act;
    const bool facing = s.contrib[0] != s.contrib[1];
    std::vector<std::string> actions;
    std::vector<char> codes;
    if (facing) {
      actions = {"fold", "call"};
      codes = {'f', 'c'};
      if (s.bets < rules_.max_bets_per_round) {
        actions.push_back("raise");
        codes.push_back('r');
      }
    } else {
      actions = {"check"};
      codes = {'c'};
      if (s.bets < rules_.max_bets_per_round) {
        actions.push_back("bet");
        codes.push_back('b');
      }
    }
    const Player player = p == 0 ? Player::One : Player::Two;
    const NodeId node = builder_.add_decision(parent, player, key(s, p) + "|" + s.history, actions);
    info_.push_back(annotate(s, pub));

    for (std::size_t a = 0; a < actions.size(); ++a) {
      State next = s;
      next.history = s.history + codes[a];
      next.round_actions = s.round_actions + codes[a];
      next.to_act = 1 - p;
      const std::int32_t child_pub = public_id(next.history, pub);
      const auto pu = static_cast<std::size_t>(p);
      const double bet = rules_.bet_sizes[s.round];
      switch (codes[a]) {
        case 'f':
          terminal(node, next, child_pub, TerminalKind::Fold, p == 0 ? -s.contrib[0] : s.contrib[1]);
          break;
        case 'c':
          if (facing) {
            next.contrib[pu] = s.contrib[1 - pu];
            end_round(node, next, child_pub);
          } else if (s.round_actions.empty()) {
            betting(node, next);
          } else {
            end_round(node, next, child_pub);
          }
          break;
        case 'b':
        case 'r':
          next.contrib[pu] = s.contrib[1 - pu] + bet;
          next.bets = s.bets + 1;
          betting(node, next);
          break;
        default:
          break;
      }
    }
  }

  const PokerRules& rules_;
  const CardAbstraction& abs_;
  GameTreeBuilder builder_;
  int deck_ = 0;
  std::vector<PokerNodeInfo> info_;
  std::vector<PublicState> public_states_;
  std::map<std::string, std::int32_t> public_ids_;
};

}  // namespace

PokerGame build_poker(const PokerRules& rules, const CardAbstraction& abstraction) {
  const auto n = rules.rank_names.size();
  if (abstraction.preflop.size() != n || abstraction.postflop.size() != n) {
    throw GameError("abstraction does not match the deck");
  }
  return PokerBuilder(rules, abstraction).build();
}

PokerGame build_kuhn() { return build_poker(kuhn_rules(), identity_abstraction(kuhn_rules())); }
PokerGame build_leduc() { return build_poker(leduc_rules(), identity_abstraction(leduc_rules())); }

AbstractedPoker build_abstraction(const PokerRules& rules, const std::string& name) {
  auto abstraction = named_abstraction(name, rules);
  AbstractedPoker out{build_poker(rules, identity_abstraction(rules)), build_poker(rules, abstraction), {}};
  const auto& full = out.full.tree();
  const auto& abs = out.abstract.tree();
  for (Player p : {Player::One, Player::Two}) {
    auto& map = out.infoset_map[static_cast<std::size_t>(index_of(p))];
    map.assign(full.num_infosets(), -1);
    for (InfosetId g : full.infosets_of(p)) {
      const NodeId h = full.infoset(g).members.front();
      map[static_cast<std::size_t>(g)] = abs.node(h).infoset;
    }
  }
  return out;
}

BehavioralStrategy lift_strategy(const AbstractedPoker& a, const BehavioralStrategy& abstract_strategy) {
  const Player p = abstract_strategy.owner;
  const auto& full = a.full.game();
  const auto& abs = a.abstract.game();
  BehavioralStrategy out;
  out.owner = p;
  out.probs.assign(static_cast<std::size_t>(full.index(p).size()), 1.0);
  for (InfosetId g : full.tree().infosets_of(p)) {
    const InfosetId ag = a.infoset_map[static_cast<std::size_t>(index_of(p))][static_cast<std::size_t>(g)];
    for (int act = 0; act < full.tree().infoset(g).num_actions(); ++act) {
      out.probs[static_cast<std::size_t>(full.index(p).sequence(g, act))] =
          abstract_strategy.probs[static_cast<std::size_t>(abs.index(p).sequence(ag, act))];
    }
  }
  return out;
}

}  // namespace ccfr
