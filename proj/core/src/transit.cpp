#include "ccfr/transit.hpp"

#include <sstream>

#include "ccfr/format.hpp"
#include "ccfr/game_io.hpp"

namespace ccfr {

namespace {

constexpr std::array<std::pair<int, int>, 9> kMoves = {
    {{0, 0}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};
constexpr std::array<const char*, 9> kMoveNames = {"stay", "N", "NE", "E", "SE", "S", "SW", "W", "NW"};

}  // namespace

TransitGame::TransitGame(TransitParams params) : params_(params) {
  if (params_.width < 2) throw GameError("transit game needs width >= 2");
  if (!(params_.failure >= 0.0 && params_.failure < 1.0)) throw GameError("move failure probability must be in [0, 1)");
  if (params_.base_row < 0) params_.base_row = params_.width / 2;
  if (params_.base_column < 0) params_.base_column = params_.width;
  if (params_.base_row >= rows() || params_.base_column >= columns()) throw GameError("patroller base outside the grid");
  base_ = cell(params_.base_row, params_.base_column);

  const double ok = 1.0 - params_.failure;
  for (Player p : {Player::One, Player::Two}) {
    auto& table = actions_[index_of(p)];
    table.assign(static_cast<std::size_t>(num_cells() + 1), {});
    for (int r = 0; r < rows(); ++r) {
      for (int c = 0; c < columns(); ++c) {
        const int here = cell(r, c);
        if (p == Player::One && east(here)) continue;
        for (std::size_t m = 0; m < kMoves.size(); ++m) {
          const int nr = r + kMoves[m].first;
          const int nc = c + kMoves[m].second;
          if (nr < 0 || nr >= rows() || nc < 0 || nc >= columns()) continue;
          Action a;
          a.label = kMoveNames[m];
          const int there = cell(nr, nc);
          if (there == here) {
            a.next = {{here, 1.0}};
          } else {
            a.next = {{there, ok}};
            if (params_.failure > 0.0) a.next.emplace_back(here, params_.failure);
          }
          table[static_cast<std::size_t>(here)].push_back(std::move(a));
        }
      }
    }
    if (p == Player::One) {
      auto& out = table[static_cast<std::size_t>(outside())];
      for (int r = 0; r < rows(); ++r) {
        Action a;
        a.label = "enter" + std::to_string(r);
        a.next = {{cell(r, 0), ok}};
        if (params_.failure > 0.0) a.next.emplace_back(outside(), params_.failure);
        out.push_back(std::move(a));
      }
    }
  }
  build_player(Player::One, outside());
  build_player(Player::Two, base_);
}

void TransitGame::build_player(Player p, int start) {
  const int locations = num_cells() + 1;
  const int d = horizon();
  auto& keys = keys_[index_of(p)];
  auto& lookup = lookup_[index_of(p)];
  lookup.assign(static_cast<std::size_t>((d + 2) * locations), -1);

  std::vector<char> reach(static_cast<std::size_t>(locations), 0);
  reach[static_cast<std::size_t>(start)] = 1;
  for (int t = 1; t <= d; ++t) {
    std::vector<char> next(static_cast<std::size_t>(locations), 0);
    for (int loc = 0; loc < locations; ++loc) {
      if (!reach[static_cast<std::size_t>(loc)]) continue;
      const auto& acts = actions(p, loc);
      if (acts.empty()) continue;
      lookup[static_cast<std::size_t>(t * locations + loc)] = static_cast<std::int32_t>(keys.size());
      keys.push_back({loc, t});
      for (const auto& a : acts) {
        for (const auto& [to, prob] : a.next) {
          if (prob > 0.0) next[static_cast<std::size_t>(to)] = 1;
        }
      }
    }
    reach = std::move(next);
  }

  std::vector<std::int32_t> counts;
  counts.reserve(keys.size());
  for (const auto& k : keys) counts.push_back(static_cast<std::int32_t>(actions(p, k.location).size()));
  std::vector<std::vector<std::pair<std::int32_t, double>>> successors(1);
  successors[0].emplace_back(infoset_at(p, start, 1), 1.0);
  for (const auto& k : keys) {
    for (const auto& a : actions(p, k.location)) {
      auto& list = successors.emplace_back();
      if (k.time == d) continue;
      for (const auto& [to, prob] : a.next) {
        const auto next = infoset_at(p, to, k.time + 1);
        if (next >= 0) list.emplace_back(next, prob);
      }
    }
  }
  layout_[index_of(p)] = DecisionLayout::from_successors(std::move(counts), successors);
}

const std::vector<TransitGame::Action>& TransitGame::actions(Player p, int location) const {
  return actions_[index_of(p)].at(static_cast<std::size_t>(location));
}

const TransitGame::InfosetKey& TransitGame::infoset_key(Player p, std::int32_t infoset) const {
  return keys_[index_of(p)].at(static_cast<std::size_t>(infoset));
}

std::int32_t TransitGame::infoset_at(Player p, int location, int time) const {
  if (time < 1 || time > horizon() || location < 0 || location > num_cells()) return -1;
  return lookup_[index_of(p)][static_cast<std::size_t>(time * (num_cells() + 1) + location)];
}

std::vector<std::vector<double>> TransitGame::arrivals(Player p, std::span<const double> x) const {
  const int d = horizon();
  const auto& layout = this->layout(p);
  std::vector<std::vector<double>> arr(static_cast<std::size_t>(d + 2),
                                       std::vector<double>(static_cast<std::size_t>(num_cells() + 1), 0.0));
  arr[1][static_cast<std::size_t>(p == Player::One ? outside() : base_)] = 1.0;
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto& k = infoset_key(p, i);
    const auto& acts = actions(p, k.location);
    auto& row = arr[static_cast<std::size_t>(k.time + 1)];
    for (std::size_t a = 0; a < acts.size(); ++a) {
      const double xs = x[static_cast<std::size_t>(layout.first_sequence[static_cast<std::size_t>(i)]) + a];
      if (xs == 0.0) continue;
      for (const auto& [to, prob] : acts[a].next) row[static_cast<std::size_t>(to)] += xs * prob;
    }
  }
  return arr;
}

std::vector<double> TransitGame::risk_coefficients() const {
  const auto& layout = this->layout(Player::Two);
  std::vector<double> c(static_cast<std::size_t>(layout.num_sequences()), 0.0);
  for (std::int32_t i = 0; i < layout.num_infosets(); ++i) {
    const auto& k = infoset_key(Player::Two, i);
    if (k.time != horizon()) continue;
    const auto& acts = actions(Player::Two, k.location);
    for (std::size_t a = 0; a < acts.size(); ++a) {
      double away = 0.0;
      for (const auto& [to, prob] : acts[a].next) {
        if (to != base_) away += prob;
      }
      c[static_cast<std::size_t>(layout.first_sequence[static_cast<std::size_t>(i)]) + a] = away;
    }
  }
  return c;
}

double TransitGame::risk(std::span<const double> patroller_x) const {
  const auto c = risk_coefficients();
  double r = 0.0;
  for (std::size_t s = 0; s < c.size(); ++s) r += c[s] * patroller_x[s];
  return r;
}

void TransitGame::immediate_values(Player p, std::span<const double> opponent_behavioral,
                                   std::span<double> out) const {
  const Player o = opponent(p);
  std::vector<double> y(static_cast<std::size_t>(layout(o).num_sequences()));
  realization(layout(o), opponent_behavioral, y);
  const auto opp = arrivals(o, y);
  const auto& lay = layout(p);
  std::fill(out.begin(), out.end(), 0.0);

  const auto evader_reward = [&](int to) {
    return east(to) ? params_.escape : params_.step_cost;
  };

  for (std::int32_t i = 0; i < lay.num_infosets(); ++i) {
    const auto& k = infoset_key(p, i);
    const auto& arrive = opp[static_cast<std::size_t>(k.time + 1)];
    const auto& acts = actions(p, k.location);
    const auto first = static_cast<std::size_t>(lay.first_sequence[static_cast<std::size_t>(i)]);
    for (std::size_t a = 0; a < acts.size(); ++a) {
      double v = 0.0;
      for (const auto& [to, prob] : acts[a].next) {
        if (to >= num_cells()) {
          if (p == Player::One) v += prob * params_.step_cost;
          continue;
        }
        const double meet = params_.encounter * arrive[static_cast<std::size_t>(to)];
        v += prob * (p == Player::One ? evader_reward(to) + meet : -meet);
      }
      out[first + a] = v;
    }
  }

  if (p == Player::Two) {
    // The evader's escape and step terms do not depend on the patroller.
    const auto& el = layout(Player::One);
    double own = 0.0;
    for (std::int32_t i = 0; i < el.num_infosets(); ++i) {
      const auto& k = infoset_key(Player::One, i);
      const auto& acts = actions(Player::One, k.location);
      const auto first = static_cast<std::size_t>(el.first_sequence[static_cast<std::size_t>(i)]);
      for (std::size_t a = 0; a < acts.size(); ++a) {
        double r = 0.0;
        for (const auto& [to, prob] : acts[a].next) r += prob * (to >= num_cells() ? params_.step_cost : evader_reward(to));
        own += y[first + a] * r;
      }
    }
    out[0] = -own;
  }
}

double TransitGame::utility_range() const {
  return params_.escape - horizon() * (params_.encounter + params_.step_cost);
}

std::string TransitGame::name() const { return "transit-w" + std::to_string(params_.width); }

std::string TransitGame::hash() const {
  std::ostringstream canon;
  canon << "transit/1 w=" << params_.width << " d=" << horizon() << " fail=" << format_exact(params_.failure)
        << " enc=" << format_exact(params_.encounter) << " esc=" << format_exact(params_.escape)
        << " step=" << format_exact(params_.step_cost) << " base=" << params_.base_row << "," << params_.base_column
        << " start=outside-west failure=stay escape=absorbing";
  return text_hash(canon.str());
}

std::string TransitGame::sequence_label(Player p, std::int32_t sequence) const {
  if (sequence == 0) return "-";
  const auto& lay = layout(p);
  const auto i = lay.infoset_of_sequence.at(static_cast<std::size_t>(sequence));
  const auto& k = infoset_key(p, i);
  const auto a = sequence - lay.first_sequence[static_cast<std::size_t>(i)];
  std::string where = k.location == outside() ? std::string("out")
                                              : "(" + std::to_string(k.location / columns()) + "," +
                                                    std::to_string(k.location % columns()) + ")";
  return where + "@" + std::to_string(k.time) + ":" + actions(p, k.location)[static_cast<std::size_t>(a)].label;
}

}  // namespace ccfr
