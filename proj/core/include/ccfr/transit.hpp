#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ccfr/strategy.hpp"

namespace ccfr {

/// Parameters of the grid transit game. The evader (player one) crosses a
/// 2w x w grid from west to east; the patroller (player two) starts at its base.
struct TransitParams {
  int width = 3;
  double failure = 0.1;       // a failed move leaves the mover in place
  double encounter = -1.0;    // evader payoff per step of co-location
  double escape = 1.0;        // evader payoff on reaching the east column
  double step_cost = -0.02;   // evader payoff per step spent not yet escaped
  int base_row = -1;          // default: width / 2
  int base_column = -1;       // default: width (centre of the grid)
};

/// Markov (location, time) view of the transit game.
///
/// Decisions happen at times t = 1..d with d = 2w + 4; rewards are charged on
/// arrival at t + 1. The evader starts outside the grid and enters the west
/// column with one of w entry actions. Neither player observes the other, so
/// each player's infoset is its own (location, time). Dynamics are independent,
/// which makes payoffs bilinear in the two occupancy vectors.
class TransitGame final : public StrategicGame {
 public:
  explicit TransitGame(TransitParams params = {});

  const TransitParams& params() const { return params_; }
  int width() const { return params_.width; }
  int rows() const { return params_.width; }
  int columns() const { return 2 * params_.width; }
  int horizon() const { return 2 * params_.width + 4; }
  int num_cells() const { return rows() * columns(); }
  /// Evader location id used for "outside the grid".
  int outside() const { return num_cells(); }
  int cell(int row, int column) const { return row * columns() + column; }
  int base() const { return base_; }
  bool east(int location) const { return location < num_cells() && location % columns() == columns() - 1; }

  struct Action {
    std::string label;
    std::vector<std::pair<int, double>> next;  // (location, probability)
  };
  /// Actions available at a location, in layout order.
  const std::vector<Action>& actions(Player p, int location) const;

  struct InfosetKey {
    int location = 0;
    int time = 0;
  };
  const InfosetKey& infoset_key(Player p, std::int32_t infoset) const;
  /// Layout infoset of (location, time), or -1 when unreachable.
  std::int32_t infoset_at(Player p, int location, int time) const;

  /// Arrival distribution over locations at times 1..d+1 (index 0 unused),
  /// given a player's realization vector. Evader arrivals on the east column are
  /// included at the time they happen.
  std::vector<std::vector<double>> arrivals(Player p, std::span<const double> x) const;

  /// Probability that the patroller is away from base after the last move.
  double risk(std::span<const double> patroller_x) const;
  /// Coefficients c with risk(x) = c . x.
  std::vector<double> risk_coefficients() const;

  const DecisionLayout& layout(Player p) const override { return layout_[index_of(p)]; }
  void immediate_values(Player p, std::span<const double> opponent_behavioral,
                        std::span<double> out) const override;
  bool perfect_recall(Player) const override { return false; }
  /// Independent dynamics and an unobserved opponent: a Markov best response is
  /// optimal, and the bottom-up maximisation over (location, time) finds it.
  bool supports_exact_best_response(Player) const override { return true; }
  /// Bound on the evader's payoff range: escape - d * (encounter + step cost).
  double utility_range() const override;
  std::string name() const override;
  std::string hash() const override;
  std::string sequence_label(Player p, std::int32_t sequence) const override;

 private:
  void build_player(Player p, int start);

  TransitParams params_;
  int base_ = 0;
  std::array<std::vector<std::vector<Action>>, 2> actions_;
  std::array<std::vector<InfosetKey>, 2> keys_;
  std::array<std::vector<std::int32_t>, 2> lookup_;  // (time * locations + location) -> infoset
  std::array<DecisionLayout, 2> layout_;
};

}  // namespace ccfr
