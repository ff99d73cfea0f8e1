#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aht/core/environment.hpp"
#include "aht/envs/grid.hpp"

namespace aht::envs {

enum OvercookedAction : int { kOcUp = 0, kOcDown, kOcLeft, kOcRight, kOcInteract, kOcNoop, kOcNumActions };

enum class Tile : std::uint8_t { floor, counter, onion_pile, plate_pile, pot, delivery };
enum class Item : std::uint8_t { none = 0, onion, plate, soup };

// Static kitchen geometry. ASCII format: '#' counter, 'O' onion pile,
// 'P' pot, 'D' delivery, 'B' plate pile, '.' or ' ' floor.
struct Layout {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<Tile> tiles;
  std::vector<Cell> floor;
  std::vector<Cell> counters;
  std::vector<Cell> pots;

  Tile at(Cell c) const;
  bool inside(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols; }
  int counter_index(Cell c) const;  // -1 if not a counter
  int pot_index(Cell c) const;      // -1 if not a pot

  static Layout parse(std::string_view ascii, std::string name = "custom");
};

Layout load_layout(const std::string& path);
const Layout& cramped_room();

struct OvercookedConfig {
  int horizon = 400;
  int cook_time = 20;
  int urgency_steps = 40;
  double delivery_reward = 20.0;
  double onion_pickup = 0.1;
  double onion_in_pot = 0.5;
  double plate_pickup = 0.1;
  double soup_plated = 1.0;
  double shaping_scale = 1.0;
  double gamma = 0.99;

  void validate() const;
};

struct PotState {
  int onions = 0;
  int timer = 0;
  bool cooking = false;

  bool operator==(const PotState&) const = default;
};

struct OvercookedState {
  std::array<Cell, 2> pos{};
  std::array<int, 2> dir{0, 0};  // facing, in movement-action order
  std::array<Item, 2> held{Item::none, Item::none};
  std::vector<PotState> pots;
  std::vector<Item> counter_items;  // parallel to Layout::counters
  int t = 0;
  bool done = false;

  bool operator==(const OvercookedState&) const = default;
};

struct OvercookedStepResult {
  double reward = 0.0;         // delivery reward only
  double shaped_reward = 0.0;  // reward plus shaping terms
  bool done = false;
};

bool pot_ready(const PotState& pot, const OvercookedConfig& cfg);

OvercookedState overcooked_reset(const Layout& layout, const OvercookedConfig& cfg, Rng& rng);

// Interacts resolve first (player 0 then player 1) against the faced tile,
// then moves: a move turns the player and advances onto free floor; two
// players heading for one cell, or swapping, both stay. Pots tick last.
OvercookedStepResult overcooked_step(const Layout& layout, const OvercookedConfig& cfg, OvercookedState& state,
                                     const std::array<int, 2>& actions);

int overcooked_obs_dim(const Layout& layout);
void overcooked_observe(const Layout& layout, const OvercookedConfig& cfg, const OvercookedState& state, int agent,
                        std::span<Real> out);

class OvercookedEnv : public Environment {
 public:
  explicit OvercookedEnv(OvercookedConfig cfg = {}, std::shared_ptr<const Layout> layout = nullptr);

  const EnvDescriptor& descriptor() const override { return desc_; }
  void reset(Rng& rng) override;
  StepOutcome step(int action0, int action1, Rng& rng) override;
  void observe(int agent, std::span<Real> out) const override;
  int time_step() const override { return state_.t; }
  bool terminal() const override { return state_.done; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<OvercookedEnv>(*this); }

  const Layout& layout() const { return *layout_; }
  const OvercookedConfig& config() const { return cfg_; }
  const OvercookedState& state() const { return state_; }
  void set_state(const OvercookedState& s) { state_ = s; }

 private:
  OvercookedConfig cfg_;
  std::shared_ptr<const Layout> layout_;
  EnvDescriptor desc_;
  OvercookedState state_;
};

}  // namespace aht::envs
