#include "aht/envs/heuristics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace aht::envs {

namespace {

constexpr HeuristicKind kAllKinds[] = {
    HeuristicKind::seq_col,     HeuristicKind::seq_rcol,     HeuristicKind::seq_lexi,
    HeuristicKind::seq_rlexi,   HeuristicKind::seq_nearest,  HeuristicKind::seq_farthest,
    HeuristicKind::onion_cook,  HeuristicKind::plate_cook,   HeuristicKind::independent_cook,
};

}  // namespace

const char* to_string(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::seq_col: return "seq_col";
    case HeuristicKind::seq_rcol: return "seq_rcol";
    case HeuristicKind::seq_lexi: return "seq_lexi";
    case HeuristicKind::seq_rlexi: return "seq_rlexi";
    case HeuristicKind::seq_nearest: return "seq_nearest";
    case HeuristicKind::seq_farthest: return "seq_farthest";
    case HeuristicKind::onion_cook: return "onion_cook";
    case HeuristicKind::plate_cook: return "plate_cook";
    case HeuristicKind::independent_cook: return "independent_cook";
  }
  return "?";
}

HeuristicKind parse_heuristic_kind(const std::string& s) {
  for (HeuristicKind k : kAllKinds)
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown heuristic kind: " + s);
}

std::string HeuristicAgent::name() const {
  if (is_lbf()) return to_string(kind);
  std::ostringstream os;
  os << to_string(kind) << '_' << drop_prob;
  return os.str();
}

HeuristicAgent parse_heuristic(const std::string& name) {
  for (HeuristicKind k : kAllKinds) {
    const std::string base = to_string(k);
    if (name == base) return {k, 0.0};
    if (k > HeuristicKind::seq_farthest && name.size() > base.size() + 1 && name.compare(0, base.size(), base) == 0 &&
        name[base.size()] == '_')
      return {k, std::stod(name.substr(base.size() + 1))};
  }
  throw std::invalid_argument("unknown heuristic: " + name);
}

std::vector<HeuristicAgent> lbf_heuristics() {
  std::vector<HeuristicAgent> out;
  for (HeuristicKind k : kAllKinds)
    if (k <= HeuristicKind::seq_farthest) out.push_back({k, 0.0});
  return out;
}

std::vector<HeuristicAgent> overcooked_heuristics() {
  std::vector<HeuristicAgent> out;
  for (HeuristicKind k : {HeuristicKind::onion_cook, HeuristicKind::plate_cook, HeuristicKind::independent_cook})
    for (double p : {0.0, 0.1, 0.4}) out.push_back({k, p});
  return out;
}

std::vector<std::size_t> lbf_food_order(HeuristicKind kind, const std::vector<Cell>& foods, Cell origin) {
  std::vector<std::size_t> order(foods.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto by_col = [&](std::size_t a, std::size_t b) {
    return std::pair(foods[a].col, foods[a].row) < std::pair(foods[b].col, foods[b].row);
  };
  auto by_row = [&](std::size_t a, std::size_t b) { return foods[a] < foods[b]; };
  auto by_dist = [&](std::size_t a, std::size_t b) {
    return manhattan(foods[a], origin) < manhattan(foods[b], origin);
  };
  switch (kind) {
    case HeuristicKind::seq_col:
    case HeuristicKind::seq_rcol:
      std::stable_sort(order.begin(), order.end(), by_col);
      break;
    case HeuristicKind::seq_lexi:
    case HeuristicKind::seq_rlexi:
      std::stable_sort(order.begin(), order.end(), by_row);
      break;
    case HeuristicKind::seq_nearest:
    case HeuristicKind::seq_farthest:
      std::stable_sort(order.begin(), order.end(), by_dist);
      break;
    default:
      throw std::invalid_argument("lbf_food_order: not a sequencing agent");
  }
  if (kind == HeuristicKind::seq_rcol || kind == HeuristicKind::seq_rlexi || kind == HeuristicKind::seq_farthest)
    std::reverse(order.begin(), order.end());
  return order;
}

int lbf_plan_action(const LbfConfig& cfg, const LbfState& s, int agent, std::size_t target) {
  const Cell self = s.players[static_cast<std::size_t>(agent)];
  const Cell other = s.players[static_cast<std::size_t>(1 - agent)];
  const Cell food = s.foods[target];
  if (adjacent(self, food)) return kLbfLoad;
  // cells the other player could also step into this turn are avoided
  const auto step = shortest_step(
      cfg.grid, cfg.grid, self, [&](Cell c) { return !s.food_at(c) && manhattan(c, other) > 1; },
      [&](Cell c) { return adjacent(c, food); });
  if (!step.reachable || step.first_direction < 0) return kLbfNoop;
  return step.first_direction;
}

void HeuristicPolicy::begin_episode(const Environment& env, int agent) {
  order_.clear();
  last_held_ = Item::none;
  dropping_ = false;
  if (agent_.is_lbf()) {
    const auto* lbf = dynamic_cast<const LbfEnv*>(&env);
    if (!lbf) throw std::invalid_argument("heuristic " + agent_.name() + " needs an LBF environment");
    const auto& s = lbf->state();
    order_ = lbf_food_order(agent_.kind, s.foods, s.players[static_cast<std::size_t>(agent)]);
  } else if (!dynamic_cast<const OvercookedEnv*>(&env)) {
    throw std::invalid_argument("heuristic " + agent_.name() + " needs an Overcooked environment");
  }
}

void HeuristicPolicy::action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                                   std::span<Real> probs) {
  (void)obs;
  std::fill(probs.begin(), probs.end(), 0.0);
  probs[static_cast<std::size_t>(act(env, agent, rng))] = 1.0;
}

int HeuristicPolicy::act(const Environment& env, int agent, Rng& rng) {
  if (agent_.is_lbf()) return lbf_act(dynamic_cast<const LbfEnv&>(env), agent);
  return cook_act(dynamic_cast<const OvercookedEnv&>(env), agent, rng);
}

int HeuristicPolicy::lbf_act(const LbfEnv& env, int agent) {
  const auto& s = env.state();
  if (order_.size() != s.foods.size())
    order_ = lbf_food_order(agent_.kind, s.foods, s.players[static_cast<std::size_t>(agent)]);
  for (std::size_t i : order_)
    if (!s.collected[i]) return lbf_plan_action(env.config(), s, agent, i);
  return kLbfNoop;
}

namespace {

// Moves toward the nearest tile satisfying `goal`, then faces it and returns
// kOcInteract. `wait_at_goal` replaces the final interact with noop.
template <typename Goal>
int go_interact(const Layout& layout, const OvercookedState& s, int agent, Goal&& goal, Rng& rng,
                bool wait_at_goal = false) {
  const auto a = static_cast<std::size_t>(agent);
  const Cell self = s.pos[a];
  const Cell other = s.pos[1 - a];
  for (int d = 0; d < 4; ++d) {
    const Cell n = offset(self, d);
    if (layout.inside(n) && layout.at(n) != Tile::floor && goal(n)) {
      if (s.dir[a] != d) return d;  // turn in place toward a non-floor tile
      return wait_at_goal ? kOcNoop : kOcInteract;
    }
  }
  auto next_to_goal = [&](Cell c) {
    for (int d = 0; d < 4; ++d) {
      const Cell n = offset(c, d);
      if (layout.inside(n) && layout.at(n) != Tile::floor && goal(n)) return true;
    }
    return false;
  };
  auto floor_free = [&](Cell c) { return layout.at(c) == Tile::floor && c != other; };
  const auto step = shortest_step(layout.rows, layout.cols, self, floor_free, next_to_goal);
  if (step.reachable && step.first_direction >= 0) return step.first_direction;
  const auto blocked = shortest_step(
      layout.rows, layout.cols, self, [&](Cell c) { return layout.at(c) == Tile::floor; }, next_to_goal);
  if (blocked.reachable) return static_cast<int>(rng.uniform_index(4));  // sidestep the other player
  return kOcNoop;
}

}  // namespace

int HeuristicPolicy::cook_act(const OvercookedEnv& env, int agent, Rng& rng) {
  const auto& layout = env.layout();
  const auto& cfg = env.config();
  const auto& s = env.state();
  const auto a = static_cast<std::size_t>(agent);
  const Item held = s.held[a];
  if (held != last_held_) {
    if (held != Item::none && last_held_ == Item::none) dropping_ = agent_.drop_prob > 0.0 && rng.bernoulli(agent_.drop_prob);
    if (held == Item::none) dropping_ = false;
    last_held_ = held;
  }

  auto counter_holds = [&](Cell c, Item it) {
    const int k = layout.counter_index(c);
    return k >= 0 && s.counter_items[static_cast<std::size_t>(k)] == it;
  };
  auto empty_counter = [&](Cell c) { return counter_holds(c, Item::none); };
  auto pot_at = [&](Cell c) -> const PotState* {
    const int k = layout.pot_index(c);
    return k >= 0 ? &s.pots[static_cast<std::size_t>(k)] : nullptr;
  };
  auto open_pot = [&](Cell c) {
    const PotState* p = pot_at(c);
    return p && !p->cooking && p->onions < 3;
  };
  auto cooking_pot = [&](Cell c) {
    const PotState* p = pot_at(c);
    return p && p->cooking;
  };
  auto onion_source = [&](Cell c) { return layout.at(c) == Tile::onion_pile || counter_holds(c, Item::onion); };
  auto plate_source = [&](Cell c) { return layout.at(c) == Tile::plate_pile || counter_holds(c, Item::plate); };
  auto delivery = [&](Cell c) { return layout.at(c) == Tile::delivery; };
  auto any_pot = [&](auto&& pred) {
    for (const Cell& c : layout.pots)
      if (pred(c)) return true;
    return false;
  };
  auto serve_pot = [&]() {
    // stand at a cooking pot; interact only once it is ready
    for (int d = 0; d < 4; ++d) {
      const Cell n = offset(s.pos[a], d);
      if (cooking_pot(n)) {
        if (s.dir[a] != d) return d;
        return pot_ready(*pot_at(n), cfg) ? static_cast<int>(kOcInteract) : static_cast<int>(kOcNoop);
      }
    }
    return go_interact(layout, s, agent, cooking_pot, rng);
  };

  if (dropping_ && held != Item::none) return go_interact(layout, s, agent, empty_counter, rng);

  const bool partner_has_plate = s.held[1 - a] == Item::plate;
  switch (agent_.kind) {
    case HeuristicKind::onion_cook:
      if (held == Item::onion) return any_pot(open_pot) ? go_interact(layout, s, agent, open_pot, rng) : kOcNoop;
      if (held == Item::none) return go_interact(layout, s, agent, onion_source, rng);
      return go_interact(layout, s, agent, empty_counter, rng);
    case HeuristicKind::plate_cook:
      if (held == Item::soup) return go_interact(layout, s, agent, delivery, rng);
      if (held == Item::plate) return any_pot(cooking_pot) ? serve_pot() : kOcNoop;
      if (held == Item::none) {
        const bool needed = any_pot([&](Cell c) { return cooking_pot(c) || pot_at(c)->onions > 0; });
        return needed ? go_interact(layout, s, agent, plate_source, rng) : kOcNoop;
      }
      return go_interact(layout, s, agent, empty_counter, rng);
    case HeuristicKind::independent_cook:
      if (held == Item::soup) return go_interact(layout, s, agent, delivery, rng);
      if (held == Item::plate) return any_pot(cooking_pot) ? serve_pot() : kOcNoop;
      if (held == Item::onion)
        return any_pot(open_pot) ? go_interact(layout, s, agent, open_pot, rng)
                                 : go_interact(layout, s, agent, empty_counter, rng);
      if (any_pot(cooking_pot) && !partner_has_plate) return go_interact(layout, s, agent, plate_source, rng);
      if (any_pot(open_pot)) return go_interact(layout, s, agent, onion_source, rng);
      return kOcNoop;
    default:
      throw std::logic_error("cook_act: not a cook");
  }
}

int heuristic_action(HeuristicPolicy& agent, const Environment& env, int slot, Rng& rng) {
  return agent.act(env, slot, rng);
}

}  // namespace aht::envs
