#include "aht/envs/overcooked.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aht::envs {

namespace {

constexpr std::string_view kCrampedRoom =
    "##P##\n"
    "O...O\n"
    "#...#\n"
    "#B#D#\n";

}  // namespace

Tile Layout::at(Cell c) const {
  if (!inside(c)) return Tile::counter;
  return tiles[static_cast<std::size_t>(c.row * cols + c.col)];
}

int Layout::counter_index(Cell c) const {
  for (std::size_t i = 0; i < counters.size(); ++i)
    if (counters[i] == c) return static_cast<int>(i);
  return -1;
}

int Layout::pot_index(Cell c) const {
  for (std::size_t i = 0; i < pots.size(); ++i)
    if (pots[i] == c) return static_cast<int>(i);
  return -1;
}

Layout Layout::parse(std::string_view ascii, std::string name) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(ascii)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw std::invalid_argument("layout: empty");
  Layout l;
  l.name = std::move(name);
  l.rows = static_cast<int>(lines.size());
  l.cols = static_cast<int>(lines.front().size());
  for (int r = 0; r < l.rows; ++r) {
    const auto& line = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(line.size()) != l.cols)
      throw std::invalid_argument("layout: ragged row " + std::to_string(r + 1));
    for (int c = 0; c < l.cols; ++c) {
      Tile t;
      switch (line[static_cast<std::size_t>(c)]) {
        case '#': t = Tile::counter; l.counters.push_back({r, c}); break;
        case 'O': t = Tile::onion_pile; break;
        case 'P': t = Tile::pot; l.pots.push_back({r, c}); break;
        case 'D': t = Tile::delivery; break;
        case 'B': t = Tile::plate_pile; break;
        case '.':
        case ' ': t = Tile::floor; l.floor.push_back({r, c}); break;
        default:
          throw std::invalid_argument("layout: unknown tile '" + std::string(1, line[static_cast<std::size_t>(c)]) +
                                      "' at row " + std::to_string(r + 1));
      }
      l.tiles.push_back(t);
    }
  }
  if (l.floor.size() < 2) throw std::invalid_argument("layout: needs at least two floor cells");
  if (l.pots.empty()) throw std::invalid_argument("layout: no pot");
  return l;
}

Layout load_layout(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open layout " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return Layout::parse(ss.str(), path);
}

const Layout& cramped_room() {
  static const Layout l = Layout::parse(kCrampedRoom, "cramped_room");
  return l;
}

void OvercookedConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("overcooked: horizon must be >= 1");
  if (cook_time < 0) throw std::invalid_argument("overcooked: cook_time must be >= 0");
}

bool pot_ready(const PotState& pot, const OvercookedConfig& cfg) { return pot.cooking && pot.timer >= cfg.cook_time; }

OvercookedState overcooked_reset(const Layout& layout, const OvercookedConfig& cfg, Rng& rng) {
  (void)cfg;
  OvercookedState s;
  std::vector<Cell> free = layout.floor;
  for (int p = 0; p < 2; ++p) {
    const std::size_t k = rng.uniform_index(free.size());
    s.pos[static_cast<std::size_t>(p)] = free[k];
    free.erase(free.begin() + static_cast<std::ptrdiff_t>(k));
  }
  s.pots.assign(layout.pots.size(), PotState{});
  s.counter_items.assign(layout.counters.size(), Item::none);
  return s;
}

OvercookedStepResult overcooked_step(const Layout& layout, const OvercookedConfig& cfg, OvercookedState& s,
                                     const std::array<int, 2>& actions) {
  OvercookedStepResult out;
  if (s.done) {
    out.done = true;
    return out;
  }
  ++s.t;
  double shaping = 0.0;
  for (int p = 0; p < 2; ++p) {
    const auto pi = static_cast<std::size_t>(p);
    if (actions[pi] != kOcInteract) continue;
    const Cell f = offset(s.pos[pi], s.dir[pi]);
    Item& held = s.held[pi];
    switch (layout.at(f)) {
      case Tile::onion_pile:
        if (held == Item::none) {
          held = Item::onion;
          shaping += cfg.onion_pickup;
        }
        break;
      case Tile::plate_pile:
        if (held == Item::none) {
          held = Item::plate;
          shaping += cfg.plate_pickup;
        }
        break;
      case Tile::counter: {
        const int k = layout.counter_index(f);
        if (k < 0) break;
        Item& slot = s.counter_items[static_cast<std::size_t>(k)];
        if (held == Item::none && slot != Item::none) {
          held = slot;
          slot = Item::none;
        } else if (held != Item::none && slot == Item::none) {
          slot = held;
          held = Item::none;
        }
        break;
      }
      case Tile::pot: {
        PotState& pot = s.pots[static_cast<std::size_t>(layout.pot_index(f))];
        if (held == Item::onion && !pot.cooking && pot.onions < 3) {
          held = Item::none;
          ++pot.onions;
          shaping += cfg.onion_in_pot;
          if (pot.onions == 3) {
            pot.cooking = true;
            pot.timer = 0;
          }
        } else if (held == Item::plate && pot_ready(pot, cfg)) {
          held = Item::soup;
          pot = PotState{};
          shaping += cfg.soup_plated;
        }
        break;
      }
      case Tile::delivery:
        if (held == Item::soup) {
          held = Item::none;
          out.reward += cfg.delivery_reward;
        }
        break;
      case Tile::floor:
        break;
    }
  }

  std::array<Cell, 2> target = s.pos;
  for (int p = 0; p < 2; ++p) {
    const auto pi = static_cast<std::size_t>(p);
    const int a = actions[pi];
    if (a < 0 || a > kOcRight) continue;
    s.dir[pi] = a;
    const Cell n = offset(s.pos[pi], a);
    if (layout.at(n) == Tile::floor) target[pi] = n;
  }
  const bool moved0 = target[0] != s.pos[0];
  const bool moved1 = target[1] != s.pos[1];
  const bool clash = target[0] == target[1] || (target[0] == s.pos[1] && target[1] == s.pos[0]);
  if (clash) {
    target = s.pos;
  } else {
    if (moved0 && !moved1 && target[0] == s.pos[1]) target[0] = s.pos[0];
    if (moved1 && !moved0 && target[1] == s.pos[0]) target[1] = s.pos[1];
  }
  s.pos = target;

  for (auto& pot : s.pots)
    if (pot.cooking && pot.timer < cfg.cook_time) ++pot.timer;

  if (s.t >= cfg.horizon) s.done = true;
  out.done = s.done;
  out.shaped_reward = out.reward + cfg.shaping_scale * shaping;
  return out;
}

int overcooked_obs_dim(const Layout& layout) {
  return 2 * 10 + 4 * static_cast<int>(layout.pots.size()) + 3 * static_cast<int>(layout.counters.size()) + 2;
}

void overcooked_observe(const Layout& layout, const OvercookedConfig& cfg, const OvercookedState& s, int agent,
                        std::span<Real> out) {
  if (static_cast<int>(out.size()) != overcooked_obs_dim(layout))
    throw std::invalid_argument("overcooked_observe: wrong buffer size");
  std::fill(out.begin(), out.end(), 0.0);
  std::size_t k = 0;
  const double rs = layout.rows > 1 ? 1.0 / (layout.rows - 1) : 1.0;
  const double cs = layout.cols > 1 ? 1.0 / (layout.cols - 1) : 1.0;
  for (int who : {agent, 1 - agent}) {
    const auto w = static_cast<std::size_t>(who);
    out[k] = s.pos[w].row * rs;
    out[k + 1] = s.pos[w].col * cs;
    out[k + 2 + static_cast<std::size_t>(s.dir[w])] = 1.0;
    out[k + 6 + static_cast<std::size_t>(s.held[w])] = 1.0;
    k += 10;
  }
  for (const auto& pot : s.pots) {
    out[k] = pot.onions / 3.0;
    out[k + 1] = pot.cooking ? 1.0 : 0.0;
    out[k + 2] = cfg.cook_time > 0 ? static_cast<double>(pot.timer) / cfg.cook_time : 0.0;
    out[k + 3] = pot_ready(pot, cfg) ? 1.0 : 0.0;
    k += 4;
  }
  for (Item it : s.counter_items) {
    if (it != Item::none) out[k + static_cast<std::size_t>(it) - 1] = 1.0;
    k += 3;
  }
  out[k++] = (cfg.horizon - s.t) <= cfg.urgency_steps ? 1.0 : 0.0;
  out[k++] = static_cast<double>(s.t) / cfg.horizon;
}

OvercookedEnv::OvercookedEnv(OvercookedConfig cfg, std::shared_ptr<const Layout> layout)
    : cfg_(cfg), layout_(layout ? std::move(layout) : std::make_shared<const Layout>(cramped_room())) {
  cfg_.validate();
  desc_ = {"overcooked_" + layout_->name, 2, overcooked_obs_dim(*layout_), kOcNumActions, cfg_.horizon, cfg_.gamma};
  desc_.validate();
  Rng rng(0);
  state_ = overcooked_reset(*layout_, cfg_, rng);
}

void OvercookedEnv::reset(Rng& rng) { state_ = overcooked_reset(*layout_, cfg_, rng); }

StepOutcome OvercookedEnv::step(int action0, int action1, Rng& rng) {
  (void)rng;
  const auto r = overcooked_step(*layout_, cfg_, state_, {action0, action1});
  return {r.shaped_reward, r.reward, r.done};
}

void OvercookedEnv::observe(int agent, std::span<Real> out) const {
  overcooked_observe(*layout_, cfg_, state_, agent, out);
}

}  // namespace aht::envs
