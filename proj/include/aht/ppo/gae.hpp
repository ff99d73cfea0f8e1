#pragma once

#include <cstdint>
#include <span>

#include "aht/core/types.hpp"

namespace aht::ppo {

struct GaeResult {
  Vector advantages;
  Vector value_targets;  // advantages + values
};

// Generalized advantage estimation over a flat sequence of transitions.
// values[t] = V(s_t); `value_bootstrap` is V of the state following the last
// transition (ignored if that transition is done). A done flag zeroes the
// next-state value and restarts the recursion.
GaeResult gae(std::span<const Real> rewards, std::span<const Real> values, Real value_bootstrap,
              std::span<const std::uint8_t> dones, Real gamma, Real lambda);

}  // namespace aht::ppo
