#include "aht/ppo/gae.hpp"

#include <stdexcept>

namespace aht::ppo {

GaeResult gae(std::span<const Real> rewards, std::span<const Real> values, Real value_bootstrap,
              std::span<const std::uint8_t> dones, Real gamma, Real lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("gae: length mismatch");
  GaeResult out{Vector(static_cast<Eigen::Index>(n)), Vector(static_cast<Eigen::Index>(n))};
  Real running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const Real live = dones[k] ? 0.0 : 1.0;
    const Real next_value = (k + 1 < n) ? values[k + 1] : value_bootstrap;
    const Real delta = rewards[k] + gamma * live * next_value - values[k];
    running = delta + gamma * lambda * live * running;
    out.advantages[static_cast<Eigen::Index>(k)] = running;
    out.value_targets[static_cast<Eigen::Index>(k)] = running + values[k];
  }
  return out;
}

}  // namespace aht::ppo
