#include "aht/core/types.hpp"

namespace aht {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::SP: return "SP";
    case Mode::XP: return "XP";
    case Mode::SXP: return "SXP";
    case Mode::MP: return "MP";
  }
  return "?";
}

std::size_t TrajectoryBatch::num_transitions() const {
  std::size_t n = 0;
  for (const auto& ep : episodes) n += ep.size();
  return n;
}

Real TrajectoryBatch::mean_raw_return() const {
  if (episodes.empty()) return 0.0;
  Real total = 0.0;
  for (const auto& ep : episodes)
    for (const auto& t : ep) total += t.raw_reward;
  return total / static_cast<Real>(episodes.size());
}

Real TrajectoryBatch::mean_return() const {
  if (episodes.empty()) return 0.0;
  Real total = 0.0;
  for (const auto& ep : episodes)
    for (const auto& t : ep) total += t.reward;
  return total / static_cast<Real>(episodes.size());
}

Real discounted_return(std::span<const Real> rewards, Real gamma) {
  Real total = 0.0;
  Real discount = 1.0;
  for (Real r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

}  // namespace aht
