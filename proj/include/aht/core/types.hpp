#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aht {

using Real = double;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

struct EnvDescriptor {
  std::string name;
  int num_agents = 2;
  int obs_dim = 0;
  int num_actions = 0;
  int horizon = 1;
  Real gamma = 0.99;

  void validate() const {
    if (num_agents != 2) throw std::invalid_argument("EnvDescriptor: num_agents must be 2");
    if (horizon < 1) throw std::invalid_argument("EnvDescriptor: horizon must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("EnvDescriptor: gamma must lie in (0,1)");
    if (obs_dim < 1 || num_actions < 1) throw std::invalid_argument("EnvDescriptor: empty obs or action space");
  }
};

// Interaction regime a transition was collected under.
enum class Mode : std::uint8_t { SP = 0, XP = 1, SXP = 2, MP = 3 };

const char* to_string(Mode m);

// One joint step. "self" is agent slot 0, "other" is agent slot 1.
struct Transition {
  Vector obs_self;
  Vector obs_other;
  int action_self = 0;
  int action_other = 0;
  Real reward = 0.0;      // training signal (shaped where the env shapes)
  Real raw_reward = 0.0;  // unshaped task reward, used for evaluation
  bool done = false;
  Mode mode = Mode::SP;
  int step_index = 0;

  bool operator==(const Transition&) const = default;
};

using Episode = std::vector<Transition>;

enum class StartDistribution : std::uint8_t { initial = 0, xp_states = 1 };

struct TrajectoryBatch {
  std::vector<Episode> episodes;
  StartDistribution start_distribution = StartDistribution::initial;

  std::size_t num_transitions() const;
  bool empty() const { return num_transitions() == 0; }
  Real mean_raw_return() const;  // undiscounted, per episode
  Real mean_return() const;      // undiscounted training reward, per episode

  bool operator==(const TrajectoryBatch&) const = default;
};

// Sum_t gamma^t r_t, accumulated left to right.
Real discounted_return(std::span<const Real> rewards, Real gamma);

}  // namespace aht
