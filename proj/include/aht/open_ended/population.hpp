#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "aht/nn/param_set.hpp"

namespace aht::open_ended {

struct PopulationMember {
  nn::ParamSet params;
  int iteration = 0;  // 1-based
  std::string name;
  nlohmann::json diagnostics;
};

// Append-only archive of frozen teammates. Members are only reachable
// through const references once added.
class PopulationBuffer {
 public:
  void append(PopulationMember member);

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const PopulationMember& operator[](std::size_t i) const { return members_.at(i); }
  const PopulationMember& back() const { return members_.back(); }
  const std::vector<PopulationMember>& members() const { return members_; }

  // Writes {dir}/{name}.ckpt per member plus members.json.
  void save(const std::filesystem::path& dir) const;
  static PopulationBuffer load(const std::filesystem::path& dir);

 private:
  std::vector<PopulationMember> members_;
};

}  // namespace aht::open_ended
