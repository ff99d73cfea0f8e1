#include "aht/open_ended/population.hpp"

#include <fstream>
#include <cstdio>
#include <stdexcept>

#include "aht/nn/checkpoint.hpp"

namespace aht::open_ended {

void PopulationBuffer::append(PopulationMember member) {
  if (member.name.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "member_%04zu", members_.size() + 1);
    member.name = buf;
  }
  for (const auto& m : members_)
    if (m.name == member.name) throw std::invalid_argument("population: duplicate member name " + member.name);
  members_.push_back(std::move(member));
}

void PopulationBuffer::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  for (const auto& m : members_) {
    nn::save_checkpoint(dir / (m.name + ".ckpt"), m.params);
    index.push_back({{"name", m.name}, {"iteration", m.iteration}, {"file", m.name + ".ckpt"},
                     {"diagnostics", m.diagnostics.is_null() ? nlohmann::json::object() : m.diagnostics}});
  }
  std::ofstream out(dir / "members.json");
  if (!out) throw std::runtime_error("population: cannot write " + (dir / "members.json").string());
  out << index.dump(2) << "\n";
}

PopulationBuffer PopulationBuffer::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "members.json");
  if (!in) throw std::runtime_error("population: missing " + (dir / "members.json").string());
  const auto index = nlohmann::json::parse(in);
  PopulationBuffer pop;
  for (const auto& e : index) {
    PopulationMember m;
    m.name = e.at("name").get<std::string>();
    m.iteration = e.at("iteration").get<int>();
    m.diagnostics = e.value("diagnostics", nlohmann::json::object());
    m.params = nn::load_checkpoint(dir / e.at("file").get<std::string>());
    pop.append(std::move(m));
  }
  return pop;
}

}  // namespace aht::open_ended
