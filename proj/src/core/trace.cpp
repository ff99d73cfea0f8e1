#include "aht/core/trace.hpp"

#include <fstream>

#include "aht/core/binary_io.hpp"

namespace aht {
namespace {

void put_vector(std::ostream& out, const Vector& v) {
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) io::put<double>(out, v[i]);
}

Vector get_vector(std::istream& in) {
  const auto n = io::get<std::uint32_t>(in);
  Vector v(n);
  for (std::uint32_t i = 0; i < n; ++i) v[i] = io::get<double>(in);
  return v;
}

}  // namespace

void write_trace(std::ostream& out, const TrajectoryBatch& batch) {
  io::put_magic(out, "AHTT");
  io::put<std::uint32_t>(out, kTraceVersion);
  io::put<std::uint8_t>(out, static_cast<std::uint8_t>(batch.start_distribution));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(batch.episodes.size()));
  for (const auto& ep : batch.episodes) {
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(ep.size()));
    for (const auto& t : ep) {
      put_vector(out, t.obs_self);
      put_vector(out, t.obs_other);
      io::put<std::int32_t>(out, t.action_self);
      io::put<std::int32_t>(out, t.action_other);
      io::put<double>(out, t.reward);
      io::put<double>(out, t.raw_reward);
      io::put<std::uint8_t>(out, t.done ? 1 : 0);
      io::put<std::uint8_t>(out, static_cast<std::uint8_t>(t.mode));
      io::put<std::int32_t>(out, t.step_index);
    }
  }
}

TrajectoryBatch read_trace(std::istream& in) {
  io::expect_magic(in, "AHTT");
  const auto version = io::get<std::uint32_t>(in);
  if (version != kTraceVersion) throw std::runtime_error("trace: unsupported version " + std::to_string(version));
  TrajectoryBatch batch;
  const auto start = io::get<std::uint8_t>(in);
  if (start > 1) throw std::runtime_error("trace: bad start distribution tag");
  batch.start_distribution = static_cast<StartDistribution>(start);
  const auto num_episodes = io::get<std::uint32_t>(in);
  batch.episodes.resize(num_episodes);
  for (auto& ep : batch.episodes) {
    ep.resize(io::get<std::uint32_t>(in));
    for (auto& t : ep) {
      t.obs_self = get_vector(in);
      t.obs_other = get_vector(in);
      t.action_self = io::get<std::int32_t>(in);
      t.action_other = io::get<std::int32_t>(in);
      t.reward = io::get<double>(in);
      t.raw_reward = io::get<double>(in);
      t.done = io::get<std::uint8_t>(in) != 0;
      const auto mode = io::get<std::uint8_t>(in);
      if (mode > 3) throw std::runtime_error("trace: bad mode tag");
      t.mode = static_cast<Mode>(mode);
      t.step_index = io::get<std::int32_t>(in);
    }
  }
  return batch;
}

void save_trace(const std::filesystem::path& path, const TrajectoryBatch& batch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace for writing: " + path.string());
  write_trace(out, batch);
}

TrajectoryBatch load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace: " + path.string());
  return read_trace(in);
}

}  // namespace aht
