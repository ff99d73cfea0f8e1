#include "aht/nn/checkpoint.hpp"

#include <fstream>

#include "aht/core/binary_io.hpp"

namespace aht::nn {

void write_checkpoint(std::ostream& out, const ParamSet& params) {
  const auto& shape = params.shape();
  io::put_magic(out, "AHTC");
  io::put<std::uint32_t>(out, kCheckpointVersion);
  io::put<std::uint8_t>(out, static_cast<std::uint8_t>(shape.kind));
  io::put<std::uint8_t>(out, static_cast<std::uint8_t>(shape.activation));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.dims.size()));
  for (int d : shape.dims) io::put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  io::put<std::uint64_t>(out, static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) io::put<double>(out, params.flat()[i]);
}

ParamSet read_checkpoint(std::istream& in) {
  io::expect_magic(in, "AHTC");
  const auto version = io::get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  ShapeDescriptor shape;
  const auto kind = io::get<std::uint8_t>(in);
  const auto act = io::get<std::uint8_t>(in);
  if (kind > 1 || act > 1) throw std::runtime_error("checkpoint: bad shape tags");
  shape.kind = static_cast<NetKind>(kind);
  shape.activation = static_cast<Activation>(act);
  const auto ndims = io::get<std::uint32_t>(in);
  if (ndims > 64) throw std::runtime_error("checkpoint: implausible shape rank");
  for (std::uint32_t i = 0; i < ndims; ++i) shape.dims.push_back(static_cast<int>(io::get<std::uint32_t>(in)));
  ParamSet params(shape);
  const auto count = io::get<std::uint64_t>(in);
  if (count != static_cast<std::uint64_t>(params.size()))
    throw std::runtime_error("checkpoint: parameter count does not match shape");
  for (Eigen::Index i = 0; i < params.size(); ++i) params.flat()[i] = io::get<double>(in);
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, params);
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

void save_adam_state(const std::filesystem::path& path, const AdamState& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open optimizer state for writing: " + path.string());
  io::put_magic(out, "AHTO");
  io::put<std::uint32_t>(out, kCheckpointVersion);
  io::put<std::int64_t>(out, s.step);
  io::put<std::uint64_t>(out, static_cast<std::uint64_t>(s.m.size()));
  for (Eigen::Index i = 0; i < s.m.size(); ++i) io::put<double>(out, s.m[i]);
  for (Eigen::Index i = 0; i < s.v.size(); ++i) io::put<double>(out, s.v[i]);
}

AdamState load_adam_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open optimizer state: " + path.string());
  io::expect_magic(in, "AHTO");
  if (io::get<std::uint32_t>(in) != kCheckpointVersion) throw std::runtime_error("optimizer state: bad version");
  const auto step = io::get<std::int64_t>(in);
  const auto n = io::get<std::uint64_t>(in);
  if (n > (1ull << 32)) throw std::runtime_error("optimizer state: implausible size");
  AdamState s(static_cast<Eigen::Index>(n));
  s.step = step;
  for (Eigen::Index i = 0; i < s.m.size(); ++i) s.m[i] = io::get<double>(in);
  for (Eigen::Index i = 0; i < s.v.size(); ++i) s.v[i] = io::get<double>(in);
  return s;
}

}  // namespace aht::nn
