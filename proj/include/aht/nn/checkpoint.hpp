#pragma once

#include <filesystem>
#include <iosfwd>

#include "aht/nn/adam.hpp"
#include "aht/nn/param_set.hpp"

namespace aht::nn {

// Checkpoint file: "AHTC", u32 version, shape descriptor (u8 kind,
// u8 activation, u32 ndims, u32 dims...), u64 count, then the flat parameter
// vector as little-endian f64.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ParamSet& params);
ParamSet read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params);
ParamSet load_checkpoint(const std::filesystem::path& path);

// Optimizer file: "AHTO", u32 version, i64 step, u64 count, m, v as f64.
void save_adam_state(const std::filesystem::path& path, const AdamState& s);
AdamState load_adam_state(const std::filesystem::path& path);

}  // namespace aht::nn
