#pragma once

#include <filesystem>
#include <iosfwd>

#include "aht/core/types.hpp"

namespace aht {

// Binary trace file: "AHTT", u32 version, u8 start distribution, u32 episode
// count, then per episode a u32 length followed by its transitions. All
// integers and reals little-endian.
inline constexpr std::uint32_t kTraceVersion = 1;

void write_trace(std::ostream& out, const TrajectoryBatch& batch);
TrajectoryBatch read_trace(std::istream& in);

void save_trace(const std::filesystem::path& path, const TrajectoryBatch& batch);
TrajectoryBatch load_trace(const std::filesystem::path& path);

}  // namespace aht
