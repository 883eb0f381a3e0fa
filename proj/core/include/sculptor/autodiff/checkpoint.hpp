#pragma once

#include <filesystem>
#include <iosfwd>

#include "sculptor/autodiff/parameter.hpp"

namespace sculptor::ad {

// Binary checkpoint layout, all integers little-endian:
//
//   char[8]  magic "SCLPTCKP"
//   u32      format version (currently 1)
//   u32      parameter count
//   per parameter:
//     u32    name length, then that many bytes of UTF-8 name
//     u32    rows, u32 cols
//     f64    rows*cols values, row-major
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ParameterSet& params);
void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);

/// Overwrites values of params by name. Every parameter in params must be present
/// in the stream with a matching shape; extra entries are an error too.
void read_checkpoint(std::istream& in, ParameterSet& params);
void load_checkpoint(const std::filesystem::path& path, ParameterSet& params);

}  // namespace sculptor::ad
