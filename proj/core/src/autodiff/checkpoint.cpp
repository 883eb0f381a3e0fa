#include "sculptor/autodiff/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "sculptor/error.hpp"

namespace sculptor::ad {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic = {'S', 'C', 'L', 'P', 'T', 'C', 'K', 'P'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("checkpoint: truncated stream");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterSet& params) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.items()) {
    const Matrix& v = p.value.value();
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(out, static_cast<std::uint32_t>(v.rows()));
    put_u32(out, static_cast<std::uint32_t>(v.cols()));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw IoError("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

void read_checkpoint(std::istream& in, ParameterSet& params) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw IoError("checkpoint: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(in);
  std::map<std::string, Matrix> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw IoError("checkpoint: truncated name");
    const std::uint32_t rows = get_u32(in);
    const std::uint32_t cols = get_u32(in);
    Matrix m(rows, cols);
    if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)))) {
      throw IoError("checkpoint: truncated values for '" + name + "'");
    }
    entries.emplace(std::move(name), std::move(m));
  }
  if (entries.size() != params.size()) {
    throw IoError("checkpoint: holds " + std::to_string(entries.size()) + " parameters, model has " +
                  std::to_string(params.size()));
  }
  for (auto& p : params.items()) {
    auto it = entries.find(p.name);
    if (it == entries.end()) throw IoError("checkpoint: missing parameter '" + p.name + "'");
    Matrix& dst = p.value.mutable_value();
    if (dst.rows() != it->second.rows() || dst.cols() != it->second.cols()) {
      throw IoError("checkpoint: shape mismatch for '" + p.name + "'");
    }
    dst = it->second;
  }
}

void load_checkpoint(const std::filesystem::path& path, ParameterSet& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  read_checkpoint(in, params);
}

}  // namespace sculptor::ad
