#include "hgam/checkpoint.hpp"

#include "hgam/errors.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace hgam {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw CheckpointError("truncated checkpoint while reading " + what);
  }
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) put_f64(out, t.value(i, j));
    }
  }
  out.flush();
  if (!out) throw CheckpointError("failed writing checkpoint: " + path.string());
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::memcmp(magic.data(), kCheckpointMagic, magic.size()) != 0) {
    throw CheckpointError("not an HGAM checkpoint: " + path.string());
  }
  const auto version = get_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  std::vector<NamedTensor> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    NamedTensor t;
    const auto len = get_u32(in, "name length");
    if (len > 4096) throw CheckpointError("corrupt checkpoint: tensor name too long");
    t.name.resize(len);
    if (!in.read(t.name.data(), len)) throw CheckpointError("truncated checkpoint in tensor name");
    const auto rows = get_u32(in, t.name + " rows");
    const auto cols = get_u32(in, t.name + " cols");
    if (static_cast<std::uint64_t>(rows) * cols > (1ULL << 28)) {
      throw CheckpointError("corrupt checkpoint: tensor " + t.name + " too large");
    }
    t.value.resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) {
        double v = 0.0;
        if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
          throw CheckpointError("truncated checkpoint in tensor " + t.name);
        }
        t.value(i, j) = v;
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace hgam
