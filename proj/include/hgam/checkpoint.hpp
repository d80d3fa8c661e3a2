#pragma once

// Binary checkpoint container.
//
//   "HGAM" | u32 version
//   repeated until EOF:
//     u32 name_length | name bytes | u32 rows | u32 cols | rows*cols f64 (row-major)
//
// All integers and floats are little-endian.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hgam {

inline constexpr char kCheckpointMagic[4] = {'H', 'G', 'A', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

/// Throws CheckpointError on I/O failure.
void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
/// Throws CheckpointError on I/O failure, bad magic, unknown version or truncation.
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

}  // namespace hgam
