#pragma once

#include <cstdint>
#include <string>

#include "qhc/dense_tensor.hpp"

namespace qhc {

/// Binary tensor container: "QHT1", u8 rank, u8 flags, u16 reserved, u32 n, u32 dims[rank],
/// then f64 little-endian row-major payload. Every dim equals 4n.
struct TensorFile {
  static constexpr std::uint8_t kCertified = 1;

  int n = 0;
  std::uint8_t flags = 0;
  DenseTensor tensor;

  bool certified() const { return flags & kCertified; }
};

TensorFile read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const TensorFile& f);

}  // namespace qhc
