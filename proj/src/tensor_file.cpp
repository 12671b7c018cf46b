#include "qhc/tensor_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace qhc {

namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error("truncated tensor file: " + path);
  return v;
}

}  // namespace

TensorFile read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::memcmp(magic.data(), "QHT1", 4) != 0)
    throw Error("not a QHT1 file: " + path);
  TensorFile f;
  const int rank = get<std::uint8_t>(in, path);
  f.flags = get<std::uint8_t>(in, path);
  get<std::uint16_t>(in, path);
  f.n = int(get<std::uint32_t>(in, path));
  if (rank < 1 || rank > 4) throw Error("tensor file rank must be 1..4");
  if (f.n < 1 || f.n > 64) throw Error("tensor file n out of range");
  for (int s = 0; s < rank; ++s)
    if (get<std::uint32_t>(in, path) != std::uint32_t(4 * f.n))
      throw Error("tensor file dims must all equal 4n");
  f.tensor = DenseTensor(rank, 4 * f.n);
  const auto bytes = std::streamsize(f.tensor.size() * sizeof(double));
  if (!in.read(reinterpret_cast<char*>(f.tensor.data()), bytes))
    throw Error("truncated tensor payload: " + path);
  if (in.peek() != std::ifstream::traits_type::eof()) throw Error("trailing bytes in " + path);
  return f;
}

void write_tensor_file(const std::string& path, const TensorFile& f) {
  const DenseTensor& t = f.tensor;
  if (t.dim() != 4 * f.n) throw Error("tensor dimension does not match 4n");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write("QHT1", 4);
  put<std::uint8_t>(out, std::uint8_t(t.rank()));
  put<std::uint8_t>(out, f.flags);
  put<std::uint16_t>(out, 0);
  put<std::uint32_t>(out, std::uint32_t(f.n));
  for (int s = 0; s < t.rank(); ++s) put<std::uint32_t>(out, std::uint32_t(t.dim()));
  out.write(reinterpret_cast<const char*>(t.data()), std::streamsize(t.size() * sizeof(double)));
  if (!out) throw Error("write failed: " + path);
}

}  // namespace qhc
