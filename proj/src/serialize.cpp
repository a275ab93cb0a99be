#include "muown/serialize.hpp"

#include "muown/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace muown {
namespace {

constexpr std::array<char, 4> kMagic{'M', 'W', 'N', '1'};
// Refuse headers describing more than this many entries.
constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 32;

void put_u64(std::ostream &out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int k = 0; k < 8; ++k) {
    b[k] = static_cast<char>((v >> (8 * k)) & 0xFFu);
  }
  out.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream &in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char *>(b.data()), b.size());
  if (!in) {
    throw SerializationError("MWN1: truncated header");
  }
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) {
    v = (v << 8) | b[k];
  }
  return v;
}

} // namespace

void write_matrix(std::ostream &out, const Matrix &m) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double x : m.span()) {
    put_u64(out, std::bit_cast<std::uint64_t>(x));
  }
  if (!out) {
    throw SerializationError("MWN1: write failed");
  }
}

Matrix read_matrix(std::istream &in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) {
    throw SerializationError("MWN1: bad magic");
  }
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (rows == 0 || cols == 0 || rows > kMaxEntries / cols) {
    throw SerializationError("MWN1: invalid dimensions");
  }
  std::vector<double> data(rows * cols);
  for (double &x : data) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char *>(b.data()), b.size());
    if (!in) {
      throw SerializationError("MWN1: truncated payload");
    }
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) {
      v = (v << 8) | b[k];
    }
    x = std::bit_cast<double>(v);
  }
  return Matrix(rows, cols, std::move(data));
}

void save_matrices(const std::filesystem::path &path, const std::vector<Matrix> &ms) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw SerializationError("cannot open " + path.string() + " for writing");
  }
  for (const auto &m : ms) {
    write_matrix(out, m);
  }
}

std::vector<Matrix> load_matrices(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw SerializationError("cannot open " + path.string());
  }
  std::vector<Matrix> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    out.push_back(read_matrix(in));
  }
  return out;
}

Matrix load_matrix(const std::filesystem::path &path) {
  auto ms = load_matrices(path);
  if (ms.size() != 1) {
    throw SerializationError(path.string() + ": expected exactly one matrix record");
  }
  return std::move(ms.front());
}

Matrix as_row(const Vector &v) { return Matrix(1, v.size(), v.values()); }

Vector from_row(const Matrix &m) {
  if (m.rows() != 1) {
    throw DimensionMismatch("expected a 1 x n record");
  }
  return Vector(std::vector<double>(m.span().begin(), m.span().end()));
}

} // namespace muown
