#pragma once

#include "muown/matrix.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace muown {

// MWN1 binary matrix record:
//   bytes 0..3   ASCII "MWN1"
//   bytes 4..11  rows, uint64 little-endian
//   bytes 12..19 cols, uint64 little-endian
//   then rows*cols IEEE-754 binary64 values, little-endian, row-major.
// A file may hold several records back to back.
void write_matrix(std::ostream &out, const Matrix &m);
Matrix read_matrix(std::istream &in);

void save_matrices(const std::filesystem::path &path, const std::vector<Matrix> &ms);
std::vector<Matrix> load_matrices(const std::filesystem::path &path);

inline void save_matrix(const std::filesystem::path &path, const Matrix &m) {
  save_matrices(path, {m});
}
Matrix load_matrix(const std::filesystem::path &path);

// Vectors travel as 1 x len records.
Matrix as_row(const Vector &v);
Vector from_row(const Matrix &m);

} // namespace muown
