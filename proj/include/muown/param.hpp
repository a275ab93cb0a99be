#pragma once

#include "muown/matrix.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace muown {

// Matrix parameters take the matrix-geometry optimizers; elementwise ones
// (biases, gains) are stored as 1 x len and routed to AdamW.
enum class ParamKind { Matrix, Elementwise };

struct Param {
  std::string name;
  ParamKind kind = ParamKind::Matrix;
  Matrix value;
};

// Ordered, uniquely named parameter list.
class ParamSet {
public:
  ParamSet() = default;
  explicit ParamSet(std::vector<Param> params);

  void add(Param p);
  std::size_t size() const noexcept { return params_.size(); }
  const Param &operator[](std::size_t i) const { return params_[i]; }
  Param &operator[](std::size_t i) { return params_[i]; }
  const Param &at(std::string_view name) const;
  Param &at(std::string_view name);
  std::size_t index_of(std::string_view name) const;

  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

  // Same names/kinds/shapes, all values zero.
  ParamSet zeros_like() const;
  std::vector<Matrix> values() const;

private:
  std::vector<Param> params_;
};

} // namespace muown
