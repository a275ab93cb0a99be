#include "muown/param.hpp"

#include "muown/error.hpp"

namespace muown {

ParamSet::ParamSet(std::vector<Param> params) {
  for (auto &p : params) {
    add(std::move(p));
  }
}

void ParamSet::add(Param p) {
  for (const auto &q : params_) {
    if (q.name == p.name) {
      throw InvalidArgument("duplicate parameter name '" + p.name + "'");
    }
  }
  if (p.kind == ParamKind::Elementwise && p.value.rows() != 1) {
    throw DimensionMismatch("elementwise parameter '" + p.name + "' must be stored as 1 x len");
  }
  params_.push_back(std::move(p));
}

std::size_t ParamSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) {
      return i;
    }
  }
  throw InvalidArgument("no parameter named '" + std::string(name) + "'");
}

const Param &ParamSet::at(std::string_view name) const { return params_[index_of(name)]; }
Param &ParamSet::at(std::string_view name) { return params_[index_of(name)]; }

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto &p : params_) {
    out.params_.push_back(Param{p.name, p.kind, Matrix(p.value.rows(), p.value.cols())});
  }
  return out;
}

std::vector<Matrix> ParamSet::values() const {
  std::vector<Matrix> out;
  out.reserve(params_.size());
  for (const auto &p : params_) {
    out.push_back(p.value);
  }
  return out;
}

} // namespace muown
