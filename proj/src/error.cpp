#include "muown/error.hpp"

namespace muown {
namespace {

std::string describe(const std::vector<StepError::Failure> &failures) {
  std::string msg = "step failed for " + std::to_string(failures.size()) + " layer(s)";
  for (const auto &f : failures) {
    msg += "; layer " + std::to_string(f.layer) + ": " + f.message;
  }
  return msg;
}

} // namespace

StepError::StepError(std::vector<Failure> failures)
    : Error(describe(failures)), failures_(std::move(failures)) {}

} // namespace muown
