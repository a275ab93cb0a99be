#pragma once

#include "muown/matrix.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace muown {

// Shortest round-trip formatting ("%.17g"), with inf/nan spelled out.
std::string format_double(double x);

// Per matrix layer quantities logged each step.
struct LayerMetrics {
  double spectral = 0.0;        // ||W_t||_S_inf
  double g_inf = 0.0;           // max row norm of W_t
  double coherence = 0.0;       // lambda_max(P C P) of W_t
  double dual_norm = 0.0;       // ||grad_g||_1 + ||grad_R||_S1 at W_{t-1}
  double update_spectral = 0.0; // ||W_t - W_{t-1}||_S_inf
};

// Quantities that are undefined (a zero row) come back as NaN.
LayerMetrics measure_layer(const Matrix &w_before, const Matrix &grad, const Matrix &w_after);

// CSV log with a "#schema=1" first line and the header
//   run,step,lr,loss,<layer>.spectral,<layer>.g_inf,<layer>.coherence,
//   <layer>.dual_norm,<layer>.update_spectral,...
class RunLog {
public:
  explicit RunLog(std::vector<std::string> layer_names);

  void add(const std::string &run, std::size_t step, double lr, double loss,
           const std::vector<LayerMetrics> &metrics);
  void append(const RunLog &other);

  std::size_t rows() const { return lines_.size(); }
  std::string str() const;
  void write(const std::filesystem::path &path) const;

private:
  std::vector<std::string> layer_names_;
  std::vector<std::string> lines_;
};

void write_text(const std::filesystem::path &path, const std::string &text);

} // namespace muown
