#include "muown/harness/runlog.hpp"

#include "muown/diagnostics.hpp"
#include "muown/error.hpp"
#include "muown/linalg.hpp"
#include "muown/reparam.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace muown {

std::string format_double(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

LayerMetrics measure_layer(const Matrix &w_before, const Matrix &grad, const Matrix &w_after) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  LayerMetrics m;
  const Vector sv = singular_values(w_after);
  m.spectral = sv[0];
  m.g_inf = vec_linf(row_norms(w_after));
  try {
    m.coherence = spectral_decomposition(w_after).coherence;
  } catch (const ZeroRow &) {
    m.coherence = nan;
  }
  try {
    const ReparamView v = init_view(w_before);
    m.dual_norm = dual_norm(grad_g(grad, v.D), grad_R(grad, v.g, v.r, v.D));
  } catch (const ZeroRow &) {
    m.dual_norm = nan;
  }
  m.update_spectral = singular_values(w_after - w_before)[0];
  return m;
}

RunLog::RunLog(std::vector<std::string> layer_names) : layer_names_(std::move(layer_names)) {}

void RunLog::add(const std::string &run, std::size_t step, double lr, double loss,
                 const std::vector<LayerMetrics> &metrics) {
  if (metrics.size() != layer_names_.size()) {
    throw DimensionMismatch("RunLog::add: metrics for " + std::to_string(metrics.size()) +
                            " layers, log has " + std::to_string(layer_names_.size()));
  }
  std::string line = run + "," + std::to_string(step) + "," + format_double(lr) + "," +
                     format_double(loss);
  for (const auto &m : metrics) {
    for (double x : {m.spectral, m.g_inf, m.coherence, m.dual_norm, m.update_spectral}) {
      line += ",";
      line += format_double(x);
    }
  }
  lines_.push_back(std::move(line));
}

void RunLog::append(const RunLog &other) {
  if (other.layer_names_ != layer_names_) {
    throw DimensionMismatch("RunLog::append: column sets differ");
  }
  lines_.insert(lines_.end(), other.lines_.begin(), other.lines_.end());
}

std::string RunLog::str() const {
  std::string out = "#schema=1\nrun,step,lr,loss";
  for (const auto &name : layer_names_) {
    for (const char *col : {".spectral", ".g_inf", ".coherence", ".dual_norm", ".update_spectral"}) {
      out += "," + name + col;
    }
  }
  out += "\n";
  for (const auto &l : lines_) {
    out += l;
    out += "\n";
  }
  return out;
}

void RunLog::write(const std::filesystem::path &path) const { write_text(path, str()); }

void write_text(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw SerializationError("cannot write " + path.string());
  }
}

} // namespace muown
