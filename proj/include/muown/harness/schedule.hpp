#pragma once

#include <cstddef>
#include <string_view>

namespace muown {

enum class ScheduleKind { Constant, WarmupStableDecay };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

// Multiplier on the base learning rate at (continuous) step s of a T-step run,
// steps counted from 1. Warmup-stable-decay ramps linearly from 0 up to 1 over
// [0, warmup_frac T], holds 1 until T (1 - decay_frac), then falls linearly to
// `floor` at s = T.
struct Schedule {
  ScheduleKind kind = ScheduleKind::WarmupStableDecay;
  double warmup_frac = 0.02;
  double decay_frac = 0.20;
  double floor = 0.0; // fraction of the base rate left at the end of the decay

  // Throws InvalidArgument on fractions outside [0, 1] or summing past 1.
  void validate() const;
  double factor(double s, double total) const;
  double lr(double base, std::size_t step, std::size_t total) const {
    return base * factor(static_cast<double>(step), static_cast<double>(total));
  }
};

} // namespace muown
