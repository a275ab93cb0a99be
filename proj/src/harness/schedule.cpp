#include "muown/harness/schedule.hpp"

#include "muown/error.hpp"

#include <string>

namespace muown {

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::Constant ? "constant" : "wsd";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "constant") {
    return ScheduleKind::Constant;
  }
  if (name == "wsd") {
    return ScheduleKind::WarmupStableDecay;
  }
  throw InvalidArgument("unknown schedule '" + std::string(name) + "' (expected constant or wsd)");
}

void Schedule::validate() const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(warmup_frac) || !unit(decay_frac) || !unit(floor)) {
    throw InvalidArgument("schedule fractions must lie in [0, 1]");
  }
  if (warmup_frac + decay_frac > 1.0) {
    throw InvalidArgument("warmup_frac + decay_frac must not exceed 1");
  }
}

double Schedule::factor(double s, double total) const {
  if (kind == ScheduleKind::Constant) {
    return 1.0;
  }
  const double warm_end = warmup_frac * total;
  const double decay_start = total - decay_frac * total;
  if (s < warm_end) {
    return s / warm_end;
  }
  if (s <= decay_start) {
    return 1.0;
  }
  return floor + (1.0 - floor) * (total - s) / (total - decay_start);
}

} // namespace muown
