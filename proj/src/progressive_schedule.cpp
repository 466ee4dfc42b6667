#include "psaug/progressive_schedule.hpp"

#include <algorithm>
#include <string>

#include "psaug/errors.hpp"

namespace psaug {
namespace {

void check_range(const ChannelRange& r, const char* name) {
  if (!(r.p_start >= 0.0 && r.p_start <= r.p_end && r.p_end <= 1.0)) {
    throw StructuralError(std::string("schedule channel '") + name +
                          "' needs 0 <= p_start <= p_end <= 1");
  }
}

double interpolate(const ChannelRange& r, double t) {
  if (t <= 0.0) return r.p_start;
  if (t >= 1.0) return r.p_end;
  return std::clamp(r.p_start + (r.p_end - r.p_start) * t, 0.0, 1.0);
}

}  // namespace

void ScheduleConfig::validate() const {
  if (total_epochs < 1) throw StructuralError("schedule total_epochs must be at least 1");
  check_range(mask, "mask");
  check_range(sub, "sub");
  ibf.validate();
}

ScheduleState schedule_at(std::uint64_t epoch, const ScheduleConfig& config) {
  config.validate();
  if (epoch > config.total_epochs) {
    throw StructuralError("epoch " + std::to_string(epoch) + " exceeds schedule total_epochs " +
                          std::to_string(config.total_epochs));
  }
  ScheduleState state;
  state.epoch = epoch;
  const double progress = static_cast<double>(epoch) / static_cast<double>(config.total_epochs);
  state.epoch_policy = regularized_ibf(progress, config.ibf);
  state.p_mask = interpolate(config.mask, state.epoch_policy);
  state.p_sub = interpolate(config.sub, state.epoch_policy);
  return state;
}

}  // namespace psaug
