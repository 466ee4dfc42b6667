#pragma once

#include <cstdint>

#include "psaug/ibf.hpp"

namespace psaug {

/// Endpoints of the affine map from the epoch policy value to a probability.
struct ChannelRange {
  double p_start = 0.0;
  double p_end = 1.0;

  friend bool operator==(const ChannelRange&, const ChannelRange&) = default;
};

struct ScheduleConfig {
  std::uint64_t total_epochs = 100;
  IbfParams ibf{};
  ChannelRange mask{};  ///< governs time and frequency masks
  ChannelRange sub{};   ///< governs time substitution

  /// Throws StructuralError unless total_epochs >= 1 and
  /// 0 <= p_start <= p_end <= 1 on both channels; DomainError for bad ibf.
  void validate() const;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct ScheduleState {
  std::uint64_t epoch = 0;
  double epoch_policy = 0.0;
  double p_mask = 0.0;
  double p_sub = 0.0;
};

/// epoch_policy = I_{epoch / total}(alpha, beta); each channel probability is
/// p_start + (p_end - p_start) * epoch_policy. Epochs are 0-based and the
/// schedule is defined on [0, total_epochs].
/// Throws StructuralError if epoch > total_epochs.
ScheduleState schedule_at(std::uint64_t epoch, const ScheduleConfig& config);

}  // namespace psaug
