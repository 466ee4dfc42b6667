#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "psaug/feature_matrix.hpp"
#include "psaug/rng.hpp"

namespace psaug {

/// Upper bounds on operator extents.
struct AugLimits {
  std::size_t max_t_width = 50;    ///< largest t2 - t1 of a time mask
  std::size_t max_f_width = 10;    ///< largest f2 - f1 of a frequency mask
  std::size_t max_sub_width = 30;  ///< largest chunk length of a time substitution
  /// When set, substitution sources are drawn from the whole valid range
  /// instead of at or before the destination.
  bool arbitrary_sub_source = false;

  void validate() const;

  friend bool operator==(const AugLimits&, const AugLimits&) = default;
};

/// Zeroes frames t1..t2 inclusive.
struct TimeMask {
  std::size_t t1 = 0;
  std::size_t t2 = 0;
  friend bool operator==(const TimeMask&, const TimeMask&) = default;
};

/// Zeroes bins f1..f2 inclusive.
struct FreqMask {
  std::size_t f1 = 0;
  std::size_t f2 = 0;
  friend bool operator==(const FreqMask&, const FreqMask&) = default;
};

/// Overwrites frames [dest_t, dest_t + width) with frames [src_t, src_t + width).
struct TimeSub {
  std::size_t dest_t = 0;
  std::size_t src_t = 0;
  std::size_t width = 1;
  friend bool operator==(const TimeSub&, const TimeSub&) = default;
};

using AugEvent = std::variant<TimeMask, FreqMask, TimeSub>;

/// Ordered, replayable list of operator applications for one sample.
using AugmentationPlan = std::vector<AugEvent>;

/// Throws StructuralError if any event falls outside `dims`.
void validate_plan(const AugmentationPlan& plan, MatrixDims dims);

// Each planner draws, per event, in this order:
//   time/freq mask: width = between(0, min(max_width, extent - 1)),
//                   start = between(0, extent - 1 - width)
//   time sub:       width = between(1, min(max_sub_width, frames)),
//                   dest  = between(0, frames - width),
//                   src   = between(0, dest)   (or frames - width when
//                                               arbitrary_sub_source)
std::vector<TimeMask> plan_time_masks(std::size_t count, MatrixDims dims, const AugLimits& limits,
                                      SampleStream& rng);
std::vector<FreqMask> plan_freq_masks(std::size_t count, MatrixDims dims, const AugLimits& limits,
                                      SampleStream& rng);
std::vector<TimeSub> plan_time_subs(std::size_t count, MatrixDims dims, const AugLimits& limits,
                                    SampleStream& rng);

/// Applies events in plan order and returns a new matrix. Each substitution
/// reads its source frames from the matrix as left by the previous event.
FeatureMatrix apply_plan(const FeatureMatrix& matrix, const AugmentationPlan& plan);

}  // namespace psaug
