#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psaug/ibf.hpp"

namespace psaug {

/// Spread statistic used for the clipping bounds mean +/- 2 * spread.
enum class ClipSpread {
  kVariance,  ///< population variance, as the clipping rule is written
  kStdDev,    ///< population standard deviation (conventional 2-sigma rule)
};

/// Per-batch intermediate values of hybrid normalization.
struct LossPipelineTrace {
  std::vector<double> l_raw;
  std::vector<double> l_clipped;   ///< raw loss clipped to the batch band
  std::vector<double> l_meannorm;  ///< L' / (L' + mean(L'))
  std::vector<double> l_minmax;    ///< min-max scaled ratio, in [0, 1]
  std::vector<double> lambda;      ///< 1 - IBF(l_minmax)
  double l_mean = 0.0;
  double l_var = 0.0;
  double clip_low = 0.0;
  double clip_high = 0.0;

  std::size_t size() const noexcept { return l_raw.size(); }
};

/// Maps a batch of pre-augmentation losses to per-sample strengths.
///
/// Steps, with mean and population variance taken over the raw losses:
///  1. clip each loss to [mean - 2 * spread, mean + 2 * spread];
///  2. ratio-normalize: L''_i = L'_i / (L'_i + mean(L'));
///  3. min-max scale L'' to [0, 1] (all 0.5 when every L'' is equal);
///  4. lambda_i = 1 - I_{L'''_i}(alpha, beta).
/// A ratio with zero denominator (only possible when every clipped loss is
/// zero) is taken as 0, which then falls into the equal-values case.
///
/// Throws StructuralError on an empty batch or a negative / non-finite loss.
LossPipelineTrace hybrid_normalize(std::span<const double> losses, const IbfParams& ibf,
                                   ClipSpread spread = ClipSpread::kVariance);

/// Rank baseline: lambda_i = 1 - I_{rank_i / B}(alpha, beta) with rank_i the
/// 1-based ascending rank of loss i, ties broken by input index.
std::vector<double> rank_policy(std::span<const double> losses, const IbfParams& ibf);

/// 1-based ascending ranks with stable tie-breaking.
std::vector<std::size_t> loss_ranks(std::span<const double> losses);

struct AugCounts {
  std::size_t n_time_mask = 0;
  std::size_t n_freq_mask = 0;
  std::size_t n_time_sub = 0;

  friend bool operator==(const AugCounts&, const AugCounts&) = default;
};

enum class CountPath { kAdaptive, kFixed };

/// Ceiling multipliers of the adaptive count rows.
struct CountMultipliers {
  double time_mask = 4.0;
  double freq_mask = 4.0;
  double time_sub = 2.0;

  void validate() const;

  friend bool operator==(const CountMultipliers&, const CountMultipliers&) = default;
};

inline constexpr AugCounts kFixedCounts{2, 2, 1};

/// Adaptive: (ceil(4 lambda), ceil(4 lambda), ceil(2 lambda)) with the
/// default multipliers. Fixed: (2, 2, 1).
/// Throws StructuralError if lambda is outside [0, 1].
AugCounts counts_from_lambda(double lambda, CountPath path, const CountMultipliers& mult = {});

}  // namespace psaug
