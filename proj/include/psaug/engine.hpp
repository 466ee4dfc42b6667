#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psaug/adaptive_policy.hpp"
#include "psaug/feature_matrix.hpp"
#include "psaug/progressive_schedule.hpp"
#include "psaug/spectral_augment.hpp"

namespace psaug {

enum class PolicyKind { kHybrid, kRank, kFixed };
enum class Stage { kPretrain, kAdaptive };
enum class Gate { kAdaptive, kFixed };

struct EngineConfig {
  PolicyKind policy_kind = PolicyKind::kHybrid;
  Stage stage = Stage::kAdaptive;
  AugLimits limits{};
  ScheduleConfig schedule{};
  IbfParams ibf{};  ///< sample policy curve
  ClipSpread clip_spread = ClipSpread::kVariance;
  CountMultipliers multipliers{};
  std::uint64_t master_seed = 0;
  std::uint64_t epoch_offset = 0;  ///< added to the epoch before the schedule lookup
  unsigned threads = 1;            ///< workers for per-sample planning and application

  void validate() const;
};

struct SampleReport {
  std::string sample_id;
  double lambda = 0.0;
  Gate gate_mask = Gate::kFixed;
  Gate gate_sub = Gate::kFixed;
  AugCounts counts{};
  AugmentationPlan plan;
};

struct BatchAugReport {
  std::uint64_t epoch = 0;
  std::uint64_t batch_index = 0;
  PolicyKind policy_kind = PolicyKind::kHybrid;
  Stage stage = Stage::kAdaptive;
  std::optional<ScheduleState> schedule;  ///< absent in the pretrain stage
  LossPipelineTrace trace;                ///< hybrid pipeline over the batch losses
  std::vector<SampleReport> samples;
};

struct BatchResult {
  std::vector<FeatureMatrix> features;
  BatchAugReport report;
};

/// One training step's augmentation.
///
/// Per sample i the stream derive_sample_stream(master_seed, epoch,
/// batch_index, i) is consumed in a fixed order: the mask-channel coin, the
/// sub-channel coin, then time-mask, frequency-mask and substitution events.
/// Both coins are always drawn, so the pretrain stage, the fixed policy and
/// an adaptive run whose gates never open produce identical plans.
///
/// A channel is adaptive when its coin is below the scheduled probability
/// at (epoch + epoch_offset); adaptive counts come from the sample's lambda
/// under the configured policy, fixed counts are (2, 2, 1). Sample ids
/// default to the decimal index.
///
/// Throws StructuralError on a length mismatch or an invalid config.
BatchResult augment_batch(std::span<const FeatureMatrix> features, std::span<const double> losses,
                          std::uint64_t epoch, const EngineConfig& config,
                          std::uint64_t batch_index = 0);

/// Concatenated plan for one sample: masks over time, then frequency, then
/// substitutions.
AugmentationPlan plan_sample(const AugCounts& counts, MatrixDims dims, const AugLimits& limits,
                             SampleStream& rng);

/// Re-applies the report's plans to the original features.
std::vector<FeatureMatrix> replay_report(std::span<const FeatureMatrix> features,
                                         const BatchAugReport& report);

}  // namespace psaug
