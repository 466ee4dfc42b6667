#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "psaug/engine.hpp"
#include "psaug/feature_matrix.hpp"

namespace psaug::sim {

/// Synthetic spectrogram-like classification task. Each class has a
/// frequency band with a class-specific temporal modulation; samples add a
/// random gain, a random admixture of a confusing class and Gaussian noise.
struct SyntheticTask {
  std::size_t num_classes = 4;
  std::size_t samples_per_class = 200;
  std::size_t eval_per_class = 50;
  std::size_t frames = 64;
  std::size_t bins = 16;
  double noise = 0.3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Dataset {
  std::vector<FeatureMatrix> features;
  std::vector<std::size_t> labels;
};

struct TaskData {
  Dataset train;
  Dataset eval;
};

/// Deterministic in `task.seed`.
TaskData generate_task(const SyntheticTask& task);

enum class Regime { kFixed, kAdaptive, kTwoStage };

const char* to_string(Regime regime) noexcept;
Regime regime_from_string(std::string_view name);

struct SimConfig {
  Regime regime = Regime::kTwoStage;
  std::size_t pretrain_epochs = 10;
  std::size_t adaptive_epochs = 20;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  /// Limits are scaled to the default 64x16 task. The schedule length is
  /// derived from the adaptive phase length; stage and master_seed are
  /// honored as given only for seeding.
  EngineConfig engine = default_engine();

  static EngineConfig default_engine();
  void validate() const;
};

/// One row per trained epoch. The fixed regime runs pretrain_epochs +
/// adaptive_epochs fixed epochs, the adaptive regime the same total with the
/// schedule spanning all of them, two_stage splits them.
struct EpochMetrics {
  std::size_t epoch = 0;
  Stage stage = Stage::kPretrain;
  std::size_t stage_epoch = 0;
  double mean_loss = 0.0;  ///< pre-augmentation training loss
  double eval_accuracy = 0.0;
  double mean_lambda = 0.0;
  double gate_rate_mask = 0.0;
  double gate_rate_sub = 0.0;
  double mean_n_time_mask = 0.0;
  double mean_n_freq_mask = 0.0;
  double mean_n_time_sub = 0.0;
  double p_mask = 0.0;
  double p_sub = 0.0;
  std::size_t monotonic_violations = 0;
};

struct SimMetrics {
  std::vector<EpochMetrics> epochs;

  std::string to_csv() const;
};

/// Called after every augmented batch.
using BatchObserver = std::function<void(const EpochMetrics& epoch, const BatchAugReport& report)>;

/// Throws std::runtime_error if a training loss becomes non-finite.
SimMetrics run_simulation(const SyntheticTask& task, const SimConfig& config,
                          const BatchObserver& observer = {});

/// Spearman rank correlation (average ranks for ties); 0 when either input
/// is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace psaug::sim
