#include "psaug/engine.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "psaug/errors.hpp"
#include "psaug/rng.hpp"

namespace psaug {

void EngineConfig::validate() const {
  limits.validate();
  ibf.validate();
  multipliers.validate();
  if (stage == Stage::kAdaptive) schedule.validate();
  if (threads < 1) throw StructuralError("engine threads must be at least 1");
}

AugmentationPlan plan_sample(const AugCounts& counts, MatrixDims dims, const AugLimits& limits,
                             SampleStream& rng) {
  AugmentationPlan plan;
  plan.reserve(counts.n_time_mask + counts.n_freq_mask + counts.n_time_sub);
  for (const auto& e : plan_time_masks(counts.n_time_mask, dims, limits, rng)) plan.emplace_back(e);
  for (const auto& e : plan_freq_masks(counts.n_freq_mask, dims, limits, rng)) plan.emplace_back(e);
  for (const auto& e : plan_time_subs(counts.n_time_sub, dims, limits, rng)) plan.emplace_back(e);
  return plan;
}

BatchResult augment_batch(std::span<const FeatureMatrix> features, std::span<const double> losses,
                          std::uint64_t epoch, const EngineConfig& config,
                          std::uint64_t batch_index) {
  config.validate();
  if (features.empty()) throw StructuralError("augment_batch: empty batch");
  if (features.size() != losses.size()) {
    throw StructuralError("augment_batch: " + std::to_string(features.size()) +
                          " feature matrices but " + std::to_string(losses.size()) + " losses");
  }
  const std::size_t n = features.size();

  BatchResult result;
  BatchAugReport& report = result.report;
  report.epoch = epoch;
  report.batch_index = batch_index;
  report.policy_kind = config.policy_kind;
  report.stage = config.stage;
  report.trace = hybrid_normalize(losses, config.ibf, config.clip_spread);

  const bool adaptive_stage = config.stage == Stage::kAdaptive;
  if (adaptive_stage) report.schedule = schedule_at(epoch + config.epoch_offset, config.schedule);
  const bool may_adapt = adaptive_stage && config.policy_kind != PolicyKind::kFixed;

  const std::vector<double> lambda = config.policy_kind == PolicyKind::kRank
                                         ? rank_policy(losses, config.ibf)
                                         : report.trace.lambda;

  report.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.samples[i].sample_id = std::to_string(i);
    report.samples[i].lambda = lambda[i];
  }

  // Per-sample work touches only slot i of the outputs, so any partition of
  // the indices across workers yields the same result.
  std::vector<std::optional<FeatureMatrix>> augmented(n);
  auto process = [&](std::size_t i) {
    SampleReport& sample = report.samples[i];
    SampleStream rng = derive_sample_stream(config.master_seed, epoch, batch_index, i);
    const double coin_mask = rng.uniform01();
    const double coin_sub = rng.uniform01();
    if (may_adapt) {
      sample.gate_mask = coin_mask < report.schedule->p_mask ? Gate::kAdaptive : Gate::kFixed;
      sample.gate_sub = coin_sub < report.schedule->p_sub ? Gate::kAdaptive : Gate::kFixed;
    }
    const AugCounts adaptive = counts_from_lambda(sample.lambda, CountPath::kAdaptive,
                                                  config.multipliers);
    if (sample.gate_mask == Gate::kAdaptive) {
      sample.counts.n_time_mask = adaptive.n_time_mask;
      sample.counts.n_freq_mask = adaptive.n_freq_mask;
    } else {
      sample.counts.n_time_mask = kFixedCounts.n_time_mask;
      sample.counts.n_freq_mask = kFixedCounts.n_freq_mask;
    }
    sample.counts.n_time_sub =
        sample.gate_sub == Gate::kAdaptive ? adaptive.n_time_sub : kFixedCounts.n_time_sub;

    sample.plan = plan_sample(sample.counts, features[i].dims(), config.limits, rng);
    augmented[i] = apply_plan(features[i], sample.plan);
  };

  const std::size_t workers = std::min<std::size_t>(config.threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) process(i);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < n; i += workers) process(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  result.features.reserve(n);
  for (auto& m : augmented) result.features.push_back(std::move(*m));
  return result;
}

std::vector<FeatureMatrix> replay_report(std::span<const FeatureMatrix> features,
                                         const BatchAugReport& report) {
  if (features.size() != report.samples.size()) {
    throw StructuralError("replay_report: report covers " + std::to_string(report.samples.size()) +
                          " samples but " + std::to_string(features.size()) + " were given");
  }
  std::vector<FeatureMatrix> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    out.push_back(apply_plan(features[i], report.samples[i].plan));
  }
  return out;
}

}  // namespace psaug
