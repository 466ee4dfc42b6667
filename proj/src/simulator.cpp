#include "psaug/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "psaug/errors.hpp"
#include "psaug/rng.hpp"
#include "psaug/serialization.hpp"

namespace psaug::sim {
namespace {

// Stream keys for the simulator's own randomness, kept apart from the
// engine's per-sample streams by using an all-ones batch index.
constexpr std::uint64_t kSimBatchKey = ~std::uint64_t{0};
constexpr std::uint64_t kTrainKey = 1;
constexpr std::uint64_t kEvalKey = 2;
constexpr std::uint64_t kShuffleKey = 3;

double normal(SampleStream& rng) {
  // Box-Muller; 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> class_template(const SyntheticTask& task, std::size_t k) {
  const double centre = (static_cast<double>(k) + 0.5) * static_cast<double>(task.bins) /
                        static_cast<double>(task.num_classes);
  const double width = std::max(1.0, static_cast<double>(task.bins) / (2.0 * task.num_classes));
  std::vector<double> t(task.frames * task.bins);
  for (std::size_t i = 0; i < task.frames; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>((k + 1) * i) /
                         static_cast<double>(task.frames);
    const double envelope = 1.0 + 0.5 * std::sin(phase);
    for (std::size_t f = 0; f < task.bins; ++f) {
      const double d = (static_cast<double>(f) - centre) / width;
      t[i * task.bins + f] = envelope * std::exp(-0.5 * d * d);
    }
  }
  return t;
}

Dataset make_split(const SyntheticTask& task, const std::vector<std::vector<double>>& templates,
                   std::size_t per_class, std::uint64_t key) {
  Dataset ds;
  const std::size_t cells = task.frames * task.bins;
  for (std::size_t k = 0; k < task.num_classes; ++k) {
    for (std::size_t j = 0; j < per_class; ++j) {
      SampleStream rng = derive_sample_stream(task.seed, key, kSimBatchKey, k * per_class + j);
      const double gain = 0.5 + rng.uniform01();
      const std::size_t other = (k + 1 + rng.below(task.num_classes - 1)) % task.num_classes;
      const double confusion = 0.6 * rng.uniform01();
      std::vector<float> values(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        const double v = gain * ((1.0 - confusion) * templates[k][c] + confusion * templates[other][c]) +
                         task.noise * normal(rng);
        values[c] = static_cast<float>(v);
      }
      ds.features.emplace_back(task.frames, task.bins, std::move(values));
      ds.labels.push_back(k);
    }
  }
  return ds;
}

// Multinomial logistic regression over flattened features.
class SoftmaxClassifier {
 public:
  SoftmaxClassifier(std::size_t classes, std::size_t dim)
      : classes_(classes), dim_(dim), weights_(classes * dim, 0.0), bias_(classes, 0.0) {}

  std::vector<double> probabilities(const FeatureMatrix& x) const {
    const auto v = x.values();
    std::vector<double> logits(classes_);
    for (std::size_t k = 0; k < classes_; ++k) {
      const double* w = weights_.data() + k * dim_;
      double z = bias_[k];
      for (std::size_t d = 0; d < dim_; ++d) z += w[d] * v[d];
      logits[k] = z;
    }
    const double peak = *std::ranges::max_element(logits);
    double total = 0.0;
    for (double& z : logits) total += (z = std::exp(z - peak));
    for (double& z : logits) z /= total;
    return logits;
  }

  double loss(const FeatureMatrix& x, std::size_t label) const {
    return -std::log(std::max(probabilities(x)[label], 1e-300));
  }

  std::size_t predict(const FeatureMatrix& x) const {
    const auto p = probabilities(x);
    return static_cast<std::size_t>(std::ranges::max_element(p) - p.begin());
  }

  // One gradient-descent step on the batch-mean cross-entropy.
  void step(std::span<const FeatureMatrix> xs, std::span<const std::size_t> labels, double lr) {
    std::vector<double> grad_w(weights_.size(), 0.0);
    std::vector<double> grad_b(classes_, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto p = probabilities(xs[i]);
      p[labels[i]] -= 1.0;
      const auto v = xs[i].values();
      for (std::size_t k = 0; k < classes_; ++k) {
        double* g = grad_w.data() + k * dim_;
        for (std::size_t d = 0; d < dim_; ++d) g[d] += p[k] * v[d];
        grad_b[k] += p[k];
      }
    }
    const double scale = lr / static_cast<double>(xs.size());
    for (std::size_t j = 0; j < weights_.size(); ++j) weights_[j] -= scale * grad_w[j];
    for (std::size_t k = 0; k < classes_; ++k) bias_[k] -= scale * grad_b[k];
  }

 private:
  std::size_t classes_;
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// Among samples gated adaptive on a channel, the hardest (largest clipped
// loss) must not receive more operations than the easiest.
std::size_t count_violations(const BatchAugReport& report) {
  const auto& clipped = report.trace.l_clipped;
  std::size_t violations = 0;
  auto check = [&](Gate SampleReport::*gate, auto counts_of) {
    std::size_t lo = 0, hi = 0;
    bool any = false;
    for (std::size_t i = 0; i < report.samples.size(); ++i) {
      if (report.samples[i].*gate != Gate::kAdaptive) continue;
      if (!any || clipped[i] < clipped[lo]) lo = i;
      if (!any || clipped[i] > clipped[hi]) hi = i;
      any = true;
    }
    if (any && clipped[hi] > clipped[lo] &&
        counts_of(report.samples[hi].counts) > counts_of(report.samples[lo].counts)) {
      ++violations;
    }
  };
  check(&SampleReport::gate_mask, [](const AugCounts& c) { return c.n_time_mask; });
  check(&SampleReport::gate_mask, [](const AugCounts& c) { return c.n_freq_mask; });
  check(&SampleReport::gate_sub, [](const AugCounts& c) { return c.n_time_sub; });
  return violations;
}

struct Phase {
  Stage stage;
  std::size_t epochs;
};

}  // namespace

void SyntheticTask::validate() const {
  if (num_classes < 2) throw StructuralError("synthetic task needs at least two classes");
  if (samples_per_class < 1 || eval_per_class < 1) {
    throw StructuralError("synthetic task needs at least one sample per class");
  }
  if (frames < 1 || bins < 1) throw StructuralError("synthetic task dims must be positive");
  if (!(std::isfinite(noise) && noise >= 0.0)) {
    throw StructuralError("synthetic task noise must be finite and non-negative");
  }
}

TaskData generate_task(const SyntheticTask& task) {
  task.validate();
  std::vector<std::vector<double>> templates;
  for (std::size_t k = 0; k < task.num_classes; ++k) templates.push_back(class_template(task, k));
  return {make_split(task, templates, task.samples_per_class, kTrainKey),
          make_split(task, templates, task.eval_per_class, kEvalKey)};
}

const char* to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::kFixed: return "fixed";
    case Regime::kAdaptive: return "adaptive";
    case Regime::kTwoStage: return "two_stage";
  }
  return "?";
}

Regime regime_from_string(std::string_view name) {
  if (name == "fixed") return Regime::kFixed;
  if (name == "adaptive") return Regime::kAdaptive;
  if (name == "two_stage") return Regime::kTwoStage;
  throw StructuralError("unknown regime '" + std::string(name) +
                        "' (expected fixed, adaptive or two_stage)");
}

EngineConfig SimConfig::default_engine() {
  EngineConfig e;
  e.limits.max_t_width = 12;
  e.limits.max_f_width = 3;
  e.limits.max_sub_width = 8;
  return e;
}

void SimConfig::validate() const {
  if (pretrain_epochs + adaptive_epochs < 1) throw StructuralError("simulation needs at least one epoch");
  if (regime == Regime::kTwoStage && (pretrain_epochs < 1 || adaptive_epochs < 1)) {
    throw StructuralError("two_stage simulation needs at least one epoch in each stage");
  }
  if (batch_size < 1) throw StructuralError("simulation batch size must be at least 1");
  if (!(std::isfinite(learning_rate) && learning_rate > 0.0)) {
    throw StructuralError("simulation learning rate must be positive");
  }
  EngineConfig probe = engine;
  probe.stage = Stage::kPretrain;
  probe.validate();
}

SimMetrics run_simulation(const SyntheticTask& task, const SimConfig& config,
                          const BatchObserver& observer) {
  config.validate();
  const TaskData data = generate_task(task);
  const std::size_t n = data.train.features.size();
  SoftmaxClassifier model(task.num_classes, task.frames * task.bins);

  const std::size_t total = config.pretrain_epochs + config.adaptive_epochs;
  std::vector<Phase> phases;
  switch (config.regime) {
    case Regime::kFixed: phases = {{Stage::kPretrain, total}}; break;
    case Regime::kAdaptive: phases = {{Stage::kAdaptive, total}}; break;
    case Regime::kTwoStage:
      phases = {{Stage::kPretrain, config.pretrain_epochs}, {Stage::kAdaptive, config.adaptive_epochs}};
      break;
  }

  SimMetrics metrics;
  std::vector<std::size_t> order(n);
  std::size_t global_epoch = 0;
  for (const Phase& phase : phases) {
    EngineConfig engine = config.engine;
    engine.stage = phase.stage;
    // The schedule restarts with each phase and reaches its end on the
    // phase's last epoch.
    engine.schedule.total_epochs = std::max<std::size_t>(1, phase.epochs - 1);
    engine.epoch_offset = 0;

    for (std::size_t e = 0; e < phase.epochs; ++e, ++global_epoch) {
      EpochMetrics row;
      row.epoch = global_epoch;
      row.stage = phase.stage;
      row.stage_epoch = e;
      if (phase.stage == Stage::kAdaptive) {
        const ScheduleState s = schedule_at(e, engine.schedule);
        row.p_mask = s.p_mask;
        row.p_sub = s.p_sub;
      }

      std::iota(order.begin(), order.end(), std::size_t{0});
      SampleStream shuffle = derive_sample_stream(task.seed, kShuffleKey, kSimBatchKey, global_epoch);
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

      double loss_sum = 0.0;
      double lambda_sum = 0.0;
      std::size_t adaptive_mask = 0, adaptive_sub = 0;
      std::size_t sum_t = 0, sum_f = 0, sum_s = 0;
      std::size_t batch_index = 0;
      for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
        const std::size_t stop = std::min(n, start + config.batch_size);
        std::vector<FeatureMatrix> batch;
        std::vector<std::size_t> labels;
        std::vector<double> losses;
        for (std::size_t j = start; j < stop; ++j) {
          const std::size_t idx = order[j];
          batch.push_back(data.train.features[idx]);
          labels.push_back(data.train.labels[idx]);
          const double l = model.loss(batch.back(), labels.back());
          if (!std::isfinite(l)) {
            throw std::runtime_error("simulation diverged: non-finite loss at epoch " +
                                     std::to_string(global_epoch));
          }
          losses.push_back(l);
          loss_sum += l;
        }

        BatchResult aug = augment_batch(batch, losses, e, engine, batch_index);
        for (const SampleReport& s : aug.report.samples) {
          lambda_sum += s.lambda;
          adaptive_mask += s.gate_mask == Gate::kAdaptive;
          adaptive_sub += s.gate_sub == Gate::kAdaptive;
          sum_t += s.counts.n_time_mask;
          sum_f += s.counts.n_freq_mask;
          sum_s += s.counts.n_time_sub;
        }
        row.monotonic_violations += count_violations(aug.report);
        if (observer) observer(row, aug.report);
        model.step(aug.features, labels, config.learning_rate);
      }

      const double dn = static_cast<double>(n);
      row.mean_loss = loss_sum / dn;
      row.mean_lambda = lambda_sum / dn;
      row.gate_rate_mask = static_cast<double>(adaptive_mask) / dn;
      row.gate_rate_sub = static_cast<double>(adaptive_sub) / dn;
      row.mean_n_time_mask = static_cast<double>(sum_t) / dn;
      row.mean_n_freq_mask = static_cast<double>(sum_f) / dn;
      row.mean_n_time_sub = static_cast<double>(sum_s) / dn;

      std::size_t correct = 0;
      for (std::size_t i = 0; i < data.eval.features.size(); ++i) {
        correct += model.predict(data.eval.features[i]) == data.eval.labels[i];
      }
      row.eval_accuracy = static_cast<double>(correct) / static_cast<double>(data.eval.features.size());
      metrics.epochs.push_back(row);
    }
  }
  return metrics;
}

std::string SimMetrics::to_csv() const {
  std::string out =
      "epoch,stage,stage_epoch,mean_loss,eval_accuracy,mean_lambda,gate_rate_mask,gate_rate_sub,"
      "mean_n_time_mask,mean_n_freq_mask,mean_n_time_sub,p_mask,p_sub,monotonic_violations\n";
  char buf[512];
  for (const auto& r : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu\n",
                  r.epoch, psaug::to_string(r.stage), r.stage_epoch, r.mean_loss, r.eval_accuracy,
                  r.mean_lambda, r.gate_rate_mask, r.gate_rate_sub, r.mean_n_time_mask,
                  r.mean_n_freq_mask, r.mean_n_time_sub, r.p_mask, r.p_sub, r.monotonic_violations);
    out += buf;
  }
  return out;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StructuralError("spearman_rho: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace psaug::sim
