#include "psaug/adaptive_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "psaug/errors.hpp"

namespace psaug {
namespace {

void check_losses(std::span<const double> losses) {
  if (losses.empty()) throw StructuralError("loss batch is empty");
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i]) || losses[i] < 0.0) {
      throw StructuralError("loss " + std::to_string(i) + " must be finite and non-negative");
    }
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

LossPipelineTrace hybrid_normalize(std::span<const double> losses, const IbfParams& ibf,
                                   ClipSpread spread) {
  check_losses(losses);
  ibf.validate();
  const std::size_t n = losses.size();

  LossPipelineTrace tr;
  tr.l_raw.assign(losses.begin(), losses.end());
  tr.l_mean = mean_of(losses);
  double sq = 0.0;
  for (double l : losses) sq += (l - tr.l_mean) * (l - tr.l_mean);
  tr.l_var = sq / static_cast<double>(n);

  const double band = 2.0 * (spread == ClipSpread::kVariance ? tr.l_var : std::sqrt(tr.l_var));
  tr.clip_low = tr.l_mean - band;
  tr.clip_high = tr.l_mean + band;

  tr.l_clipped.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tr.l_clipped[i] = std::clamp(losses[i], tr.clip_low, tr.clip_high);
  }

  const double clipped_mean = mean_of(tr.l_clipped);
  tr.l_meannorm.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = tr.l_clipped[i] + clipped_mean;
    tr.l_meannorm[i] = denom > 0.0 ? tr.l_clipped[i] / denom : 0.0;
  }

  const auto [lo_it, hi_it] = std::ranges::minmax_element(tr.l_meannorm);
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  tr.l_minmax.resize(n);
  tr.lambda.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tr.l_minmax[i] = range > 0.0 ? std::clamp((tr.l_meannorm[i] - lo) / range, 0.0, 1.0) : 0.5;
    tr.lambda[i] = 1.0 - regularized_ibf(tr.l_minmax[i], ibf.alpha(), ibf.beta());
  }
  return tr;
}

std::vector<std::size_t> loss_ranks(std::span<const double> losses) {
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
  std::vector<std::size_t> ranks(losses.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
  return ranks;
}

std::vector<double> rank_policy(std::span<const double> losses, const IbfParams& ibf) {
  check_losses(losses);
  ibf.validate();
  const auto ranks = loss_ranks(losses);
  const double b = static_cast<double>(losses.size());
  std::vector<double> lambda(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) {
    lambda[i] = 1.0 - regularized_ibf(static_cast<double>(ranks[i]) / b, ibf.alpha(), ibf.beta());
  }
  return lambda;
}

void CountMultipliers::validate() const {
  for (double m : {time_mask, freq_mask, time_sub}) {
    if (!(std::isfinite(m) && m >= 0.0)) {
      throw StructuralError("count multipliers must be finite and non-negative");
    }
  }
}

AugCounts counts_from_lambda(double lambda, CountPath path, const CountMultipliers& mult) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw StructuralError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  if (path == CountPath::kFixed) return kFixedCounts;
  auto ceil_count = [lambda](double m) { return static_cast<std::size_t>(std::ceil(m * lambda)); };
  return {ceil_count(mult.time_mask), ceil_count(mult.freq_mask), ceil_count(mult.time_sub)};
}

}  // namespace psaug
