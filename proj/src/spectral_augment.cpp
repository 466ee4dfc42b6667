#include "psaug/spectral_augment.hpp"

#include <algorithm>
#include <string>

#include "psaug/errors.hpp"

namespace psaug {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Span {
  std::size_t first;
  std::size_t last;
};

// Inclusive band [first, last] on an axis of `extent` cells.
Span draw_band(std::size_t extent, std::size_t max_width, SampleStream& rng) {
  const std::size_t width = rng.between(0, std::min(max_width, extent - 1));
  const std::size_t start = rng.between(0, extent - 1 - width);
  return {start, start + width};
}

}  // namespace

void AugLimits::validate() const {
  if (max_t_width < 1 || max_f_width < 1 || max_sub_width < 1) {
    throw StructuralError("augmentation limits must all be at least 1");
  }
}

void validate_plan(const AugmentationPlan& plan, MatrixDims dims) {
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const bool ok = std::visit(
        Overloaded{
            [&](const TimeMask& e) { return e.t1 <= e.t2 && e.t2 < dims.frames; },
            [&](const FreqMask& e) { return e.f1 <= e.f2 && e.f2 < dims.bins; },
            [&](const TimeSub& e) {
              return e.width >= 1 && e.width <= dims.frames && e.dest_t <= dims.frames - e.width &&
                     e.src_t <= dims.frames - e.width;
            },
        },
        plan[i]);
    if (!ok) {
      throw StructuralError("plan event " + std::to_string(i) + " lies outside a " +
                            std::to_string(dims.frames) + "x" + std::to_string(dims.bins) +
                            " matrix");
    }
  }
}

std::vector<TimeMask> plan_time_masks(std::size_t count, MatrixDims dims, const AugLimits& limits,
                                      SampleStream& rng) {
  std::vector<TimeMask> events;
  events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Span band = draw_band(dims.frames, limits.max_t_width, rng);
    events.push_back({band.first, band.last});
  }
  return events;
}

std::vector<FreqMask> plan_freq_masks(std::size_t count, MatrixDims dims, const AugLimits& limits,
                                      SampleStream& rng) {
  std::vector<FreqMask> events;
  events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Span band = draw_band(dims.bins, limits.max_f_width, rng);
    events.push_back({band.first, band.last});
  }
  return events;
}

std::vector<TimeSub> plan_time_subs(std::size_t count, MatrixDims dims, const AugLimits& limits,
                                    SampleStream& rng) {
  std::vector<TimeSub> events;
  events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t width = rng.between(1, std::min(limits.max_sub_width, dims.frames));
    const std::size_t dest = rng.between(0, dims.frames - width);
    const std::size_t src =
        rng.between(0, limits.arbitrary_sub_source ? dims.frames - width : dest);
    events.push_back({dest, src, width});
  }
  return events;
}

FeatureMatrix apply_plan(const FeatureMatrix& matrix, const AugmentationPlan& plan) {
  validate_plan(plan, matrix.dims());
  FeatureMatrix out = matrix;
  std::vector<float> chunk;
  for (const AugEvent& event : plan) {
    std::visit(Overloaded{
                   [&](const TimeMask& e) {
                     for (std::size_t t = e.t1; t <= e.t2; ++t) {
                       std::ranges::fill(out.row(t), 0.0f);
                     }
                   },
                   [&](const FreqMask& e) {
                     for (std::size_t t = 0; t < out.frames(); ++t) {
                       auto row = out.row(t);
                       std::fill(row.begin() + e.f1, row.begin() + e.f2 + 1, 0.0f);
                     }
                   },
                   [&](const TimeSub& e) {
                     // Source and destination may overlap; snapshot the source first.
                     const std::size_t bins = out.bins();
                     chunk.resize(e.width * bins);
                     for (std::size_t k = 0; k < e.width; ++k) {
                       std::ranges::copy(out.row(e.src_t + k), chunk.begin() + k * bins);
                     }
                     for (std::size_t k = 0; k < e.width; ++k) {
                       std::copy_n(chunk.begin() + k * bins, bins, out.row(e.dest_t + k).begin());
                     }
                   },
               },
               event);
  }
  return out;
}

}  // namespace psaug
