#include "psaug/feature_matrix.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>

#include "psaug/errors.hpp"

namespace psaug {
namespace {

void check_dims(std::size_t frames, std::size_t bins) {
  if (frames == 0 || bins == 0) {
    throw StructuralError("feature matrix must have at least one frame and one bin, got " +
                          std::to_string(frames) + "x" + std::to_string(bins));
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t frames, std::size_t bins)
    : frames_(frames), bins_(bins) {
  check_dims(frames, bins);
  values_.assign(frames * bins, 0.0f);
}

FeatureMatrix::FeatureMatrix(std::size_t frames, std::size_t bins, std::vector<float> values)
    : frames_(frames), bins_(bins), values_(std::move(values)) {
  check_dims(frames, bins);
  if (values_.size() != frames * bins) {
    throw StructuralError("feature matrix payload has " + std::to_string(values_.size()) +
                          " values, expected " + std::to_string(frames * bins));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw StructuralError("feature matrix value at index " + std::to_string(i) +
                            " is not finite");
    }
  }
}

bool FeatureMatrix::bit_identical(const FeatureMatrix& other) const noexcept {
  return frames_ == other.frames_ && bins_ == other.bins_ &&
         std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(float)) == 0;
}

}  // namespace psaug
