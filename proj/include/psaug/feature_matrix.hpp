#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psaug {

struct MatrixDims {
  std::size_t frames = 0;
  std::size_t bins = 0;

  friend bool operator==(const MatrixDims&, const MatrixDims&) = default;
};

/// A frames x bins grid of filterbank features stored row-major
/// (time-major). Always non-empty with finite values.
class FeatureMatrix {
 public:
  /// Zero-filled matrix. Throws StructuralError on a zero dimension.
  FeatureMatrix(std::size_t frames, std::size_t bins);

  /// Takes ownership of row-major values. Throws StructuralError on a zero
  /// dimension, a size mismatch or a non-finite value.
  FeatureMatrix(std::size_t frames, std::size_t bins, std::vector<float> values);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t bins() const noexcept { return bins_; }
  MatrixDims dims() const noexcept { return {frames_, bins_}; }

  float operator()(std::size_t t, std::size_t f) const noexcept { return values_[t * bins_ + f]; }
  float& operator()(std::size_t t, std::size_t f) noexcept { return values_[t * bins_ + f]; }

  std::span<const float> row(std::size_t t) const noexcept {
    return {values_.data() + t * bins_, bins_};
  }
  std::span<float> row(std::size_t t) noexcept { return {values_.data() + t * bins_, bins_}; }

  std::span<const float> values() const noexcept { return values_; }

  /// Bitwise equality of dimensions and payload (distinguishes -0.0 and 0.0).
  bool bit_identical(const FeatureMatrix& other) const noexcept;

 private:
  std::size_t frames_;
  std::size_t bins_;
  std::vector<float> values_;
};

}  // namespace psaug
