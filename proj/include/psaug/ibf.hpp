#pragma once

namespace psaug {

/// Shape of a sample/epoch policy curve in (concentration, skew) form.
///
/// The Beta shape parameters are alpha = s * (1 - a) and beta = s * a.
/// The default (s = 2, a = 0.5) gives alpha = beta = 1, for which the
/// regularized incomplete beta function is the identity on [0, 1].
struct IbfParams {
  double s = 2.0;
  double a = 0.5;

  double alpha() const noexcept { return s * (1.0 - a); }
  double beta() const noexcept { return s * a; }

  /// Throws DomainError unless s > 0, 0 < a < 1 and both shape parameters
  /// lie in (0, kMaxShape].
  void validate() const;

  friend bool operator==(const IbfParams&, const IbfParams&) = default;
};

/// Shape parameters above this are rejected.
inline constexpr double kMaxShape = 1e4;

/// I_x(alpha, beta), the regularized incomplete beta function (Beta CDF).
/// Throws DomainError for x outside [0, 1] or invalid shape parameters.
double regularized_ibf(double x, double alpha, double beta);

inline double regularized_ibf(double x, const IbfParams& params) {
  params.validate();
  return regularized_ibf(x, params.alpha(), params.beta());
}

}  // namespace psaug
