#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace seqlab {

inline constexpr double kComplexityScale = 1e4;  // C*

/// phi(z) = sum_{i <= K} c_i z^i.
struct TaylorSeries {
  std::string name;
  std::vector<double> coeffs;  ///< c_0..c_K
  /// log |c_i| for any i, when the series is the expansion of an entire
  /// function; lets sums run past K without underflow. Empty for finite
  /// polynomials.
  std::function<double(std::size_t)> log_abs_coeff;

  [[nodiscard]] std::size_t K() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  [[nodiscard]] double operator()(double z) const noexcept;
  [[nodiscard]] double derivative(double z) const noexcept;
  [[nodiscard]] bool is_polynomial() const noexcept { return !log_abs_coeff; }
};

/// "monomial:N", "sin", "cos", "exp", "quadratic_2z_minus_z2", "cos_pi".
/// Entire functions are truncated at the smallest K with
/// (K+2)^1.75 R^(K+1) |c_(K+1)| < 1e-16 max(1, partial C_s / C*).
TaylorSeries taylor_preset(std::string_view name, double R = 1.0);

std::vector<std::string> taylor_preset_names();

struct ComplexityReport {
  std::string name;
  double R = 0.0;
  double eps = 0.0;
  std::size_t K = 0;
  double c_s = 0.0;
  double c_eps = 0.0;      ///< +inf when it exceeds the double range
  double log_c_s = 0.0;    ///< natural log; -inf for the zero series
  double log_c_eps = 0.0;
  /// C* sum_{i > K} (i+1)^1.75 R^i |c_i|: what truncation dropped from C_s.
  double truncation_tail_bound = 0.0;
};

/// C_eps = sum_i ((C* R)^i + (sqrt(log(1/eps) / i) C* R)^i) |c_i|, with the
/// i = 0 second summand taken as |c_0|;
/// C_s = C* sum_i (i+1)^1.75 R^i |c_i|.
/// C_s uses the truncated coefficients. C_eps keeps summing an entire
/// function's expansion (in log space) until the terms are negligible.
ComplexityReport complexity_report(const TaylorSeries& series, double R, double eps);

}  // namespace seqlab
