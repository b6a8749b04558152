#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fieldclust {

/// Cubic B-spline smoother with a residual budget.
///
/// Interior knots sit at quantiles of the (strictly increasing) x values. The
/// fewest knots whose least-squares fit meets the budget are used, and the
/// coefficients are then smoothed by penalizing jumps of the third derivative
/// at the interior knots until the weighted residual sum of squares equals the
/// budget. A budget that a single cubic polynomial already meets yields that
/// polynomial.
class SmoothingSpline {
 public:
  static SmoothingSpline fit(std::span<const double> x, std::span<const double> y,
                             std::span<const double> w, double target_rss);

  /// Evaluates the spline; x is clamped to the fitted range.
  double operator()(double x) const;

  std::size_t interior_knots() const noexcept { return knots_.size() < 8 ? 0 : knots_.size() - 8; }
  double residual_sum() const noexcept { return rss_; }

 private:
  double x0_ = 0.0;
  double span_ = 1.0;
  std::vector<double> knots_;  // on [0, 1], boundary knots repeated four times
  std::vector<double> coef_;
  // Fewer than four distinct points: piecewise linear through them.
  std::vector<double> px_, py_;
  double rss_ = 0.0;
};

}  // namespace fieldclust
