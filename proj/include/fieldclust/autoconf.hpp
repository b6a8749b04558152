#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fieldclust/dissimilarity.hpp"

namespace fieldclust {

struct Clustering;

/// Empirical CDF: xs sorted, ys[i] = (i + 1) / n.
struct EcdfCurve {
  std::size_t k = 0;
  std::vector<double> xs;
  std::vector<double> ys;

  /// Fraction of samples <= x.
  double operator()(double x) const;
};

struct SampledCurve {
  std::vector<double> xs;
  std::vector<double> ys;
};

struct SmoothedCurve {
  SampledCurve curve;
  bool degenerate = false;  // all samples equal; curve is the raw step curve
};

struct AutoConfig {
  std::size_t chosen_k = 0;
  double epsilon = 0.0;
  std::size_t min_samples = 1;
  double knee_x = 0.0;
  double smoothing = 0.1;
  double sensitivity = 1.0;
  double epsilon_shift = 0.0;
  bool retrimmed = false;
  std::size_t retrim_count = 0;
  bool fallback = false;     // no knee; epsilon is the median 2-NN dissimilarity
  bool retrim_stalled = false;  // a re-trim could not produce a new knee
  bool retrim_capped = false;   // still one giant cluster after the last re-trim

  friend bool operator==(const AutoConfig&, const AutoConfig&) = default;
};

struct AutoConfigOptions {
  double sensitivity = 1.0;    // Kneedle S
  double smoothing = 0.1;      // spline residual budget s
  double epsilon_shift = 0.0;  // added to the knee
};

/// round(ln n), natural log, halves away from zero.
std::size_t log_round(std::size_t n);

/// k-th smallest off-diagonal entry of every row (1 <= k <= n - 1).
std::vector<double> knn_dissimilarities(const DissimilarityMatrix& matrix, std::size_t k);

EcdfCurve ecdf(std::span<const double> samples, std::size_t k = 0);

/// Cubic smoothing spline through the ECDF, resampled on max(200, n) evenly
/// spaced x positions and forced into a monotone curve within [0, 1].
/// The weighted residual sum of squares is held at s * n.
SmoothedCurve smooth_spline(const EcdfCurve& curve, double s);

/// Rightmost confirmed knee of an increasing, mostly concave curve (Kneedle).
/// Throws Error(no_knee) when no local maximum of the difference curve is
/// confirmed.
double kneedle(const SampledCurve& curve, double sensitivity);

/// Per-k diagnostics kept for ECDF dumps.
struct KnnCurve {
  EcdfCurve raw;
  SmoothedCurve smoothed;
  double max_increase = 0.0;
};

struct EpsilonSelection {
  AutoConfig config;
  std::vector<KnnCurve> curves;
};

/// Automatic epsilon: the k in [2, round(ln n)] whose smoothed k-NN ECDF has
/// the largest single-step increase wins; its knee becomes epsilon.
EpsilonSelection select_epsilon(const DissimilarityMatrix& matrix, const AutoConfigOptions& options);

/// True when the largest cluster holds more than 60 % of the non-noise values.
bool has_giant_cluster(const Clustering& clustering);

/// One re-trim step: repeats knee detection on the chosen k-NN ECDF cut below
/// the previous knee. Returns `previous` unchanged if no giant cluster exists;
/// sets retrim_stalled when the trimmed sample is too small or has no knee.
AutoConfig retrim_epsilon(const DissimilarityMatrix& matrix, const AutoConfig& previous,
                          const Clustering& clustering);

/// CSV with columns k,x,y_raw,y_smoothed.
void write_ecdf_csv(std::ostream& out, std::span<const KnnCurve> curves);

}  // namespace fieldclust
