#include "fieldclust/autoconf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "fieldclust/clustering.hpp"
#include "fieldclust/error.hpp"
#include "fieldclust/spline.hpp"

namespace fieldclust {

namespace {

constexpr std::size_t kMinGrid = 200;
constexpr std::size_t kMinKneedleSamples = 10;
constexpr std::size_t kMinTrimmedSamples = 8;
constexpr double kGiantClusterShare = 0.6;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_increase(const SampledCurve& c) {
  double best = 0.0;
  for (std::size_t i = 1; i < c.ys.size(); ++i) best = std::max(best, c.ys[i] - c.ys[i - 1]);
  return best;
}

double apply_shift(const DissimilarityMatrix& matrix, double knee, double shift) {
  double eps = knee + shift;
  if (eps <= 0.0) eps = knee;
  return std::min(eps, matrix.max_entry());
}

// Knee of the smoothed ECDF over `samples`; throws Error(no_knee).
double knee_of(std::span<const double> samples, const AutoConfig& cfg) {
  auto smoothed = smooth_spline(ecdf(samples), cfg.smoothing);
  if (smoothed.degenerate) throw Error(ErrorKind::no_knee, "all k-NN dissimilarities are equal");
  return kneedle(smoothed.curve, cfg.sensitivity);
}

}  // namespace

double EcdfCurve::operator()(double x) const {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  return double(it - xs.begin()) / double(xs.size());
}

std::size_t log_round(std::size_t n) {
  if (n == 0) return 0;
  return std::size_t(std::lround(std::log(double(n))));
}

std::vector<double> knn_dissimilarities(const DissimilarityMatrix& matrix, std::size_t k) {
  const std::size_t n = matrix.size();
  if (k < 1 || k + 1 > n) throw std::invalid_argument("k-NN rank out of range");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = matrix.row_without_self(i);
    std::nth_element(row.begin(), row.begin() + std::ptrdiff_t(k - 1), row.end());
    out[i] = row[k - 1];
  }
  return out;
}

EcdfCurve ecdf(std::span<const double> samples, std::size_t k) {
  if (samples.empty()) throw std::invalid_argument("ECDF of an empty sample");
  EcdfCurve c;
  c.k = k;
  c.xs.assign(samples.begin(), samples.end());
  std::sort(c.xs.begin(), c.xs.end());
  const double n = double(c.xs.size());
  c.ys.resize(c.xs.size());
  for (std::size_t i = 0; i < c.ys.size(); ++i) c.ys[i] = double(i + 1) / n;
  return c;
}

SmoothedCurve smooth_spline(const EcdfCurve& curve, double s) {
  const std::size_t n = curve.xs.size();
  if (n < 4) throw std::invalid_argument("smoothing needs at least four ECDF points");
  const double lo = curve.xs.front();
  const double hi = curve.xs.back();
  if (!(hi > lo)) return {{curve.xs, curve.ys}, true};

  // Ties (and values equal up to rounding) collapse into one knot carrying the
  // ECDF value at that x, weighted by the tie count.
  const double merge_tol = 1e-9 * (hi - lo);
  std::vector<double> kx, ky, kw;
  for (std::size_t i = 0; i < n; ++i) {
    if (!kx.empty() && curve.xs[i] - kx.back() <= merge_tol) {
      ky.back() = curve.ys[i];
      kw.back() += 1.0;
    } else {
      kx.push_back(curve.xs[i]);
      ky.push_back(curve.ys[i]);
      kw.push_back(1.0);
    }
  }

  // Residual budget: weighted sum of squared y residuals equal to s * n.
  const double target = s * double(n);
  SmoothedCurve out;
  const std::size_t grid = std::max(kMinGrid, n);
  out.curve.xs.resize(grid);
  out.curve.ys.resize(grid);
  auto spline = SmoothingSpline::fit(kx, ky, kw, target);
  double running = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    double x = i + 1 == grid ? hi : lo + (hi - lo) * double(i) / double(grid - 1);
    double y = std::clamp(spline(x), 0.0, 1.0);
    running = std::max(running, y);
    out.curve.xs[i] = x;
    out.curve.ys[i] = running;
  }
  return out;
}

double kneedle(const SampledCurve& curve, double sensitivity) {
  const std::size_t n = curve.xs.size();
  if (n < kMinKneedleSamples || curve.ys.size() != n)
    throw std::invalid_argument("kneedle needs at least ten samples");
  const double x0 = curve.xs.front();
  const double x_span = curve.xs.back() - x0;
  auto [ymin_it, ymax_it] = std::minmax_element(curve.ys.begin(), curve.ys.end());
  const double y0 = *ymin_it;
  const double y_span = *ymax_it - y0;
  if (!(x_span > 0.0) || !(y_span > 0.0)) throw Error(ErrorKind::no_knee, "flat curve has no knee");

  std::vector<double> xn(n), diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    xn[i] = (curve.xs[i] - x0) / x_span;
    diff[i] = (curve.ys[i] - y0) / y_span - xn[i];
  }
  const double mean_step = (xn.back() - xn.front()) / double(n - 1);

  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (diff[i] > diff[i - 1] && diff[i] >= diff[i + 1]) maxima.push_back(i);

  std::optional<std::size_t> knee;
  for (std::size_t m = 0; m < maxima.size(); ++m) {
    std::size_t at = maxima[m];
    std::size_t until = m + 1 < maxima.size() ? maxima[m + 1] : n;
    double threshold = diff[at] - sensitivity * mean_step;
    for (std::size_t j = at + 1; j < until; ++j) {
      if (diff[j] < threshold) {
        knee = at;
        break;
      }
    }
  }
  if (!knee) throw Error(ErrorKind::no_knee, "no knee confirmed");
  return curve.xs[*knee];
}

EpsilonSelection select_epsilon(const DissimilarityMatrix& matrix, const AutoConfigOptions& options) {
  const std::size_t n = matrix.size();
  if (n < 8)
    throw Error(ErrorKind::empty_analysis,
                "need at least 8 unique segment values, got " + std::to_string(n));
  EpsilonSelection sel;
  auto& cfg = sel.config;
  cfg.sensitivity = options.sensitivity;
  cfg.smoothing = options.smoothing;
  cfg.epsilon_shift = options.epsilon_shift;
  cfg.min_samples = std::max<std::size_t>(1, log_round(n));

  const std::size_t k_max = std::min(std::max<std::size_t>(2, log_round(n)), n - 1);
  std::size_t best = 0;
  for (std::size_t k = 2; k <= k_max; ++k) {
    KnnCurve kc;
    kc.raw = ecdf(knn_dissimilarities(matrix, k), k);
    kc.smoothed = smooth_spline(kc.raw, options.smoothing);
    kc.max_increase = max_increase(kc.smoothed.curve);
    if (sel.curves.empty() || kc.max_increase > sel.curves[best].max_increase) best = sel.curves.size();
    sel.curves.push_back(std::move(kc));
  }
  const auto& chosen = sel.curves[best];
  cfg.chosen_k = chosen.raw.k;
  try {
    if (chosen.smoothed.degenerate) throw Error(ErrorKind::no_knee, "degenerate k-NN ECDF");
    cfg.knee_x = kneedle(chosen.smoothed.curve, options.sensitivity);
    cfg.epsilon = apply_shift(matrix, cfg.knee_x, options.epsilon_shift);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::no_knee) throw;
    cfg.fallback = true;
    cfg.knee_x = median(knn_dissimilarities(matrix, 2));
    cfg.epsilon = cfg.knee_x;
  }
  return sel;
}

bool has_giant_cluster(const Clustering& clustering) {
  std::size_t clustered = 0;
  std::size_t largest = 0;
  for (const auto& c : clustering.clusters) {
    clustered += c.members.size();
    largest = std::max(largest, c.members.size());
  }
  return clustered > 0 && double(largest) > kGiantClusterShare * double(clustered);
}

AutoConfig retrim_epsilon(const DissimilarityMatrix& matrix, const AutoConfig& previous,
                          const Clustering& clustering) {
  if (!has_giant_cluster(clustering)) return previous;
  AutoConfig next = previous;
  std::vector<double> trimmed;
  for (double d : knn_dissimilarities(matrix, previous.chosen_k))
    if (d < previous.knee_x) trimmed.push_back(d);
  if (trimmed.size() < kMinTrimmedSamples) {
    next.retrim_stalled = true;
    return next;
  }
  try {
    next.knee_x = knee_of(trimmed, previous);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::no_knee) throw;
    next.retrim_stalled = true;
    return next;
  }
  next.epsilon = apply_shift(matrix, next.knee_x, previous.epsilon_shift);
  next.retrimmed = true;
  next.fallback = false;
  ++next.retrim_count;
  return next;
}

void write_ecdf_csv(std::ostream& out, std::span<const KnnCurve> curves) {
  out << "k,x,y_raw,y_smoothed\n";
  char buf[128];
  for (const auto& c : curves) {
    const auto& s = c.smoothed.curve;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g\n", c.raw.k, s.xs[i], c.raw(s.xs[i]), s.ys[i]);
      out << buf;
    }
  }
}

}  // namespace fieldclust
