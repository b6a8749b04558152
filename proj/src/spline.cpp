#include "fieldclust/spline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace fieldclust {

namespace {

constexpr int kDegree = 3;
constexpr std::size_t kMaxInteriorKnots = 256;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Knot span index l with knots[l] <= t < knots[l + 1], restricted to the
// valid range so that t = 1 falls into the last span.
std::size_t find_span(const std::vector<double>& knots, std::size_t n_coef, double t) {
  if (t >= knots[n_coef]) return n_coef - 1;
  auto it = std::upper_bound(knots.begin() + kDegree, knots.begin() + std::ptrdiff_t(n_coef) + 1, t);
  return std::size_t(it - knots.begin()) - 1;
}

// Values and derivatives (orders 0..3) of the four non-zero basis functions
// on span l at t.
std::array<std::array<double, 4>, 4> basis_derivatives(const std::vector<double>& knots, std::size_t l,
                                                       double t) {
  constexpr int p = kDegree;
  double ndu[p + 1][p + 1];
  double left[p + 1], right[p + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - knots[l + 1 - j];
    right[j] = knots[l + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  std::array<std::array<double, 4>, 4> ders{};
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
  double a[2][p + 1];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= p; ++k) {
      double d = 0.0;
      int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      int j1 = rk >= -1 ? 1 : -rk;
      int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= p; ++k) {
    for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
    factor *= (p - k);
  }
  return ders;
}

struct System {
  std::vector<double> knots;
  Matrix normal;   // B' W B
  Vector rhs;      // B' W y
  Matrix penalty;  // sum of squared third-derivative jumps
  double yy = 0.0; // y' W y
};

System build_system(std::span<const double> t, std::span<const double> y, std::span<const double> w,
                    std::size_t interior) {
  const std::size_t n = t.size();
  System s;
  s.knots.assign(kDegree + 1, 0.0);
  for (std::size_t j = 1; j <= interior; ++j) {
    double knot = t[std::size_t(std::lround(double(j) * double(n - 1) / double(interior + 1)))];
    if (knot > s.knots.back() && knot < 1.0) s.knots.push_back(knot);
  }
  s.knots.insert(s.knots.end(), kDegree + 1, 1.0);
  const std::size_t m = s.knots.size() - kDegree - 1;

  s.normal = Matrix::Zero(Eigen::Index(m), Eigen::Index(m));
  s.rhs = Vector::Zero(Eigen::Index(m));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t l = find_span(s.knots, m, t[i]);
    auto b = basis_derivatives(s.knots, l, t[i])[0];
    for (int a = 0; a <= kDegree; ++a) {
      auto ia = Eigen::Index(l - kDegree + std::size_t(a));
      s.rhs[ia] += w[i] * b[std::size_t(a)] * y[i];
      for (int c = 0; c <= kDegree; ++c)
        s.normal(ia, Eigen::Index(l - kDegree + std::size_t(c))) += w[i] * b[std::size_t(a)] * b[std::size_t(c)];
    }
    s.yy += w[i] * y[i] * y[i];
  }

  // Third derivatives are constant per span; a jump row at interior knot j
  // takes the right span's value minus the left span's.
  s.penalty = Matrix::Zero(Eigen::Index(m), Eigen::Index(m));
  for (std::size_t k = kDegree + 1; k + kDegree + 1 < s.knots.size(); ++k) {
    Vector jump = Vector::Zero(Eigen::Index(m));
    std::size_t right_span = k;
    std::size_t left_span = k - 1;
    double right_mid = 0.5 * (s.knots[k] + s.knots[k + 1]);
    double left_mid = 0.5 * (s.knots[k - 1] + s.knots[k]);
    auto dr = basis_derivatives(s.knots, right_span, right_mid)[3];
    auto dl = basis_derivatives(s.knots, left_span, left_mid)[3];
    for (int a = 0; a <= kDegree; ++a) {
      jump[Eigen::Index(right_span - kDegree + std::size_t(a))] += dr[std::size_t(a)];
      jump[Eigen::Index(left_span - kDegree + std::size_t(a))] -= dl[std::size_t(a)];
    }
    s.penalty += jump * jump.transpose();
  }
  return s;
}

Vector solve(const System& s, double mu) {
  Matrix a = s.normal + mu * s.penalty;
  Eigen::LDLT<Matrix> ldlt(a);
  Vector c = ldlt.solve(s.rhs);
  if (ldlt.info() != Eigen::Success || !c.allFinite()) {
    // Rank deficient least squares; a tiny ridge picks the minimum-norm-like fit.
    a.diagonal().array() += 1e-12 * std::max(1.0, a.diagonal().maxCoeff());
    c = a.ldlt().solve(s.rhs);
  }
  return c;
}

double residual(const System& s, const Vector& c) {
  // y'Wy - 2 c'B'Wy + c'B'WBc, clamped against rounding.
  return std::max(0.0, s.yy - 2.0 * c.dot(s.rhs) + c.dot(s.normal * c));
}

}  // namespace

SmoothingSpline SmoothingSpline::fit(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> w, double target_rss) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || w.size() != n)
    throw std::invalid_argument("smoothing spline needs at least two weighted points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("smoothing spline abscissae must increase");

  SmoothingSpline out;
  out.x0_ = x.front();
  out.span_ = x.back() - x.front();
  if (n < 4) {
    out.px_.assign(x.begin(), x.end());
    out.py_.assign(y.begin(), y.end());
    return out;
  }

  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = (x[i] - out.x0_) / out.span_;
  t.back() = 1.0;

  auto accept = [&](const System& s, const Vector& c, double rss) {
    out.knots_ = s.knots;
    out.coef_.assign(c.data(), c.data() + c.size());
    out.rss_ = rss;
  };

  // The cubic polynomial (no interior knots) first.
  {
    System s = build_system(t, y, w, 0);
    Vector c = solve(s, 0.0);
    double rss = residual(s, c);
    if (rss <= target_rss) {
      accept(s, c, rss);
      return out;
    }
  }

  const std::size_t max_interior = std::min(kMaxInteriorKnots, n - 4);
  for (std::size_t interior = 1;; interior = std::min(max_interior, interior * 2)) {
    System s = build_system(t, y, w, interior);
    Vector loose = solve(s, 0.0);
    double loose_rss = residual(s, loose);
    if (loose_rss > target_rss && interior < max_interior) continue;
    if (loose_rss >= target_rss) {
      accept(s, loose, loose_rss);
      return out;
    }
    // Residual grows with the penalty weight; bisect its logarithm.
    double scale = s.normal.trace() / std::max(s.penalty.trace(), 1e-300);
    double lo = -40.0, hi = 40.0;
    for (int iter = 0; iter < 100; ++iter) {
      double mid = 0.5 * (lo + hi);
      if (residual(s, solve(s, scale * std::exp(mid))) > target_rss) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    Vector c = solve(s, scale * std::exp(lo));
    accept(s, c, residual(s, c));
    return out;
  }
}

double SmoothingSpline::operator()(double x) const {
  if (!px_.empty()) {
    if (x <= px_.front()) return py_.front();
    if (x >= px_.back()) return py_.back();
    auto it = std::upper_bound(px_.begin(), px_.end(), x);
    std::size_t j = std::size_t(it - px_.begin());
    double f = (x - px_[j - 1]) / (px_[j] - px_[j - 1]);
    return py_[j - 1] + f * (py_[j] - py_[j - 1]);
  }
  double t = std::clamp((x - x0_) / span_, 0.0, 1.0);
  const std::size_t m = coef_.size();
  std::size_t l = find_span(knots_, m, t);
  auto b = basis_derivatives(knots_, l, t)[0];
  double v = 0.0;
  for (int a = 0; a <= kDegree; ++a) v += b[std::size_t(a)] * coef_[l - kDegree + std::size_t(a)];
  return v;
}

}  // namespace fieldclust
