#include "betamix/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "betamix/errors.hpp"

namespace betamix {

ChebyshevSeries::ChebyshevSeries(double lo, double hi, std::vector<double> coeffs)
    : lo_(lo), hi_(hi), c_(std::move(coeffs)) {
  if (!(lo < hi)) throw ContractError("ChebyshevSeries: need lo < hi");
  if (c_.empty()) c_.push_back(0.0);
}

std::vector<double> ChebyshevSeries::points(double lo, double hi, int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) {
    double t = -std::cos(std::numbers::pi * (k + 0.5) / n);
    x[k] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
  }
  return x;
}

ChebyshevSeries ChebyshevSeries::interpolate(const RealFn& f, double lo, double hi, int n) {
  if (n < 1) throw ContractError("ChebyshevSeries::interpolate: need n >= 1");
  std::vector<double> fx(n);
  for (int k = 0; k < n; ++k) {
    double t = std::cos(std::numbers::pi * (k + 0.5) / n);
    fx[k] = f(0.5 * (lo + hi) + 0.5 * (hi - lo) * t);
  }
  std::vector<double> c(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += fx[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
    c[j] = 2.0 * s / n;
  }
  c[0] *= 0.5;
  return ChebyshevSeries(lo, hi, std::move(c));
}

ChebyshevSeries ChebyshevSeries::adaptive(const RealFn& f, double lo, double hi, double tol,
                                          int max_n) {
  ChebyshevSeries s;
  tol = std::max(tol, 2e-15);  // below this the tail is roundoff
  for (int n = 17;; n = 2 * n - 1) {
    s = interpolate(f, lo, hi, n);
    double scale = 0.0;
    for (double v : s.c_) scale = std::max(scale, std::fabs(v));
    double tail = 0.0;
    for (int j = n - n / 4; j < n; ++j) tail = std::max(tail, std::fabs(s.c_[j]));
    if (tail <= tol * scale || 2 * n - 1 > max_n) {
      // chop trailing coefficients that are below the tolerance
      std::size_t keep = s.c_.size();
      while (keep > 1 && std::fabs(s.c_[keep - 1]) <= tol * scale) --keep;
      s.c_.resize(keep);
      return s;
    }
  }
}

double ChebyshevSeries::operator()(double x) const {
  double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = c_.size(); j-- > 1;) {
    double b0 = 2.0 * t * b1 - b2 + c_[j];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c_[0];
}

ChebyshevSeries ChebyshevSeries::derivative() const {
  const std::size_t n = c_.size();
  if (n < 2) return ChebyshevSeries(lo_, hi_, {0.0});
  std::vector<double> d(n - 1, 0.0);
  d[n - 2] = 2.0 * (n - 1) * c_[n - 1];
  if (n >= 3) d[n - 3] = 2.0 * (n - 2) * c_[n - 2];
  if (n >= 4)
    for (std::size_t k = n - 3; k-- > 0;) d[k] = d[k + 2] + 2.0 * (k + 1) * c_[k + 1];
  d[0] *= 0.5;
  double scale = 2.0 / (hi_ - lo_);
  for (double& v : d) v *= scale;
  return ChebyshevSeries(lo_, hi_, std::move(d));
}

double ChebyshevSeries::integral() const {
  double s = 0.0;
  for (std::size_t j = 0; j < c_.size(); j += 2) s += c_[j] * 2.0 / (1.0 - double(j) * double(j));
  return s * 0.5 * (hi_ - lo_);
}

}  // namespace betamix
