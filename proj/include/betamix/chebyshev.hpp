#pragma once

#include <vector>

#include "betamix/numkit.hpp"

namespace betamix {

// Chebyshev expansion sum c_j T_j(t) on [lo, hi], t the affine image of x.
class ChebyshevSeries {
 public:
  ChebyshevSeries() = default;
  ChebyshevSeries(double lo, double hi, std::vector<double> coeffs);

  // Interpolate at the n Chebyshev points of the first kind.
  static ChebyshevSeries interpolate(const RealFn& f, double lo, double hi, int n);
  // Double n from 17 until the trailing coefficients fall below tol * max|c|.
  static ChebyshevSeries adaptive(const RealFn& f, double lo, double hi, double tol = 1e-13,
                                  int max_n = 1025);
  // Chebyshev points of the first kind mapped to [lo, hi], ascending.
  static std::vector<double> points(double lo, double hi, int n);

  double operator()(double x) const;
  ChebyshevSeries derivative() const;
  double integral() const;  // over [lo, hi]

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& coeffs() const { return c_; }

 private:
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<double> c_;
};

}  // namespace betamix
