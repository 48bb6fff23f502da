#pragma once

#include <functional>
#include <vector>

namespace betamix {

using RealFn = std::function<double(double)>;

// ln Gamma(x) for x > 0 (Lanczos, g = 607/128, reflection below 0.5).
double log_gamma(double x);

// Tail of Stirling's series: ln Gamma(z) - [(z-1/2) ln z - z + ln(2 pi)/2].
// Accurate to ~1e-17 absolute for z >= 10, falls back to log_gamma below.
double stirling_tail(double z);

// ln B(a, b), stable when one or both shapes are large.
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) and lower incomplete gamma P(a, x).
double incomplete_beta(double a, double b, double x);
double incomplete_gamma_p(double a, double x);

struct Integral {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

struct IntegrateOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
  // Interior points where f has kinks or peaks. Out-of-range entries are ignored.
  std::vector<double> breakpoints;
  // Skip the endpoint-clustering retry (used by that retry itself).
  bool allow_substitution = true;
};

// Adaptive Gauss-Kronrod (10/21). When subdivision stalls the integral is
// retried under x = a + (b-a) u^2 (3 - 2u), which pushes nodes into both
// endpoints. Throws AccuracyError if both attempts fail.
Integral integrate(const RealFn& f, double a, double b, const IntegrateOptions& opt);
// Tolerance in the max(tol, tol*|result|) sense.
Integral integrate(const RealFn& f, double a, double b, double tol = 1e-10);

// E[Z^j] for Z ~ N(0,1), and E|Z|^beta.
double normal_moment(int j);
double normal_abs_moment(double beta);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double apply(const RealFn& f) const;
};

struct MomentVector {
  std::vector<double> m;  // m[l] = integral of t^l
};

constexpr int kMaxGaussNodes = 12;

// N-point Gauss rule reproducing m[0..2N-1]. Hankel Cholesky in long double,
// then the Jacobi matrix eigenproblem. Throws DegeneracyError when a pivot
// collapses (measure has fewer than N support points numerically).
QuadratureRule gauss_from_moments(const MomentVector& m, int n);

// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Ordinary least squares y = a + b x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Fit on log-log scale; entries with non-positive y are rejected (ContractError).
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace betamix
