#pragma once

#include <vector>

namespace betamix {

struct ShapePair {
  double a;
  double b;
};

// Beta kernel with scale alpha and mean eps: shapes a = alpha/(1-eps), b = alpha/eps.
class BetaParam {
 public:
  BetaParam(double alpha, double eps);
  double alpha() const { return alpha_; }
  double eps() const { return eps_; }

 private:
  double alpha_;
  double eps_;
};

ShapePair to_shape(const BetaParam& p);

double log_pdf(const BetaParam& p, double x);
double pdf(const BetaParam& p, double x);

// Bernoulli KL K(eps, x), evaluated without cancellation near eps = x.
double bern_kl(double eps, double x);

// alpha K(eps, x) / (eps (1 - eps)): the exact exponent of the kernel.
double kernel_exponent(const BetaParam& p, double x);

// log of the Stirling bracket, S(A) - S(a) - S(b) with A = a + b and S the
// tail of Stirling's series. Exact (no truncation).
double stirling_log_bracket(const BetaParam& p);
// Coefficients b_1..b_order of exp(S(A) - S(a) - S(b)) = 1 + sum b_j / alpha^j.
std::vector<double> stirling_bracket_coeffs(double eps, int order);
// 1 + sum_{j <= order} b_j / alpha^j.
double stirling_bracket(const BetaParam& p, int order);

// sqrt(alpha) / (sqrt(2 pi) x (1-x)) exp(-alpha K / (eps(1-eps))) times the
// bracket truncated at stirling_order. Requires a, b and a + b all above 1.
double laplace_pdf(const BetaParam& p, double x, int stirling_order);

// Expansion of K(eps, x)/(eps(1-eps)) in y = (x - eps)/(x(1-x)):
//   y^2/2 [1 + y (c + sum_{l>=1} higher[l-1] y^l)]
struct ExponentSeries {
  double x = 0.0;
  double leading = 0.0;         // 1/(2 x^2 (1-x)^2), coefficient of (eps - x)^2
  double c = 0.0;               // cubic coefficient C(x)
  std::vector<double> higher;   // C_1 .. C_{order-3}
  std::vector<double> raw;      // raw[n] = coefficient of y^n, n = 0..order

  // Q(y) = sum_{l>=1} C_l y^l
  double q(double y) const;
};

ExponentSeries exponent_taylor(double x, int order);

struct LocalExpansionOptions {
  double c0 = 1.0;          // window constant
  int stirling_order = 2;
};

// Polynomial-times-Gaussian form of the kernel valid when
// alpha |x - eps|^3 <= c0 x^3 (1-x)^3. k1 fixes the Taylor order of the
// exponent, k2 the number of terms kept from exp of the cubic-and-higher part.
double local_expanded_pdf(const BetaParam& p, double x, int k1, int k2,
                          const LocalExpansionOptions& opt = {});

}  // namespace betamix
