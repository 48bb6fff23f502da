#include "betamix/beta_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "betamix/errors.hpp"
#include "betamix/numkit.hpp"

namespace betamix {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kStirling[8] = {1.0 / 12.0,    -1.0 / 360.0,      1.0 / 1260.0, -1.0 / 1680.0,
                                 1.0 / 1188.0,  -691.0 / 360360.0, 1.0 / 156.0,  -3617.0 / 122400.0};

// t - log1p(t), series near zero
double t_minus_log1p(double t) {
  if (std::fabs(t) < 0.1) {
    double acc = 0.0, p = t * t;
    for (int k = 2; k < 22; ++k) {
      acc += (k % 2 == 0 ? 1.0 : -1.0) * p / k;
      p *= t;
    }
    return acc;
  }
  return t - std::log1p(t);
}

void require_unit(double x, const char* who) {
  if (!(x > 0.0 && x < 1.0)) {
    std::ostringstream os;
    os << who << ": x must lie in (0,1), got " << x;
    throw DomainError(os.str());
  }
}

}  // namespace

BetaParam::BetaParam(double alpha, double eps) : alpha_(alpha), eps_(eps) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("BetaParam: alpha must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("BetaParam: eps must lie in (0,1)");
}

ShapePair to_shape(const BetaParam& p) {
  return {p.alpha() / (1.0 - p.eps()), p.alpha() / p.eps()};
}

double bern_kl(double eps, double x) {
  if (!(eps > 0.0 && eps < 1.0) || !(x > 0.0 && x < 1.0))
    throw DomainError("bern_kl: arguments must lie in (0,1)");
  double r1 = (x - eps) / eps;
  double r2 = (eps - x) / (1.0 - eps);
  return eps * t_minus_log1p(r1) + (1.0 - eps) * t_minus_log1p(r2);
}

double kernel_exponent(const BetaParam& p, double x) {
  return p.alpha() * bern_kl(p.eps(), x) / (p.eps() * (1.0 - p.eps()));
}

double stirling_log_bracket(const BetaParam& p) {
  auto [a, b] = to_shape(p);
  return stirling_tail(a + b) - stirling_tail(a) - stirling_tail(b);
}

double log_pdf(const BetaParam& p, double x) {
  require_unit(x, "log_pdf");
  auto [a, b] = to_shape(p);
  if (std::min(a, b) >= 10.0) {
    // exact rewrite around the mean; avoids cancelling (a-1) log x against log B
    return 0.5 * std::log(p.alpha()) - kHalfLog2Pi - std::log(x) - std::log1p(-x) -
           kernel_exponent(p, x) + stirling_log_bracket(p);
  }
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
}

double pdf(const BetaParam& p, double x) { return std::exp(log_pdf(p, x)); }

std::vector<double> stirling_bracket_coeffs(double eps, int order) {
  if (order < 0 || order > 15) throw DomainError("stirling_bracket_coeffs: order must be in [0,15]");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("stirling_bracket_coeffs: eps must lie in (0,1)");
  // log-bracket as a series in 1/alpha: d_j nonzero for odd j only
  std::vector<double> d(order + 1, 0.0);
  double u = eps * (1.0 - eps);
  for (int j = 1; j <= order; j += 2) {
    int m = (j + 1) / 2;
    d[j] = kStirling[m - 1] * (std::pow(u, j) - std::pow(1.0 - eps, j) - std::pow(eps, j));
  }
  // exponentiate: e_n = (1/n) sum_k k d_k e_{n-k}
  std::vector<double> e(order + 1, 0.0);
  e[0] = 1.0;
  for (int n = 1; n <= order; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += k * d[k] * e[n - k];
    e[n] = s / n;
  }
  return std::vector<double>(e.begin() + 1, e.end());
}

double stirling_bracket(const BetaParam& p, int order) {
  if (order == 0) return 1.0;
  auto b = stirling_bracket_coeffs(p.eps(), order);
  double acc = 0.0, inv = 1.0 / p.alpha();
  for (int j = order; j >= 1; --j) acc = (acc + b[j - 1]) * inv;
  return 1.0 + acc;
}

double laplace_pdf(const BetaParam& p, double x, int stirling_order) {
  require_unit(x, "laplace_pdf");
  auto [a, b] = to_shape(p);
  if (!(a > 1.0 && b > 1.0 && a + b > 1.0))
    throw DomainError("laplace_pdf: alpha too small, Stirling arguments must exceed 1");
  if (stirling_order < 0) throw DomainError("laplace_pdf: stirling_order must be nonnegative");
  double pref = std::sqrt(p.alpha()) / (std::sqrt(2.0 * std::numbers::pi) * x * (1.0 - x));
  return pref * std::exp(-kernel_exponent(p, x)) * stirling_bracket(p, stirling_order);
}

double ExponentSeries::q(double y) const {
  double acc = 0.0;
  for (std::size_t l = higher.size(); l-- > 0;) acc = (acc + higher[l]) * y;
  return acc;
}

ExponentSeries exponent_taylor(double x, int order) {
  if (order < 3 || order > 10) throw DomainError("exponent_taylor: order must be in [3,10]");
  if (!(x >= 1e-4 && x <= 1.0 - 1e-4))
    throw DomainError("exponent_taylor: x within 1e-4 of the boundary");
  const double s = x * (1.0 - x);
  // derivatives in eps at eps = x of K(eps,x) and w(eps) = 1/eps + 1/(1-eps)
  std::vector<double> fact(order + 1, 1.0);
  for (int i = 1; i <= order; ++i) fact[i] = fact[i - 1] * i;
  auto kder = [&](int n) {
    if (n < 2) return 0.0;
    double f = fact[n - 2];
    return (n % 2 == 0 ? 1.0 : -1.0) * f / std::pow(x, n - 1) + f / std::pow(1.0 - x, n - 1);
  };
  auto wder = [&](int m) {
    double f = fact[m];
    return (m % 2 == 0 ? 1.0 : -1.0) * f / std::pow(x, m + 1) + f / std::pow(1.0 - x, m + 1);
  };
  ExponentSeries out;
  out.x = x;
  out.leading = 1.0 / (2.0 * s * s);
  out.raw.assign(order + 1, 0.0);
  for (int n = 2; n <= order; ++n) {
    double phi = 0.0;
    double binom = 1.0;  // C(n, k)
    for (int k = 0; k <= n; ++k) {
      if (k >= 2) phi += binom * kder(k) * wder(n - k);
      binom = binom * (n - k) / (k + 1);
    }
    // (eps - x)^n = (-s)^n y^n
    out.raw[n] = phi * std::pow(-s, n) / fact[n];
  }
  out.c = 2.0 * out.raw[3];
  for (int n = 4; n <= order; ++n) out.higher.push_back(2.0 * out.raw[n]);
  return out;
}

double local_expanded_pdf(const BetaParam& p, double x, int k1, int k2,
                          const LocalExpansionOptions& opt) {
  require_unit(x, "local_expanded_pdf");
  if (k2 < 0 || k1 < 3 || k1 < 3 * k2 || k1 > 10)
    throw DomainError("local_expanded_pdf: need k2 >= 0, 3*k2 <= k1, 3 <= k1 <= 10");
  const double s = x * (1.0 - x);
  const double d = x - p.eps();
  if (!(p.alpha() * std::fabs(d * d * d) <= opt.c0 * s * s * s)) {
    std::ostringstream os;
    os << "local_expanded_pdf: window violated, alpha |x-eps|^3 = " << p.alpha() * std::fabs(d * d * d)
       << " > c0 x^3 (1-x)^3 = " << opt.c0 * s * s * s;
    throw DomainError(os.str());
  }
  ExponentSeries es = exponent_taylor(x, k1);
  const double y = d / s;
  // exp(-alpha y^3 (C + Q) / 2), Taylor to order k2
  double u = -0.5 * p.alpha() * y * y * y * (es.c + es.q(y));
  double term = 1.0, acc = 1.0;
  for (int j = 1; j <= k2; ++j) {
    term *= u / j;
    acc += term;
  }
  double pref = std::sqrt(p.alpha()) / (std::sqrt(2.0 * std::numbers::pi) * s);
  return pref * std::exp(-0.5 * p.alpha() * y * y) * acc * stirling_bracket(p, opt.stirling_order);
}

}  // namespace betamix
