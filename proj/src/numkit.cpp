#include "betamix/numkit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "betamix/errors.hpp"

namespace betamix {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Godfrey's coefficients, g = 607/128.
constexpr double kLanczosG = 607.0 / 128.0;
constexpr double kLanczos[15] = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4, .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,  -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4, .36899182659531622704e-5};

// B_{2m} / (2m (2m-1)), m = 1..8
constexpr double kStirling[8] = {1.0 / 12.0,         -1.0 / 360.0,   1.0 / 1260.0,
                                 -1.0 / 1680.0,      1.0 / 1188.0,   -691.0 / 360360.0,
                                 1.0 / 156.0,        -3617.0 / 122400.0};

// zeta(2..40), for the Taylor series of ln Gamma(1+z)
constexpr double kZeta[39] = {
    1.644934066848226436472, 1.2020569031595942854,  1.082323233711138191516,
    1.036927755143369926331, 1.017343061984449139715, 1.00834927738192282684,
    1.004077356197944339379, 1.002008392826082214418, 1.000994575127818085337,
    1.000494188604119464559, 1.000246086553308048299, 1.000122713347578489147,
    1.000061248135058704829, 1.000030588236307020494, 1.000015282259408651872,
    1.000007637197637899762, 1.00000381729326499984,  1.000001908212716553939,
    1.000000953962033872796, 1.000000476932986787806, 1.000000238450502727733,
    1.000000119219925965311, 1.000000059608189051259, 1.000000029803503514652,
    1.000000014901554828365, 1.000000007450711789835, 1.000000003725334024788,
    1.000000001862659723513, 1.00000000093132743242,  1.000000000465662906503,
    1.000000000232831183368, 1.000000000116415501727, 1.000000000058207720879,
    1.000000000029103850445, 1.000000000014551921891, 1.000000000007275959835,
    1.000000000003637979547, 1.00000000000181898965,  1.000000000000909494784};
constexpr double kEulerGamma = 0.5772156649015328606065;

// ln Gamma(1+z) for |z| <= 1/4; keeps relative accuracy at the roots 1 and 2
double log_gamma_1p(double z) {
  double acc = 0.0;
  for (int k = 40; k >= 2; --k) acc = (acc + (k % 2 == 0 ? 1.0 : -1.0) * kZeta[k - 2] / k) * z;
  return (acc - kEulerGamma) * z;
}

double lanczos(double x) {
  double z = x - 1.0;
  double acc = kLanczos[0];
  for (int k = 1; k < 15; ++k) acc += kLanczos[k] / (z + k);
  double t = z + kLanczosG + 0.5;
  return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(acc);
}

double stirling_series(double z) {
  double zi = 1.0 / z, z2 = zi * zi;
  double acc = 0.0;
  for (int m = 7; m >= 0; --m) acc = acc * z2 + kStirling[m];
  return acc * zi;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << "log_gamma: argument must be positive and finite, got " << x;
    throw DomainError(os.str());
  }
  if (x == 1.0 || x == 2.0) return 0.0;
  if (std::fabs(x - 1.0) <= 0.25) return log_gamma_1p(x - 1.0);
  if (std::fabs(x - 2.0) <= 0.25) return std::log1p(x - 2.0) + log_gamma_1p(x - 2.0);
  if (x < 0.5) {
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  if (x >= 10.0) return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_series(x);
  return lanczos(x);
}

double stirling_tail(double z) {
  if (!(z > 0.0)) throw DomainError("stirling_tail: argument must be positive");
  if (z >= 10.0) return stirling_series(z);
  return log_gamma(z) - ((z - 0.5) * std::log(z) - z + kHalfLog2Pi);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("log_beta: shapes must be positive and finite");
  double p = std::min(a, b), q = std::max(a, b);
  double s = p + q;
  if (p >= 10.0) {
    double corr = stirling_series(p) + stirling_series(q) - stirling_series(s);
    return -0.5 * std::log(q) + kHalfLog2Pi + corr + (p - 0.5) * std::log(p / s) +
           q * std::log1p(-p / s);
  }
  if (q >= 10.0) {
    double corr = stirling_series(q) - stirling_series(s);
    return log_gamma(p) + corr + p - p * std::log(s) + (q - 0.5) * std::log1p(-p / s);
  }
  return log_gamma(p) + log_gamma(q) - log_gamma(s);
}

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) return h;
  }
  throw AccuracyError("incomplete_beta: continued fraction did not converge", h, 0.0);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: shapes must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double incomplete_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("incomplete_gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  double gln = log_gamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 100000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// ---------------------------------------------------------------- quadrature

namespace {

constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208931236016, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk21(const RealFn& f, double a, double b) {
  const double eps = std::numeric_limits<double>::epsilon();
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  // nodes of very short intervals can round onto the endpoints
  const double in_lo = std::nextafter(a, b), in_hi = std::nextafter(b, a);
  auto at = [&](double x) { return f(std::clamp(x, in_lo, in_hi)); };
  double fv1[10], fv2[10];
  double fc = at(c);
  double resk = fc * kWgk[10], resg = 0.0, resabs = std::fabs(resk);
  for (int j = 0; j < 10; ++j) {
    double dx = h * kXgk[j];
    double f1 = at(c - dx), f2 = at(c + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  double reskh = resk * 0.5;
  double resasc = kWgk[10] * std::fabs(fc - reskh);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  double result = resk * h;
  resabs *= std::fabs(h);
  resasc *= std::fabs(h);
  double err = std::fabs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(eps * 50.0 * resabs, err);
  if (!std::isfinite(result)) err = std::numeric_limits<double>::infinity();
  return {a, b, result, err};
}

struct AdaptiveOutcome {
  Integral integral;
  bool converged;
};

AdaptiveOutcome adaptive_gk(const RealFn& f, double a, double b, const IntegrateOptions& opt) {
  std::vector<double> cuts{a};
  std::vector<double> bp = opt.breakpoints;
  std::sort(bp.begin(), bp.end());
  for (double p : bp)
    if (p > cuts.back() && p < b) cuts.push_back(p);
  cuts.push_back(b);

  std::priority_queue<Segment> heap;
  double total = 0.0, total_err = 0.0;
  int evals = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Segment s = gk21(f, cuts[i], cuts[i + 1]);
    evals += 21;
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::fabs(total)); };
  bool stuck = false;
  while (total_err > tolerance() && static_cast<int>(heap.size()) < opt.max_intervals) {
    Segment worst = heap.top();
    double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 8.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(std::fabs(worst.a), std::fabs(worst.b))) {
      stuck = true;
      break;
    }
    heap.pop();
    Segment l = gk21(f, worst.a, mid), r = gk21(f, mid, worst.b);
    evals += 42;
    total += l.value + r.value - worst.value;
    total_err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    // resum occasionally to keep the running totals honest
    if (heap.size() % 256 == 0) {
      auto copy = heap;
      total = 0.0;
      total_err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_err += copy.top().error;
        copy.pop();
      }
    }
  }
  {
    auto copy = heap;
    total = 0.0;
    total_err = 0.0;
    while (!copy.empty()) {
      total += copy.top().value;
      total_err += copy.top().error;
      copy.pop();
    }
  }
  bool ok = !stuck && std::isfinite(total) && total_err <= tolerance();
  return {{total, total_err, evals}, ok};
}

}  // namespace

Integral integrate(const RealFn& f, double a, double b, const IntegrateOptions& opt) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw ContractError("integrate: need finite a < b");
  AdaptiveOutcome first = adaptive_gk(f, a, b, opt);
  if (first.converged) return first.integral;
  if (!opt.allow_substitution)
    throw AccuracyError("integrate: subdivision budget exhausted", first.integral.value,
                        first.integral.error);

  // x = a + w phi(u), phi(u) = u^2 (3 - 2u), phi'(u) = 6u(1-u)
  const double w = b - a;
  auto phi = [](double u) { return u * u * (3.0 - 2.0 * u); };
  IntegrateOptions sub = opt;
  sub.allow_substitution = false;
  sub.breakpoints.clear();
  for (double p : opt.breakpoints) {
    if (!(p > a && p < b)) continue;
    double target = (p - a) / w, lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (phi(mid) < target ? lo : hi) = mid;
    }
    sub.breakpoints.push_back(0.5 * (lo + hi));
  }
  RealFn g = [&](double u) {
    double jac = 6.0 * u * (1.0 - u) * w;
    if (jac == 0.0) return 0.0;
    double x = a + w * phi(u);
    if (x <= a || x >= b) return 0.0;
    return f(x) * jac;
  };
  AdaptiveOutcome second = adaptive_gk(g, 0.0, 1.0, sub);
  second.integral.evaluations += first.integral.evaluations;
  if (second.converged) return second.integral;
  const Integral& best = second.integral.error < first.integral.error ? second.integral : first.integral;
  std::ostringstream os;
  os << "integrate: no convergence on [" << a << ", " << b << "], best " << best.value << " +- "
     << best.error;
  throw AccuracyError(os.str(), best.value, best.error);
}

Integral integrate(const RealFn& f, double a, double b, double tol) {
  IntegrateOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = tol;
  return integrate(f, a, b, opt);
}

double normal_moment(int j) {
  if (j < 0) throw DomainError("normal_moment: order must be nonnegative");
  if (j % 2 == 1) return 0.0;
  double acc = 1.0;
  for (int k = j - 1; k > 1; k -= 2) acc *= k;
  return acc;
}

double normal_abs_moment(double beta) {
  if (!(beta > 0.0)) throw DomainError("normal_abs_moment: beta must be positive");
  return std::exp(0.5 * beta * std::numbers::ln2 + log_gamma(0.5 * (beta + 1.0))) /
         std::sqrt(std::numbers::pi);
}

double QuadratureRule::apply(const RealFn& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
  return acc;
}

QuadratureRule gauss_from_moments(const MomentVector& mv, int n) {
  const auto& m = mv.m;
  if (n < 1 || n > kMaxGaussNodes) throw ContractError("gauss_from_moments: need 1 <= N <= 12");
  if (static_cast<int>(m.size()) < 2 * n)
    throw ContractError("gauss_from_moments: need at least 2N moments");
  if (!(m[0] > 0.0)) throw DomainError("gauss_from_moments: m[0] must be positive");
  if (n == 1) return {{m[1] / m[0]}, {m[0]}};

  using ld = long double;
  // upper Cholesky factor of the Hankel matrix, rows 0..n-1, columns 0..n
  std::vector<std::vector<ld>> r(n, std::vector<ld>(n + 1, 0.0L));
  for (int i = 0; i < n; ++i) {
    ld d = m[2 * i];
    for (int k = 0; k < i; ++k) d -= r[k][i] * r[k][i];
    if (!(d > 1e-14L * std::fabs(static_cast<ld>(m[2 * i])))) {
      std::ostringstream os;
      os << "gauss_from_moments: Hankel pivot " << i << " collapsed; try N = " << std::max(1, i);
      throw DegeneracyError(os.str(), std::max(1, i));
    }
    r[i][i] = std::sqrt(d);
    for (int j = i + 1; j <= n; ++j) {
      ld s = m[i + j];
      for (int k = 0; k < i; ++k) s -= r[k][i] * r[k][j];
      r[i][j] = s / r[i][i];
    }
  }
  Eigen::VectorXd diag(n), sub(n - 1);
  for (int j = 0; j < n; ++j) {
    ld v = r[j][j + 1] / r[j][j];
    if (j > 0) v -= r[j - 1][j] / r[j - 1][j - 1];
    diag(j) = static_cast<double>(v);
    if (j + 1 < n) sub(j) = static_cast<double>(r[j + 1][j + 1] / r[j][j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw DegeneracyError("gauss_from_moments: eigensolver failed", n - 1);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i) {
    double v0 = es.eigenvectors()(0, i);
    double w = m[0] * v0 * v0;
    if (!(w > 0.0)) throw DegeneracyError("gauss_from_moments: zero weight", n - 1);
    if (i > 0 && !(es.eigenvalues()(i) > rule.nodes.back()))
      throw DegeneracyError("gauss_from_moments: coincident nodes", n - 1);
    rule.nodes.push_back(es.eigenvalues()(i));
    rule.weights.push_back(w);
  }
  return rule;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ContractError("gauss_legendre: need n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ContractError("fit_line: x values are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - fit.intercept - fit.slope * x[i];
      ssr += e * e;
    }
    fit.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ContractError("fit_loglog: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

}  // namespace betamix
