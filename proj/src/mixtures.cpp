#include "betamix/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "betamix/beta_kernel.hpp"
#include "betamix/errors.hpp"

namespace betamix {

DiscreteMixture::DiscreteMixture(double alpha, std::vector<Atom> atoms)
    : alpha_(alpha), atoms_(std::move(atoms)) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("DiscreteMixture: alpha must be positive");
  if (atoms_.empty()) throw ContractError("DiscreteMixture: need at least one atom");
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!(a.weight > 0.0)) throw ContractError("DiscreteMixture: weights must be positive");
    if (!(a.eps > 0.0 && a.eps < 1.0)) throw DomainError("DiscreteMixture: eps must lie in (0,1)");
    total += a.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "DiscreteMixture: weights sum to " << total;
    throw ContractError(os.str());
  }
}

DiscreteMixture DiscreteMixture::normalized(double alpha, std::vector<Atom> atoms) {
  double total = 0.0;
  for (const Atom& a : atoms) total += a.weight;
  if (!(total > 0.0)) throw ContractError("DiscreteMixture::normalized: total weight must be positive");
  for (Atom& a : atoms) a.weight /= total;
  return DiscreteMixture(alpha, std::move(atoms));
}

std::string DiscreteMixture::to_text() const {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g\n%zu\n", alpha_, atoms_.size());
  out += buf;
  for (const Atom& a : atoms_) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", a.weight, a.eps);
    out += buf;
  }
  return out;
}

DiscreteMixture DiscreteMixture::from_text(const std::string& text) {
  std::istringstream is(text);
  double alpha;
  std::size_t k;
  if (!(is >> alpha >> k)) throw ParseError("mixture text: expected alpha and k");
  std::vector<Atom> atoms(k);
  for (std::size_t i = 0; i < k; ++i)
    if (!(is >> atoms[i].weight >> atoms[i].eps)) throw ParseError("mixture text: truncated atom list");
  return DiscreteMixture(alpha, std::move(atoms));
}

double log_mix_pdf(const DiscreteMixture& m, double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("mix_pdf: x must lie in (0,1)");
  const auto& atoms = m.atoms();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    terms[j] = std::log(atoms[j].weight) + log_pdf(BetaParam(m.alpha(), atoms[j].eps), x);
    best = std::max(best, terms[j]);
  }
  if (!std::isfinite(best)) return best;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - best);
  return best + std::log(s);
}

double mix_pdf(const DiscreteMixture& m, double x) { return std::exp(log_mix_pdf(m, x)); }

const RealFn& TargetDensity::deriv(int j) const {
  if (j < 0 || j > derivative_order()) {
    std::ostringstream os;
    os << name << ": derivative of order " << j << " not available (declared " << derivative_order() << ")";
    throw DomainError(os.str());
  }
  return derivs[j];
}

double TargetDensity::sample(Rng& rng) const {
  double u = uniform01(rng);
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// smallest/largest eps with alpha K/(eps(1-eps)) <= cap, bisection in log space
double window_edge(double alpha, double x, double cap, bool left) {
  auto expo = [&](double e) { return kernel_exponent(BetaParam(alpha, e), x); };
  double far = left ? 1e-300 : 1.0 - 1e-16;
  if (!left && far <= x) return x;
  if (expo(far) <= cap) return left ? 0.0 : 1.0;
  double in = x, out = far;
  for (int it = 0; it < 60; ++it) {
    double mid = left ? std::sqrt(in * out) : 1.0 - std::sqrt((1.0 - in) * (1.0 - out));
    if (!(mid != in && mid != out)) break;
    (expo(mid) <= cap ? in : out) = mid;
  }
  return out;
}

}  // namespace

double cont_mix_pdf(double alpha, const RealFn& f, double x, const ContMixOptions& opt) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("cont_mix_pdf: x must lie in (0,1)");
  if (!(alpha > 0.0)) throw DomainError("cont_mix_pdf: alpha must be positive");
  const double cap = 745.0;
  double lo = window_edge(alpha, x, cap, true);
  double hi = window_edge(alpha, x, cap, false);
  IntegrateOptions io;
  io.rel_tol = opt.rel_tol;
  io.abs_tol = opt.abs_tol;
  io.breakpoints = opt.kinks;
  io.breakpoints.push_back(x);
  double w = x * (1.0 - x) / std::sqrt(alpha);
  for (double k : {1.0, 3.0, 8.0}) {
    io.breakpoints.push_back(x - k * w);
    io.breakpoints.push_back(x + k * w);
  }
  RealFn integrand = [&](double e) {
    if (!(e > 0.0 && e < 1.0)) return 0.0;
    double fe = f(e);
    if (fe == 0.0) return 0.0;
    return fe * pdf(BetaParam(alpha, e), x);
  };
  double v;
  try {
    v = integrate(integrand, lo, hi, io).value;
  } catch (const AccuracyError& e) {
    // Next to x = 0 or 1 the spacing of doubles limits how well 1 - eps is
    // resolved; accept a modest shortfall there.
    const double edge = std::min(x, 1.0 - x);
    const double rel = edge < 1e-6 ? 1e-3 : 1e-6;
    if (!(e.error_estimate <= std::max(rel * std::fabs(e.best_estimate), 1e-14))) throw;
    v = e.best_estimate;
  }
  return std::max(v, 0.0);
}

double cont_mix_pdf(double alpha, const TargetDensity& f, double x, double rel_tol) {
  ContMixOptions opt;
  opt.rel_tol = rel_tol;
  opt.kinks = f.kinks;
  return cont_mix_pdf(alpha, f.eval, x, opt);
}

namespace {

IntegrateOptions to_integrate(const DistanceOptions& opt) {
  IntegrateOptions io;
  io.rel_tol = opt.rel_tol;
  io.abs_tol = opt.abs_tol;
  io.breakpoints = opt.breakpoints;
  // Boundary layers of peaked kernels can hide between the first Kronrod
  // nodes; seed geometric cuts towards both endpoints.
  double h = 1.0;
  for (int k = 1; k <= opt.boundary_decades; ++k) {
    h *= 0.1;
    io.breakpoints.push_back(h);
    io.breakpoints.push_back(1.0 - h);
  }
  io.max_intervals = std::max(opt.max_intervals, 64);
  return io;
}

// The integrands carry the quadrature noise of g itself, which can sit just
// above a tight tolerance; six digits are plenty for a distance.
double distance_integral(const RealFn& h, const DistanceOptions& opt) {
  try {
    return integrate(h, 0.0, 1.0, to_integrate(opt)).value;
  } catch (const AccuracyError& e) {
    if (!(e.error_estimate <= std::max(1e-6 * std::fabs(e.best_estimate), 1e-15))) throw;
    return e.best_estimate;
  }
}

constexpr double kTiny = 1e-300;

// e^d - 1 - d
double expm1_minus(double d) {
  if (std::fabs(d) < 1e-3) return d * d * (0.5 + d * (1.0 / 6.0 + d * (1.0 / 24.0 + d / 120.0)));
  return std::expm1(d) - d;
}

// t - log1p(t)
double t_minus_log1p(double t) {
  if (std::fabs(t) < 1e-3) return t * t * (0.5 - t * (1.0 / 3.0 - t * (0.25 - t / 5.0)));
  return t - std::log1p(t);
}

}  // namespace

double l1(const RealFn& f, const RealFn& g, const DistanceOptions& opt) {
  RealFn h = [&](double x) { return std::fabs(f(x) - g(x)); };
  return distance_integral(h, opt);
}

double kl(const RealFn& f, const RealFn& g, const DistanceOptions& opt) {
  bool violated = false;
  RealFn h = [&](double x) {
    double fx = f(x), gx = g(x);
    if (fx <= 0.0) return std::max(gx, 0.0);
    if (gx <= kTiny) {
      violated = true;
      return 0.0;
    }
    double d = std::log(gx) - std::log(fx);
    if (std::fabs(d) < 0.5) return fx * t_minus_log1p(std::expm1(d));
    return gx - fx - fx * d;
  };
  double v = distance_integral(h, opt);
  if (violated) return std::numeric_limits<double>::infinity();
  return std::max(v, 0.0);
}

double kl_log(const RealFn& f, const RealFn& log_g, const DistanceOptions& opt) {
  bool violated = false;
  RealFn h = [&](double x) {
    double fx = f(x), lg = log_g(x);
    if (fx <= 0.0) return std::exp(lg);
    if (!std::isfinite(lg)) {
      violated = true;
      return 0.0;
    }
    return fx * expm1_minus(lg - std::log(fx));
  };
  double v = distance_integral(h, opt);
  if (violated) return std::numeric_limits<double>::infinity();
  return std::max(v, 0.0);
}

double v_p(const RealFn& f, const RealFn& g, double p, const DistanceOptions& opt) {
  if (!(p > 1.0)) throw DomainError("v_p: need p > 1");
  bool violated = false;
  RealFn h = [&](double x) {
    double fx = f(x);
    if (fx <= 0.0) return 0.0;
    double gx = g(x);
    if (gx <= kTiny) {
      violated = true;
      return 0.0;
    }
    return fx * std::pow(std::fabs(std::log(fx) - std::log(gx)), p);
  };
  double v = distance_integral(h, opt);
  if (violated) return std::numeric_limits<double>::infinity();
  return v;
}

double v_p_log(const RealFn& f, const RealFn& log_g, double p, const DistanceOptions& opt) {
  if (!(p > 1.0)) throw DomainError("v_p: need p > 1");
  bool violated = false;
  RealFn h = [&](double x) {
    double fx = f(x);
    if (fx <= 0.0) return 0.0;
    double lg = log_g(x);
    if (!std::isfinite(lg)) {
      violated = true;
      return 0.0;
    }
    return fx * std::pow(std::fabs(std::log(fx) - lg), p);
  };
  double v = distance_integral(h, opt);
  if (violated) return std::numeric_limits<double>::infinity();
  return v;
}

double hellinger(const RealFn& f, const RealFn& g, const DistanceOptions& opt) {
  RealFn h = [&](double x) {
    double d = std::sqrt(std::max(f(x), 0.0)) - std::sqrt(std::max(g(x), 0.0));
    return d * d;
  };
  return std::sqrt(std::max(distance_integral(h, opt), 0.0));
}

double sup_dist(const RealFn& f, const RealFn& g, const std::vector<double>& grid) {
  double s = 0.0;
  for (double x : grid) s = std::max(s, std::fabs(f(x) - g(x)));
  return s;
}

std::vector<double> chebyshev_grid(int n) {
  if (n < 1) throw ContractError("chebyshev_grid: need n >= 1");
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = 0.5 - 0.5 * std::cos(std::numbers::pi * (k + 0.5) / n);
  return x;
}

bool in_kl_ball(const TargetDensity& f0, const RealFn& f, double tau, double p,
                const DistanceOptions& opt) {
  DistanceOptions o = opt;
  o.breakpoints.insert(o.breakpoints.end(), f0.kinks.begin(), f0.kinks.end());
  double k = kl(f0.eval, f, o);
  if (!(k <= tau * tau)) return false;
  return v_p(f0.eval, f, p, o) <= std::pow(tau, p);
}

}  // namespace betamix
