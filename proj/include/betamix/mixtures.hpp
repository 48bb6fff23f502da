#pragma once

#include <string>
#include <vector>

#include "betamix/numkit.hpp"
#include "betamix/rng.hpp"

namespace betamix {

struct Atom {
  double weight;
  double eps;
};

// P = sum p_j delta(eps_j) with a shared scale alpha.
class DiscreteMixture {
 public:
  DiscreteMixture() = default;  // empty placeholder, size() == 0
  DiscreteMixture(double alpha, std::vector<Atom> atoms);
  // Rescales weights to sum to one before validating.
  static DiscreteMixture normalized(double alpha, std::vector<Atom> atoms);

  double alpha() const { return alpha_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  // alpha, k, then k lines "weight eps", 17 significant digits.
  std::string to_text() const;
  static DiscreteMixture from_text(const std::string& text);

 private:
  double alpha_ = 1.0;
  std::vector<Atom> atoms_;
};

double mix_pdf(const DiscreteMixture& m, double x);
double log_mix_pdf(const DiscreteMixture& m, double x);

struct HolderInfo {
  double beta = 1.0;
  double L = 1.0;
};

struct BoundaryOrders {
  int k0 = 0;
  int k1 = 0;
};

// Density on (0,1) with derivatives, smoothness metadata and an exact sampler.
struct TargetDensity {
  std::string name;
  RealFn eval;
  std::vector<RealFn> derivs;  // derivs[j] is the j-th derivative, derivs[0] == eval
  HolderInfo holder;
  BoundaryOrders boundary;
  RealFn cdf;
  std::vector<double> kinks;   // interior points where f is not smooth

  double operator()(double x) const { return eval(x); }
  int derivative_order() const { return static_cast<int>(derivs.size()) - 1; }
  const RealFn& deriv(int j) const;
  // Inverse CDF by bisection to 1e-12.
  double sample(Rng& rng) const;
};

struct ContMixOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-300;
  std::vector<double> kinks;  // kinks of the mixing density in eps
};

// integral_0^1 f(eps) g_{alpha,eps}(x) d eps
double cont_mix_pdf(double alpha, const RealFn& f, double x, const ContMixOptions& opt = {});
double cont_mix_pdf(double alpha, const TargetDensity& f, double x, double rel_tol = 1e-9);

struct DistanceOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  std::vector<double> breakpoints;
  int max_intervals = 4000;
  // Cuts at 10^-k and 1 - 10^-k for k = 1..boundary_decades. Discrete
  // mixtures need them; smooth continuous mixtures do fine with 0.
  int boundary_decades = 12;
};

// Values above this are "effectively infinite" (support violation).
constexpr double kDivergenceInfinite = 1e6;
inline bool is_infinite_divergence(double v) { return !(v <= kDivergenceInfinite); }

double l1(const RealFn& f, const RealFn& g, const DistanceOptions& opt = {});
// Integrand f log(f/g) + g - f: nonnegative, equals KL for normalized pairs.
double kl(const RealFn& f, const RealFn& g, const DistanceOptions& opt = {});
double v_p(const RealFn& f, const RealFn& g, double p, const DistanceOptions& opt = {});
// Same divergences with g supplied as log g; no underflow where g is tiny.
double kl_log(const RealFn& f, const RealFn& log_g, const DistanceOptions& opt = {});
double v_p_log(const RealFn& f, const RealFn& log_g, double p, const DistanceOptions& opt = {});
double hellinger(const RealFn& f, const RealFn& g, const DistanceOptions& opt = {});
double sup_dist(const RealFn& f, const RealFn& g, const std::vector<double>& grid);
// n Chebyshev points of the first kind in (0,1), ascending.
std::vector<double> chebyshev_grid(int n = 4097);

bool in_kl_ball(const TargetDensity& f0, const RealFn& f, double tau, double p,
                const DistanceOptions& opt = {});

}  // namespace betamix
