#pragma once

#include <vector>

#include "betamix/kv_config.hpp"
#include "betamix/mixtures.hpp"
#include "betamix/rng.hpp"

namespace betamix {

enum class KPenalty { ConstantOne, LogK };

struct GammaParams {
  double shape = 2.0;
  double rate = 0.1;
};

struct AdaptivePriorConfig {
  double a_k = 1.0;  // p(k) proportional to exp(-a_k k L(k))
  KPenalty L_mode = KPenalty::LogK;
  double T = 1.0;               // pi_e = Beta(T+1, T+1)
  double dirichlet_conc = 1.0;  // symmetric Dirichlet on the weights
  GammaParams sqrt_alpha;       // sqrt(alpha) ~ Gamma(shape, rate)
  int k_max = 1000;             // p(k) is normalized over 1..k_max

  void validate() const;
};

struct DPPriorConfig {
  double mass = 1.0;  // total mass of the base measure
  double T1 = 1.0;    // base measure Beta(T1+1, T1+1)
  double t = 0.5;     // alpha >= n^t
  double n = 1.0;
  GammaParams sqrt_alpha{2.0, 1.0};

  void validate() const;
  double alpha_floor() const;  // n^t
};

AdaptivePriorConfig adaptive_prior_from(const KvConfig& cfg);
DPPriorConfig dp_prior_from(const KvConfig& cfg, double n);

// Pieces of the adaptive prior, all log densities.
double log_p_k(const AdaptivePriorConfig& cfg, int k);
double log_dirichlet(const std::vector<double>& w, double conc);
double log_pi_eps(double eps, double T);
// Density of alpha when sqrt(alpha) ~ Gamma(shape, rate).
double log_pi_alpha(double alpha, const GammaParams& g);

double log_prior_adaptive(const AdaptivePriorConfig& cfg, int k, const std::vector<double>& weights,
                          const std::vector<double>& eps, double alpha);

struct AdaptiveDraw {
  int k;
  DiscreteMixture mixture;
};

AdaptiveDraw sample_adaptive(const AdaptivePriorConfig& cfg, Rng& rng);
int sample_k(const AdaptivePriorConfig& cfg, Rng& rng);

// Truncated stick-breaking; the last stick takes the leftover mass.
DiscreteMixture sample_dp(const DPPriorConfig& cfg, Rng& rng, int truncation = 200);
// sqrt(alpha) = n^{t/2} + Gamma(shape, rate), so alpha >= n^t.
double sample_dp_alpha(const DPPriorConfig& cfg, Rng& rng);
double log_pi_alpha_dp(const DPPriorConfig& cfg, double alpha);

enum class RateKind {
  Adaptive,           // adaptive prior, uses L_mode
  Dirichlet,          // Dirichlet process prior, uses t
  DeterministicAlpha  // fixed alpha_n
};

struct RateParams {
  KPenalty L_mode = KPenalty::LogK;
  double t = 0.5;
  double alpha_n = 0.0;  // 0 selects n^{2/(2b+1)} (log n)^{-3/(2b+1)}
};

// tau_n / tau_0.
double rate_tau(double beta, double n, RateKind kind, const RateParams& p = {});
double optimal_alpha_n(double beta, double n);
// Exponent of n in the rate, -beta/(2 beta + 1) or the Dirichlet branch.
double rate_exponent(double beta, RateKind kind, const RateParams& p = {});

}  // namespace betamix
