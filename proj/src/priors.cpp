#include "betamix/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "betamix/errors.hpp"
#include "betamix/numkit.hpp"

namespace betamix {

namespace {

double penalty_L(KPenalty mode, int k) { return mode == KPenalty::ConstantOne ? 1.0 : std::log(static_cast<double>(k)); }

double log_p_k_unnorm(const AdaptivePriorConfig& cfg, int k) { return -cfg.a_k * k * penalty_L(cfg.L_mode, k); }

double log_k_normalizer(const AdaptivePriorConfig& cfg) {
  // Terms decrease in k for both penalties, so stop once they are negligible.
  double m = log_p_k_unnorm(cfg, 1), s = 0.0;
  for (int k = 1; k <= cfg.k_max; ++k) {
    const double t = log_p_k_unnorm(cfg, k) - m;
    if (t < -50.0 && k > 2) break;
    s += std::exp(t);
  }
  return m + std::log(s);
}

double log_gamma_pdf(double x, const GammaParams& g) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return g.shape * std::log(g.rate) - log_gamma(g.shape) + (g.shape - 1.0) * std::log(x) - g.rate * x;
}

KPenalty parse_penalty(const std::string& s) {
  if (s == "log-k") return KPenalty::LogK;
  if (s == "constant-one") return KPenalty::ConstantOne;
  throw ParseError("config: L_mode must be log-k or constant-one, got " + s);
}

}  // namespace

void AdaptivePriorConfig::validate() const {
  if (!(a_k > 0.0)) throw DomainError("adaptive prior: a_k must be positive");
  if (!(T >= 1.0)) throw DomainError("adaptive prior: T must be at least 1");
  if (!(dirichlet_conc > 0.0)) throw DomainError("adaptive prior: dirichlet_conc must be positive");
  if (!(sqrt_alpha.shape >= 1.0) || !(sqrt_alpha.rate > 0.0))
    throw DomainError("adaptive prior: sqrt(alpha) Gamma needs shape >= 1 and rate > 0");
  if (k_max < 1) throw DomainError("adaptive prior: k_max must be at least 1");
}

void DPPriorConfig::validate() const {
  if (!(mass > 0.0)) throw DomainError("dp prior: mass must be positive");
  if (!(T1 >= 0.0)) throw DomainError("dp prior: T1 must be nonnegative");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("dp prior: t must lie in (0,1)");
  if (!(n >= 1.0)) throw DomainError("dp prior: n must be at least 1");
  if (!(sqrt_alpha.shape > 0.0) || !(sqrt_alpha.rate > 0.0))
    throw DomainError("dp prior: sqrt(alpha) Gamma needs positive shape and rate");
}

double DPPriorConfig::alpha_floor() const { return std::pow(n, t); }

AdaptivePriorConfig adaptive_prior_from(const KvConfig& cfg) {
  AdaptivePriorConfig c;
  c.a_k = cfg.get_double("a_k", c.a_k);
  c.L_mode = parse_penalty(cfg.get_string("L_mode", "log-k"));
  c.T = cfg.get_double("T", c.T);
  c.dirichlet_conc = cfg.get_double("dirichlet_conc", c.dirichlet_conc);
  c.sqrt_alpha.shape = cfg.get_double("sqrt_alpha_shape", c.sqrt_alpha.shape);
  c.sqrt_alpha.rate = cfg.get_double("sqrt_alpha_rate", c.sqrt_alpha.rate);
  c.k_max = static_cast<int>(cfg.get_int("k_max", c.k_max));
  c.validate();
  return c;
}

DPPriorConfig dp_prior_from(const KvConfig& cfg, double n) {
  DPPriorConfig c;
  c.mass = cfg.get_double("dp_mass", c.mass);
  c.T1 = cfg.get_double("T1", c.T1);
  c.t = cfg.get_double("t", c.t);
  c.n = n;
  c.sqrt_alpha.shape = cfg.get_double("dp_sqrt_alpha_shape", c.sqrt_alpha.shape);
  c.sqrt_alpha.rate = cfg.get_double("dp_sqrt_alpha_rate", c.sqrt_alpha.rate);
  c.validate();
  return c;
}

double log_p_k(const AdaptivePriorConfig& cfg, int k) {
  if (k < 1 || k > cfg.k_max) return -std::numeric_limits<double>::infinity();
  return log_p_k_unnorm(cfg, k) - log_k_normalizer(cfg);
}

double log_dirichlet(const std::vector<double>& w, double conc) {
  const double k = static_cast<double>(w.size());
  if (w.empty()) throw ContractError("log_dirichlet: empty weight vector");
  double s = log_gamma(k * conc) - k * log_gamma(conc);
  for (double x : w) {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    s += (conc - 1.0) * std::log(x);
  }
  return s;
}

double log_pi_eps(double eps, double T) {
  if (!(eps > 0.0 && eps < 1.0)) return -std::numeric_limits<double>::infinity();
  return T * (std::log(eps) + std::log1p(-eps)) - log_beta(T + 1.0, T + 1.0);
}

double log_pi_alpha(double alpha, const GammaParams& g) {
  if (!(alpha > 0.0)) return -std::numeric_limits<double>::infinity();
  const double s = std::sqrt(alpha);
  return log_gamma_pdf(s, g) - std::log(2.0 * s);
}

double log_prior_adaptive(const AdaptivePriorConfig& cfg, int k, const std::vector<double>& weights,
                          const std::vector<double>& eps, double alpha) {
  if (k < 1 || static_cast<int>(weights.size()) != k || static_cast<int>(eps.size()) != k)
    throw ContractError("log_prior_adaptive: k, weights and eps must agree");
  double s = log_p_k(cfg, k) + log_dirichlet(weights, cfg.dirichlet_conc) + log_pi_alpha(alpha, cfg.sqrt_alpha);
  for (double e : eps) s += log_pi_eps(e, cfg.T);
  return s;
}

int sample_k(const AdaptivePriorConfig& cfg, Rng& rng) {
  const double logz = log_k_normalizer(cfg);
  double u = uniform01(rng);
  for (int k = 1; k <= cfg.k_max; ++k) {
    u -= std::exp(log_p_k_unnorm(cfg, k) - logz);
    if (u <= 0.0) return k;
  }
  return 1;  // only reachable through rounding in the tail
}

AdaptiveDraw sample_adaptive(const AdaptivePriorConfig& cfg, Rng& rng) {
  cfg.validate();
  const int k = sample_k(cfg, rng);
  std::vector<Atom> atoms(k);
  for (auto& a : atoms) {
    a.weight = gamma_draw(rng, cfg.dirichlet_conc, 1.0);
    a.eps = beta_draw(rng, cfg.T + 1.0, cfg.T + 1.0);
  }
  // A Dirichlet draw with tiny concentration can underflow every gamma.
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (!(total > 0.0))
    for (auto& a : atoms) a.weight = 1.0;
  std::erase_if(atoms, [](const Atom& a) { return !(a.weight > 0.0); });
  const double s = gamma_draw(rng, cfg.sqrt_alpha.shape, cfg.sqrt_alpha.rate);
  return {k, DiscreteMixture::normalized(s * s, std::move(atoms))};
}

double sample_dp_alpha(const DPPriorConfig& cfg, Rng& rng) {
  const double s = std::sqrt(cfg.alpha_floor()) + gamma_draw(rng, cfg.sqrt_alpha.shape, cfg.sqrt_alpha.rate);
  return s * s;
}

double log_pi_alpha_dp(const DPPriorConfig& cfg, double alpha) {
  if (!(alpha > cfg.alpha_floor())) return -std::numeric_limits<double>::infinity();
  const double s = std::sqrt(alpha);
  return log_gamma_pdf(s - std::sqrt(cfg.alpha_floor()), cfg.sqrt_alpha) - std::log(2.0 * s);
}

DiscreteMixture sample_dp(const DPPriorConfig& cfg, Rng& rng, int truncation) {
  cfg.validate();
  if (truncation < 1) throw ContractError("sample_dp: truncation must be positive");
  // E[leftover after K sticks] = (mass/(1+mass))^K
  const double leftover = truncation * std::log(cfg.mass / (1.0 + cfg.mass));
  if (!(leftover < std::log(1e-10))) throw BudgetError("sample_dp: truncation too small for the DP mass");
  std::vector<Atom> atoms;
  atoms.reserve(truncation);
  double rest = 1.0;
  for (int j = 0; j < truncation; ++j) {
    const double v = j + 1 == truncation ? 1.0 : beta_draw(rng, 1.0, cfg.mass);
    const double w = rest * v;
    rest -= w;
    const double e = beta_draw(rng, cfg.T1 + 1.0, cfg.T1 + 1.0);
    if (w > 0.0) atoms.push_back({w, e});
    if (!(rest > 0.0)) break;
  }
  return DiscreteMixture::normalized(sample_dp_alpha(cfg, rng), std::move(atoms));
}

double optimal_alpha_n(double beta, double n) {
  if (!(beta > 0.0) || !(n > 1.0)) throw DomainError("optimal_alpha_n: need beta > 0 and n > 1");
  return std::pow(n, 2.0 / (2.0 * beta + 1.0)) * std::pow(std::log(n), -3.0 / (2.0 * beta + 1.0));
}

double rate_exponent(double beta, RateKind kind, const RateParams& p) {
  if (!(beta > 0.0)) throw DomainError("rate_exponent: beta must be positive");
  if (kind == RateKind::Dirichlet) {
    if (!(p.t > 0.0 && p.t < 1.0)) throw DomainError("rate_exponent: t must lie in (0,1)");
    if (beta > 1.0 / p.t - 0.5) return -0.5 + p.t / 4.0;
  }
  return -beta / (2.0 * beta + 1.0);
}

double rate_tau(double beta, double n, RateKind kind, const RateParams& p) {
  if (!(beta > 0.0)) throw DomainError("rate_tau: beta must be positive");
  if (!(n > 1.0)) throw DomainError("rate_tau: n must exceed 1");
  const double ln = std::log(n);
  const double b = beta, d = 2.0 * beta + 1.0;
  switch (kind) {
    case RateKind::Adaptive: {
      double e = 5.0 * b / (4.0 * b + 2.0);
      if (p.L_mode == KPenalty::ConstantOne) e += 0.5;
      return std::pow(n, -b / d) * std::pow(ln, e);
    }
    case RateKind::Dirichlet:
      if (!(p.t > 0.0 && p.t < 1.0)) throw DomainError("rate_tau: t must lie in (0,1)");
      if (b <= 1.0 / p.t - 0.5) return std::pow(n, -b / d) * std::pow(ln, 5.0 * b / d);
      return std::pow(n, -0.5 + p.t / 4.0) * std::pow(ln, (6.0 * b + 0.5) / d);
    case RateKind::DeterministicAlpha: {
      const double a = p.alpha_n > 0.0 ? p.alpha_n : optimal_alpha_n(beta, n);
      if (!(a > 1.0)) throw DomainError("rate_tau: alpha_n must exceed 1");
      const double la = std::log(a);
      // Second term read as (sqrt(alpha_n) log(alpha_n) / n)^{1/2}.
      return la * std::max(std::pow(a, -b / 2.0), std::sqrt(std::sqrt(a) * la / n));
    }
  }
  throw ContractError("rate_tau: unknown prior kind");
}

}  // namespace betamix
