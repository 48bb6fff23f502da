#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "betamix/mixtures.hpp"
#include "betamix/priors.hpp"

namespace betamix {

// Validates data in (0,1). With jitter, points at or beyond 0 or 1 are moved
// to 1e-9 or 1 - 1e-9; without it they raise DomainError.
std::vector<double> ingest_data(const std::vector<double>& values, bool jitter = false);

// Sum of log mix_pdf over the data.
double log_likelihood(const DiscreteMixture& m, const std::vector<double>& data);

enum Move { kBirth = 0, kDeath, kEps, kWeights, kAlpha, kMoveCount };
const char* move_name(int move);

struct MoveCounters {
  long proposed[kMoveCount] = {};
  long accepted[kMoveCount] = {};
  double rate(int move) const { return proposed[move] ? double(accepted[move]) / proposed[move] : 0.0; }
};

struct ChainRecord {
  long iter = 0;
  int k = 0;  // components (adaptive prior) or occupied clusters (Dirichlet prior)
  DiscreteMixture state;
  double log_lik = 0.0;
  double log_prior = 0.0;
  MoveCounters counters;             // cumulative
  double allocation_entropy = 0.0;  // Dirichlet prior only
};

using Chain = std::vector<ChainRecord>;

struct McmcOptions {
  long iters = 5000;
  long burnin = 1000;  // step sizes adapt only before this sweep
  int thin = 1;
  std::uint64_t seed = 1;
};

struct RjOptions : McmcOptions {
  int fixed_k = 0;           // > 0 disables birth and death
  double fixed_alpha = 0.0;  // > 0 freezes alpha (deterministic-alpha mode)
  int init_k = 1;
  double init_alpha = 10.0;
};

Chain rjmcmc_fit(const std::vector<double>& data, const AdaptivePriorConfig& cfg, const RjOptions& opt);

struct DpOptions : McmcOptions {
  int truncation = 200;
};

Chain dp_fit(const std::vector<double>& data, const DPPriorConfig& cfg, const DpOptions& opt);

// Labeled adaptive-prior state.
struct RjState {
  double alpha;
  std::vector<double> w, eps;
};

// Probability of proposing a birth from k components.
double birth_probability(int k, int k_max);
// New weights w(1-u) and u, new component inserted at position pos.
RjState birth_state(const RjState& s, double u, double eps_new, int pos);
// log of the birth acceptance ratio A (death uses -log A), given both
// log-likelihoods. The pi_e factor of eps_new cancels against its proposal.
double birth_log_acceptance(const RjState& from, double u, double loglik_from, double loglik_to,
                            const AdaptivePriorConfig& cfg);

// Pointwise mean of mix_pdf over records with iter >= burnin.
std::vector<double> posterior_mean_density(const Chain& chain, long burnin, const std::vector<double>& grid);

struct Diagnostics {
  double acceptance[kMoveCount] = {};
  double ess_log_lik = 0.0;
  std::map<int, long> k_histogram;
  long records = 0;

  std::string to_csv() const;
};

Diagnostics diagnostics(const Chain& chain, long burnin = 0);

// One record per line: iter k alpha w1 e1 ... wk ek log_lik log_prior.
std::string serialize_chain(const Chain& chain);
Chain parse_chain(const std::string& text);

}  // namespace betamix
