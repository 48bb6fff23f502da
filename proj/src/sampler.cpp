#include "betamix/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "betamix/errors.hpp"
#include "betamix/numkit.hpp"
#include "betamix/stats.hpp"

namespace betamix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kAdaptWindow = 50;
constexpr double kTargetRate = 0.3;

struct LogData {
  std::vector<double> lx, l1x;
  explicit LogData(const std::vector<double>& data) {
    lx.reserve(data.size());
    l1x.reserve(data.size());
    for (double x : data) {
      lx.push_back(std::log(x));
      l1x.push_back(std::log1p(-x));
    }
  }
  std::size_t size() const { return lx.size(); }
};

// log g_{alpha,eps}(x_i) for every datum.
void kernel_column(const LogData& d, double alpha, double eps, std::vector<double>& out) {
  const double a = alpha / (1.0 - eps), b = alpha / eps, lb = log_beta(a, b);
  out.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = (a - 1.0) * d.lx[i] + (b - 1.0) * d.l1x[i] - lb;
}

double mixture_loglik(const std::vector<double>& w, const std::vector<std::vector<double>>& cols, std::size_t n) {
  const std::size_t k = w.size();
  std::vector<double> lw(k);
  for (std::size_t j = 0; j < k; ++j) lw[j] = std::log(w[j]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = kNegInf;
    for (std::size_t j = 0; j < k; ++j) best = std::max(best, lw[j] + cols[j][i]);
    if (!std::isfinite(best)) return kNegInf;
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(lw[j] + cols[j][i] - best);
    total += best + std::log(s);
  }
  return total;
}

double logit(double e) { return std::log(e) - std::log1p(-e); }
double inv_logit(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

// Robbins-Monro style nudge of a log step size towards the target rate.
struct Adapter {
  double log_step;
  long prop = 0, acc = 0;
  explicit Adapter(double step) : log_step(std::log(step)) {}
  double step() const { return std::exp(log_step); }
  void record(bool accepted) {
    ++prop;
    acc += accepted;
  }
  void adapt(bool larger_is_bolder) {
    if (prop == 0) return;
    const double delta = double(acc) / prop - kTargetRate;
    log_step += larger_is_bolder ? delta : -delta;
    log_step = std::clamp(log_step, -12.0, 12.0);
    prop = acc = 0;
  }
};

std::vector<double> dirichlet_draw(Rng& rng, const std::vector<double>& shape) {
  std::vector<double> g(shape.size());
  double s = 0.0;
  for (std::size_t j = 0; j < shape.size(); ++j) s += g[j] = gamma_draw(rng, shape[j], 1.0);
  if (!(s > 0.0)) return {};
  for (double& v : g) v /= s;
  return g;
}

double log_dirichlet_general(const std::vector<double>& x, const std::vector<double>& shape) {
  double s = 0.0, tot = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0)) return kNegInf;
    s += (shape[j] - 1.0) * std::log(x[j]) - log_gamma(shape[j]);
    tot += shape[j];
  }
  return s + log_gamma(tot);
}

DiscreteMixture to_mixture(const RjState& s) {
  std::vector<Atom> atoms(s.w.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) atoms[j] = {s.w[j], s.eps[j]};
  return DiscreteMixture::normalized(s.alpha, std::move(atoms));
}

class RjSampler {
 public:
  RjSampler(const std::vector<double>& data, const AdaptivePriorConfig& cfg, const RjOptions& opt)
      : d_(data), cfg_(cfg), opt_(opt), rng_(opt.seed), eps_step_(0.5), alpha_step_(0.3), kappa_(100.0) {
    const int k = opt.fixed_k > 0 ? opt.fixed_k : opt.init_k;
    s_.alpha = opt.fixed_alpha > 0 ? opt.fixed_alpha : opt.init_alpha;
    for (int j = 0; j < k; ++j) {
      s_.w.push_back(1.0 / k);
      s_.eps.push_back((j + 0.5) / k);
    }
    cols_.resize(k);
    for (int j = 0; j < k; ++j) kernel_column(d_, s_.alpha, s_.eps[j], cols_[j]);
    ll_ = mixture_loglik(s_.w, cols_, d_.size());
  }

  Chain run() {
    Chain chain;
    for (long it = 0; it < opt_.iters; ++it) {
      if (opt_.fixed_k == 0) birth_or_death();
      for (std::size_t j = 0; j < s_.w.size(); ++j) move_eps(j);
      if (s_.w.size() > 1) move_weights();
      if (opt_.fixed_alpha <= 0) move_alpha();
      if (it < opt_.burnin && (it + 1) % kAdaptWindow == 0) {
        eps_step_.adapt(true);
        alpha_step_.adapt(true);
        kappa_.adapt(false);
      }
      if (it % opt_.thin == 0) {
        ChainRecord r;
        r.iter = it;
        r.k = static_cast<int>(s_.w.size());
        r.state = to_mixture(s_);
        r.log_lik = ll_;
        r.log_prior = log_prior_adaptive(cfg_, r.k, s_.w, s_.eps, s_.alpha);
        r.counters = counters_;
        chain.push_back(std::move(r));
      }
    }
    return chain;
  }

 private:
  bool accept(double log_ratio) { return log_ratio >= 0.0 || std::log(uniform01(rng_)) < log_ratio; }

  void birth_or_death() {
    const int k = static_cast<int>(s_.w.size());
    if (uniform01(rng_) < birth_probability(k, cfg_.k_max)) {
      ++counters_.proposed[kBirth];
      const double u = uniform01(rng_);
      const double e = beta_draw(rng_, cfg_.T + 1.0, cfg_.T + 1.0);
      const int pos = static_cast<int>(uniform01(rng_) * (k + 1));
      if (!(e > 0.0 && e < 1.0)) return;
      RjState t = birth_state(s_, u, e, pos);
      std::vector<double> col;
      kernel_column(d_, s_.alpha, e, col);
      auto cols = cols_;
      cols.insert(cols.begin() + pos, std::move(col));
      const double ll = mixture_loglik(t.w, cols, d_.size());
      if (accept(birth_log_acceptance(s_, u, ll_, ll, cfg_))) {
        ++counters_.accepted[kBirth];
        s_ = std::move(t);
        cols_ = std::move(cols);
        ll_ = ll;
      }
    } else {
      ++counters_.proposed[kDeath];
      const int j = static_cast<int>(uniform01(rng_) * k);
      RjState t;
      t.alpha = s_.alpha;
      const double u = s_.w[j];
      for (int i = 0; i < k; ++i) {
        if (i == j) continue;
        t.w.push_back(s_.w[i] / (1.0 - u));
        t.eps.push_back(s_.eps[i]);
      }
      auto cols = cols_;
      cols.erase(cols.begin() + j);
      const double ll = mixture_loglik(t.w, cols, d_.size());
      if (accept(-birth_log_acceptance(t, u, ll, ll_, cfg_))) {
        ++counters_.accepted[kDeath];
        s_ = std::move(t);
        cols_ = std::move(cols);
        ll_ = ll;
      }
    }
  }

  void move_eps(std::size_t j) {
    ++counters_.proposed[kEps];
    const double e = s_.eps[j];
    const double e2 = inv_logit(logit(e) + eps_step_.step() * normal_draw(rng_));
    bool ok = false;
    if (e2 > 0.0 && e2 < 1.0) {
      std::vector<double> col;
      kernel_column(d_, s_.alpha, e2, col);
      std::swap(cols_[j], col);
      const double ll = mixture_loglik(s_.w, cols_, d_.size());
      const double lr = ll - ll_ + log_pi_eps(e2, cfg_.T) - log_pi_eps(e, cfg_.T) + std::log(e2) + std::log1p(-e2) -
                        std::log(e) - std::log1p(-e);
      if (accept(lr)) {
        ok = true;
        s_.eps[j] = e2;
        ll_ = ll;
      } else {
        std::swap(cols_[j], col);
      }
    }
    counters_.accepted[kEps] += ok;
    eps_step_.record(ok);
  }

  void move_weights() {
    ++counters_.proposed[kWeights];
    const double kappa = kappa_.step();
    std::vector<double> shape(s_.w.size());
    for (std::size_t j = 0; j < shape.size(); ++j) shape[j] = kappa * s_.w[j];
    auto w2 = dirichlet_draw(rng_, shape);
    bool ok = false;
    if (!w2.empty() && std::all_of(w2.begin(), w2.end(), [](double v) { return v > 0.0; })) {
      std::vector<double> back(w2.size());
      for (std::size_t j = 0; j < back.size(); ++j) back[j] = kappa * w2[j];
      const double ll = mixture_loglik(w2, cols_, d_.size());
      const double lr = ll - ll_ + log_dirichlet(w2, cfg_.dirichlet_conc) - log_dirichlet(s_.w, cfg_.dirichlet_conc) +
                        log_dirichlet_general(s_.w, back) - log_dirichlet_general(w2, shape);
      if (accept(lr)) {
        ok = true;
        s_.w = std::move(w2);
        ll_ = ll;
      }
    }
    counters_.accepted[kWeights] += ok;
    kappa_.record(ok);
  }

  void move_alpha() {
    ++counters_.proposed[kAlpha];
    const double a = s_.alpha, a2 = a * std::exp(alpha_step_.step() * normal_draw(rng_));
    bool ok = false;
    if (a2 > 0.0 && std::isfinite(a2)) {
      std::vector<std::vector<double>> cols(s_.w.size());
      for (std::size_t j = 0; j < cols.size(); ++j) kernel_column(d_, a2, s_.eps[j], cols[j]);
      const double ll = mixture_loglik(s_.w, cols, d_.size());
      const double lr =
          ll - ll_ + log_pi_alpha(a2, cfg_.sqrt_alpha) - log_pi_alpha(a, cfg_.sqrt_alpha) + std::log(a2 / a);
      if (accept(lr)) {
        ok = true;
        s_.alpha = a2;
        cols_ = std::move(cols);
        ll_ = ll;
      }
    }
    counters_.accepted[kAlpha] += ok;
    alpha_step_.record(ok);
  }

  LogData d_;
  AdaptivePriorConfig cfg_;
  RjOptions opt_;
  Rng rng_;
  RjState s_;
  std::vector<std::vector<double>> cols_;
  double ll_ = 0.0;
  MoveCounters counters_;
  Adapter eps_step_, alpha_step_, kappa_;
};

class DpSampler {
 public:
  DpSampler(const std::vector<double>& data, const DPPriorConfig& cfg, const DpOptions& opt)
      : d_(data), cfg_(cfg), opt_(opt), rng_(opt.seed), K_(opt.truncation), eps_step_(0.5), alpha_step_(0.3) {
    v_.assign(K_, 0.0);
    eps_.resize(K_);
    for (int j = 0; j < K_; ++j) {
      v_[j] = j + 1 == K_ ? 1.0 : beta_draw(rng_, 1.0, cfg_.mass);
      eps_[j] = beta_draw(rng_, cfg_.T1 + 1.0, cfg_.T1 + 1.0);
    }
    alpha_ = std::max(cfg_.alpha_floor() * 1.5, cfg_.alpha_floor() + 1.0);
    z_.assign(d_.size(), 0);
  }

  Chain run() {
    Chain chain;
    std::vector<double> col;
    for (long it = 0; it < opt_.iters; ++it) {
      allocate();
      update_sticks();
      for (int j = 0; j < K_; ++j) move_eps(j);
      move_alpha();
      if (it < opt_.burnin && (it + 1) % kAdaptWindow == 0) {
        eps_step_.adapt(true);
        alpha_step_.adapt(true);
      }
      if (it % opt_.thin == 0) chain.push_back(record(it));
    }
    return chain;
  }

 private:
  bool accept(double log_ratio) { return log_ratio >= 0.0 || std::log(uniform01(rng_)) < log_ratio; }

  std::vector<double> weights() const {
    std::vector<double> w(K_);
    double rest = 1.0;
    for (int j = 0; j < K_; ++j) {
      w[j] = rest * v_[j];
      rest -= w[j];
      if (rest < 0.0) rest = 0.0;
    }
    return w;
  }

  double log_kernel(double alpha, double eps, std::size_t i) const {
    const double a = alpha / (1.0 - eps), b = alpha / eps;
    return (a - 1.0) * d_.lx[i] + (b - 1.0) * d_.l1x[i] - log_beta(a, b);
  }

  void allocate() {
    const auto w = weights();
    std::vector<double> a(K_), b(K_), lb(K_), lw(K_), p(K_);
    for (int j = 0; j < K_; ++j) {
      a[j] = alpha_ / (1.0 - eps_[j]);
      b[j] = alpha_ / eps_[j];
      lb[j] = log_beta(a[j], b[j]);
      lw[j] = w[j] > 0.0 ? std::log(w[j]) : kNegInf;
    }
    counts_.assign(K_, 0);
    for (std::size_t i = 0; i < d_.size(); ++i) {
      double best = kNegInf;
      for (int j = 0; j < K_; ++j) {
        p[j] = lw[j] + (a[j] - 1.0) * d_.lx[i] + (b[j] - 1.0) * d_.l1x[i] - lb[j];
        best = std::max(best, p[j]);
      }
      double s = 0.0;
      for (int j = 0; j < K_; ++j) s += p[j] = std::exp(p[j] - best);
      double u = uniform01(rng_) * s;
      int j = 0;
      while (j + 1 < K_ && (u -= p[j]) > 0.0) ++j;
      z_[i] = j;
      ++counts_[j];
    }
  }

  void update_sticks() {
    long tail = static_cast<long>(d_.size());
    for (int j = 0; j < K_; ++j) {
      tail -= counts_[j];
      v_[j] = j + 1 == K_ ? 1.0 : beta_draw(rng_, 1.0 + counts_[j], cfg_.mass + tail);
    }
  }

  void move_eps(int j) {
    if (counts_[j] == 0) {
      eps_[j] = beta_draw(rng_, cfg_.T1 + 1.0, cfg_.T1 + 1.0);
      return;
    }
    ++counters_.proposed[kEps];
    const double e = eps_[j], e2 = inv_logit(logit(e) + eps_step_.step() * normal_draw(rng_));
    bool ok = false;
    if (e2 > 0.0 && e2 < 1.0) {
      double lr = 0.0;
      for (std::size_t i = 0; i < d_.size(); ++i)
        if (z_[i] == j) lr += log_kernel(alpha_, e2, i) - log_kernel(alpha_, e, i);
      lr += log_pi_eps(e2, cfg_.T1) - log_pi_eps(e, cfg_.T1) + std::log(e2) + std::log1p(-e2) - std::log(e) -
            std::log1p(-e);
      if (accept(lr)) {
        ok = true;
        eps_[j] = e2;
      }
    }
    counters_.accepted[kEps] += ok;
    eps_step_.record(ok);
  }

  void move_alpha() {
    ++counters_.proposed[kAlpha];
    const double a = alpha_, a2 = a * std::exp(alpha_step_.step() * normal_draw(rng_));
    bool ok = false;
    if (a2 > cfg_.alpha_floor() && std::isfinite(a2)) {
      double lr = log_pi_alpha_dp(cfg_, a2) - log_pi_alpha_dp(cfg_, a) + std::log(a2 / a);
      for (std::size_t i = 0; i < d_.size(); ++i)
        lr += log_kernel(a2, eps_[z_[i]], i) - log_kernel(a, eps_[z_[i]], i);
      if (accept(lr)) {
        ok = true;
        alpha_ = a2;
      }
    }
    counters_.accepted[kAlpha] += ok;
    alpha_step_.record(ok);
  }

  ChainRecord record(long it) const {
    ChainRecord r;
    r.iter = it;
    const auto w = weights();
    std::vector<Atom> atoms;
    double lp = log_pi_alpha_dp(cfg_, alpha_);
    for (int j = 0; j < K_; ++j) {
      if (w[j] > 0.0) atoms.push_back({w[j], eps_[j]});
      lp += log_pi_eps(eps_[j], cfg_.T1);
    }
    r.state = DiscreteMixture::normalized(alpha_, std::move(atoms));
    int occupied = 0;
    double ent = 0.0;
    for (int j = 0; j < K_; ++j) {
      if (counts_[j] == 0) continue;
      ++occupied;
      const double p = double(counts_[j]) / d_.size();
      ent -= p * std::log(p);
    }
    r.k = occupied;
    r.allocation_entropy = ent;
    std::vector<std::vector<double>> cols(r.state.size());
    std::vector<double> ws(r.state.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      kernel_column(d_, alpha_, r.state.atoms()[j].eps, cols[j]);
      ws[j] = r.state.atoms()[j].weight;
    }
    r.log_lik = mixture_loglik(ws, cols, d_.size());
    r.log_prior = lp;
    r.counters = counters_;
    return r;
  }

  LogData d_;
  DPPriorConfig cfg_;
  DpOptions opt_;
  Rng rng_;
  int K_;
  std::vector<double> v_, eps_;
  double alpha_;
  std::vector<int> z_;
  std::vector<long> counts_;
  MoveCounters counters_;
  Adapter eps_step_, alpha_step_;
};

void check_mcmc(const McmcOptions& opt) {
  if (opt.iters < 1) throw ContractError("mcmc: iters must be at least 1");
  if (opt.thin < 1) throw ContractError("mcmc: thin must be at least 1");
  if (opt.burnin < 0) throw ContractError("mcmc: burnin must be nonnegative");
}

void check_data(const std::vector<double>& data) {
  for (double x : data)
    if (!(x > 0.0 && x < 1.0))
      throw DomainError("data must lie strictly inside (0,1); ingest with jitter to move boundary points");
}

}  // namespace

std::vector<double> ingest_data(const std::vector<double>& values, bool jitter) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double x : values) {
    if (!std::isfinite(x)) throw DomainError("ingest_data: non-finite value");
    if (x > 0.0 && x < 1.0) {
      out.push_back(x);
    } else if (jitter && x <= 0.0 && x > -1e-6) {
      out.push_back(1e-9);
    } else if (jitter && x >= 1.0 && x < 1.0 + 1e-6) {
      out.push_back(1.0 - 1e-9);
    } else {
      char buf[128];
      std::snprintf(buf, sizeof buf, "ingest_data: value %.17g outside (0,1)%s", x,
                    jitter ? "" : "; enable jitter to move boundary points inside");
      throw DomainError(buf);
    }
  }
  return out;
}

double log_likelihood(const DiscreteMixture& m, const std::vector<double>& data) {
  check_data(data);
  LogData d(data);
  std::vector<std::vector<double>> cols(m.size());
  std::vector<double> w(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    kernel_column(d, m.alpha(), m.atoms()[j].eps, cols[j]);
    w[j] = m.atoms()[j].weight;
  }
  return mixture_loglik(w, cols, d.size());
}

const char* move_name(int move) {
  static const char* names[kMoveCount] = {"birth", "death", "eps", "weights", "alpha"};
  return move >= 0 && move < kMoveCount ? names[move] : "?";
}

double birth_probability(int k, int k_max) {
  if (k <= 1) return 1.0;
  if (k >= k_max) return 0.0;
  return 0.5;
}

RjState birth_state(const RjState& s, double u, double eps_new, int pos) {
  RjState t;
  t.alpha = s.alpha;
  t.w.reserve(s.w.size() + 1);
  t.eps.reserve(s.w.size() + 1);
  for (std::size_t j = 0; j <= s.w.size(); ++j) {
    if (static_cast<int>(j) == pos) {
      t.w.push_back(u);
      t.eps.push_back(eps_new);
    }
    if (j < s.w.size()) {
      t.w.push_back(s.w[j] * (1.0 - u));
      t.eps.push_back(s.eps[j]);
    }
  }
  return t;
}

double birth_log_acceptance(const RjState& from, double u, double loglik_from, double loglik_to,
                            const AdaptivePriorConfig& cfg) {
  const int k = static_cast<int>(from.w.size());
  const double c = cfg.dirichlet_conc;
  if (!(u > 0.0 && u < 1.0)) return kNegInf;
  // Dirichlet_{k+1}(w') / Dirichlet_k(w) with w' = (w(1-u), u)
  const double dir = log_gamma((k + 1) * c) - log_gamma(k * c) - log_gamma(c) + (c - 1.0) * std::log(u) +
                     k * (c - 1.0) * std::log1p(-u);
  const double moves = std::log(1.0 - birth_probability(k + 1, cfg.k_max)) - std::log(birth_probability(k, cfg.k_max));
  const double jac = (k - 1) * std::log1p(-u);
  return loglik_to - loglik_from + log_p_k(cfg, k + 1) - log_p_k(cfg, k) + dir + moves + jac;
}

Chain rjmcmc_fit(const std::vector<double>& data, const AdaptivePriorConfig& cfg, const RjOptions& opt) {
  check_mcmc(opt);
  check_data(data);
  cfg.validate();
  if (opt.fixed_k < 0 || opt.fixed_k > cfg.k_max) throw ContractError("rjmcmc_fit: fixed_k out of range");
  if (opt.init_k < 1 || opt.init_k > cfg.k_max) throw ContractError("rjmcmc_fit: init_k out of range");
  if (!(opt.init_alpha > 0.0)) throw ContractError("rjmcmc_fit: init_alpha must be positive");
  RjSampler s(data, cfg, opt);
  return s.run();
}

Chain dp_fit(const std::vector<double>& data, const DPPriorConfig& cfg, const DpOptions& opt) {
  check_mcmc(opt);
  check_data(data);
  cfg.validate();
  if (opt.truncation < 1) throw ContractError("dp_fit: truncation must be positive");
  if (!(opt.truncation * std::log(cfg.mass / (1.0 + cfg.mass)) < std::log(1e-10)))
    throw BudgetError("dp_fit: truncation too small for the DP mass");
  DpSampler s(data, cfg, opt);
  return s.run();
}

std::vector<double> posterior_mean_density(const Chain& chain, long burnin, const std::vector<double>& grid) {
  std::vector<double> out(grid.size(), 0.0);
  long used = 0;
  for (const auto& r : chain) {
    if (r.iter < burnin) continue;
    ++used;
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] += mix_pdf(r.state, grid[i]);
  }
  if (used == 0) throw ContractError("posterior_mean_density: no records after burn-in");
  for (double& v : out) v /= used;
  return out;
}

Diagnostics diagnostics(const Chain& chain, long burnin) {
  Diagnostics d;
  std::vector<double> ll;
  const ChainRecord* first = nullptr;
  for (const auto& r : chain) {
    if (r.iter < burnin) continue;
    if (!first) first = &r;
    ll.push_back(r.log_lik);
    ++d.k_histogram[r.k];
  }
  if (ll.empty()) throw ContractError("diagnostics: no records after burn-in");
  d.records = static_cast<long>(ll.size());
  const auto& last = chain.back().counters;
  for (int m = 0; m < kMoveCount; ++m) {
    // rates over the post-burn-in stretch when possible
    const long p = last.proposed[m] - (first != &chain.front() ? first->counters.proposed[m] : 0);
    const long a = last.accepted[m] - (first != &chain.front() ? first->counters.accepted[m] : 0);
    d.acceptance[m] = p > 0 ? double(a) / p : 0.0;
  }
  d.ess_log_lik = ll.size() > 3 ? effective_sample_size(ll) : static_cast<double>(ll.size());
  return d;
}

std::string Diagnostics::to_csv() const {
  std::ostringstream os;
  os << "metric,value\n";
  char buf[128];
  for (int m = 0; m < kMoveCount; ++m) {
    std::snprintf(buf, sizeof buf, "acceptance_%s,%.6g\n", move_name(m), acceptance[m]);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "ess_log_lik,%.6g\nrecords,%ld\n", ess_log_lik, records);
  os << buf;
  for (const auto& [k, c] : k_histogram) os << "k_" << k << "," << c << "\n";
  return os.str();
}

std::string serialize_chain(const Chain& chain) {
  std::ostringstream os;
  char buf[64];
  for (const auto& r : chain) {
    os << r.iter << ' ' << r.k;
    std::snprintf(buf, sizeof buf, " %.17g", r.state.alpha());
    os << buf;
    for (const auto& a : r.state.atoms()) {
      std::snprintf(buf, sizeof buf, " %.17g %.17g", a.weight, a.eps);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, " %.17g %.17g\n", r.log_lik, r.log_prior);
    os << buf;
  }
  return os.str();
}

Chain parse_chain(const std::string& text) {
  Chain chain;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> tok;
    double v;
    while (ls >> v) tok.push_back(v);
    if (!ls.eof() || tok.size() < 7 || (tok.size() - 5) % 2 != 0)
      throw ParseError("chain line " + std::to_string(lineno) + ": malformed record");
    ChainRecord r;
    r.iter = static_cast<long>(tok[0]);
    r.k = static_cast<int>(tok[1]);
    std::vector<Atom> atoms;
    for (std::size_t i = 3; i + 2 < tok.size(); i += 2) atoms.push_back({tok[i], tok[i + 1]});
    r.state = DiscreteMixture(tok[2], std::move(atoms));
    r.log_lik = tok[tok.size() - 2];
    r.log_prior = tok.back();
    chain.push_back(std::move(r));
  }
  return chain;
}

}  // namespace betamix
