#include "betamix/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "betamix/approx_continuous.hpp"
#include "betamix/approx_discrete.hpp"
#include "betamix/errors.hpp"
#include "betamix/numkit.hpp"
#include "betamix/priors.hpp"
#include "betamix/stats.hpp"

namespace betamix {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v, const char* spec = "%.4g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Runs task(i) for i in [0, n) on up to `threads` workers. Tasks not started
// before the deadline are skipped; the returned flags say which ran.
template <class Task>
std::vector<char> run_pool(std::size_t n, int threads, double budget_seconds, Task task) {
  const auto start = Clock::now();
  std::vector<char> done(n, 0);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      if (budget_seconds > 0.0 && seconds_since(start) > budget_seconds) continue;
      try {
        task(i);
        done[i] = 1;
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return done;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "kind", "density", "density_beta", "grid", "replications", "seed", "threads", "budget_seconds", "out",
      "tolerance", "theory_slope", "beta", "rule", "correct", "metric", "p", "t0", "M", "A", "nodes_per_cell",
      "sup_grid", "sampler", "deterministic_alpha", "iters", "burnin", "thin", "truncation", "draws",
      // prior keys, read by adaptive_prior_from / dp_prior_from
      "a_k", "L_mode", "T", "dirichlet_conc", "sqrt_alpha_shape", "sqrt_alpha_rate", "k_max", "dp_mass", "T1", "t",
      "dp_sqrt_alpha_shape", "dp_sqrt_alpha_rate"};
  return keys;
}

double theory_beta(const ExperimentConfig& cfg, const TargetDensity& f) {
  return std::isnan(cfg.beta) ? f.holder.beta : cfg.beta;
}

// Order of the approximation error in 1/alpha: min(beta, 2 (r + 1)).
double approx_order(double beta, bool correct, int max_steps) {
  const int r = correct ? std::min(correction_steps_for(beta), max_steps) : 0;
  return std::min(beta, 2.0 * (r + 1));
}

std::string default_rule(const ExperimentConfig& cfg) {
  if (!cfg.rule.empty()) return cfg.rule;
  if (cfg.kind == ExperimentKind::PosteriorRate) return "band_monotone";
  if (cfg.kind == ExperimentKind::PriorSanity) return "pvalue";
  // The rough family is smooth away from 1/2, so it may beat the worst-case rate.
  if (cfg.density == "rough") return "upper";
  return "band";
}

double default_tolerance(const ExperimentConfig& cfg, const std::string& rule) {
  if (!std::isnan(cfg.tolerance)) return cfg.tolerance;
  return rule == "pvalue" ? 0.01 : 0.2;
}

void put_primary_first(ExperimentReport& r, const std::string& primary) {
  auto it = std::find(r.metric_names.begin(), r.metric_names.end(), primary);
  if (it == r.metric_names.end()) throw ContractError("unknown metric '" + primary + "' for " + r.kind);
  const std::size_t j = static_cast<std::size_t>(it - r.metric_names.begin());
  if (j == 0) return;
  std::rotate(r.metric_names.begin(), it, it + 1);
  for (auto& row : r.rows) std::rotate(row.metrics.begin(), row.metrics.begin() + j, row.metrics.begin() + j + 1);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::ApproxContinuous: return "approx-continuous";
    case ExperimentKind::ApproxDiscrete: return "approx-discrete";
    case ExperimentKind::PosteriorRate: return "posterior-rate";
    case ExperimentKind::PriorSanity: return "prior-sanity";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::ApproxContinuous, ExperimentKind::ApproxDiscrete, ExperimentKind::PosteriorRate,
                 ExperimentKind::PriorSanity})
    if (s == kind_name(k)) return k;
  throw ParseError("unknown experiment kind '" + s +
                   "' (approx-continuous, approx-discrete, posterior-rate, prior-sanity)");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Insufficient: return "insufficient";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_kv(const KvConfig& kv) {
  kv.require_known(known_keys());
  ExperimentConfig c;
  c.kind = parse_kind(kv.get_string("kind", kind_name(c.kind)));
  c.density = kv.get_string("density", c.density);
  if (kv.has("density_beta")) c.density_params["beta"] = kv.get_double("density_beta", 0.5);
  c.grid = kv.get_list("grid", {});
  c.replications = static_cast<int>(kv.get_int("replications", c.replications));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long>(c.seed)));
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));
  c.budget_seconds = kv.get_double("budget_seconds", c.budget_seconds);
  c.out_dir = kv.get_string("out", c.out_dir);
  c.tolerance = kv.get_double("tolerance", c.tolerance);
  c.theory_slope = kv.get_double("theory_slope", c.theory_slope);
  c.beta = kv.get_double("beta", c.beta);
  c.rule = kv.get_string("rule", c.rule);
  c.correct = kv.get_bool("correct", c.correct);
  c.metric = kv.get_string("metric", c.metric);
  c.p = kv.get_double("p", c.p);
  c.t0 = kv.get_double("t0", c.t0);
  c.M = kv.get_double("M", c.M);
  c.A = kv.get_double("A", c.A);
  c.nodes_per_cell = static_cast<int>(kv.get_int("nodes_per_cell", c.nodes_per_cell));
  c.sup_grid = static_cast<int>(kv.get_int("sup_grid", c.sup_grid));
  const std::string s = kv.get_string("sampler", "adaptive");
  if (s == "adaptive") {
    c.sampler = SamplerKind::Adaptive;
  } else if (s == "dirichlet") {
    c.sampler = SamplerKind::Dirichlet;
  } else {
    throw ParseError("sampler must be adaptive or dirichlet, got '" + s + "'");
  }
  c.deterministic_alpha = kv.get_bool("deterministic_alpha", c.deterministic_alpha);
  c.iters = kv.get_int("iters", c.iters);
  c.burnin = kv.get_int("burnin", c.burnin);
  c.thin = static_cast<int>(kv.get_int("thin", c.thin));
  c.truncation = static_cast<int>(kv.get_int("truncation", c.truncation));
  c.draws = kv.get_int("draws", c.draws);
  c.prior = kv;
  return c;
}

void ExperimentConfig::validate() const {
  if (kind != ExperimentKind::PriorSanity) {
    if (grid.empty()) throw ContractError("experiment grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1])) throw ContractError("experiment grid must be strictly increasing");
  }
  if (replications < 1) throw ContractError("replications must be at least 1");
  if (threads < 1) throw ContractError("threads must be at least 1");
  if (!std::isnan(tolerance) && !(tolerance >= 0.0)) throw ContractError("tolerance must be nonnegative");
  if (!rule.empty() && rule != "band" && rule != "upper" && rule != "band_monotone" && rule != "pvalue")
    throw ContractError("rule must be band, upper, band_monotone or pvalue");
  if (kind == ExperimentKind::PosteriorRate) {
    if (grid.front() < 2.0) throw ContractError("sample sizes must be at least 2");
    if (iters <= burnin || burnin < 0 || thin < 1) throw ContractError("need iters > burnin >= 0 and thin >= 1");
  }
  if (kind == ExperimentKind::PriorSanity && draws < 100) throw ContractError("prior-sanity needs draws >= 100");
}

int count_inversions(const ExperimentReport& r) {
  int inv = 0;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (r.rows[i].metrics.at(0) > r.rows[i - 1].metrics.at(0)) ++inv;
  return inv;
}

Verdict judge(ExperimentReport& r) {
  r.fit = LineFit{};
  if (r.rule == "pvalue") {
    if (r.rows.empty()) return r.verdict = Verdict::Insufficient;
    for (const auto& row : r.rows)
      if (!(row.metrics.at(0) >= r.tolerance)) return r.verdict = Verdict::Fail;
    return r.verdict = Verdict::Pass;
  }
  if (r.rows.size() < 2) return r.verdict = Verdict::Insufficient;
  std::vector<double> xs, ys;
  for (const auto& row : r.rows) {
    xs.push_back(row.sweep);
    ys.push_back(row.metrics.at(0));
  }
  try {
    r.fit = fit_loglog(xs, ys);
  } catch (const ContractError&) {
    return r.verdict = Verdict::Insufficient;
  }
  const double d = r.fit.slope - r.theory_slope;
  bool ok = false;
  if (r.rule == "band") {
    ok = std::abs(d) <= r.tolerance;
  } else if (r.rule == "upper") {
    ok = d <= r.tolerance;
  } else if (r.rule == "band_monotone") {
    ok = std::abs(d) <= r.tolerance && count_inversions(r) <= 1;
  } else {
    throw ContractError("unknown verdict rule '" + r.rule + "'");
  }
  return r.verdict = ok ? Verdict::Pass : Verdict::Fail;
}

PointRule l1_rule() {
  std::vector<double> cuts{0.0};
  for (int e = -12; e <= -2; ++e) cuts.push_back(std::pow(10.0, e));
  for (int i = 2; i <= 98; ++i) cuts.push_back(i / 100.0);
  for (int e = -2; e >= -12; --e) cuts.push_back(1.0 - std::pow(10.0, e));
  cuts.push_back(1.0);
  const auto gl = gauss_legendre(8);
  PointRule rule;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double h = 0.5 * (cuts[c + 1] - cuts[c]), m = 0.5 * (cuts[c + 1] + cuts[c]);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      rule.nodes.push_back(m + h * gl.nodes[i]);
      rule.weights.push_back(h * gl.weights[i]);
    }
  }
  return rule;
}

double l1_on_rule(const PointRule& rule, const std::vector<double>& values, const TargetDensity& f0) {
  if (values.size() != rule.nodes.size()) throw ContractError("l1_on_rule: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += rule.weights[i] * std::abs(values[i] - f0(rule.nodes[i]));
  return s;
}

std::vector<double> simulate(const TargetDensity& f, int n, std::uint64_t seed) {
  if (n < 1) throw ContractError("simulate: n must be positive");
  Rng rng(seed);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = f.sample(rng);
  return x;
}

ExperimentReport run_approx_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool discrete = cfg.kind == ExperimentKind::ApproxDiscrete;
  if (!discrete && cfg.kind != ExperimentKind::ApproxContinuous)
    throw ContractError("run_approx_experiment: kind must be approx-continuous or approx-discrete");
  const auto f = density_corpus(cfg.density, cfg.density_params);
  ExperimentReport r;
  r.kind = kind_name(cfg.kind);
  r.density = f.name;
  r.sweep_name = "alpha";
  r.rule = default_rule(cfg);
  r.tolerance = default_tolerance(cfg, r.rule);

  const std::size_t n = cfg.grid.size();
  std::vector<ReportRow> rows(n);
  BuildOptions build;
  if (discrete) {
    r.metric_names = {"kl", "vp", "atoms", "budget_ratio", "correction_steps"};
    DiscreteKlOptions opt;
    opt.correct = cfg.correct;
    opt.t0 = cfg.t0;
    opt.M = cfg.M;
    opt.A = cfg.A;
    opt.nodes_per_cell = cfg.nodes_per_cell;
    opt.p = cfg.p;
    build = opt.build;
    auto done = run_pool(n, cfg.threads, cfg.budget_seconds, [&](std::size_t i) {
      const auto t = Clock::now();
      const DiscreteRow d = discrete_row(f, cfg.grid[i], opt);
      rows[i] = {d.alpha, {d.kl, d.vp, double(d.atoms), d.budget_ratio, double(d.correction_steps)}, seconds_since(t)};
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) r.rows.push_back(rows[i]);
      else r.complete = false;
    }
  } else {
    r.metric_names = {"sup_err", "kl", "vp", "correction_steps"};
    ApproxRateOptions opt;
    opt.correct = cfg.correct;
    opt.p = cfg.p;
    opt.sup_grid = cfg.sup_grid;
    build = opt.build;
    const auto grid = chebyshev_grid(cfg.sup_grid);
    auto done = run_pool(n, cfg.threads, cfg.budget_seconds, [&](std::size_t i) {
      const auto t = Clock::now();
      const ApproxRow a = approx_row(f, cfg.grid[i], grid, opt);
      rows[i] = {a.alpha, {a.sup_err, a.kl, a.vp, double(a.steps)}, seconds_since(t)};
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) r.rows.push_back(rows[i]);
      else r.complete = false;
    }
  }
  std::string metric = cfg.metric.empty() ? (discrete ? "kl" : "sup") : cfg.metric;
  if (metric == "sup") metric = "sup_err";
  if (metric != "sup_err" && metric != "kl" && metric != "vp")
    throw ContractError("approx metric must be sup, kl or vp");
  put_primary_first(r, metric);

  const double beta = theory_beta(cfg, f);
  const double order = approx_order(beta, cfg.correct, build.max_steps);
  r.theory_slope = std::isnan(cfg.theory_slope) ? (metric == "sup_err" ? -order / 2.0 : -order) : cfg.theory_slope;
  r.notes["beta"] = fmt(beta);
  r.notes["corrected"] = cfg.correct ? "1" : "0";
  if (cfg.density == "rough")
    r.notes["annotation"] = "rough family is smooth away from 1/2; slopes faster than theory are expected";
  judge(r);
  return r;
}

ExperimentReport run_posterior_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::PosteriorRate)
    throw ContractError("run_posterior_experiment: kind must be posterior-rate");
  const auto f = density_corpus(cfg.density, cfg.density_params);
  const AdaptivePriorConfig adaptive = adaptive_prior_from(cfg.prior);
  const auto rule = l1_rule();
  const double beta = theory_beta(cfg, f);

  ExperimentReport r;
  r.kind = kind_name(cfg.kind);
  r.density = f.name;
  r.sweep_name = "n";
  r.metric_names = {"l1_median", "l1_mean", "k_mean", "alpha_mean"};
  r.rule = default_rule(cfg);
  r.tolerance = default_tolerance(cfg, r.rule);

  struct Cell {
    double l1 = 0, k = 0, alpha = 0, seconds = 0;
  };
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t total = cfg.grid.size() * reps;
  std::vector<Cell> cells(total);
  auto done = run_pool(total, cfg.threads, cfg.budget_seconds, [&](std::size_t c) {
    const auto t = Clock::now();
    const int n = static_cast<int>(std::lround(cfg.grid[c / reps]));
    const auto data = simulate(f, n, mix_seed(cfg.seed, 2 * c));
    Chain chain;
    if (cfg.sampler == SamplerKind::Adaptive) {
      RjOptions o;
      o.iters = cfg.iters;
      o.burnin = cfg.burnin;
      o.thin = cfg.thin;
      o.seed = mix_seed(cfg.seed, 2 * c + 1);
      if (cfg.deterministic_alpha) o.fixed_alpha = optimal_alpha_n(beta, n);
      chain = rjmcmc_fit(data, adaptive, o);
    } else {
      DpOptions o;
      o.iters = cfg.iters;
      o.burnin = cfg.burnin;
      o.thin = cfg.thin;
      o.truncation = cfg.truncation;
      o.seed = mix_seed(cfg.seed, 2 * c + 1);
      chain = dp_fit(data, dp_prior_from(cfg.prior, n), o);
    }
    const auto dens = posterior_mean_density(chain, cfg.burnin, rule.nodes);
    Cell cell;
    cell.l1 = l1_on_rule(rule, dens, f);
    long m = 0;
    for (const auto& rec : chain) {
      if (rec.iter < cfg.burnin) continue;
      cell.k += rec.k;
      cell.alpha += rec.state.alpha();
      ++m;
    }
    if (m > 0) {
      cell.k /= m;
      cell.alpha /= m;
    }
    cell.seconds = seconds_since(t);
    cells[c] = cell;
  });

  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    std::vector<double> l1, k, a;
    double secs = 0.0;
    bool all = true;
    for (std::size_t j = 0; j < reps; ++j) {
      const std::size_t c = i * reps + j;
      if (!done[c]) {
        all = false;
        break;
      }
      l1.push_back(cells[c].l1);
      k.push_back(cells[c].k);
      a.push_back(cells[c].alpha);
      secs += cells[c].seconds;
    }
    if (!all) {
      r.complete = false;
      continue;
    }
    r.rows.push_back({cfg.grid[i], {median(l1), mean(l1), mean(k), mean(a)}, secs});
  }

  RateKind kind = RateKind::Adaptive;
  RateParams rp;
  rp.L_mode = adaptive.L_mode;
  if (cfg.sampler == SamplerKind::Dirichlet) {
    kind = RateKind::Dirichlet;
    rp.t = cfg.prior.get_double("t", 0.5);
  } else if (cfg.deterministic_alpha) {
    kind = RateKind::DeterministicAlpha;
  }
  r.theory_slope = std::isnan(cfg.theory_slope) ? rate_exponent(beta, kind, rp) : cfg.theory_slope;
  r.notes["beta"] = fmt(beta);
  r.notes["sampler"] = cfg.sampler == SamplerKind::Adaptive ? "adaptive" : "dirichlet";
  r.notes["deterministic_alpha"] = cfg.deterministic_alpha ? "1" : "0";
  r.notes["replications"] = std::to_string(cfg.replications);
  r.notes["iters"] = std::to_string(cfg.iters);
  r.notes["seed"] = std::to_string(cfg.seed);
  judge(r);
  return r;
}

ExperimentReport run_prior_sanity(const ExperimentConfig& cfg) {
  cfg.validate();
  const AdaptivePriorConfig ac = adaptive_prior_from(cfg.prior);
  const double n = cfg.grid.empty() ? 1000.0 : cfg.grid.back();
  const DPPriorConfig dc = dp_prior_from(cfg.prior, n);
  const std::size_t m = static_cast<std::size_t>(cfg.draws);

  ExperimentReport r;
  r.kind = kind_name(ExperimentKind::PriorSanity);
  r.density = "prior";
  r.sweep_name = "check";
  r.metric_names = {"p_value", "statistic"};
  r.rule = default_rule(cfg);
  r.tolerance = default_tolerance(cfg, r.rule);

  // check 1: eps ~ Beta(T+1, T+1); 2: sqrt(alpha) ~ Gamma; 3: k ~ p(k);
  // 4: sqrt(alpha) - n^{t/2} ~ Gamma under the Dirichlet prior.
  std::vector<ReportRow> rows(4);
  auto done = run_pool(4, cfg.threads, cfg.budget_seconds, [&](std::size_t c) {
    const auto t = Clock::now();
    Rng rng(mix_seed(cfg.seed, c));
    TestResult res;
    if (c == 0 || c == 1) {
      std::vector<double> v;
      for (std::size_t i = 0; i < m; ++i) {
        const auto d = sample_adaptive(ac, rng);
        v.push_back(c == 0 ? d.mixture.atoms().front().eps : std::sqrt(d.mixture.alpha()));
      }
      const double T = ac.T;
      const GammaParams g = ac.sqrt_alpha;
      if (c == 0) res = ks_test(v, [T](double x) { return incomplete_beta(T + 1, T + 1, x); });
      else res = ks_test(v, [g](double x) { return x <= 0 ? 0.0 : incomplete_gamma_p(g.shape, g.rate * x); });
    } else if (c == 2) {
      int kmax = 1;
      std::vector<double> counts(64, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const int k = sample_k(ac, rng);
        kmax = std::max(kmax, k);
        if (k <= 64) counts[k - 1] += 1.0;
      }
      std::vector<double> probs;
      for (int k = 1; k <= 64 && k <= ac.k_max; ++k) probs.push_back(std::exp(log_p_k(ac, k)));
      counts.resize(probs.size());
      res = chi_square_gof(counts, probs);
    } else {
      std::vector<double> v;
      const double shift = std::pow(dc.n, dc.t / 2.0);
      for (std::size_t i = 0; i < m; ++i) v.push_back(std::sqrt(sample_dp_alpha(dc, rng)) - shift);
      const GammaParams g = dc.sqrt_alpha;
      res = ks_test(v, [g](double x) { return x <= 0 ? 0.0 : incomplete_gamma_p(g.shape, g.rate * x); });
    }
    rows[c] = {double(c + 1), {res.p_value, res.statistic}, seconds_since(t)};
  });
  for (std::size_t c = 0; c < 4; ++c) {
    if (done[c]) r.rows.push_back(rows[c]);
    else r.complete = false;
  }
  r.notes["checks"] = "1 eps KS, 2 sqrt(alpha) KS, 3 k chi-square, 4 Dirichlet sqrt(alpha) KS";
  r.notes["draws"] = std::to_string(cfg.draws);
  r.theory_slope = 0.0;
  judge(r);
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::ApproxContinuous:
    case ExperimentKind::ApproxDiscrete: return run_approx_experiment(cfg);
    case ExperimentKind::PosteriorRate: return run_posterior_experiment(cfg);
    case ExperimentKind::PriorSanity: return run_prior_sanity(cfg);
  }
  throw ContractError("unknown experiment kind");
}

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "sweep";
  for (const auto& m : r.metric_names) os << ',' << m;
  os << ",runtime_s\n";
  if (r.rows.empty()) return os.str();
  for (const auto& row : r.rows) {
    os << fmt(row.sweep);
    for (double v : row.metrics) os << ',' << fmt(v);
    os << ',' << fmt(row.runtime_s) << '\n';
  }
  os << "# kind=" << r.kind << '\n';
  os << "# density=" << r.density << '\n';
  os << "# sweep_name=" << r.sweep_name << '\n';
  os << "# theory_slope=" << fmt(r.theory_slope) << '\n';
  os << "# tolerance=" << fmt(r.tolerance) << '\n';
  os << "# rule=" << r.rule << '\n';
  os << "# complete=" << (r.complete ? 1 : 0) << '\n';
  os << "# slope=" << fmt(r.fit.slope) << '\n';
  os << "# slope_stderr=" << fmt(r.fit.slope_stderr) << '\n';
  os << "# intercept=" << fmt(r.fit.intercept) << '\n';
  os << "# verdict=" << verdict_name(r.verdict) << '\n';
  for (const auto& [k, v] : r.notes) os << "# note." << k << '=' << v << '\n';
  return os.str();
}

ExperimentReport parse_report_csv(const std::string& text) {
  ExperimentReport r;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  std::size_t ncols = 0;
  int lineno = 0;
  auto number = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError("report line " + std::to_string(lineno) + ": bad number '" + s + "'");
    }
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ParseError("report line " + std::to_string(lineno) + ": expected key=value");
      const std::string k = body.substr(0, eq), v = body.substr(eq + 1);
      if (k == "kind") r.kind = v;
      else if (k == "density") r.density = v;
      else if (k == "sweep_name") r.sweep_name = v;
      else if (k == "theory_slope") r.theory_slope = number(v);
      else if (k == "tolerance") r.tolerance = number(v);
      else if (k == "rule") r.rule = v;
      else if (k == "complete") r.complete = v == "1";
      else if (k == "slope") r.fit.slope = number(v);
      else if (k == "slope_stderr") r.fit.slope_stderr = number(v);
      else if (k == "intercept") r.fit.intercept = number(v);
      else if (k == "verdict") {
        if (v == "pass") r.verdict = Verdict::Pass;
        else if (v == "fail") r.verdict = Verdict::Fail;
        else if (v == "insufficient") r.verdict = Verdict::Insufficient;
        else throw ParseError("report line " + std::to_string(lineno) + ": unknown verdict '" + v + "'");
      } else if (k.rfind("note.", 0) == 0) {
        r.notes[k.substr(5)] = v;
      }
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (!have_header) {
      if (cols.size() < 2 || cols.front() != "sweep" || cols.back() != "runtime_s")
        throw ParseError("report line " + std::to_string(lineno) + ": header must be sweep,...,runtime_s");
      r.metric_names.assign(cols.begin() + 1, cols.end() - 1);
      ncols = cols.size();
      have_header = true;
      continue;
    }
    if (cols.size() != ncols)
      throw ParseError("report line " + std::to_string(lineno) + ": expected " + std::to_string(ncols) + " columns");
    ReportRow row;
    row.sweep = number(cols.front());
    for (std::size_t j = 1; j + 1 < cols.size(); ++j) row.metrics.push_back(number(cols[j]));
    row.runtime_s = number(cols.back());
    r.rows.push_back(row);
  }
  if (!have_header) throw ParseError("report: missing header");
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (!(r.rows[i].sweep > r.rows[i - 1].sweep)) throw ParseError("report: rows not sorted by sweep");
  return r;
}

std::string report_svg(const ExperimentReport& r) {
  if (r.rows.empty()) return {};
  const double W = 640, H = 420, L = 70, R = 20, T = 30, B = 50;
  std::vector<double> lx, ly;
  for (const auto& row : r.rows) {
    if (row.sweep > 0 && row.metrics.at(0) > 0) {
      lx.push_back(std::log10(row.sweep));
      ly.push_back(std::log10(row.metrics[0]));
    }
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!lx.empty()) {
    x0 = *std::min_element(lx.begin(), lx.end());
    x1 = *std::max_element(lx.begin(), lx.end());
    y0 = *std::min_element(ly.begin(), ly.end());
    y1 = *std::max_element(ly.begin(), ly.end());
  }
  const bool slope_plot = r.rule != "pvalue" && lx.size() >= 2;
  double cx = 0, cy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    cx += lx[i] / lx.size();
    cy += ly[i] / ly.size();
  }
  // Theory line goes through the centroid of the data.
  auto fit_y = [&](double x) { return r.fit.intercept / std::log(10.0) + r.fit.slope * x; };
  auto th_y = [&](double x) { return cy + r.theory_slope * (x - cx); };
  if (slope_plot) {
    for (double x : {x0, x1}) {
      y0 = std::min({y0, fit_y(x), th_y(x)});
      y1 = std::max({y1, fit_y(x), th_y(x)});
    }
  }
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto f2 = [](double v) { return fmt_short(v, "%.2f"); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << L << "\" y=\"18\">" << r.kind << " / " << r.density << ": log10 " << r.metric_names.at(0)
     << " vs log10 " << r.sweep_name << " (" << verdict_name(r.verdict) << ")</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    os << "<text x=\"" << f2(sx(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << f2(xv)
       << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << f2(sy(yv) + 4) << "\" text-anchor=\"end\">" << f2(yv) << "</text>\n";
  }
  if (slope_plot) {
    os << "<line x1=\"" << f2(sx(x0)) << "\" y1=\"" << f2(sy(fit_y(x0))) << "\" x2=\"" << f2(sx(x1)) << "\" y2=\""
       << f2(sy(fit_y(x1))) << "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
    os << "<line x1=\"" << f2(sx(x0)) << "\" y1=\"" << f2(sy(th_y(x0))) << "\" x2=\"" << f2(sx(x1)) << "\" y2=\""
       << f2(sy(th_y(x1))) << "\" stroke=\"darkorange\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 16 << "\" text-anchor=\"end\" fill=\"steelblue\">fitted slope "
       << fmt_short(r.fit.slope) << "</text>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 32
       << "\" text-anchor=\"end\" fill=\"darkorange\">theory slope " << fmt_short(r.theory_slope) << "</text>\n";
  }
  for (std::size_t i = 0; i < lx.size(); ++i)
    os << "<circle cx=\"" << f2(sx(lx[i])) << "\" cy=\"" << f2(sy(ly[i])) << "\" r=\"4\" fill=\"black\"/>\n";
  os << "</svg>\n";
  return os.str();
}

std::string report_txt(const ExperimentReport& r) {
  std::ostringstream os;
  os << "kind: " << r.kind << '\n';
  os << "density: " << r.density << '\n';
  os << "rows: " << r.rows.size() << '\n';
  if (!r.metric_names.empty()) os << "metric: " << r.metric_names.front() << " vs " << r.sweep_name << '\n';
  if (r.rule == "pvalue") {
    os << "rule: every p-value >= " << fmt_short(r.tolerance) << '\n';
  } else {
    os << "rule: " << r.rule << ", tolerance " << fmt_short(r.tolerance) << '\n';
    if (r.verdict != Verdict::Insufficient) {
      os << "fitted slope: " << fmt_short(r.fit.slope) << " (se " << fmt_short(r.fit.slope_stderr) << ")\n";
      os << "theory slope: " << fmt_short(r.theory_slope) << '\n';
      os << "inversions: " << count_inversions(r) << '\n';
    }
  }
  os << "complete: " << (r.complete ? "yes" : "no (wall-clock budget exhausted)") << '\n';
  for (const auto& [k, v] : r.notes) os << k << ": " << v << '\n';
  os << "verdict: " << (r.verdict == Verdict::Insufficient ? "insufficient data" : verdict_name(r.verdict)) << '\n';
  return os.str();
}

void emit_report(const ExperimentReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  const fs::path d(dir);
  write_file(d / "report.csv", report_csv(r));
  if (r.rows.empty()) {
    fs::remove(d / "report.svg", ec);
  } else {
    write_file(d / "report.svg", report_svg(r));
  }
  write_file(d / "report.txt", report_txt(r));
}

}  // namespace betamix
