// betamix command line: rate experiments and single-dataset fits.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "betamix/errors.hpp"
#include "betamix/harness.hpp"
#include "betamix/priors.hpp"
#include "betamix/sampler.hpp"

using namespace betamix;

namespace {

struct Common {
  std::string config;
  std::string out = "betamix_out";
  std::uint64_t seed = 0;
  int threads = 0;
  double budget = -1.0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value experiment file")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed (overrides config)");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads (overrides config)")->check(CLI::PositiveNumber);
  sub->add_option("--budget-seconds", c.budget, "wall-clock budget, 0 for none")->check(CLI::NonNegativeNumber);
}

KvConfig load_config(const Common& c, const char* kind) {
  KvConfig kv = c.config.empty() ? KvConfig{} : KvConfig::load(c.config);
  if (kind) kv.set("kind", kind);
  if (c.seed) kv.set("seed", std::to_string(c.seed));
  if (c.threads) kv.set("threads", std::to_string(c.threads));
  if (c.budget >= 0) kv.set("budget_seconds", std::to_string(c.budget));
  return kv;
}

// Default sweeps when the config gives none.
void default_grid(KvConfig& kv, const char* grid) {
  if (!kv.has("grid")) kv.set("grid", grid);
}

int run(const Common& c, KvConfig kv) {
  auto cfg = ExperimentConfig::from_kv(kv);
  const auto rep = run_experiment(cfg);
  emit_report(rep, c.out);
  std::cout << report_txt(rep);
  return rep.verdict == Verdict::Pass ? 0 : 2;
}

std::vector<double> read_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path);
  std::vector<double> v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r,");
    const std::string tok = line.substr(b, e - b + 1);
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": not a number: '" + tok + "'");
    }
  }
  return v;
}

int fit(const Common& c, const std::string& data_path, bool jitter) {
  KvConfig kv = load_config(c, nullptr);
  kv.set("kind", "posterior-rate");
  default_grid(kv, "2");
  const auto cfg = ExperimentConfig::from_kv(kv);
  const auto data = ingest_data(read_data(data_path), jitter);
  Chain chain;
  if (cfg.sampler == SamplerKind::Adaptive) {
    RjOptions o;
    o.iters = cfg.iters;
    o.burnin = cfg.burnin;
    o.thin = cfg.thin;
    o.seed = cfg.seed;
    if (cfg.deterministic_alpha) {
      const double beta = std::isnan(cfg.beta) ? 2.0 : cfg.beta;
      o.fixed_alpha = optimal_alpha_n(beta, static_cast<double>(data.size()));
    }
    chain = rjmcmc_fit(data, adaptive_prior_from(cfg.prior), o);
  } else {
    DpOptions o;
    o.iters = cfg.iters;
    o.burnin = cfg.burnin;
    o.thin = cfg.thin;
    o.truncation = cfg.truncation;
    o.seed = cfg.seed;
    chain = dp_fit(data, dp_prior_from(cfg.prior, static_cast<double>(data.size())), o);
  }
  namespace fs = std::filesystem;
  fs::create_directories(c.out);
  std::vector<double> grid;
  for (int i = 1; i < 1000; ++i) grid.push_back(i / 1000.0);
  const auto dens = posterior_mean_density(chain, cfg.burnin, grid);
  {
    std::ofstream os(fs::path(c.out) / "posterior_mean.csv");
    if (!os) throw IoError("cannot write " + (fs::path(c.out) / "posterior_mean.csv").string());
    os << "x,density\n";
    char buf[64];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.3f,%.17g\n", grid[i], dens[i]);
      os << buf;
    }
  }
  const auto diag = diagnostics(chain, cfg.burnin);
  std::ofstream(fs::path(c.out) / "diagnostics.csv") << diag.to_csv();
  std::ofstream(fs::path(c.out) / "chain.txt") << serialize_chain(chain);
  std::cout << "n: " << data.size() << "\nrecords: " << diag.records << "\ness(log_lik): " << diag.ess_log_lik
            << "\n";
  for (int m = 0; m < kMoveCount; ++m) std::cout << "acceptance " << move_name(m) << ": " << diag.acceptance[m] << "\n";
  std::cout << "written: " << c.out << "/{posterior_mean.csv,diagnostics.csv,chain.txt}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beta-mixture density estimation: approximation and posterior rate experiments"};
  app.require_subcommand(1);
  Common c;
  auto* approx = app.add_subcommand("approx", "continuous-mixture approximation rates over an alpha grid");
  auto* disc = app.add_subcommand("discretize", "discrete-mixture KL rates over an alpha grid");
  auto* fitc = app.add_subcommand("fit", "posterior fit of one dataset");
  auto* rates = app.add_subcommand("rates", "posterior contraction rate experiment over an n grid");
  auto* prior = app.add_subcommand("priorcheck", "prior sampler sanity checks");
  for (auto* s : {approx, disc, fitc, rates, prior}) add_common(s, c);
  std::string data;
  bool jitter = false;
  fitc->add_option("--data", data, "one observation per line, in (0,1)")->required()->check(CLI::ExistingFile);
  fitc->add_flag("--jitter", jitter, "move values within 1e-6 outside (0,1) to 1e-9 inside");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (*approx) {
      auto kv = load_config(c, "approx-continuous");
      default_grid(kv, "100,200,400,800,1600,3200,6400");
      return run(c, kv);
    }
    if (*disc) {
      auto kv = load_config(c, "approx-discrete");
      default_grid(kv, "100,200,400,800,1600");
      return run(c, kv);
    }
    if (*rates) {
      auto kv = load_config(c, "posterior-rate");
      default_grid(kv, "250,500,1000,2000,4000");
      if (!kv.has("replications")) kv.set("replications", "5");
      return run(c, kv);
    }
    if (*prior) return run(c, load_config(c, "prior-sanity"));
    if (*fitc) return fit(c, data, jitter);
  } catch (const std::exception& e) {
    std::cerr << "betamix: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
