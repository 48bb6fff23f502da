#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "betamix/density_corpus.hpp"
#include "betamix/kv_config.hpp"
#include "betamix/sampler.hpp"

namespace betamix {

enum class ExperimentKind { ApproxContinuous, ApproxDiscrete, PosteriorRate, PriorSanity };
const char* kind_name(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

enum class SamplerKind { Adaptive, Dirichlet };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ApproxContinuous;
  std::string density = "beta22";
  std::map<std::string, double> density_params;
  std::vector<double> grid;  // alpha values or sample sizes, increasing
  int replications = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  double budget_seconds = 0.0;  // 0 means unlimited
  std::string out_dir;

  // Verdict: slope of the primary metric against the theory slope.
  double tolerance = std::nan("");  // NaN picks 0.2 for slopes, 0.01 for p-values
  double theory_slope = std::nan("");  // NaN derives it from the rate formulas
  double beta = std::nan("");          // smoothness used for theory; NaN takes the density's
  std::string rule;  // band | upper | band_monotone | pvalue; empty picks per kind

  // approx-continuous / approx-discrete
  bool correct = false;
  std::string metric;  // sup | kl | vp; empty picks sup (continuous) or kl (discrete)
  double p = 2.0;
  double t0 = 1.0, M = 1.0, A = 8.0;
  int nodes_per_cell = 6;
  int sup_grid = 4097;

  // posterior-rate
  SamplerKind sampler = SamplerKind::Adaptive;
  bool deterministic_alpha = false;
  long iters = 20000, burnin = 4000;
  int thin = 10;
  int truncation = 200;

  long draws = 20000;  // prior-sanity draws per check

  KvConfig prior;  // prior keys (a_k, T, dp_mass, ...)

  static ExperimentConfig from_kv(const KvConfig& kv);
  void validate() const;
};

enum class Verdict { Pass, Fail, Insufficient };
const char* verdict_name(Verdict v);

struct ReportRow {
  double sweep = 0.0;
  std::vector<double> metrics;
  double runtime_s = 0.0;
};

struct ExperimentReport {
  std::string kind;
  std::string density;
  std::string sweep_name;                 // "alpha" or "n"
  std::vector<std::string> metric_names;  // primary metric first
  std::vector<ReportRow> rows;
  LineFit fit;
  double theory_slope = 0.0;
  double tolerance = 0.0;
  std::string rule = "band";
  Verdict verdict = Verdict::Insufficient;
  bool complete = true;
  std::map<std::string, std::string> notes;  // extra key=value lines
};

// Refit the primary metric and apply the rule; pure function of the rows.
Verdict judge(ExperimentReport& r);
// Inversions of the primary metric along the sweep (increases).
int count_inversions(const ExperimentReport& r);

ExperimentReport run_approx_experiment(const ExperimentConfig& cfg);
ExperimentReport run_posterior_experiment(const ExperimentConfig& cfg);
ExperimentReport run_prior_sanity(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// report.csv, report.svg (when rows exist) and report.txt in dir.
void emit_report(const ExperimentReport& r, const std::string& dir);
std::string report_csv(const ExperimentReport& r);
std::string report_svg(const ExperimentReport& r);
std::string report_txt(const ExperimentReport& r);
ExperimentReport parse_report_csv(const std::string& text);

// L1 distance between values of a density on `grid` and f0, using the
// composite rule from l1_rule().
struct PointRule {
  std::vector<double> nodes, weights;
};
PointRule l1_rule();
double l1_on_rule(const PointRule& rule, const std::vector<double>& values, const TargetDensity& f0);

std::vector<double> simulate(const TargetDensity& f, int n, std::uint64_t seed);

}  // namespace betamix
