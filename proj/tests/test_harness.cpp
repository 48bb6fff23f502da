#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "betamix/density_corpus.hpp"
#include "betamix/errors.hpp"
#include "betamix/harness.hpp"
#include "betamix/numkit.hpp"
#include "betamix/priors.hpp"
#include "betamix/stats.hpp"
#include "doctest.h"

using namespace betamix;

TEST_CASE("corpus members are valid densities satisfying A0") {
  for (const auto& id : corpus_ids()) {
    for (double beta : {0.5, 1.0}) {
      auto f = density_corpus(id, {{"beta", beta}});
      IntegrateOptions opt;
      opt.rel_tol = opt.abs_tol = 1e-12;
      opt.breakpoints = f.kinks;
      CHECK(integrate(f.eval, 0.0, 1.0, opt).value == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(satisfies_a0(f));
      CHECK(f.boundary.k0 < f.holder.beta);
      for (double x : {0.0, 0.3, 0.5, 1.0}) CHECK(f.cdf(x) >= 0.0);
      CHECK(f.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
      for (double x : {0.1, 0.45, 0.6, 0.9}) {
        CHECK(f(x) >= 0.0);
        double num = integrate(f.eval, 0.0, x, opt).value;
        CHECK(f.cdf(x) == doctest::Approx(num).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("corpus examples") {
  auto u = density_corpus("uniform");
  CHECK(u(0.3) == 1.0);
  CHECK(u.cdf(0.3) == 0.3);
  auto b = density_corpus("beta22");
  CHECK(b.deriv(1)(0.0) == 6.0);
  CHECK(b.boundary.k0 == 1);
  auto r = density_corpus("rough", {{"beta", 0.5}});
  CHECK(r(0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r(0.0) == doctest::Approx(0.75 * 1.5).epsilon(1e-15));
  CHECK_THROWS_AS(r.deriv(1), DomainError);
  CHECK_THROWS_AS(density_corpus("nope"), CatalogError);
  try {
    density_corpus("nope");
  } catch (const CatalogError& e) {
    CHECK(std::string(e.what()).find("beta22") != std::string::npos);
  }
  CHECK_THROWS_AS(density_corpus("rough", {{"beta", 1.5}}), DomainError);
}

TEST_CASE("corpus samplers pass KS at 1 percent") {
  Rng rng(99);
  for (const auto& id : corpus_ids()) {
    auto f = density_corpus(id, {{"beta", 1.0}});
    std::vector<double> draws(100000);
    for (double& d : draws) d = f.sample(rng);
    CHECK(ks_test(draws, f.cdf).p_value > 0.01);
  }
}

namespace {

ExperimentReport toy_report(double slope, const std::string& rule = "band") {
  ExperimentReport r;
  r.kind = "approx-continuous";
  r.density = "toy";
  r.sweep_name = "alpha";
  r.metric_names = {"sup_err", "kl"};
  for (double a : {100.0, 200.0, 400.0, 800.0})
    r.rows.push_back({a, {3.0 * std::pow(a, slope), 0.1 / a}, 0.25});
  r.theory_slope = -1.0;
  r.tolerance = 0.2;
  r.rule = rule;
  judge(r);
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("betamix_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("verdict rules") {
  auto r = toy_report(-1.1);
  CHECK(r.fit.slope == doctest::Approx(-1.1).epsilon(1e-12));
  CHECK(r.verdict == Verdict::Pass);
  CHECK(toy_report(-1.3).verdict == Verdict::Fail);
  CHECK(toy_report(-1.3, "upper").verdict == Verdict::Pass);
  CHECK(toy_report(-0.7, "upper").verdict == Verdict::Fail);

  auto m = toy_report(-1.0, "band_monotone");
  CHECK(m.verdict == Verdict::Pass);
  m.rows[1].metrics[0] = m.rows[0].metrics[0] * 1.01;  // one inversion is tolerated
  CHECK(count_inversions(m) == 1);
  CHECK(judge(m) == Verdict::Pass);
  m.rows[3].metrics[0] = m.rows[2].metrics[0] * 1.01;
  CHECK(count_inversions(m) == 2);
  CHECK(judge(m) == Verdict::Fail);

  ExperimentReport one = toy_report(-1.0);
  one.rows.resize(1);
  CHECK(judge(one) == Verdict::Insufficient);

  ExperimentReport p;
  p.rule = "pvalue";
  p.tolerance = 0.01;
  p.metric_names = {"p_value"};
  CHECK(judge(p) == Verdict::Insufficient);
  p.rows = {{1, {0.3}, 0}, {2, {0.02}, 0}};
  CHECK(judge(p) == Verdict::Pass);
  p.rows[1].metrics[0] = 0.001;
  CHECK(judge(p) == Verdict::Fail);
}

TEST_CASE("empty report: header-only CSV, no SVG, insufficient data") {
  ExperimentReport r;
  r.kind = "posterior-rate";
  r.sweep_name = "n";
  r.metric_names = {"l1_median"};
  judge(r);
  CHECK(r.verdict == Verdict::Insufficient);
  const auto dir = scratch_dir("empty");
  emit_report(r, dir.string());
  CHECK(slurp(dir / "report.csv") == "sweep,l1_median,runtime_s\n");
  CHECK_FALSE(std::filesystem::exists(dir / "report.svg"));
  CHECK(slurp(dir / "report.txt").find("verdict: insufficient data") != std::string::npos);
  auto back = parse_report_csv(slurp(dir / "report.csv"));
  CHECK(back.rows.empty());
  CHECK(judge(back) == Verdict::Insufficient);
  std::filesystem::remove_all(dir);
}

TEST_CASE("report emission is deterministic and round-trips") {
  auto r = toy_report(-0.93);
  r.notes["beta"] = "2";
  r.complete = false;
  const auto dir = scratch_dir("emit");
  emit_report(r, dir.string());
  const auto csv = slurp(dir / "report.csv"), svg = slurp(dir / "report.svg"), txt = slurp(dir / "report.txt");
  emit_report(r, dir.string());
  CHECK(slurp(dir / "report.csv") == csv);
  CHECK(slurp(dir / "report.svg") == svg);
  CHECK(slurp(dir / "report.txt") == txt);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("theory slope -1") != std::string::npos);

  auto back = parse_report_csv(csv);
  REQUIRE(back.rows.size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(back.rows[i].sweep == r.rows[i].sweep);
    CHECK(back.rows[i].metrics == r.rows[i].metrics);
    CHECK(back.rows[i].runtime_s == r.rows[i].runtime_s);
  }
  CHECK(back.metric_names == r.metric_names);
  CHECK(back.tolerance == r.tolerance);
  CHECK(back.theory_slope == r.theory_slope);
  CHECK_FALSE(back.complete);
  CHECK(back.notes == r.notes);
  const Verdict stored = back.verdict;
  CHECK(judge(back) == stored);  // re-verdict from the stored CSV
  CHECK(back.fit.slope == r.fit.slope);
  CHECK(report_csv(back) == csv);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(parse_report_csv("alpha,x\n1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_report_csv("sweep,x,runtime_s\n1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_report_csv("sweep,x,runtime_s\n2,1,0\n1,1,0\n"), ParseError);
  CHECK_THROWS_AS(parse_report_csv("sweep,x,runtime_s\n1,abc,0\n"), ParseError);
}

TEST_CASE("experiment config parsing and validation") {
  auto kv = KvConfig::parse("kind = posterior-rate\ngrid = 100, 200\nreplications = 3\na_k = 2\nsampler = dirichlet\n");
  auto c = ExperimentConfig::from_kv(kv);
  CHECK(c.kind == ExperimentKind::PosteriorRate);
  CHECK(c.grid == std::vector<double>{100, 200});
  CHECK(c.replications == 3);
  CHECK(c.sampler == SamplerKind::Dirichlet);
  CHECK(c.prior.get_double("a_k", 0) == 2.0);
  CHECK_NOTHROW(c.validate());

  CHECK_THROWS_AS(ExperimentConfig::from_kv(KvConfig::parse("grdi = 1,2\n")), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::from_kv(KvConfig::parse("kind = nope\n")), ParseError);
  c.grid = {200, 100};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.grid = {};
  CHECK_THROWS_AS(c.validate(), ContractError);
  c.grid = {100, 200};
  c.replications = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("l1 rule") {
  const auto rule = l1_rule();
  double s = 0;
  for (double w : rule.weights) s += w;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  auto f = density_corpus("beta22");
  std::vector<double> same, twice, flat;
  for (double x : rule.nodes) {
    same.push_back(f(x));
    twice.push_back(2.0 * f(x));
    flat.push_back(1.0);
  }
  CHECK(l1_on_rule(rule, same, f) == 0.0);
  CHECK(l1_on_rule(rule, twice, f) == doctest::Approx(1.0).epsilon(1e-13));
  // 2 sqrt(3) / 9 in closed form (sympy); the kinks of |1 - f| fall inside panels
  CHECK(l1_on_rule(rule, flat, f) == doctest::Approx(2.0 * std::sqrt(3.0) / 9.0).epsilon(1e-5));
}

TEST_CASE("approximation experiment on the uniform density") {
  ExperimentConfig c;
  c.kind = ExperimentKind::ApproxContinuous;
  c.density = "uniform";
  c.grid = {100, 400, 1600};
  c.sup_grid = 257;
  c.threads = 2;
  auto r = run_approx_experiment(c);
  CHECK(r.rows.size() == 3);
  CHECK(r.metric_names.front() == "sup_err");
  CHECK(r.theory_slope == -1.0);
  CHECK(r.fit.slope == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(r.verdict == Verdict::Pass);
  c.metric = "kl";
  auto k = run_approx_experiment(c);
  CHECK(k.metric_names.front() == "kl");
  CHECK(k.theory_slope == -2.0);
  CHECK(k.rows[0].metrics[1] == r.rows[0].metrics[0]);  // same sup_err, moved to column 2
}

TEST_CASE("posterior experiment is independent of thread count; budget marks it incomplete") {
  ExperimentConfig c;
  c.kind = ExperimentKind::PosteriorRate;
  c.grid = {100, 200};
  c.replications = 2;
  c.iters = 300;
  c.burnin = 100;
  c.thin = 5;
  c.seed = 17;
  c.threads = 1;
  auto a = run_posterior_experiment(c);
  c.threads = 3;
  auto b = run_posterior_experiment(c);
  REQUIRE(a.rows.size() == 2);
  REQUIRE(b.rows.size() == 2);
  for (int i = 0; i < 2; ++i) CHECK(a.rows[i].metrics == b.rows[i].metrics);
  CHECK(a.theory_slope == doctest::Approx(-4.0 / 9.0));  // declared beta 4
  CHECK(a.complete);

  c.deterministic_alpha = true;
  c.beta = 2.0;
  auto d = run_posterior_experiment(c);
  CHECK(d.theory_slope == doctest::Approx(-0.4));
  CHECK(d.rows[0].metrics[3] == doctest::Approx(optimal_alpha_n(2.0, 100)));

  c.sampler = SamplerKind::Dirichlet;
  c.deterministic_alpha = false;
  auto dp = run_posterior_experiment(c);
  CHECK(dp.rows.size() == 2);
  CHECK(dp.rows[0].metrics[0] > 0.0);

  c.sampler = SamplerKind::Adaptive;
  c.budget_seconds = 1e-9;
  c.threads = 1;
  auto cut = run_posterior_experiment(c);
  CHECK_FALSE(cut.complete);
  CHECK(cut.rows.size() < 2);
  CHECK(cut.verdict == Verdict::Insufficient);
  CHECK(report_txt(cut).find("complete: no") != std::string::npos);
}

TEST_CASE("prior sanity experiment passes") {
  ExperimentConfig c;
  c.kind = ExperimentKind::PriorSanity;
  c.draws = 5000;
  auto r = run_experiment(c);
  CHECK(r.rows.size() == 4);
  CHECK(r.tolerance == 0.01);
  CHECK(r.verdict == Verdict::Pass);
}
