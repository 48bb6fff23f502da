#include <cmath>

#include "betamix/approx_continuous.hpp"
#include "betamix/density_corpus.hpp"
#include "betamix/errors.hpp"
#include "doctest.h"

using namespace betamix;

namespace {

TargetDensity beta22_declared(double beta) {
  auto f = density_corpus("beta22");
  f.holder.beta = beta;
  return f;
}

double integral01(const RealFn& f) {
  IntegrateOptions o;
  o.abs_tol = o.rel_tol = 1e-12;
  return integrate(f, 0.0, 1.0, o).value;
}

}  // namespace

TEST_CASE("uniform defect: symmetry and convergence in alpha") {
  auto d = uniform_defect(800.0, {0.2, 0.5, 0.8, 0.07, 0.93});
  CHECK(d[0].value == doctest::Approx(d[2].value).epsilon(1e-6));
  CHECK(d[3].value == doctest::Approx(d[4].value).epsilon(1e-6));
  auto d2 = uniform_defect(1600.0, {0.5});
  CHECK(std::abs(d2[0].value - d[1].value) <= 0.25 * std::abs(d2[0].value));

  std::vector<double> as, sups;
  for (double a = 50; a <= 3200; a *= 2) {
    double sup = 0;
    for (double x = 0.2; x <= 0.8 + 1e-12; x += 0.05) sup = std::max(sup, std::abs(uniform_mixture_pdf(a, x) - 1));
    as.push_back(a);
    sups.push_back(sup);
  }
  CHECK(fit_loglog(as, sups).slope == doctest::Approx(-1.0).epsilon(0.3));

  CHECK_THROWS_AS(uniform_defect(-1.0, {0.5}), DomainError);
  CHECK_THROWS_AS(uniform_defect(10.0, {1.0}), DomainError);
}

TEST_CASE("correct_once on the uniform keeps only the defect term") {
  const double alpha = 400;
  auto f = density_corpus("uniform");
  auto step = correct_once(f, alpha);
  CHECK_FALSE(step.clipped);
  for (double x : {0.1, 0.33, 0.5, 0.8}) {
    double I = uniform_defect(alpha, {x})[0].value;
    CHECK(step.density(x) == doctest::Approx((1 - I / alpha) / step.normalizer).epsilon(1e-8));
  }
  CHECK(integral01(step.density) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("correct_once on Beta(2,2)") {
  const double alpha = 1600;
  auto f = density_corpus("beta22");
  auto step = correct_once(f, alpha);
  CHECK(std::abs(step.normalizer - 1.0) <= 0.05);
  CHECK(step.min_value > 0);
  CHECK(integral01(step.density) == doctest::Approx(1.0).epsilon(1e-8));

  auto grid = chebyshev_grid(257);
  ContMixOptions mo;
  mo.rel_tol = 1e-11;
  RealFn g0 = [&](double x) { return cont_mix_pdf(alpha, f.eval, x, mo); };
  RealFn g1 = [&](double x) { return cont_mix_pdf(alpha, step.density, x, mo); };
  double e0 = sup_dist(f.eval, g0, grid), e1 = sup_dist(f.eval, g1, grid);
  CHECK(e1 < e0 / 10);

  SUBCASE("small alpha is rejected with the offending x") {
    try {
      correct_once(f, 2.0);
      FAIL("expected CorrectionError");
    } catch (const CorrectionError& e) {
      CHECK(e.x > 0.0);
      CHECK(e.x < 1.0);
    }
    CorrectionOptions co;
    co.clip = true;
    auto clipped = correct_once(f, 2.0, co);
    CHECK(clipped.clipped);
    CHECK(integral01(clipped.density) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("build_f1 step counts follow the smoothness") {
  CHECK(correction_steps_for(1.5) == 0);
  CHECK(correction_steps_for(2.0) == 0);
  CHECK(correction_steps_for(3.0) == 1);
  CHECK(correction_steps_for(4.0) == 1);
  CHECK(correction_steps_for(5.0) == 2);

  auto l0 = build_f1(beta22_declared(1.5), 400);
  CHECK(l0.steps.empty());
  CHECK(l0.final(0.3) == beta22_declared(1.5)(0.3));

  auto l1 = build_f1(beta22_declared(3), 400);
  CHECK(l1.steps.size() == 1);

  auto l2 = build_f1(beta22_declared(5), 400);
  REQUIRE(l2.steps.size() == 2);
  CHECK(l2.valid);
  for (const auto& s : l2.steps) {
    CHECK(std::abs(s.normalizer - 1) <= 0.5);
    CHECK(s.min_value > 0);
    CHECK(integral01(s.density) == doctest::Approx(1.0).epsilon(1e-8));
  }
  // The second step should not make things worse.
  auto f = density_corpus("beta22");
  auto grid = chebyshev_grid(129);
  ContMixOptions mo;
  mo.rel_tol = 1e-11;
  double e1 = sup_dist(f.eval, [&](double x) { return cont_mix_pdf(400, l2.steps[0].density, x, mo); }, grid);
  double e2 = sup_dist(f.eval, [&](double x) { return cont_mix_pdf(400, l2.final, x, mo); }, grid);
  CHECK(e2 <= e1);

  // Mixture of the corrected density stays above f/8.
  for (double x : grid) CHECK(cont_mix_pdf(400, l1.final, x, mo) >= f(x) / 8);
}

TEST_CASE("approx_rate_report rows and csv") {
  ApproxRateOptions opt;
  opt.sup_grid = 129;
  auto rep = approx_rate_report(density_corpus("beta22"), {100, 400, 1600}, opt);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    CHECK(r.kl >= 0);
    CHECK(r.vp >= 0);
  }
  CHECK(rep.sup_fit.slope == doctest::Approx(-1.0).epsilon(0.25));
  auto csv = rep.to_csv();
  CHECK(csv.rfind("alpha,sup_err,kl,vp\n", 0) == 0);
  CHECK(csv.find("# slope_sup=") != std::string::npos);
  CHECK_THROWS_AS(approx_rate_report(density_corpus("beta22"), {400, 100}, opt), ContractError);
}
