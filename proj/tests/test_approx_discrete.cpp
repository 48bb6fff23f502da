#include <cmath>

#include "betamix/approx_discrete.hpp"
#include "betamix/density_corpus.hpp"
#include "betamix/errors.hpp"
#include "doctest.h"

using namespace betamix;

TEST_CASE("support grid") {
  auto g = support_grid(std::exp(1.0), 1.0, 3.0);
  CHECK(g.eps0 == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  auto h = support_grid(1e4, 1.0, 1.0);
  CHECK(std::abs(h.J - 457) <= 1);  // mpmath evaluation of the closed-form count
  const double r = 1.0 + std::sqrt(std::log(1e4) / 1e4);
  CHECK(h.ratio == doctest::Approx(r).epsilon(1e-15));
  const auto& b = h.breakpoints;
  REQUIRE(b.size() > 3);
  CHECK(b.front() == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(b.back() == doctest::Approx(1 - 1e-4).epsilon(1e-14));
  for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] > b[i - 1]);
  for (std::size_t i = 1; b[i] < 0.4; ++i) CHECK(b[i] / b[i - 1] == doctest::Approx(r).epsilon(1e-13));
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] + b[b.size() - 1 - i] == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(support_grid(1e4, 1.0, 1e-9), BudgetError);
  CHECK_THROWS_AS(support_grid(2.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(support_grid(100.0, -1.0, 1.0), DomainError);
}

TEST_CASE("discretize: masses, moments and atom placement") {
  const double alpha = 400;
  auto grid = support_grid(alpha);
  for (const char* id : {"uniform", "beta22"}) {
    auto f = density_corpus(id);
    auto d = discretize(alpha, f.eval, grid, 6);
    double total = d.left_tail + d.right_tail;
    for (const auto& c : d.cells) total += c.mass;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.max_moment_residual <= 1e-10);
    CHECK(d.mixture.size() <= 6 * grid.cells() + 2);
    double wsum = 0;
    for (const auto& a : d.mixture.atoms()) {
      wsum += a.weight;
      CHECK(a.eps >= grid.eps0);
      CHECK(a.eps <= 1 - grid.eps0);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Atoms of each cell lie inside it (uniform mixing density).
  auto d = discretize(alpha, [](double) { return 1.0; }, grid, 6);
  std::size_t k = 1;  // skip the left tail atom
  for (const auto& c : d.cells) {
    for (int i = 0; i < c.nodes; ++i, ++k) {
      CHECK(d.mixture.atoms()[k].eps > c.lo);
      CHECK(d.mixture.atoms()[k].eps < c.hi);
    }
  }
}

TEST_CASE("discretize: a mixing density inside one cell is reproduced") {
  const double alpha = 400;
  auto grid = support_grid(alpha);
  std::size_t c = 0;
  while (grid.breakpoints[c + 1] < 0.3) ++c;
  const double lo = grid.breakpoints[c], hi = grid.breakpoints[c + 1];
  RealFn f = [=](double e) { return e >= lo && e <= hi ? 1.0 / (hi - lo) : 0.0; };
  DiscretizeOptions o;
  o.kinks = {lo, hi};
  auto d = discretize(alpha, f, grid, 12, o);
  CHECK(d.skipped == static_cast<int>(grid.cells()) - 1);
  CHECK(d.mixture.size() == 12);
  ContMixOptions mo;
  mo.rel_tol = 1e-13;
  mo.kinks = {lo, hi};
  RealFn gf = [&](double x) { return cont_mix_pdf(alpha, f, x, mo); };
  RealFn gp = [&](double x) { return mix_pdf(d.mixture, x); };
  DistanceOptions dopt;
  dopt.abs_tol = 1e-12;
  CHECK(l1(gf, gp, dopt) <= 1e-8);
}

TEST_CASE("discretize: degenerate cell falls back to one node at the mean") {
  const double alpha = 400;
  auto grid = support_grid(alpha);
  const double lo = 0.3, hi = 0.3 + 1e-9;
  RealFn f = [=](double e) { return e >= lo && e <= hi ? 1e9 : 0.0; };
  DiscretizeOptions o;
  o.kinks = {lo, hi};
  auto d = discretize(alpha, f, grid, 6, o);
  CHECK(d.fallbacks == 1);
  REQUIRE(d.mixture.size() == 1);
  CHECK(d.mixture.atoms()[0].eps == doctest::Approx(0.3 + 5e-10).epsilon(1e-12));
}

TEST_CASE("floor_weights") {
  DiscreteMixture m(1000.0, {{1 - 1e-6, 0.3}, {1e-6, 0.7}});
  auto r = floor_weights(m, 1.0);  // v = 1e-3
  CHECK(r.floored == 1);
  CHECK(r.c == doctest::Approx(1 / 1.000999).epsilon(1e-14));
  CHECK(r.mixture.atoms()[0].weight == doctest::Approx((1 - 1e-6) / 1.000999).epsilon(1e-14));
  CHECK(r.mixture.atoms()[1].weight == doctest::Approx(1e-3 / 1.000999).epsilon(1e-14));
  CHECK(std::abs(r.c - 1) <= 2 * 1e-3);

  auto again = floor_weights(r.mixture, 1.0);
  CHECK(again.floored == 0);
  CHECK(again.c == 1.0);
  CHECK(again.mixture.to_text() == r.mixture.to_text());

  DiscreteMixture ok(1000.0, {{0.5, 0.3}, {0.5, 0.7}});
  CHECK(floor_weights(ok, 1.0).mixture.to_text() == ok.to_text());

  // Mixture-level change stays within 2 k v.
  const double alpha = 100, A = 2, v = std::pow(alpha, -A);
  auto d = discretize(alpha, density_corpus("beta22").eval, support_grid(alpha), 6).mixture;
  auto fl = floor_weights(d, A);
  CHECK(fl.floored > 0);
  const double k = static_cast<double>(d.size());
  for (const auto& a : fl.mixture.atoms()) CHECK(a.weight >= v / (1 + k * v) * (1 - 1e-12));
  CHECK(std::abs(fl.c - 1) <= k * v);
  std::vector<double> bp;
  for (const auto& a : d.atoms()) bp.push_back(a.eps);
  DistanceOptions dopt;
  dopt.breakpoints = bp;
  dopt.abs_tol = 1e-12;
  double dist = l1([&](double x) { return mix_pdf(d, x); }, [&](double x) { return mix_pdf(fl.mixture, x); }, dopt);
  CHECK(dist <= 2 * k * v);
}

TEST_CASE("discrete_kl_report") {
  auto rep = discrete_kl_report(density_corpus("beta22"), {100, 400});
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(r.kl >= 0);
    CHECK(r.vp >= 0);
    CHECK(r.budget_ratio <= 3.0);
    CHECK(r.correction_steps == 1);
  }
  CHECK(rep.rows[1].kl < rep.rows[0].kl);
  CHECK(rep.to_csv().rfind("alpha,kl,vp,atoms\n", 0) == 0);
}
