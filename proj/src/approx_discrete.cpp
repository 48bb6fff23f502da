#include "betamix/approx_discrete.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "betamix/errors.hpp"

namespace betamix {

namespace {

constexpr double kMinCellMass = 1e-15;
constexpr long kMaxCells = 1000000;

double integrate_piece(const RealFn& f, double lo, double hi, const std::vector<double>& kinks, double rel_tol) {
  IntegrateOptions io;
  io.rel_tol = rel_tol;
  io.abs_tol = 1e-300;
  for (double k : kinks)
    if (k > lo && k < hi) io.breakpoints.push_back(k);
  try {
    return integrate(f, lo, hi, io).value;
  } catch (const AccuracyError& e) {
    return e.best_estimate;
  }
}

}  // namespace

SupportGrid support_grid(double alpha, double t0, double M) {
  if (!(alpha >= std::exp(1.0) * (1 - 1e-15))) throw DomainError("support_grid: alpha must be at least e");
  if (!(t0 > 0.0) || !(M > 0.0)) throw DomainError("support_grid: t0 and M must be positive");
  SupportGrid g;
  g.alpha = alpha;
  g.t0 = t0;
  g.M = M;
  const double la = std::log(alpha);
  g.eps0 = std::pow(alpha, -t0);
  g.ratio = 1.0 + M * std::sqrt(la / alpha);
  const double Jd = std::floor((t0 * la + 2.0 * std::log(la)) / std::log1p(M * std::sqrt(la / alpha))) + 1.0;
  if (!(Jd <= kMaxCells)) throw BudgetError("support_grid: cell count exceeds 1e6");
  g.J = static_cast<long>(Jd);
  if (g.eps0 >= 0.5) throw DomainError("support_grid: eps0 must be below 1/2");
  if (!(1.0 - g.eps0 < 1.0)) throw DomainError("support_grid: 1 - eps0 rounds to 1");

  std::vector<double> left{g.eps0};
  // Geometric breakpoints up to 1/2; a last cell shorter than a fifth of a
  // step is merged into its neighbour.
  for (;;) {
    const double next = left.back() * g.ratio;
    if (next >= 0.5) break;
    left.push_back(next);
    if (static_cast<long>(left.size()) > kMaxCells) throw BudgetError("support_grid: cell count exceeds 1e6");
  }
  if (left.size() > 1 && 0.5 - left.back() < 0.2 * (left.back() - left[left.size() - 2])) left.pop_back();
  g.breakpoints = left;
  g.breakpoints.push_back(0.5);
  for (auto it = left.rbegin(); it != left.rend(); ++it)
    if (1.0 - *it > g.breakpoints.back()) g.breakpoints.push_back(1.0 - *it);
  return g;
}

Discretization discretize(double alpha, const RealFn& f, const SupportGrid& grid, int nodes_per_cell,
                          const DiscretizeOptions& opt) {
  if (!(alpha > 0.0)) throw DomainError("discretize: alpha must be positive");
  if (nodes_per_cell < 1 || nodes_per_cell > kMaxGaussNodes)
    throw ContractError("discretize: nodes_per_cell must be in [1, 12]");
  if (grid.breakpoints.size() < 2) throw ContractError("discretize: empty grid");
  const int N = nodes_per_cell;
  Discretization out;
  std::vector<Atom> atoms;

  const double e0 = grid.breakpoints.front(), e1 = grid.breakpoints.back();
  out.left_tail = e0 > 0.0 ? integrate_piece(f, 0.0, e0, opt.kinks, opt.rel_tol) : 0.0;
  out.right_tail = e1 < 1.0 ? integrate_piece(f, e1, 1.0, opt.kinks, opt.rel_tol) : 0.0;
  if (out.left_tail > 0) atoms.push_back({out.left_tail, e0});

  for (std::size_t c = 0; c + 1 < grid.breakpoints.size(); ++c) {
    const double lo = grid.breakpoints[c], hi = grid.breakpoints[c + 1], w = hi - lo;
    CellRecord rec{lo, hi, 0.0, 0};
    MomentVector mv;
    mv.m.resize(2 * N);
    for (int k = 0; k < 2 * N; ++k) {
      auto fk = [&](double e) {
        const double t = (e - lo) / w;
        return f(e) * std::pow(t, k);
      };
      mv.m[k] = integrate_piece(fk, lo, hi, opt.kinks, opt.rel_tol) / w;
    }
    rec.mass = mv.m[0] * w;
    if (!(rec.mass >= kMinCellMass)) {
      ++out.skipped;
      out.cells.push_back(rec);
      continue;
    }
    const double m0 = mv.m[0];
    for (double& v : mv.m) v /= m0;
    QuadratureRule rule;
    try {
      rule = gauss_from_moments(mv, N);
    } catch (const DegeneracyError&) {
      rule.nodes = {mv.m[1]};
      rule.weights = {1.0};
      rec.fallback = true;
      ++out.fallbacks;
    }
    rec.nodes = static_cast<int>(rule.size());
    const int checked = rec.fallback ? 2 : 2 * N;
    for (int k = 0; k < checked; ++k) {
      double s = 0;
      for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
      rec.moment_residual = std::max(rec.moment_residual, std::abs(s - mv.m[k]) / std::abs(mv.m[k]));
    }
    out.max_moment_residual = std::max(out.max_moment_residual, rec.moment_residual);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double e = std::clamp(lo + w * rule.nodes[i], lo, hi);
      atoms.push_back({rec.mass * rule.weights[i], e});
    }
    out.cells.push_back(rec);
  }
  if (out.right_tail > 0) atoms.push_back({out.right_tail, e1});
  out.mixture = DiscreteMixture::normalized(alpha, std::move(atoms));
  return out;
}

FloorResult floor_weights(const DiscreteMixture& m, double A) {
  if (!(A > 0.0)) throw DomainError("floor_weights: A must be positive");
  const double v = std::pow(m.alpha(), -A);
  std::vector<Atom> atoms = m.atoms();
  const double k = static_cast<double>(atoms.size());
  const double tau = v / (1.0 + k * v);
  FloorResult r{m, 1.0, 0};
  for (int pass = 0; pass < 64; ++pass) {
    double off = 0.0;
    int n_low = 0;
    for (const auto& a : atoms) {
      if (a.weight < tau) ++n_low;
      else off += a.weight;
    }
    if (n_low == 0) break;
    const double c = 1.0 / (off + n_low * v);
    for (auto& a : atoms) a.weight = a.weight < tau ? c * v : c * a.weight;
    r.c *= c;
    r.floored += n_low;
  }
  if (r.floored > 0) r.mixture = DiscreteMixture::normalized(m.alpha(), std::move(atoms));
  return r;
}

double atom_budget(double alpha, double N0) { return N0 * std::sqrt(alpha) * std::pow(std::log(alpha), 1.5); }

std::string DiscreteKlReport::to_csv() const {
  std::ostringstream os;
  os << "alpha,kl,vp,atoms\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", r.alpha, r.kl, r.vp, r.atoms);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# slope_kl=%.6g(%.2g) slope_vp=%.6g(%.2g) density=%s corrected=%d\n", kl_fit.slope,
                kl_fit.slope_stderr, vp_fit.slope, vp_fit.slope_stderr, density.c_str(), corrected ? 1 : 0);
  os << buf;
  return os.str();
}

DiscreteRow discrete_row(const TargetDensity& f0, double alpha, const DiscreteKlOptions& opt) {
  CorrectionLedger led;
  if (opt.correct) {
    led = build_f1(f0, alpha, opt.build);
  } else {
    led.final = f0.eval;
    led.kinks = f0.kinks;
  }
  auto grid = support_grid(alpha, opt.t0, opt.M);
  DiscretizeOptions dopt;
  dopt.kinks = led.kinks;
  auto disc = discretize(alpha, led.final, grid, opt.nodes_per_cell, dopt);
  auto floored = floor_weights(disc.mixture, opt.A).mixture;
  RealFn log_g = [&floored](double x) { return log_mix_pdf(floored, x); };
  DistanceOptions d;
  d.rel_tol = 1e-9;
  d.abs_tol = 1e-18;
  d.breakpoints = f0.kinks;
  DiscreteRow row;
  row.alpha = alpha;
  row.kl = kl_log(f0.eval, log_g, d);
  row.vp = v_p_log(f0.eval, log_g, opt.p, d);
  row.atoms = static_cast<int>(floored.size());
  row.budget_ratio = row.atoms / atom_budget(alpha, 1.0);
  row.correction_steps = static_cast<int>(led.steps.size());
  return row;
}

DiscreteKlReport discrete_kl_report(const TargetDensity& f0, const std::vector<double>& alpha_grid,
                                    const DiscreteKlOptions& opt) {
  if (alpha_grid.size() < 2) throw ContractError("discrete_kl_report: need at least two alphas");
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] > alpha_grid[i - 1])) throw ContractError("discrete_kl_report: alpha grid must increase");
  const auto t0 = std::chrono::steady_clock::now();
  DiscreteKlReport rep;
  rep.density = f0.name;
  rep.corrected = opt.correct;
  rep.p = opt.p;
  std::vector<double> as, kls, vps;
  for (double alpha : alpha_grid) {
    const DiscreteRow row = discrete_row(f0, alpha, opt);
    rep.rows.push_back(row);
    as.push_back(alpha);
    kls.push_back(row.kl);
    vps.push_back(row.vp);
  }
  rep.kl_fit = fit_loglog(as, kls);
  rep.vp_fit = fit_loglog(as, vps);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace betamix
