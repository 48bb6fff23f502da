#include "betamix/approx_continuous.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "betamix/beta_kernel.hpp"
#include "betamix/errors.hpp"

namespace betamix {

namespace {

constexpr double kClipFloor = 1e-12;

double cubic_coefficient(double x) {
  // exponent_taylor is defined away from the endpoints; C is a polynomial so
  // clamping only matters where the s f' factor already vanishes.
  const double xc = std::clamp(x, 1e-4, 1.0 - 1e-4);
  return exponent_taylor(xc, 3).c;
}

// Smallest value of h on the mesh; used for the positivity check.
void scan_mesh(const RealFn& h, int mesh, double& min_value, double& min_x) {
  min_value = HUGE_VAL;
  min_x = 0.5;
  for (double x : ChebyshevSeries::points(0.0, 1.0, mesh)) {
    const double v = h(x);
    if (!(v >= min_value)) {
      min_value = v;
      min_x = x;
    }
  }
}

CorrectionStep finish_step(int index, RealFn raw, const CorrectionOptions& opt,
                           const std::vector<double>& breakpoints) {
  CorrectionStep step;
  step.index = index;
  scan_mesh(raw, opt.mesh, step.min_value, step.min_x);
  if (!(step.min_value > 0.0)) {
    if (!opt.clip) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "alpha too small for correction: h <= 0 at x = %.6g", step.min_x);
      throw CorrectionError(buf, step.min_x);
    }
    step.clipped = true;
    raw = [raw](double x) { return std::max(raw(x), kClipFloor); };
  }
  IntegrateOptions io;
  io.abs_tol = 1e-13;
  io.rel_tol = 1e-12;
  io.breakpoints = breakpoints;
  step.normalizer = integrate(raw, 0.0, 1.0, io).value;
  const double c = step.normalizer;
  step.density = [raw, c](double x) { return raw(x) / c; };
  return step;
}

}  // namespace

double uniform_mixture_pdf(double alpha, double x, double rel_tol) {
  ContMixOptions opt;
  opt.rel_tol = rel_tol;
  return cont_mix_pdf(alpha, [](double) { return 1.0; }, x, opt);
}

std::vector<DefectPoint> uniform_defect(double alpha, const std::vector<double>& grid) {
  if (!(alpha > 0.0)) throw DomainError("uniform_defect: alpha must be positive");
  std::vector<DefectPoint> out;
  out.reserve(grid.size());
  for (double x : grid) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("uniform_defect: grid points must lie in (0,1)");
    out.push_back({x, alpha * (uniform_mixture_pdf(alpha, x) - 1.0)});
  }
  return out;
}

CorrectionStep correct_once(const TargetDensity& f, double alpha, const CorrectionOptions& opt) {
  if (!(alpha > 0.0)) throw DomainError("correct_once: alpha must be positive");
  if (f.derivative_order() < 2) throw ContractError("correct_once: f needs two derivatives");

  // The defect I(x) = alpha (g_alpha(x) - 1) is smooth; tabulate it once.
  auto defect = [alpha](double x) { return alpha * (uniform_mixture_pdf(alpha, x) - 1.0); };
  auto I = std::make_shared<ChebyshevSeries>(ChebyshevSeries::adaptive(defect, 0.0, 1.0, 1e-11, 513));

  const double mu2 = normal_moment(2), mu4 = normal_moment(4);
  const RealFn f0 = f.deriv(0), f1 = f.deriv(1), f2 = f.deriv(2);
  RealFn raw = [=](double x) {
    const double s = x * (1.0 - x);
    return f0(x) * (1.0 - (*I)(x) / alpha) - s * f1(x) * 0.5 * cubic_coefficient(x) * mu4 / alpha -
           s * s * f2(x) * mu2 / (2.0 * alpha);
  };
  return finish_step(1, raw, opt, f.kinks);
}

CorrectionStep correct_again(const TargetDensity& f, const CorrectionStep& prev, double alpha,
                             const CorrectionOptions& opt) {
  ContMixOptions mo;
  mo.rel_tol = opt.rel_tol;
  const RealFn h = prev.density;
  auto next = [&](double x) { return h(x) + f(x) - cont_mix_pdf(alpha, h, x, mo); };
  auto table = std::make_shared<ChebyshevSeries>(ChebyshevSeries::adaptive(next, 0.0, 1.0, 1e-11, 513));
  RealFn raw = [table](double x) { return (*table)(x); };
  return finish_step(prev.index + 1, raw, opt, {});
}

int correction_steps_for(double beta) {
  if (!(beta > 0.0)) throw DomainError("correction_steps_for: beta must be positive");
  return static_cast<int>(std::ceil(beta / 2.0)) - 1;
}

CorrectionLedger build_f1(const TargetDensity& f, double alpha, const BuildOptions& opt) {
  CorrectionLedger led;
  led.alpha = alpha;
  led.planned_steps = std::min(correction_steps_for(f.holder.beta), opt.max_steps);
  if (led.planned_steps > 0 && f.derivative_order() < 2)
    throw ContractError("build_f1: f does not provide the derivatives its smoothness requires");
  led.final = f.eval;
  led.kinks = f.kinks;
  CorrectionOptions co = opt.correction;
  co.clip = opt.clip;
  for (int j = 1; j <= led.planned_steps; ++j) {
    CorrectionStep step = j == 1 ? correct_once(f, alpha, co) : correct_again(f, led.steps.back(), alpha, co);
    if (std::abs(step.normalizer - 1.0) > 0.5) led.valid = false;
    led.clipped = led.clipped || step.clipped;
    led.final = step.density;
    led.steps.push_back(std::move(step));
  }
  return led;
}

std::string ApproxRateReport::to_csv() const {
  std::ostringstream os;
  os << "alpha,sup_err,kl,vp\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.alpha, r.sup_err, r.kl, r.vp);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "# slope_sup=%.6g(%.2g) slope_kl=%.6g(%.2g) slope_vp=%.6g(%.2g) density=%s corrected=%d\n",
                sup_fit.slope, sup_fit.slope_stderr, kl_fit.slope, kl_fit.slope_stderr, vp_fit.slope,
                vp_fit.slope_stderr, density.c_str(), corrected ? 1 : 0);
  os << buf;
  return os.str();
}

ApproxRow approx_row(const TargetDensity& f, double alpha, const std::vector<double>& grid,
                     const ApproxRateOptions& opt) {
  CorrectionLedger led;
  if (opt.correct) {
    led = build_f1(f, alpha, opt.build);
  } else {
    led.alpha = alpha;
    led.final = f.eval;
    led.kinks = f.kinks;
  }
  ContMixOptions mo;
  mo.rel_tol = opt.rel_tol;
  mo.kinks = led.kinks;
  const RealFn h = led.final;
  RealFn g = [alpha, h, mo](double x) { return cont_mix_pdf(alpha, h, x, mo); };
  DistanceOptions dopt;
  dopt.breakpoints = f.kinks;
  dopt.abs_tol = 1e-17;
  dopt.boundary_decades = 0;
  ApproxRow row;
  row.alpha = alpha;
  row.sup_err = sup_dist(f.eval, g, grid);
  row.kl = kl(f.eval, g, dopt);
  row.vp = v_p(f.eval, g, opt.p, dopt);
  row.steps = static_cast<int>(led.steps.size());
  row.valid = led.valid;
  return row;
}

ApproxRateReport approx_rate_report(const TargetDensity& f, const std::vector<double>& alpha_grid,
                                    const ApproxRateOptions& opt) {
  if (alpha_grid.size() < 2) throw ContractError("approx_rate_report: need at least two alphas");
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] > alpha_grid[i - 1])) throw ContractError("approx_rate_report: alpha grid must increase");
  const auto t0 = std::chrono::steady_clock::now();

  ApproxRateReport rep;
  rep.density = f.name;
  rep.corrected = opt.correct;
  rep.p = opt.p;
  const auto grid = chebyshev_grid(opt.sup_grid);
  std::vector<double> as, sups, kls, vps;
  for (double alpha : alpha_grid) {
    const ApproxRow row = approx_row(f, alpha, grid, opt);
    rep.rows.push_back(row);
    as.push_back(alpha);
    sups.push_back(row.sup_err);
    kls.push_back(row.kl);
    vps.push_back(row.vp);
  }
  rep.sup_fit = fit_loglog(as, sups);
  rep.kl_fit = fit_loglog(as, kls);
  rep.vp_fit = fit_loglog(as, vps);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace betamix
