#pragma once

#include <string>
#include <vector>

#include "betamix/chebyshev.hpp"
#include "betamix/mixtures.hpp"

namespace betamix {

struct DefectPoint {
  double x;
  double value;  // alpha (g_alpha(x) - 1)
};

// g_alpha(x) = integral_0^1 g_{alpha,eps}(x) d eps, the uniform mixture.
double uniform_mixture_pdf(double alpha, double x, double rel_tol = 1e-13);
std::vector<DefectPoint> uniform_defect(double alpha, const std::vector<double>& grid);

struct CorrectionOptions {
  // Clip nonpositive values at 1e-12 instead of throwing CorrectionError.
  bool clip = false;
  // Positivity is checked on this many Chebyshev points of (0,1).
  int mesh = 513;
  double rel_tol = 1e-12;
};

struct CorrectionStep {
  int index = 0;
  RealFn density;          // normalized
  double normalizer = 1.0; // c_j, integral of the unnormalized step
  bool clipped = false;
  double min_value = 0.0;  // smallest unnormalized value on the mesh
  double min_x = 0.0;
};

// h1 = f (1 - I/alpha) - x(1-x) f' C3 mu4 / alpha - x^2(1-x)^2 f'' mu2 / (2 alpha),
// renormalized; C3 = C/2 is the cubic coefficient of the unbracketed exponent.
CorrectionStep correct_once(const TargetDensity& f, double alpha, const CorrectionOptions& opt = {});

// One further step h <- h + (f - g_{alpha,h}) with the exact mixing operator,
// tabulated on a Chebyshev grid and renormalized.
CorrectionStep correct_again(const TargetDensity& f, const CorrectionStep& prev, double alpha,
                             const CorrectionOptions& opt = {});

struct CorrectionLedger {
  double alpha = 0.0;
  int planned_steps = 0;
  std::vector<CorrectionStep> steps;
  RealFn final;
  std::vector<double> kinks;  // kinks of final (inherited from f when no step is taken)
  bool valid = true;          // every |c_j - 1| <= 1/2
  bool clipped = false;
};

// Largest integer strictly below beta/2.
int correction_steps_for(double beta);

struct BuildOptions {
  int max_steps = 3;  // cap for very smooth targets
  bool clip = true;
  CorrectionOptions correction;
};

CorrectionLedger build_f1(const TargetDensity& f, double alpha, const BuildOptions& opt = {});

struct ApproxRow {
  double alpha;
  double sup_err;
  double kl;
  double vp;
  int steps;
  bool valid;
};

struct ApproxRateReport {
  std::string density;
  bool corrected = false;
  double p = 2.0;
  std::vector<ApproxRow> rows;
  LineFit sup_fit, kl_fit, vp_fit;
  double seconds = 0.0;

  std::string to_csv() const;
};

struct ApproxRateOptions {
  bool correct = false;
  double p = 2.0;
  int sup_grid = 4097;
  double rel_tol = 1e-11;  // for the mixture quadrature
  BuildOptions build;
};

// One row of the report; grid is the sup-norm evaluation grid.
ApproxRow approx_row(const TargetDensity& f, double alpha, const std::vector<double>& grid,
                     const ApproxRateOptions& opt = {});
ApproxRateReport approx_rate_report(const TargetDensity& f, const std::vector<double>& alpha_grid,
                                    const ApproxRateOptions& opt = {});

}  // namespace betamix
