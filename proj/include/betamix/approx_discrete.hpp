#pragma once

#include <string>
#include <vector>

#include "betamix/approx_continuous.hpp"
#include "betamix/mixtures.hpp"

namespace betamix {

struct SupportGrid {
  double alpha = 0.0;
  double t0 = 1.0;
  double M = 1.0;
  double eps0 = 0.0;
  double ratio = 1.0;  // eps_{j+1} / eps_j on the left half
  long J = 0;          // from the closed-form count
  // Cell boundaries from eps0 to 1 - eps0: geometric up to 1/2, then mirrored.
  std::vector<double> breakpoints;

  std::size_t cells() const { return breakpoints.empty() ? 0 : breakpoints.size() - 1; }
};

SupportGrid support_grid(double alpha, double t0 = 1.0, double M = 1.0);

struct CellRecord {
  double lo, hi;
  double mass;
  int nodes;                    // 0 when skipped
  bool fallback = false;        // single node at the conditional mean
  double moment_residual = 0.0; // max relative error over moments 0..2N-1
};

struct Discretization {
  DiscreteMixture mixture;
  std::vector<CellRecord> cells;
  double left_tail = 0.0, right_tail = 0.0;
  int skipped = 0;
  int fallbacks = 0;
  double max_moment_residual = 0.0;
};

struct DiscretizeOptions {
  double rel_tol = 1e-13;
  std::vector<double> kinks;  // of the mixing density
};

// Moment-matched Gauss atoms per cell plus tail atoms at eps0 and 1 - eps0.
Discretization discretize(double alpha, const RealFn& f, const SupportGrid& grid, int nodes_per_cell = 6,
                          const DiscretizeOptions& opt = {});

struct FloorResult {
  DiscreteMixture mixture;
  double c = 1.0;   // product of the renormalizing constants
  int floored = 0;  // atoms lifted to the floor
};

// Weights below v/(1 + k v) (k the atom count, v = alpha^-A) are replaced by
// c v and the rest by c p, c = 1/(sum_off p + |I| v); repeated until stable.
FloorResult floor_weights(const DiscreteMixture& m, double A);

// N0 sqrt(alpha) (log alpha)^{3/2}
double atom_budget(double alpha, double N0 = 3.0);

struct DiscreteRow {
  double alpha;
  double kl;
  double vp;
  int atoms;
  double budget_ratio;  // atoms / (sqrt(alpha) (log alpha)^{3/2})
  int correction_steps;
};

struct DiscreteKlReport {
  std::string density;
  bool corrected = true;
  double p = 2.0;
  std::vector<DiscreteRow> rows;
  LineFit kl_fit, vp_fit;
  double seconds = 0.0;

  std::string to_csv() const;
};

struct DiscreteKlOptions {
  bool correct = true;
  double t0 = 1.0;
  double M = 1.0;
  double A = 8.0;
  int nodes_per_cell = 6;
  double p = 2.0;
  double rel_tol = 1e-11;
  BuildOptions build;
};

DiscreteRow discrete_row(const TargetDensity& f0, double alpha, const DiscreteKlOptions& opt = {});
DiscreteKlReport discrete_kl_report(const TargetDensity& f0, const std::vector<double>& alpha_grid,
                                    const DiscreteKlOptions& opt = {});

}  // namespace betamix
