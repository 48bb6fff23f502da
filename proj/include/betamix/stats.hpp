#pragma once

#include <vector>

#include "betamix/numkit.hpp"

namespace betamix {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};

// One-sample Kolmogorov-Smirnov against a continuous CDF.
TestResult ks_test(std::vector<double> sample, const RealFn& cdf);
// Asymptotic Kolmogorov tail with Stephens' small-sample adjustment.
double ks_p_value(double d, std::size_t n);

double chi_square_sf(double stat, int dof);
// Goodness of fit of counts against probabilities. Cells with expected count
// below 5 are pooled into the last kept cell; probs need not sum to one (the
// remainder becomes its own cell).
TestResult chi_square_gof(const std::vector<double>& counts, const std::vector<double>& probs);

// Geyer's initial positive sequence estimator.
double effective_sample_size(const std::vector<double>& series);

double median(std::vector<double> v);
double mean(const std::vector<double>& v);

}  // namespace betamix
