#include "betamix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "betamix/errors.hpp"

namespace betamix {

double ks_p_value(double d, std::size_t n) {
  double sn = std::sqrt(static_cast<double>(n));
  double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_test(std::vector<double> sample, const RealFn& cdf) {
  if (sample.empty()) throw ContractError("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return {d, ks_p_value(d, sample.size()), 0};
}

double chi_square_sf(double stat, int dof) {
  if (dof < 1) throw DomainError("chi_square_sf: dof must be positive");
  if (stat <= 0.0) return 1.0;
  return 1.0 - incomplete_gamma_p(0.5 * dof, 0.5 * stat);
}

TestResult chi_square_gof(const std::vector<double>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.empty())
    throw ContractError("chi_square_gof: counts and probs must align");
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double psum = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::vector<double> obs(counts), expct(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) expct[i] = probs[i] * total;
  if (psum < 1.0 - 1e-12) {
    obs.push_back(0.0);
    expct.push_back((1.0 - psum) * total);
  }
  // pool small cells from the tail forward
  std::vector<double> o, e;
  double po = 0.0, pe = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    po += obs[i];
    pe += expct[i];
    if (pe >= 5.0) {
      o.push_back(po);
      e.push_back(pe);
      po = pe = 0.0;
    }
  }
  if (pe > 0.0 || po > 0.0) {
    if (e.empty()) {
      o.push_back(po);
      e.push_back(pe);
    } else {
      o.back() += po;
      e.back() += pe;
    }
  }
  if (e.size() < 2) return {0.0, 1.0, 0};
  double stat = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  int dof = static_cast<int>(e.size()) - 1;
  return {stat, chi_square_sf(stat, dof), dof};
}

double effective_sample_size(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double m = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  c0 /= n;
  if (!(c0 > 0.0)) return static_cast<double>(n);
  auto acf = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - m) * (x[i + lag] - m);
    return s / n / c0;
  };
  // pairs Gamma_k = rho(2k) + rho(2k+1), summed while positive and monotone
  double sum = 0.0, prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double g = acf(2 * k) + acf(2 * k + 1);
    if (g <= 0.0) break;
    g = std::min(g, prev);
    sum += g;
    prev = g;
  }
  double tau = -1.0 + 2.0 * sum;
  if (!(tau > 0.0)) tau = 1.0 / static_cast<double>(n);
  return static_cast<double>(n) / tau;
}

double median(std::vector<double> v) {
  if (v.empty()) throw ContractError("median: empty input");
  std::sort(v.begin(), v.end());
  std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw ContractError("mean: empty input");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace betamix
