#include "betamix/density_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "betamix/errors.hpp"

namespace betamix {

std::vector<std::string> corpus_ids() { return {"uniform", "beta22", "rough"}; }

TargetDensity density_corpus(const std::string& id, const std::map<std::string, double>& params) {
  TargetDensity f;
  f.name = id;
  if (id == "uniform") {
    f.eval = [](double) { return 1.0; };
    f.derivs = {f.eval};
    for (int j = 1; j <= 6; ++j) f.derivs.push_back([](double) { return 0.0; });
    f.holder = {kSmoothBeta, 1.0};
    f.boundary = {0, 0};
    f.cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    return f;
  }
  if (id == "beta22") {
    f.eval = [](double x) { return 6.0 * x * (1.0 - x); };
    f.derivs = {f.eval, [](double x) { return 6.0 - 12.0 * x; }, [](double) { return -12.0; },
                [](double) { return 0.0; }, [](double) { return 0.0; }};
    // smooth; declared at 4 so that exactly one correction step is applied
    f.holder = {4.0, 12.0};
    f.boundary = {1, 1};
    f.cdf = [](double x) {
      x = std::clamp(x, 0.0, 1.0);
      return x * x * (3.0 - 2.0 * x);
    };
    return f;
  }
  if (id == "rough") {
    double beta = 0.5;
    if (auto it = params.find("beta"); it != params.end()) beta = it->second;
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("rough: beta must lie in (0, 1]");
    const double z = 1.0 + 0.5 / (beta + 1.0);
    f.eval = [beta, z](double x) { return (1.0 + 0.5 * std::pow(std::fabs(2.0 * x - 1.0), beta)) / z; };
    f.derivs = {f.eval};
    f.holder = {beta, std::pow(2.0, beta) / (2.0 * z)};
    f.boundary = {0, 0};
    auto left = [beta, z](double x) {
      return (x + (1.0 - std::pow(1.0 - 2.0 * x, beta + 1.0)) / (4.0 * (beta + 1.0))) / z;
    };
    f.cdf = [left](double x) {
      x = std::clamp(x, 0.0, 1.0);
      return x <= 0.5 ? left(x) : 1.0 - left(1.0 - x);
    };
    f.kinks = {0.5};
    std::ostringstream os;
    os << "rough(" << beta << ")";
    f.name = os.str();
    return f;
  }
  std::ostringstream os;
  os << "unknown density id '" << id << "'; known ids:";
  for (const auto& s : corpus_ids()) os << ' ' << s;
  throw CatalogError(os.str());
}

bool satisfies_a0(const TargetDensity& f) {
  const double off = 1e-6;
  int k0 = f.boundary.k0, k1 = f.boundary.k1;
  if (k0 > f.derivative_order() || k1 > f.derivative_order()) return false;
  if (!(k0 < f.holder.beta && k1 < f.holder.beta)) return false;
  double left = f.deriv(k0)(off);
  double right = f.deriv(k1)(1.0 - off) * (k1 % 2 == 0 ? 1.0 : -1.0);
  return left > 0.0 && right > 0.0;
}

}  // namespace betamix
