#pragma once

#include <map>
#include <string>
#include <vector>

#include "betamix/mixtures.hpp"

namespace betamix {

// Catalog ids: "uniform", "beta22", "rough" (param "beta" in (0, 1], default 0.5).
TargetDensity density_corpus(const std::string& id, const std::map<std::string, double>& params = {});
std::vector<std::string> corpus_ids();

// Numeric boundary check at offset 1e-6: f^(k0)(0+) > 0 and (-1)^k1 f^(k1)(1-) > 0.
bool satisfies_a0(const TargetDensity& f);

// Stand-in for beta = infinity in smoothness metadata.
constexpr double kSmoothBeta = 1e6;

}  // namespace betamix
