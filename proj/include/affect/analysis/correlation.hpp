#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affect/dsp/stats.hpp"
#include "affect/error.hpp"

namespace affect {

struct Composition {
  std::string face_id;
  std::string cloth_id;
  std::string color_id;
  std::string group;  // grouping key of the composite
};

inline constexpr std::array<const char*, 3> kFactors = {"face", "cloth", "color"};

struct FactorR {
  std::string factor;
  std::string group;
  std::optional<double> r;  // empty when fewer than 3 pairs or no spread
  int n = 0;
  int dropped = 0;
};

/// Pearson r between composite posteriors and each component's posterior,
/// per factor and per group. Pairs with a missing posterior are dropped and
/// counted.
inline std::vector<FactorR> factor_correlation(const std::map<std::string, double>& posterior,
                                               const std::map<std::string, Composition>& composition) {
  std::map<std::pair<std::string, int>, PearsonAccumulator> acc;
  std::map<std::pair<std::string, int>, int> dropped;
  for (const auto& [cid, comp] : composition) {
    const auto pc = posterior.find(cid);
    const std::array<const std::string*, 3> parts = {&comp.face_id, &comp.cloth_id, &comp.color_id};
    for (int f = 0; f < 3; ++f) {
      const auto key = std::make_pair(comp.group, f);
      acc[key];
      const auto pp = posterior.find(*parts[static_cast<std::size_t>(f)]);
      if (pc == posterior.end() || pp == posterior.end()) {
        ++dropped[key];
        continue;
      }
      acc[key].add(pc->second, pp->second);
    }
  }
  std::vector<FactorR> out;
  for (const auto& [key, a] : acc) {
    FactorR fr;
    fr.group = key.first;
    fr.factor = kFactors[static_cast<std::size_t>(key.second)];
    fr.n = static_cast<int>(a.count());
    fr.dropped = dropped[key];
    const double r = a.r();
    if (fr.n >= 3 && !std::isnan(r)) fr.r = r;
    out.push_back(fr);
  }
  return out;
}

/// Strict variant: throws InsufficientPairs when any factor has n < 3.
inline std::vector<FactorR> factor_correlation_strict(const std::map<std::string, double>& posterior,
                                                      const std::map<std::string, Composition>& composition) {
  auto out = factor_correlation(posterior, composition);
  for (const auto& f : out)
    require(f.n >= 3, ErrorCode::InsufficientPairs,
            "factor " + f.factor + " in group '" + f.group + "' has " + std::to_string(f.n) + " pairs");
  return out;
}

/// Factor with the largest r in `group`, or empty.
inline std::optional<std::string> strongest_factor(const std::vector<FactorR>& rs, const std::string& group = "") {
  std::optional<std::string> best;
  double best_r = -2;
  for (const auto& f : rs) {
    if (f.group != group || !f.r) continue;
    if (*f.r > best_r) best_r = *f.r, best = f.factor;
  }
  return best;
}

}  // namespace affect
