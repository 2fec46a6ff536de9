#pragma once

#include <cmath>
#include <json.hpp>
#include <vector>

#include "numfmt.hpp"

namespace muspec {

/// Extended real for reports: 12 significant digits, infinities as strings.
inline nlohmann::json jnum(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return round12(v);
}

inline nlohmann::json jnums(const std::vector<double>& vs) {
  nlohmann::json a = nlohmann::json::array();
  for (double v : vs) a.push_back(jnum(v));
  return a;
}

}  // namespace muspec
