#pragma once

#include <string>
#include <vector>

#include "muspec/evolution.hpp"
#include "muspec/rates.hpp"

namespace muspec {

struct CatalogSystem {
  std::string name;
  std::string summary;
  LinearSystem system;
};

struct CatalogRate {
  std::string name;
  std::string summary;
  GrowthRate rate;
};

/// Built-in rates: p, exp, q, c, glued_c_p (rates in the continuous domain;
/// use catalog_rate to pick a domain).
const std::vector<CatalogRate>& catalog_rates();

/// Built-in systems: abs2t, inv1pt, sq3t2, frak_a, disc_q, identity.
const std::vector<CatalogSystem>& catalog_systems();

/// Rate `name` in the requested time domain. glued_c_p exists only in
/// continuous time. Throws ValidationError for unknown names.
GrowthRate catalog_rate(const std::string& name, TimeDomain domain);

LinearSystem catalog_system(const std::string& name);

}  // namespace muspec
