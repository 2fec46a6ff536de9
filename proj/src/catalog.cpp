#include "muspec/catalog.hpp"

#include "muspec/errors.hpp"

namespace muspec {

namespace {

GrowthRate glued_c_p() {
  return GrowthRate::glued(GrowthRate::polynomial(TimeDomain::Continuous),
                           GrowthRate::power_exp(3, 1, TimeDomain::Continuous));
}

}  // namespace

const std::vector<CatalogRate>& catalog_rates() {
  static const std::vector<CatalogRate> rates = {
      {"p", "polynomial rate (1+|t|)^sgn(t)", GrowthRate::polynomial(TimeDomain::Continuous)},
      {"exp", "exponential rate e^t", GrowthRate::power_exp(1, 1, TimeDomain::Continuous)},
      {"q", "quadratic exponential rate e^(sgn(t) t^2)", GrowthRate::power_exp(2, 1, TimeDomain::Continuous)},
      {"c", "cubic exponential rate e^(t^3)", GrowthRate::power_exp(3, 1, TimeDomain::Continuous)},
      {"glued_c_p", "p near the origin, c beyond the crossing point", glued_c_p()},
  };
  return rates;
}

const std::vector<CatalogSystem>& catalog_systems() {
  static const std::vector<CatalogSystem> systems = {
      {"abs2t", "x' = 2|t| x", LinearSystem::scalar("2*abs(t)", TimeDomain::Continuous)},
      {"inv1pt", "x' = x/(1+|t|)", LinearSystem::scalar("1/(1+abs(t))", TimeDomain::Continuous)},
      {"sq3t2", "x' = 3t^2 x", LinearSystem::scalar("3*t^2", TimeDomain::Continuous)},
      {"frak_a", "x(k+1) = exp(-3k^2-3k-1) x(k)",
       LinearSystem::scalar("exp(-3*k^2-3*k-1)", TimeDomain::Discrete)},
      {"disc_q", "x(k+1) = e^(2k+1) x(k) for k >= 0, e^(-2k-1) x(k) for k < 0",
       LinearSystem::scalar("exp(abs(2*k+1))", TimeDomain::Discrete)},
      {"identity", "x(k+1) = x(k)", LinearSystem::scalar("1", TimeDomain::Discrete)},
  };
  return systems;
}

GrowthRate catalog_rate(const std::string& name, TimeDomain domain) {
  for (const auto& r : catalog_rates()) {
    if (r.name != name) continue;
    if (r.rate.kind() == GrowthRate::Kind::Glued && domain == TimeDomain::Discrete) {
      throw ValidationError("rate", "catalog rate '" + name + "' is only defined in continuous time");
    }
    return r.rate.in_domain(domain);
  }
  throw ValidationError("rate", "unknown catalog rate '" + name + "'");
}

LinearSystem catalog_system(const std::string& name) {
  for (const auto& s : catalog_systems()) {
    if (s.name == name) return s.system;
  }
  throw ValidationError("system", "unknown catalog system '" + name + "'");
}

}  // namespace muspec
