#pragma once

#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "muspec/evolution.hpp"
#include "muspec/rates.hpp"
#include "muspec/relations.hpp"
#include "muspec/spectrum.hpp"

namespace muspec {

struct Fixture {
  std::string name;
  LinearSystem system;
  /// Per component potential F with log|Phi_ii(k, n)| = F(k) - F(n).
  std::optional<std::vector<Potential>> closed_form;
  /// Expected spectra keyed by rate name.
  std::map<std::string, std::vector<SpectralInterval>> expected;
};

/// Diagonal system with Phi_ii(k, n) = (nu(k)/nu(n))^s_i. Discrete systems
/// are realized through A_ii(k) = (nu(k+1)/nu(k))^s_i, continuous ones
/// through their potentials. Expected nu-spectrum: the merged points {s_i}.
Fixture generate_quotient_system(const GrowthRate& nu, const std::vector<double>& slopes,
                                 const std::string& nu_name = "");

/// Built-in systems with their closed forms and known spectra.
std::vector<Fixture> catalog_fixtures();

/// Catalog systems plus generated quotient systems in both time domains.
std::vector<Fixture> harness_fixtures();

enum class TheoremStatus { Pass, Fail, Skipped };

const char* theorem_status_name(TheoremStatus s);

struct HypothesisCheck {
  std::string name;
  std::string verdict;
  bool holds = false;
};

struct TheoremReport {
  std::string theorem;
  std::string fixture;
  std::vector<std::string> rates;
  TheoremStatus status = TheoremStatus::Skipped;
  std::vector<HypothesisCheck> hypotheses;
  /// Set only when every hypothesis holds.
  std::optional<bool> conclusion;
  nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const TheoremReport& r);

struct TheoremParams {
  SpectrumParams spectrum;
  RelationParams relations;
  /// Tolerance for comparing spectral endpoints in conclusions. 0 picks
  /// tol_stab in discrete time and 0.05 in continuous time, where the window
  /// schedule stops at T = 40.
  double conclusion_tol = 0.0;
};

double conclusion_tolerance(const TheoremParams& params, TimeDomain domain);

/// Memoizes spectra and rate relations across checks. Thread safe.
class TheoremContext {
 public:
  explicit TheoremContext(TheoremParams params = {});
  ~TheoremContext();

  const TheoremParams& params() const;

  const SpectrumReport& spectrum(const LinearSystem& system, const GrowthRate& rate);
  const RelationVerdict& faster(const GrowthRate& mu, const GrowthRate& omega);
  const RelationVerdict& weakly_faster(const GrowthRate& mu, const GrowthRate& omega);
  const RelationVerdict& weakly_equivalent(const GrowthRate& a, const GrowthRate& b);
  const RelationVerdict& equivalent(const GrowthRate& a, const GrowthRate& b);
  const ChainResult& chain(const std::vector<GrowthRate>& rates);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Catalog name of a rate when it is one, otherwise its label.
std::string rate_name(const GrowthRate& rate);

/// mu >> omega and a mu-dichotomy force the omega-spectrum into {+inf}, {-inf}
/// or {-inf, +inf}.
TheoremReport verify_805(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture = "");

/// omega-bounded growth and mu >> omega force the mu-spectrum to be {0}.
TheoremReport verify_806(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& omega,
                         const GrowthRate& mu, const std::string& fixture = "");

/// Items "808i", "808ii" (a > 0) and "809i", "809ii", "809iii" (a <= 0 <= b),
/// all under the hypothesis mu > omega (weakly faster).
TheoremReport verify_808_809(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                             const GrowthRate& omega, double a, double b, const std::string& item,
                             const std::string& fixture = "");

/// For a chain of rates, at most one rate gives both bounded growth and a
/// dichotomy on each system.
TheoremReport verify_811(TheoremContext& ctx, const std::vector<LinearSystem>& systems,
                         const std::vector<GrowthRate>& chain,
                         const std::vector<std::string>& fixtures = {});

/// mu ~ omega gives equal spectra; mu ~~ omega gives qualitatively equivalent ones.
TheoremReport verify_908(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture = "");

/// A mu-dichotomy with mu >> omega rules out omega-bounded growth.
TheoremReport verify_721(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture = "");

/// omega-bounded growth with mu >> omega rules out a mu-dichotomy.
TheoremReport verify_722(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture = "");

/// Theorem ids: 805, 806, 808, 809, 811, 908, 721, 722. The items 808i,
/// 808ii, 809i, 809ii and 809iii select one part of 808 or 809.
const std::vector<std::string>& theorem_ids();

struct VerifyRequest {
  std::string theorem = "all";
  std::vector<Fixture> fixtures;
  /// Restricts the pairwise theorems to this (mu, omega) pair, given as
  /// rate specs resolved in each fixture's time domain.
  std::optional<std::pair<std::string, std::string>> pair;
  /// Chain for 811; defaults to p, exp, q, c.
  std::vector<std::string> chain;
  /// Bounds for 808/809; derived from the hypothesis spectrum when absent.
  std::optional<double> a;
  std::optional<double> b;
  TheoremParams params;
};

/// Runs the request over every fixture. Reports come back in a fixed order.
std::vector<TheoremReport> run_verification(const VerifyRequest& request);

/// Every theorem over fixtures and the harness rates of each time domain.
std::vector<TheoremReport> verify_all(const std::string& theorem, const std::vector<Fixture>& fixtures,
                                      const TheoremParams& params = {});

/// Rates used by the harness: p, exp, q, c plus power_exp(1, 3) in discrete
/// time and glued_c_p in continuous time.
std::vector<std::pair<std::string, GrowthRate>> harness_rates(TimeDomain domain);

}  // namespace muspec
