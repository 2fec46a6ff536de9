#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "muspec/rates.hpp"

namespace muspec {

enum class Outcome { Holds, Fails, Inconclusive };

const char* outcome_name(Outcome o);

enum class RelationKind {
  Faster,            // mu >> omega
  WeaklyFaster,      // mu > omega
  AlmostFaster,      // mu >. omega
  AlmostSlower,      // omega <. mu
  WeaklyEquivalent,  // mu ~ omega
  Equivalent,        // mu ~~ omega
  ChainOrder,        // omega <<< mu
};

const char* relation_name(RelationKind k);

struct RelationParams {
  /// Window half-widths; empty selects the rate's default schedule.
  std::vector<double> schedule;
  /// Sampling step; 0 selects 1 in discrete time and 0.1 in continuous time.
  double step = 0.0;
  double tol_stab = 0.02;
  /// Ratios |alpha|/|alpha~| tested by check_faster.
  std::vector<double> epsilon_grid{1.0, 0.5, 0.25, 0.1, 0.05};
  /// Fixed exponents of the almost checks (absolute values).
  std::vector<double> almost_fixed{0.05, 0.25, 1.0, 4.0};
  /// Searched exponents of the almost checks: 2^i for i in [lo, hi].
  int search_exp_lo = -8;
  int search_exp_hi = 12;
};

struct PairValue {
  double n;
  double k;
  double value;
};

enum class AlmostDirection { Faster, Slower };

struct RelationVerdict {
  RelationKind kind = RelationKind::Faster;
  Outcome outcome = Outcome::Inconclusive;
  std::string mu;
  std::string omega;
  nlohmann::json certificate;
  std::vector<PairValue> witness;
  nlohmann::json diagnostics;
  nlohmann::json grid;
  std::vector<RelationVerdict> parts;
};

/// mu >> omega: for each eps, S_N(eps) = sup_{n<=k} (L_omega - eps L_mu).
RelationVerdict check_faster(const GrowthRate& mu, const GrowthRate& omega,
                             const RelationParams& params = {});

/// Same verdict through the positive-exponent backward formulation, by
/// direct enumeration of all pairs k <= n.
RelationVerdict check_faster_backward(const GrowthRate& mu, const GrowthRate& omega,
                                      const RelationParams& params = {});

/// mu > omega: max drawdown of log mu - log omega.
RelationVerdict check_weakly_faster(const GrowthRate& mu, const GrowthRate& omega,
                                    const RelationParams& params = {});

/// Faster: mu >. omega. Slower: omega <. mu.
RelationVerdict check_almost(const GrowthRate& mu, const GrowthRate& omega,
                             AlmostDirection direction, const RelationParams& params = {});

/// a ~ b: both weak directions.
RelationVerdict check_weakly_equivalent(const GrowthRate& a, const GrowthRate& b,
                                        const RelationParams& params = {});

/// a ~~ b: all four almost directions.
RelationVerdict check_equivalent(const GrowthRate& a, const GrowthRate& b,
                                 const RelationParams& params = {});

/// lower <<< upper: lower <. upper and upper >. lower.
RelationVerdict check_order(const GrowthRate& lower, const GrowthRate& upper,
                            const RelationParams& params = {});

struct PairClassification {
  std::string a;
  std::string b;
  Outcome a_faster_b = Outcome::Inconclusive;
  Outcome b_faster_a = Outcome::Inconclusive;
  Outcome a_weakly_faster_b = Outcome::Inconclusive;
  Outcome b_weakly_faster_a = Outcome::Inconclusive;
  Outcome a_almost_faster_b = Outcome::Inconclusive;
  Outcome b_almost_faster_a = Outcome::Inconclusive;
  Outcome a_almost_slower_b = Outcome::Inconclusive;
  Outcome b_almost_slower_a = Outcome::Inconclusive;
  Outcome weakly_equivalent = Outcome::Inconclusive;
  Outcome equivalent = Outcome::Inconclusive;
  Outcome a_order_b = Outcome::Inconclusive;  // a <<< b
  Outcome b_order_a = Outcome::Inconclusive;
  std::optional<RelationProfile> symbolic;
  /// Names of directed checks where the numeric and symbolic answers differ.
  std::vector<std::string> disagreements;
  std::vector<RelationVerdict> checks;
};

PairClassification classify_pair(const GrowthRate& a, const GrowthRate& b,
                                 const RelationParams& params = {});

struct ChainResult {
  Outcome outcome = Outcome::Inconclusive;
  std::vector<RelationVerdict> links;
  std::optional<std::size_t> first_failing_link;
};

/// Verifies rates[0] <<< rates[1] <<< ... link by link.
ChainResult chain_check(const std::vector<GrowthRate>& rates, const RelationParams& params = {});

nlohmann::json to_json(const RelationVerdict& v);
nlohmann::json to_json(const PairClassification& c);
nlohmann::json to_json(const ChainResult& c);

}  // namespace muspec
