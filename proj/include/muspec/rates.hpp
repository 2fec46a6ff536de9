#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "muspec/expr.hpp"

namespace muspec {

enum class TimeDomain { Discrete, Continuous };

const char* time_domain_name(TimeDomain d);

/// A growth rate, stored through its logarithm t -> log mu(t).
class GrowthRate {
 public:
  enum class Kind { PowerExp, Polynomial, Expression, Glued };

  /// log mu(t) = lambda * sgn(t) * |t|^p.
  static GrowthRate power_exp(double p, double lambda, TimeDomain domain);
  /// (1+|t|)^sgn(t) in continuous time, |n|^sgn(n) (and 1 at 0) in discrete time.
  static GrowthRate polynomial(TimeDomain domain);
  /// `log_rate` is an expression for log mu(t).
  static GrowthRate expression(const std::string& log_rate, TimeDomain domain);
  /// inner on |t| < crossover, outer on |t| >= crossover. Without a crossover
  /// the positive root of log inner - log outer is located by bisection on
  /// (0, search_window].
  static GrowthRate glued(const GrowthRate& inner, const GrowthRate& outer,
                          std::optional<double> crossover = std::nullopt,
                          double search_window = 100.0);

  Kind kind() const { return kind_; }
  TimeDomain time_domain() const { return domain_; }
  double p() const { return p_; }
  double lambda() const { return lambda_; }
  const Expr& expr() const { return expr_; }
  const std::string& expr_text() const { return text_; }
  const GrowthRate& inner() const { return parts_->first; }
  const GrowthRate& outer() const { return parts_->second; }
  double crossover() const { return crossover_; }

  /// Same rate re-targeted at another time domain (glued parts included).
  GrowthRate in_domain(TimeDomain domain) const;

  /// log mu(t). Throws DomainError for expression rates.
  double log_rate(double t) const;

  /// An expression for log mu(t), when one exists (not for glued rates).
  std::optional<std::string> log_rate_text() const;

  /// Human readable label, e.g. "power_exp(p=2, lambda=1)".
  std::string label() const;

  bool operator==(const GrowthRate& other) const;

 private:
  GrowthRate() = default;

  Kind kind_ = Kind::Polynomial;
  TimeDomain domain_ = TimeDomain::Discrete;
  double p_ = 0.0;
  double lambda_ = 0.0;
  Expr expr_;
  std::string text_;
  std::shared_ptr<const std::pair<GrowthRate, GrowthRate>> parts_;
  double crossover_ = 0.0;
};

struct LogQuotient {
  double value;  // log mu(to) - log mu(from)
  double to;
  double from;
};

LogQuotient log_quotient(const GrowthRate& rate, double to, double from);

struct RateValidation {
  /// Adjacent sample pairs (t_i, t_{i+1}) with log mu(t_{i+1}) < log mu(t_i).
  std::vector<std::pair<double, double>> violations;
  double log_at_origin = 0.0;
  bool origin_ok = true;
  double range_lo = 0.0;
  double range_hi = 0.0;
  /// First evaluation failure, if any sample could not be evaluated.
  std::optional<std::string> evaluation_error;

  bool ok() const { return violations.empty() && origin_ok && !evaluation_error; }
};

/// Samples log mu on [-window, window]: every integer in discrete time,
/// `samples_per_unit` points per unit length in continuous time.
RateValidation validate_rate(const GrowthRate& rate, double window, double samples_per_unit = 10.0);

/// Outcome of every directed comparison between two rates a and b.
struct RelationProfile {
  bool a_faster_b = false;         // a >> b
  bool b_faster_a = false;         // b >> a
  bool a_weakly_faster_b = false;  // a > b (weakly)
  bool b_weakly_faster_a = false;
  bool a_almost_faster_b = false;  // a >. b
  bool b_almost_faster_a = false;
  bool a_almost_slower_b = false;  // a <. b
  bool b_almost_slower_a = false;
  bool weakly_equivalent = false;  // a ~ b
  bool equivalent = false;         // a ~~ b (two-sided almost)

  bool operator==(const RelationProfile&) const = default;
};

/// Closed-form profile for power-exponential and polynomial rates; empty for
/// expression and glued rates.
std::optional<RelationProfile> symbolic_compare(const GrowthRate& a, const GrowthRate& b);

}  // namespace muspec
