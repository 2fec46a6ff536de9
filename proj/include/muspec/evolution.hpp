#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "muspec/expr.hpp"
#include "muspec/rates.hpp"

namespace muspec {

enum class Structure { Scalar, Diagonal, Full };

const char* structure_name(Structure s);

/// A matrix stored as exp(log_norm) * unit with the operator norm of unit
/// kept in [0.5, 2].
struct ScaledMatrix {
  Eigen::MatrixXd unit;
  double log_norm = 0.0;

  static ScaledMatrix identity(std::size_t d);

  /// Rescales unit to operator norm 1. A zero unit gets log_norm = -inf.
  void normalize();

  /// exp(log_norm) * unit; overflows for large exponents.
  Eigen::MatrixXd value() const;

  std::size_t dimension() const { return static_cast<std::size_t>(unit.rows()); }
};

ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b);

struct NormBounds {
  double log_sigma_max;
  double log_sigma_min;  // -inf for a singular unit
};

/// Logarithms of the extreme singular values (two-sided Jacobi SVD).
NormBounds operator_norm_bounds(const ScaledMatrix& m);

/// One diagonal component given directly by its log-propagator potential:
/// log Phi_ii(k, n) = F(k) - F(n). F is either an expression or slope * log nu.
struct Potential {
  std::optional<Expr> expr;
  std::string text;
  std::optional<GrowthRate> rate;
  double slope = 1.0;

  static Potential from_expression(const std::string& text);
  static Potential from_rate(const GrowthRate& rate, double slope);

  double operator()(double t) const;
};

/// Coefficient matrices A(k) listed for k = first, first+1, ...
struct Table {
  long first = 0;
  std::vector<Eigen::MatrixXd> matrices;
  std::string source;

  long last() const { return first + static_cast<long>(matrices.size()) - 1; }
};

/// Reads the CSV layout `k,a_1_1,...` (one row per consecutive integer k).
Table load_table_csv(const std::string& path, std::size_t dimension, Structure structure);

class LinearSystem {
 public:
  enum class Source { Entries, Table, ClosedForm };

  static LinearSystem scalar(const std::string& coefficient, TimeDomain domain);
  static LinearSystem diagonal(const std::vector<std::string>& coefficients, TimeDomain domain);
  static LinearSystem full(const std::vector<std::vector<std::string>>& entries, TimeDomain domain);
  static LinearSystem tabulated(Table table, Structure structure);
  static LinearSystem closed_form(std::vector<Potential> components, TimeDomain domain);

  TimeDomain time_domain() const { return domain_; }
  std::size_t dimension() const { return dimension_; }
  Structure structure() const { return structure_; }
  Source source() const { return source_; }
  bool is_diagonal() const { return structure_ != Structure::Full; }

  /// Coefficient texts: d x d for Full, d x 1 (the diagonal) otherwise.
  const std::vector<std::vector<std::string>>& entry_texts() const { return texts_; }
  /// Parsed coefficient (column 0 holds the diagonal for Scalar/Diagonal).
  const Expr& entry_expr(std::size_t i, std::size_t j) const { return entries_.at(i).at(j); }
  const Table& table() const { return table_; }
  const std::vector<Potential>& potentials() const { return potentials_; }

  /// Weights accumulated by weighted(): the propagator is multiplied by
  /// prod (mu(to)/mu(from))^(-gamma).
  const std::vector<std::pair<GrowthRate, double>>& weights() const { return weights_; }
  LinearSystem weighted(const GrowthRate& rate, double gamma) const;
  LinearSystem without_weights() const;

  /// log|a_ij(t)| and sign, overflow safe for expression entries.
  Expr::LogAbs coefficient_log_abs(std::size_t i, std::size_t j, double t) const;

  /// A(t) as a plain matrix (entries must be representable).
  Eigen::MatrixXd coefficient(double t) const;

  /// Total weight log-factor sum_w gamma_w * (log mu_w(to) - log mu_w(from)).
  double weight_log(double to, double from) const;

 private:
  LinearSystem() = default;

  TimeDomain domain_ = TimeDomain::Discrete;
  std::size_t dimension_ = 1;
  Structure structure_ = Structure::Scalar;
  Source source_ = Source::Entries;
  std::vector<std::vector<Expr>> entries_;
  std::vector<std::vector<std::string>> texts_;
  Table table_;
  std::vector<Potential> potentials_;
  std::vector<std::pair<GrowthRate, double>> weights_;
};

struct EvolutionOptions {
  double step = 1e-2;  // continuous time integration / quadrature step
};

/// Evolution operator from `from` to `to`.
ScaledMatrix propagate(const LinearSystem& system, double to, double from,
                       const EvolutionOptions& options = {});

struct WeightedSystem {
  LinearSystem base;
  GrowthRate rate;
  double gamma;
};

/// propagate(base) with log_norm lowered by gamma * log(mu(to)/mu(from)).
ScaledMatrix weighted_propagate(const WeightedSystem& w, double to, double from,
                                const EvolutionOptions& options = {});

/// For Scalar/Diagonal systems: values F(t_i) of a potential with
/// log|Phi_cc(k, n)| = F(k) - F(n), weights included. `times` must be sorted;
/// discrete systems need integer times.
std::vector<double> component_profile(const LinearSystem& system, std::size_t component,
                                      const std::vector<double>& times,
                                      const EvolutionOptions& options = {});

}  // namespace muspec
