#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "muspec/evolution.hpp"
#include "muspec/rates.hpp"

namespace muspec {

struct SpectrumParams {
  /// Window sizes; empty selects default_schedule(time domain).
  std::vector<double> schedule;
  double cutoff_fraction = 0.5;
  double tol_stab = 0.02;
  double gamma_max = 50.0;
  double delta_merge = 0.2;
  /// Sampling step for continuous windows.
  double sample_step = 1.0;
  EvolutionOptions evolution;
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;
};

std::vector<double> default_schedule(TimeDomain domain);

/// Throws ValidationError unless tolerances are positive and the schedule is
/// strictly increasing.
void validate_params(const SpectrumParams& params);

/// How a per-window sequence was turned into a limit value.
enum class Settle {
  Exact,         // last two windows agree to rounding
  Extrapolated,  // geometric tail extrapolation
  Stable,        // last two windows within tol_stab
  DivergedUp,
  DivergedDown,
  Unsettled,
};

const char* settle_name(Settle s);

struct ExponentEstimate {
  double value = 0.0;  // extended real; error band already applied
  double raw = 0.0;    // before the error band
  double band = 0.0;
  Settle settle = Settle::Unsettled;

  bool diverged() const { return settle == Settle::DivergedUp || settle == Settle::DivergedDown; }
  bool settled() const { return settle != Settle::Unsettled; }
};

/// Turns a per-window sequence into a limit estimate.
ExponentEstimate settle_sequence(const std::vector<double>& values, double tol_stab,
                                 double gamma_max);

struct WindowStat {
  double window;
  double upper;
  double lower;
  std::size_t pairs;
};

struct BohlEstimate {
  ExponentEstimate upper;
  ExponentEstimate lower;
  std::vector<WindowStat> per_window;
  std::size_t pairs_used = 0;

  bool diverged_upper() const { return upper.diverged(); }
  bool diverged_lower() const { return lower.diverged(); }
  bool settled() const { return upper.settled() && lower.settled(); }
};

/// Bohl exponents of one diagonal component (Scalar/Diagonal systems).
BohlEstimate bohl_exponents(const LinearSystem& system, std::size_t component,
                            const GrowthRate& rate, const SpectrumParams& params = {});

/// Exponents of log sigma_max / log sigma_min ratio statistics (any structure).
BohlEstimate singular_value_exponents(const LinearSystem& system, const GrowthRate& rate,
                                      const SpectrumParams& params = {});

/// Closed interval over the extended reals; {-inf} is [-inf, -inf].
struct SpectralInterval {
  double lo;
  double hi;
};

/// Component of the resolvent set. An infinite endpoint is included when its
/// closed flag is set.
struct SpectralGap {
  double lo;
  double hi;
  bool lo_closed;
  bool hi_closed;
  int rank;
  std::optional<std::vector<int>> pattern;

  bool contains(double gamma) const;
};

enum class SpectrumMode { Exact, Enclosure };

struct SpectrumReport {
  GrowthRate rate;
  LinearSystem system;
  SpectrumParams params;
  std::vector<double> schedule;  // resolved
  SpectrumMode mode = SpectrumMode::Exact;
  std::vector<SpectralInterval> intervals;
  std::vector<SpectralGap> gaps;
  /// One estimate per component (Exact) or the single enclosure estimate.
  std::vector<BohlEstimate> components;
  bool converged = false;
};

SpectrumReport compute_spectrum(const LinearSystem& system, const GrowthRate& rate,
                                const SpectrumParams& params = {});

enum class Tri { True, False, Inconclusive };

const char* tri_name(Tri t);

struct DichotomyVerdict {
  Tri verdict = Tri::Inconclusive;
  std::optional<int> projector_rank;
  std::optional<std::vector<int>> projector_pattern;
  std::string reason;
};

DichotomyVerdict has_mu_dichotomy(const SpectrumReport& report);
DichotomyVerdict has_mu_dichotomy(const LinearSystem& system, const GrowthRate& rate,
                                  const SpectrumParams& params = {});

enum class GrowthOutcome { Holds, Fails, Inconclusive };

struct GrowthVerdict {
  GrowthOutcome outcome = GrowthOutcome::Inconclusive;
  std::optional<double> a_estimate;
};

GrowthVerdict has_mu_growth(const SpectrumReport& report);
GrowthVerdict has_mu_growth(const LinearSystem& system, const GrowthRate& rate,
                            const SpectrumParams& params = {});

}  // namespace muspec
