#include "muspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "muspec/errors.hpp"
#include "numfmt.hpp"
#include "parallel.hpp"

namespace muspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sample times of one tail of a window annulus, ascending. side = +1 covers
// [lo, hi], side = -1 covers [-hi, -lo].
std::vector<double> tail_times(double lo, double hi, TimeDomain domain, double step, int side) {
  std::vector<double> ts;
  if (domain == TimeDomain::Discrete) {
    for (long k = static_cast<long>(std::ceil(lo)); k <= static_cast<long>(std::floor(hi)); ++k) {
      ts.push_back(static_cast<double>(k));
    }
  } else {
    for (long i = 0;; ++i) {
      const double t = lo + i * step;
      if (t > hi + 1e-9 * step) break;
      ts.push_back(t);
    }
    if (ts.empty() || ts.back() < hi - 1e-9 * step) ts.push_back(hi);
  }
  if (side < 0) {
    for (double& t : ts) t = -t;
    std::reverse(ts.begin(), ts.end());
  }
  return ts;
}

struct Accumulator {
  double upper = -kInf;
  double lower = kInf;
  std::size_t pairs = 0;
};

double largest_rise(const std::vector<double>& g) {
  double best = 0.0;
  double low = kInf;
  for (double v : g) {
    low = std::min(low, v);
    best = std::max(best, v - low);
  }
  return best;
}

// Visits the admissible pairs i < j of one tail: L = g[j] - g[i] > 0 and
// L >= cutoff * L_max.
template <class Visit>
void for_admissible_pairs(const std::vector<double>& g, double cutoff, Visit&& visit) {
  const double lmax = largest_rise(g);
  if (!(lmax > 0.0)) return;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double l = g[j] - g[i];
      if (l <= 0.0 || l < cutoff * lmax) continue;
      visit(i, j, l);
    }
  }
}

std::vector<double> rate_samples(const GrowthRate& rate, const std::vector<double>& ts) {
  std::vector<double> g(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) g[i] = rate.log_rate(ts[i]);
  return g;
}

struct WindowPlan {
  double window;
  double inner;
};

std::vector<WindowPlan> plan_windows(const std::vector<double>& schedule) {
  std::vector<WindowPlan> plan;
  double prev = schedule.front() / 2.0;
  for (double n : schedule) {
    plan.push_back({n, prev});
    prev = n;
  }
  return plan;
}

void check_domains(const LinearSystem& system, const GrowthRate& rate) {
  if (system.time_domain() != rate.time_domain()) {
    throw ValidationError("rate.time_domain", std::string("rate is ") +
                                                  time_domain_name(rate.time_domain()) +
                                                  " but the system is " +
                                                  time_domain_name(system.time_domain()));
  }
}

std::vector<double> resolved_schedule(const SpectrumParams& params, TimeDomain domain) {
  return params.schedule.empty() ? default_schedule(domain) : params.schedule;
}

template <class TailStats>
BohlEstimate estimate(const std::vector<double>& schedule, const SpectrumParams& params,
                      TimeDomain domain, TailStats&& tail_stats) {
  BohlEstimate est;
  std::vector<double> ups;
  std::vector<double> los;
  for (const auto& w : plan_windows(schedule)) {
    Accumulator acc;
    for (int side : {1, -1}) {
      tail_stats(tail_times(w.inner, w.window, domain, params.sample_step, side), acc);
    }
    if (acc.pairs == 0) {
      throw NumericError("no admissible pairs in window " + format_real(w.window) +
                         " (the rate is flat there)");
    }
    est.per_window.push_back({w.window, acc.upper, acc.lower, acc.pairs});
    est.pairs_used += acc.pairs;
    ups.push_back(acc.upper);
    los.push_back(acc.lower);
  }
  est.upper = settle_sequence(ups, params.tol_stab, params.gamma_max);
  est.lower = settle_sequence(los, params.tol_stab, params.gamma_max);
  est.upper.value = est.upper.raw + est.upper.band;
  est.lower.value = est.lower.raw - est.lower.band;
  if (est.lower.value > est.upper.value) std::swap(est.lower.value, est.upper.value);
  return est;
}

double gap_width(double hi, double lo) {
  if (hi == lo) return 0.0;
  return lo - hi;
}

}  // namespace

std::vector<double> default_schedule(TimeDomain domain) {
  if (domain == TimeDomain::Discrete) return {50, 100, 200, 400};
  return {5, 10, 20, 40};
}

void validate_params(const SpectrumParams& p) {
  auto positive = [](double v, const char* path) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(path, "must be positive");
  };
  positive(p.tol_stab, "tol_stab");
  positive(p.gamma_max, "gamma_max");
  positive(p.delta_merge, "delta_merge");
  positive(p.sample_step, "sample_step");
  positive(p.evolution.step, "step");
  if (!(p.cutoff_fraction > 0.0 && p.cutoff_fraction < 1.0)) {
    throw ValidationError("cutoff_fraction", "must lie in (0, 1)");
  }
  for (std::size_t i = 0; i < p.schedule.size(); ++i) {
    positive(p.schedule[i], "schedule");
    if (i > 0 && !(p.schedule[i] > p.schedule[i - 1])) {
      throw ValidationError("schedule", "must be strictly increasing");
    }
  }
}

const char* settle_name(Settle s) {
  switch (s) {
    case Settle::Exact: return "exact";
    case Settle::Extrapolated: return "extrapolated";
    case Settle::Stable: return "stable";
    case Settle::DivergedUp: return "diverged_up";
    case Settle::DivergedDown: return "diverged_down";
    case Settle::Unsettled: return "unsettled";
  }
  return "?";
}

ExponentEstimate settle_sequence(const std::vector<double>& v, double tol, double gamma_max) {
  ExponentEstimate e;
  if (v.empty()) return e;
  const std::size_t n = v.size();
  const double last = v.back();
  auto diverged = [&](bool up) {
    e.settle = up ? Settle::DivergedUp : Settle::DivergedDown;
    e.raw = up ? kInf : -kInf;
    e.value = e.raw;
    return e;
  };
  e.raw = e.value = last;
  if (n == 1) {
    if (std::fabs(last) > gamma_max) return diverged(last > 0);
    return e;
  }
  auto diff = [&](std::size_t i) { return v[i] - v[i - 1]; };
  const double d_last = diff(n - 1);
  if (std::fabs(d_last) <= 1e-12 * std::max(1.0, std::fabs(last))) {
    e.settle = Settle::Exact;
    return e;
  }
  // Geometric contraction of the increments: extrapolate the tail sum and
  // use the drift of the extrapolation as an error band.
  auto extrapolate = [&](std::size_t i) -> std::optional<double> {
    const double d = diff(i);
    const double dp = diff(i - 1);
    if (dp == 0.0) return std::nullopt;
    const double rho = d / dp;
    if (!(rho > 0.0 && rho <= 0.8)) return std::nullopt;
    return v[i] + d * rho / (1.0 - rho);
  };
  if (n >= 3) {
    if (auto ext = extrapolate(n - 1)) {
      e.settle = Settle::Extrapolated;
      e.raw = e.value = *ext;
      if (n >= 4) {
        if (auto prev = extrapolate(n - 2)) e.band = std::fabs(*ext - *prev);
      }
      return e;
    }
  }
  if (std::fabs(d_last) <= tol) {
    e.settle = Settle::Stable;
    return e;
  }
  if (std::fabs(last) > gamma_max) return diverged(last > 0);
  const std::size_t steps = std::min<std::size_t>(3, n - 1);
  if (steps >= 2) {
    bool up = true;
    bool down = true;
    for (std::size_t i = n - steps; i < n; ++i) {
      up = up && diff(i) >= tol;
      down = down && diff(i) <= -tol;
    }
    if (up || down) return diverged(up);
  }
  return e;
}

BohlEstimate bohl_exponents(const LinearSystem& system, std::size_t component,
                            const GrowthRate& rate, const SpectrumParams& params) {
  validate_params(params);
  check_domains(system, rate);
  if (!system.is_diagonal()) {
    throw ValidationError("structure", "Bohl exponents per component need a scalar or diagonal system");
  }
  const auto schedule = resolved_schedule(params, system.time_domain());
  return estimate(schedule, params, system.time_domain(),
                  [&](const std::vector<double>& ts, Accumulator& acc) {
                    const auto g = rate_samples(rate, ts);
                    const auto f = component_profile(system, component, ts, params.evolution);
                    for_admissible_pairs(g, params.cutoff_fraction,
                                         [&](std::size_t i, std::size_t j, double l) {
                                           const double r = (f[j] - f[i]) / l;
                                           acc.upper = std::max(acc.upper, r);
                                           acc.lower = std::min(acc.lower, r);
                                           ++acc.pairs;
                                         });
                  });
}

BohlEstimate singular_value_exponents(const LinearSystem& system, const GrowthRate& rate,
                                      const SpectrumParams& params) {
  validate_params(params);
  check_domains(system, rate);
  const auto schedule = resolved_schedule(params, system.time_domain());
  return estimate(schedule, params, system.time_domain(),
                  [&](const std::vector<double>& ts, Accumulator& acc) {
                    const auto g = rate_samples(rate, ts);
                    // The smallest singular value of a long product drowns in
                    // roundoff, so it is taken as 1/sigma_max of the backward
                    // product instead.
                    std::vector<ScaledMatrix> steps, back;
                    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
                      steps.push_back(propagate(system, ts[i + 1], ts[i], params.evolution));
                      back.push_back(propagate(system, ts[i], ts[i + 1], params.evolution));
                    }
                    const double lmax = largest_rise(g);
                    if (!(lmax > 0.0)) return;
                    for (std::size_t i = 0; i < ts.size(); ++i) {
                      ScaledMatrix x = ScaledMatrix::identity(system.dimension());
                      ScaledMatrix y = x;
                      for (std::size_t j = i + 1; j < ts.size(); ++j) {
                        x = steps[j - 1] * x;
                        y = y * back[j - 1];
                        const double l = g[j] - g[i];
                        if (l <= 0.0 || l < params.cutoff_fraction * lmax) continue;
                        const double hi = operator_norm_bounds(x).log_sigma_max;
                        const double lo = -operator_norm_bounds(y).log_sigma_max;
                        acc.upper = std::max(acc.upper, hi / l);
                        acc.lower = std::min(acc.lower, lo / l);
                        ++acc.pairs;
                      }
                    }
                  });
}

bool SpectralGap::contains(double gamma) const {
  if (std::isinf(gamma)) {
    if (gamma < 0) return lo == -kInf && lo_closed;
    return hi == kInf && hi_closed;
  }
  return gamma > lo && gamma < hi;
}

SpectrumReport compute_spectrum(const LinearSystem& system, const GrowthRate& rate,
                                const SpectrumParams& params) {
  validate_params(params);
  check_domains(system, rate);
  SpectrumReport report{rate, system, params, resolved_schedule(params, system.time_domain()),
                        SpectrumMode::Exact, {}, {}, {}, false};
  const std::size_t d = system.dimension();

  if (!system.is_diagonal()) {
    report.mode = SpectrumMode::Enclosure;
    report.components.push_back(singular_value_exponents(system, rate, params));
    const auto& est = report.components.front();
    report.intervals.push_back({est.lower.value, est.upper.value});
    const auto& iv = report.intervals.front();
    if (iv.lo > -kInf) report.gaps.push_back({-kInf, iv.lo, true, false, 0, std::nullopt});
    if (iv.hi < kInf) report.gaps.push_back({iv.hi, kInf, false, true, static_cast<int>(d), std::nullopt});
    report.converged = est.settled();
    return report;
  }

  report.components.resize(d);
  parallel_for(d, params.threads, [&](std::size_t c) {
    report.components[c] = bohl_exponents(system, c, rate, params);
  });
  report.converged = std::all_of(report.components.begin(), report.components.end(),
                                 [](const BohlEstimate& e) { return e.settled(); });

  std::vector<SpectralInterval> parts;
  for (const auto& e : report.components) parts.push_back({e.lower.value, e.upper.value});
  std::vector<SpectralInterval> sorted = parts;
  std::sort(sorted.begin(), sorted.end(), [](const SpectralInterval& a, const SpectralInterval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (const auto& iv : sorted) {
    if (!report.intervals.empty() &&
        gap_width(report.intervals.back().hi, iv.lo) < params.delta_merge) {
      report.intervals.back().hi = std::max(report.intervals.back().hi, iv.hi);
    } else {
      report.intervals.push_back(iv);
    }
  }

  // A component lies entirely left of the gap exactly when its projector
  // pattern entry is 1.
  auto make_gap = [&](double lo, double hi, bool lo_closed, bool hi_closed) {
    SpectralGap g{lo, hi, lo_closed, hi_closed, 0, std::vector<int>(d, 0)};
    for (std::size_t c = 0; c < d; ++c) {
      if (parts[c].hi <= lo) {
        (*g.pattern)[c] = 1;
        ++g.rank;
      }
    }
    return g;
  };
  const auto& ivs = report.intervals;
  if (ivs.front().lo > -kInf) report.gaps.push_back(make_gap(-kInf, ivs.front().lo, true, false));
  for (std::size_t i = 0; i + 1 < ivs.size(); ++i) {
    report.gaps.push_back(make_gap(ivs[i].hi, ivs[i + 1].lo, false, false));
  }
  if (ivs.back().hi < kInf) report.gaps.push_back(make_gap(ivs.back().hi, kInf, false, true));
  return report;
}

const char* tri_name(Tri t) {
  switch (t) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    case Tri::Inconclusive: return "inconclusive";
  }
  return "?";
}

DichotomyVerdict has_mu_dichotomy(const SpectrumReport& report) {
  DichotomyVerdict v;
  const double tol = report.params.tol_stab;
  for (const auto& iv : report.intervals) {
    if (iv.lo <= 0.0 && 0.0 <= iv.hi) {
      v.verdict = Tri::False;
      v.reason = "0 lies in the spectrum";
      return v;
    }
  }
  if (!report.converged) {
    v.reason = "estimates did not settle";
    return v;
  }
  for (const auto& iv : report.intervals) {
    if (std::fabs(iv.lo) <= tol || std::fabs(iv.hi) <= tol) {
      v.reason = "0 is within tol_stab of a spectral endpoint";
      return v;
    }
  }
  for (const auto& g : report.gaps) {
    if (g.contains(0.0)) {
      v.verdict = Tri::True;
      v.projector_rank = g.rank;
      v.projector_pattern = g.pattern;
      v.reason = "0 lies in a spectral gap";
      return v;
    }
  }
  v.reason = "0 not located";
  return v;
}

DichotomyVerdict has_mu_dichotomy(const LinearSystem& system, const GrowthRate& rate,
                                  const SpectrumParams& params) {
  return has_mu_dichotomy(compute_spectrum(system, rate, params));
}

GrowthVerdict has_mu_growth(const SpectrumReport& report) {
  GrowthVerdict v;
  double a = 0.0;
  bool settled = true;
  for (const auto& e : report.components) {
    if (e.upper.diverged() || e.lower.diverged()) {
      v.outcome = GrowthOutcome::Fails;
      return v;
    }
    settled = settled && e.settled();
    a = std::max({a, std::fabs(e.upper.value), std::fabs(e.lower.value)});
  }
  if (!settled) return v;
  v.outcome = GrowthOutcome::Holds;
  v.a_estimate = a + report.params.tol_stab;
  return v;
}

GrowthVerdict has_mu_growth(const LinearSystem& system, const GrowthRate& rate,
                            const SpectrumParams& params) {
  return has_mu_growth(compute_spectrum(system, rate, params));
}

}  // namespace muspec
