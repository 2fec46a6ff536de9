#include "muspec/relations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jsonutil.hpp"
#include "muspec/errors.hpp"
#include "muspec/evolution.hpp"
#include "muspec/spectrum.hpp"

namespace muspec {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Both rates sampled on one symmetric grid; window w covers indices
// [lo[w], hi[w]].
struct Samples {
  std::vector<double> t;
  std::vector<double> gmu;
  std::vector<double> gom;
  std::vector<double> windows;
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  double step = 1.0;
};

Samples sample(const GrowthRate& mu, const GrowthRate& omega, const RelationParams& p) {
  if (mu.time_domain() != omega.time_domain()) {
    throw ValidationError("omega.time_domain", "rates must share a time domain");
  }
  if (!(p.tol_stab > 0.0)) throw ValidationError("tol_stab", "must be positive");
  Samples s;
  const bool discrete = mu.time_domain() == TimeDomain::Discrete;
  s.windows = p.schedule.empty() ? default_schedule(mu.time_domain()) : p.schedule;
  for (std::size_t i = 0; i < s.windows.size(); ++i) {
    if (!(s.windows[i] > 0.0) || (i > 0 && !(s.windows[i] > s.windows[i - 1]))) {
      throw ValidationError("schedule", "must be positive and strictly increasing");
    }
  }
  s.step = discrete ? 1.0 : (p.step > 0.0 ? p.step : 0.1);
  const double nmax = s.windows.back();
  const long m = static_cast<long>(std::floor(nmax / s.step + 1e-9));
  for (long i = -m; i <= m; ++i) s.t.push_back(i * s.step);
  for (double t : s.t) {
    s.gmu.push_back(mu.log_rate(t));
    s.gom.push_back(omega.log_rate(t));
  }
  for (double w : s.windows) {
    const long k = static_cast<long>(std::floor(w / s.step + 1e-9));
    s.lo.push_back(static_cast<std::size_t>(m - k));
    s.hi.push_back(static_cast<std::size_t>(m + k));
  }
  return s;
}

struct Rise {
  double value = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
};

// sup over n <= k of H(k) - H(n) with H = a*G_omega - b*G_mu on [lo, hi].
Rise max_rise(const Samples& s, std::size_t w, double a, double b) {
  Rise best{0.0, s.lo[w], s.lo[w]};
  double low = kInf;
  std::size_t low_at = s.lo[w];
  for (std::size_t i = s.lo[w]; i <= s.hi[w]; ++i) {
    const double h = a * s.gom[i] - b * s.gmu[i];
    if (h < low) {
      low = h;
      low_at = i;
    }
    if (h - low > best.value) best = {h - low, low_at, i};
  }
  return best;
}

std::vector<Rise> rise_sequence(const Samples& s, double a, double b) {
  std::vector<Rise> out;
  for (std::size_t w = 0; w < s.windows.size(); ++w) out.push_back(max_rise(s, w, a, b));
  return out;
}

enum class Trend { Stable, Growing, Unclear };

Trend trend(const std::vector<Rise>& seq, double tol) {
  const std::size_t n = seq.size();
  if (n < 2) return Trend::Unclear;
  if (std::fabs(seq[n - 1].value - seq[n - 2].value) <= tol) return Trend::Stable;
  const std::size_t steps = std::min<std::size_t>(3, n - 1);
  for (std::size_t i = n - steps; i < n; ++i) {
    if (seq[i].value - seq[i - 1].value < tol) return Trend::Unclear;
  }
  return Trend::Growing;
}

bool increased_last(const std::vector<Rise>& seq, double tol) {
  const std::size_t n = seq.size();
  return n >= 2 && seq[n - 1].value - seq[n - 2].value >= tol;
}

json values(const std::vector<Rise>& seq) {
  json a = json::array();
  for (const auto& r : seq) a.push_back(jnum(r.value));
  return a;
}

std::vector<PairValue> witness_of(const Samples& s, const std::vector<Rise>& seq) {
  std::vector<PairValue> w;
  for (const auto& r : seq) w.push_back({s.t[r.n], s.t[r.k], r.value});
  return w;
}

json sampling_json(const Samples& s) {
  return {{"schedule", jnums(s.windows)}, {"step", jnum(s.step)}};
}

RelationVerdict base_verdict(RelationKind kind, const GrowthRate& mu, const GrowthRate& omega) {
  RelationVerdict v;
  v.kind = kind;
  v.mu = mu.label();
  v.omega = omega.label();
  return v;
}

Outcome combine(const std::vector<Outcome>& parts) {
  bool all_hold = true;
  for (Outcome o : parts) {
    if (o == Outcome::Fails) return Outcome::Fails;
    all_hold = all_hold && o == Outcome::Holds;
  }
  return all_hold ? Outcome::Holds : Outcome::Inconclusive;
}

Outcome combine_parts(const std::vector<RelationVerdict>& parts) {
  std::vector<Outcome> os;
  for (const auto& p : parts) os.push_back(p.outcome);
  return combine(os);
}

struct SlopeForm {
  Outcome outcome = Outcome::Inconclusive;
  double slope = 0.0;
  double intercept = 0.0;
};

// L_omega <= c L_mu + C, with c estimated as the limiting sup ratio of
// log-quotients over the window tails.
SlopeForm slope_prefilter(const GrowthRate& mu, const GrowthRate& omega, const Samples& s,
                          double tol) {
  SlopeForm f;
  try {
    const LinearSystem ratio =
        LinearSystem::closed_form({Potential::from_rate(omega, 1.0)}, omega.time_domain());
    SpectrumParams sp;
    sp.schedule = s.windows;
    sp.tol_stab = tol;
    const BohlEstimate e = bohl_exponents(ratio, 0, mu, sp);
    if (e.upper.settle == Settle::DivergedUp) {
      f.outcome = Outcome::Fails;
      f.slope = kInf;
      return f;
    }
    if (!e.upper.settled() || e.upper.diverged()) return f;
    f.slope = std::max(0.0, e.upper.value);
    f.intercept = max_rise(s, s.windows.size() - 1, 1.0, f.slope + tol).value;
    f.outcome = Outcome::Holds;
  } catch (const NumericError&) {
    f.outcome = Outcome::Inconclusive;
  }
  return f;
}

std::vector<double> search_grid(const RelationParams& p) {
  std::vector<double> g;
  for (int i = p.search_exp_lo; i <= p.search_exp_hi; ++i) g.push_back(std::ldexp(1.0, i));
  return g;
}

}  // namespace

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "holds";
    case Outcome::Fails: return "fails";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

const char* relation_name(RelationKind k) {
  switch (k) {
    case RelationKind::Faster: return "faster";
    case RelationKind::WeaklyFaster: return "weakly-faster";
    case RelationKind::AlmostFaster: return "almost-faster";
    case RelationKind::AlmostSlower: return "almost-slower";
    case RelationKind::WeaklyEquivalent: return "weakly-equivalent";
    case RelationKind::Equivalent: return "equivalent";
    case RelationKind::ChainOrder: return "order";
  }
  return "?";
}

RelationVerdict check_faster(const GrowthRate& mu, const GrowthRate& omega,
                             const RelationParams& p) {
  const Samples s = sample(mu, omega, p);
  RelationVerdict v = base_verdict(RelationKind::Faster, mu, omega);
  v.grid = sampling_json(s);
  v.grid["epsilon"] = jnums(p.epsilon_grid);
  json envelopes = json::array();
  json diag = json::array();
  bool all_stable = true;
  bool growing = false;
  for (double eps : p.epsilon_grid) {
    const auto seq = rise_sequence(s, 1.0, eps);
    const Trend tr = trend(seq, p.tol_stab);
    diag.push_back({{"epsilon", jnum(eps)}, {"sup", values(seq)}});
    envelopes.push_back({{"epsilon", jnum(eps)}, {"log_M", jnum(seq.back().value)}});
    all_stable = all_stable && tr == Trend::Stable;
    if (tr == Trend::Growing && !growing) {
      growing = true;
      v.witness = witness_of(s, seq);
      v.diagnostics["failing_epsilon"] = jnum(eps);
    }
  }
  v.diagnostics["windows"] = diag;
  if (all_stable) {
    v.outcome = Outcome::Holds;
    v.certificate = {{"envelopes", envelopes}};
  } else if (growing) {
    v.outcome = Outcome::Fails;
  }
  return v;
}

RelationVerdict check_faster_backward(const GrowthRate& mu, const GrowthRate& omega,
                                      const RelationParams& p) {
  const Samples s = sample(mu, omega, p);
  RelationVerdict v = base_verdict(RelationKind::Faster, mu, omega);
  v.grid = sampling_json(s);
  v.grid["epsilon"] = jnums(p.epsilon_grid);
  v.grid["formulation"] = "backward";
  bool all_stable = true;
  bool growing = false;
  json diag = json::array();
  for (double eps : p.epsilon_grid) {
    // beta~ = 1, beta = eps: sup over k <= n of
    // beta~ (G_om(n) - G_om(k)) - beta (G_mu(n) - G_mu(k)).
    std::vector<Rise> seq;
    for (std::size_t w = 0; w < s.windows.size(); ++w) {
      Rise best{0.0, s.lo[w], s.lo[w]};
      for (std::size_t k = s.lo[w]; k <= s.hi[w]; ++k) {
        for (std::size_t n = k; n <= s.hi[w]; ++n) {
          const double val = (s.gom[n] - s.gom[k]) - eps * (s.gmu[n] - s.gmu[k]);
          if (val > best.value) best = {val, k, n};
        }
      }
      seq.push_back(best);
    }
    diag.push_back({{"epsilon", jnum(eps)}, {"sup", values(seq)}});
    const Trend tr = trend(seq, p.tol_stab);
    all_stable = all_stable && tr == Trend::Stable;
    if (tr == Trend::Growing && !growing) {
      growing = true;
      v.witness = witness_of(s, seq);
    }
  }
  v.diagnostics["windows"] = diag;
  v.outcome = all_stable ? Outcome::Holds : (growing ? Outcome::Fails : Outcome::Inconclusive);
  return v;
}

RelationVerdict check_weakly_faster(const GrowthRate& mu, const GrowthRate& omega,
                                    const RelationParams& p) {
  const Samples s = sample(mu, omega, p);
  RelationVerdict v = base_verdict(RelationKind::WeaklyFaster, mu, omega);
  v.grid = sampling_json(s);
  // Drawdown of h = log mu - log omega is the largest rise of -h.
  const auto seq = rise_sequence(s, 1.0, 1.0);
  v.diagnostics["drawdown"] = values(seq);
  switch (trend(seq, p.tol_stab)) {
    case Trend::Stable:
      v.outcome = Outcome::Holds;
      v.certificate = {{"log_M", jnum(seq.back().value)}, {"m", jnum(std::exp(-seq.back().value))}};
      break;
    case Trend::Growing:
      v.outcome = Outcome::Fails;
      v.witness = witness_of(s, seq);
      break;
    case Trend::Unclear:
      break;
  }
  return v;
}

RelationVerdict check_almost(const GrowthRate& mu, const GrowthRate& omega,
                             AlmostDirection direction, const RelationParams& p) {
  const Samples s = sample(mu, omega, p);
  const bool faster = direction == AlmostDirection::Faster;
  RelationVerdict v =
      base_verdict(faster ? RelationKind::AlmostFaster : RelationKind::AlmostSlower, mu, omega);
  auto search = search_grid(p);
  // Faster fixes |alpha~| and looks for the smallest working |alpha|; Slower
  // fixes |alpha| and looks for the largest working |alpha~|.
  if (!faster) std::reverse(search.begin(), search.end());
  v.grid = sampling_json(s);
  v.grid["fixed"] = jnums(p.almost_fixed);
  v.grid["search"] = jnums(search);
  v.grid["fixed_exponent"] = faster ? "alpha_tilde" : "alpha";

  bool all_ok = true;
  bool some_point_fails = false;
  json choices = json::array();
  json diag = json::array();
  for (double fixed : p.almost_fixed) {
    std::optional<double> chosen;
    double chosen_bound = 0.0;
    bool every_candidate_grew = true;
    std::vector<Rise> first_failure;
    for (double cand : search) {
      const double a = faster ? fixed : cand;  // |alpha~|
      const double b = faster ? cand : fixed;  // |alpha|
      const auto seq = rise_sequence(s, a, b);
      if (trend(seq, p.tol_stab) == Trend::Stable) {
        chosen = cand;
        chosen_bound = seq.back().value;
        break;
      }
      if (!increased_last(seq, p.tol_stab)) every_candidate_grew = false;
      if (first_failure.empty()) first_failure = seq;
    }
    if (chosen) {
      choices.push_back({{"fixed", jnum(fixed)}, {"chosen", jnum(*chosen)}, {"log_M", jnum(chosen_bound)}});
    } else {
      all_ok = false;
      choices.push_back({{"fixed", jnum(fixed)}, {"chosen", nullptr}});
      if (every_candidate_grew) {
        some_point_fails = true;
        if (v.witness.empty()) {
          v.witness = witness_of(s, first_failure);
          v.diagnostics["failing_fixed"] = jnum(fixed);
        }
      }
    }
    diag.push_back({{"fixed", jnum(fixed)}, {"found", chosen.has_value()}});
  }
  v.diagnostics["grid_points"] = diag;

  Outcome grid_outcome = all_ok ? Outcome::Holds
                                : (some_point_fails ? Outcome::Fails : Outcome::Inconclusive);
  const SlopeForm pre = slope_prefilter(mu, omega, s, p.tol_stab);
  v.diagnostics["prefilter"] = {{"outcome", outcome_name(pre.outcome)},
                                {"slope", jnum(pre.slope)},
                                {"intercept", jnum(pre.intercept)}};
  v.diagnostics["grid_outcome"] = outcome_name(grid_outcome);
  if (pre.outcome != Outcome::Inconclusive && grid_outcome != Outcome::Inconclusive &&
      pre.outcome != grid_outcome) {
    v.diagnostics["disagreement"] = "slope pre-filter and exponent grid disagree";
    grid_outcome = Outcome::Inconclusive;
  }
  v.outcome = grid_outcome;
  if (v.outcome == Outcome::Holds) {
    v.certificate = {{"choices", choices},
                     {"slope", jnum(pre.slope)},
                     {"intercept", jnum(pre.intercept)}};
  } else {
    v.diagnostics["choices"] = choices;
  }
  return v;
}

RelationVerdict check_weakly_equivalent(const GrowthRate& a, const GrowthRate& b,
                                        const RelationParams& p) {
  RelationVerdict v = base_verdict(RelationKind::WeaklyEquivalent, a, b);
  v.parts = {check_weakly_faster(a, b, p), check_weakly_faster(b, a, p)};
  v.outcome = combine_parts(v.parts);
  return v;
}

RelationVerdict check_equivalent(const GrowthRate& a, const GrowthRate& b, const RelationParams& p) {
  RelationVerdict v = base_verdict(RelationKind::Equivalent, a, b);
  v.parts = {check_almost(a, b, AlmostDirection::Faster, p),
             check_almost(b, a, AlmostDirection::Faster, p),
             check_almost(a, b, AlmostDirection::Slower, p),
             check_almost(b, a, AlmostDirection::Slower, p)};
  v.outcome = combine_parts(v.parts);
  return v;
}

RelationVerdict check_order(const GrowthRate& lower, const GrowthRate& upper,
                            const RelationParams& p) {
  // mu = upper, omega = lower throughout.
  RelationVerdict v = base_verdict(RelationKind::ChainOrder, upper, lower);
  v.parts = {check_almost(upper, lower, AlmostDirection::Slower, p),
             check_almost(upper, lower, AlmostDirection::Faster, p)};
  v.outcome = combine_parts(v.parts);
  return v;
}

PairClassification classify_pair(const GrowthRate& a, const GrowthRate& b,
                                 const RelationParams& p) {
  PairClassification c;
  c.a = a.label();
  c.b = b.label();
  c.symbolic = symbolic_compare(a, b);

  struct Slot {
    const char* name;
    RelationVerdict verdict;
    Outcome* field;
    bool RelationProfile::*symbolic;
  };
  std::vector<Slot> slots = {
      {"a>>b", check_faster(a, b, p), &c.a_faster_b, &RelationProfile::a_faster_b},
      {"b>>a", check_faster(b, a, p), &c.b_faster_a, &RelationProfile::b_faster_a},
      {"a>b", check_weakly_faster(a, b, p), &c.a_weakly_faster_b, &RelationProfile::a_weakly_faster_b},
      {"b>a", check_weakly_faster(b, a, p), &c.b_weakly_faster_a, &RelationProfile::b_weakly_faster_a},
      {"a>.b", check_almost(a, b, AlmostDirection::Faster, p), &c.a_almost_faster_b,
       &RelationProfile::a_almost_faster_b},
      {"b>.a", check_almost(b, a, AlmostDirection::Faster, p), &c.b_almost_faster_a,
       &RelationProfile::b_almost_faster_a},
      {"a<.b", check_almost(b, a, AlmostDirection::Slower, p), &c.a_almost_slower_b,
       &RelationProfile::a_almost_slower_b},
      {"b<.a", check_almost(a, b, AlmostDirection::Slower, p), &c.b_almost_slower_a,
       &RelationProfile::b_almost_slower_a},
  };
  for (auto& slot : slots) {
    Outcome o = slot.verdict.outcome;
    if (c.symbolic && o != Outcome::Inconclusive) {
      const Outcome expected = (*c.symbolic).*(slot.symbolic) ? Outcome::Holds : Outcome::Fails;
      if (o != expected) {
        c.disagreements.push_back(slot.name);
        o = Outcome::Inconclusive;
      }
    }
    *slot.field = o;
    c.checks.push_back(std::move(slot.verdict));
  }
  c.weakly_equivalent = combine({c.a_weakly_faster_b, c.b_weakly_faster_a});
  c.equivalent = combine({c.a_almost_faster_b, c.b_almost_faster_a, c.a_almost_slower_b,
                          c.b_almost_slower_a});
  c.a_order_b = combine({c.a_almost_slower_b, c.b_almost_faster_a});
  c.b_order_a = combine({c.b_almost_slower_a, c.a_almost_faster_b});
  return c;
}

ChainResult chain_check(const std::vector<GrowthRate>& rates, const RelationParams& p) {
  if (rates.size() < 2) throw ValidationError("chain", "needs at least two rates");
  ChainResult r;
  std::vector<Outcome> os;
  for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
    r.links.push_back(check_order(rates[i], rates[i + 1], p));
    os.push_back(r.links.back().outcome);
    if (!r.first_failing_link && r.links.back().outcome != Outcome::Holds) r.first_failing_link = i;
  }
  r.outcome = combine(os);
  return r;
}

json to_json(const RelationVerdict& v) {
  json j;
  j["relation"] = relation_name(v.kind);
  j["direction"] = "mu_over_omega";
  j["mu"] = v.mu;
  j["omega"] = v.omega;
  j["outcome"] = outcome_name(v.outcome);
  if (!v.certificate.is_null()) j["certificate"] = v.certificate;
  if (!v.witness.empty()) {
    json w = json::array();
    for (const auto& pv : v.witness) w.push_back({{"n", jnum(pv.n)}, {"k", jnum(pv.k)}, {"value", jnum(pv.value)}});
    j["witness"] = w;
  }
  if (!v.grid.is_null()) j["grid"] = v.grid;
  if (!v.diagnostics.is_null()) j["diagnostics"] = v.diagnostics;
  if (!v.parts.empty()) {
    json parts = json::array();
    for (const auto& part : v.parts) parts.push_back(to_json(part));
    j["parts"] = parts;
  }
  return j;
}

json to_json(const PairClassification& c) {
  json j;
  j["a"] = c.a;
  j["b"] = c.b;
  j["profile"] = {
      {"a_faster_b", outcome_name(c.a_faster_b)},
      {"b_faster_a", outcome_name(c.b_faster_a)},
      {"a_weakly_faster_b", outcome_name(c.a_weakly_faster_b)},
      {"b_weakly_faster_a", outcome_name(c.b_weakly_faster_a)},
      {"a_almost_faster_b", outcome_name(c.a_almost_faster_b)},
      {"b_almost_faster_a", outcome_name(c.b_almost_faster_a)},
      {"a_almost_slower_b", outcome_name(c.a_almost_slower_b)},
      {"b_almost_slower_a", outcome_name(c.b_almost_slower_a)},
      {"weakly_equivalent", outcome_name(c.weakly_equivalent)},
      {"equivalent", outcome_name(c.equivalent)},
      {"a_order_b", outcome_name(c.a_order_b)},
      {"b_order_a", outcome_name(c.b_order_a)},
  };
  if (c.symbolic) {
    const auto& s = *c.symbolic;
    j["symbolic"] = {{"a_faster_b", s.a_faster_b},
                     {"b_faster_a", s.b_faster_a},
                     {"a_weakly_faster_b", s.a_weakly_faster_b},
                     {"b_weakly_faster_a", s.b_weakly_faster_a},
                     {"a_almost_faster_b", s.a_almost_faster_b},
                     {"b_almost_faster_a", s.b_almost_faster_a},
                     {"a_almost_slower_b", s.a_almost_slower_b},
                     {"b_almost_slower_a", s.b_almost_slower_a},
                     {"weakly_equivalent", s.weakly_equivalent},
                     {"equivalent", s.equivalent}};
  } else {
    j["symbolic"] = nullptr;
  }
  j["disagreements"] = c.disagreements;
  json checks = json::array();
  for (const auto& v : c.checks) checks.push_back(to_json(v));
  j["checks"] = checks;
  return j;
}

json to_json(const ChainResult& c) {
  json j;
  j["relation"] = "chain";
  j["outcome"] = outcome_name(c.outcome);
  j["first_failing_link"] = c.first_failing_link ? json(*c.first_failing_link) : json(nullptr);
  json links = json::array();
  for (const auto& l : c.links) links.push_back(to_json(l));
  j["links"] = links;
  return j;
}

}  // namespace muspec
