#include "muspec/theorems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <set>

#include "jsonutil.hpp"
#include "muspec/catalog.hpp"
#include "muspec/descriptors.hpp"
#include "muspec/errors.hpp"
#include "numfmt.hpp"
#include "parallel.hpp"

namespace muspec {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Replaces the free variable t by `by` (whole identifiers only).
std::string substitute_t(const std::string& text, const std::string& by) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool ident_char = std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_';
    if (!ident_char) {
      out += text[i];
      continue;
    }
    std::size_t j = i;
    while (j < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
      ++j;
    }
    const std::string word = text.substr(i, j - i);
    out += word == "t" ? by : word;
    i = j - 1;
  }
  return out;
}

std::vector<SpectralInterval> points(std::vector<double> vs) {
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  std::vector<SpectralInterval> out;
  for (double v : vs) out.push_back({v, v});
  return out;
}

std::string slopes_text(const std::vector<double>& slopes) {
  std::string s;
  for (std::size_t i = 0; i < slopes.size(); ++i) s += (i ? "," : "") + format_real(slopes[i]);
  return s;
}

json intervals_json(const SpectrumReport& r) {
  json a = json::array();
  for (const auto& iv : r.intervals) a.push_back({jnum(iv.lo), jnum(iv.hi)});
  return a;
}

json gaps_json(const SpectrumReport& r) {
  json a = json::array();
  for (const auto& g : r.gaps) a.push_back({{"lo", jnum(g.lo)}, {"hi", jnum(g.hi)}, {"rank", g.rank}});
  return a;
}

std::string tri_verdict(Tri t) { return tri_name(t); }

std::string growth_name(GrowthOutcome o) {
  switch (o) {
    case GrowthOutcome::Holds: return "holds";
    case GrowthOutcome::Fails: return "fails";
    case GrowthOutcome::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

TheoremReport start(const std::string& theorem, const std::string& fixture,
                    std::vector<std::string> rates) {
  TheoremReport r;
  r.theorem = theorem;
  r.fixture = fixture;
  r.rates = std::move(rates);
  return r;
}

// Records a hypothesis; returns whether every hypothesis so far holds.
bool hypothesis(TheoremReport& r, const std::string& name, const std::string& verdict, bool holds) {
  r.hypotheses.push_back({name, verdict, holds});
  return std::all_of(r.hypotheses.begin(), r.hypotheses.end(),
                     [](const HypothesisCheck& h) { return h.holds; });
}

TheoremReport& conclude(TheoremReport& r, bool ok) {
  r.conclusion = ok;
  r.status = ok ? TheoremStatus::Pass : TheoremStatus::Fail;
  return r;
}

bool settled_hypothesis(TheoremReport& r, const std::string& which, const SpectrumReport& s) {
  return hypothesis(r, which + " spectrum settled", s.converged ? "yes" : "no", s.converged);
}

double max_hi(const SpectrumReport& s) {
  double m = -kInf;
  for (const auto& iv : s.intervals) m = std::max(m, iv.hi);
  return m;
}

double min_lo(const SpectrumReport& s) {
  double m = kInf;
  for (const auto& iv : s.intervals) m = std::min(m, iv.lo);
  return m;
}

// Largest point of the spectrum in [0, +inf]; 0 when that part is empty.
double positive_sup(const SpectrumReport& s) {
  double m = 0.0;
  for (const auto& iv : s.intervals) {
    if (iv.hi >= 0.0) m = std::max(m, iv.hi);
  }
  return m;
}

double negative_inf(const SpectrumReport& s) {
  double m = 0.0;
  for (const auto& iv : s.intervals) {
    if (iv.lo <= 0.0) m = std::min(m, iv.lo);
  }
  return m;
}

bool same_extended(double x, double y, double tol) {
  if (std::isinf(x) || std::isinf(y)) return x == y;
  return std::fabs(x - y) <= tol;
}

// Which side of 0 a gap lies on: -1, +1, or 0 when it straddles 0.
int semiaxis(const SpectralGap& g, double tol) {
  if (g.lo >= -tol && g.hi > tol) return 1;
  if (g.hi <= tol && g.lo < -tol) return -1;
  return 0;
}

bool has_point(const SpectrumReport& s, double v) {
  return std::any_of(s.intervals.begin(), s.intervals.end(),
                     [&](const SpectralInterval& iv) { return iv.lo <= v && v <= iv.hi; });
}

std::string key_of(const GrowthRate& r) { return rate_to_json(r).dump(); }

}  // namespace

Fixture generate_quotient_system(const GrowthRate& nu, const std::vector<double>& slopes,
                                 const std::string& nu_name) {
  if (slopes.empty() || slopes.size() > 16) {
    throw ValidationError("slopes", "needs between 1 and 16 entries");
  }
  const std::string name = nu_name.empty() ? rate_name(nu) : nu_name;
  std::vector<Potential> potentials;
  for (double s : slopes) potentials.push_back(Potential::from_rate(nu, s));
  const auto text = nu.log_rate_text();
  auto system = [&] {
    if (nu.time_domain() == TimeDomain::Continuous) {
      return LinearSystem::closed_form(potentials, TimeDomain::Continuous);
    }
    if (!text) throw ValidationError("nu", "discrete quotient systems need an expression for log nu");
    std::vector<std::string> entries;
    for (double s : slopes) {
      entries.push_back("exp(" + format_real(s) + "*((" + substitute_t(*text, "(k+1)") + ")-(" +
                        substitute_t(*text, "k") + ")))");
    }
    return slopes.size() == 1 ? LinearSystem::scalar(entries[0], TimeDomain::Discrete)
                              : LinearSystem::diagonal(entries, TimeDomain::Discrete);
  }();
  Fixture f{"quotient(" + name + ";" + slopes_text(slopes) + ")", system, potentials, {}};
  f.expected[name] = points(slopes);
  return f;
}

std::vector<Fixture> catalog_fixtures() {
  const SpectralInterval zero{0, 0}, one{1, 1}, up{kInf, kInf}, down{-kInf, -kInf};
  auto fixture = [](const std::string& name, const std::string& potential,
                    std::map<std::string, std::vector<SpectralInterval>> expected) {
    return Fixture{name, catalog_system(name), std::vector<Potential>{Potential::from_expression(potential)},
                   std::move(expected)};
  };
  return {
      fixture("abs2t", "t*abs(t)", {{"q", {one}}, {"c", {zero}}, {"exp", {up}}, {"p", {up}}}),
      fixture("inv1pt", "sgn(t)*log(1+abs(t))",
              {{"p", {one}}, {"exp", {zero}}, {"q", {zero}}, {"c", {zero}}}),
      fixture("sq3t2", "t^3", {{"c", {one}}, {"p", {up}}, {"exp", {up}}, {"q", {up}}}),
      fixture("frak_a", "-(k^3)", {{"exp", {down}}, {"c", {SpectralInterval{-1, -1}}}}),
      fixture("disc_q", "sgn(k)*k^2", {{"q", {one}}, {"exp", {up}}}),
      fixture("identity", "0", {{"p", {zero}}, {"exp", {zero}}, {"q", {zero}}, {"c", {zero}}}),
  };
}

std::vector<Fixture> harness_fixtures() {
  std::vector<Fixture> out = catalog_fixtures();
  const std::vector<std::pair<std::string, std::vector<double>>> discrete = {
      {"exp", {1}},  {"exp", {0}}, {"exp", {-1, 1}}, {"q", {-2}},
      {"q", {-1, 2}}, {"c", {-1}}, {"p", {2}},       {"p", {-1, 1}},
  };
  for (const auto& [nu, slopes] : discrete) {
    out.push_back(generate_quotient_system(catalog_rate(nu, TimeDomain::Discrete), slopes, nu));
  }
  const std::vector<std::pair<std::string, std::vector<double>>> continuous = {
      {"q", {1}}, {"exp", {-1, 1}}, {"c", {1}}, {"p", {-2}}, {"glued_c_p", {1}},
  };
  for (const auto& [nu, slopes] : continuous) {
    out.push_back(generate_quotient_system(catalog_rate(nu, TimeDomain::Continuous), slopes, nu));
  }
  // exp-quotient with exponents 1 and 3, conjugated by a fixed rotation.
  const double e1 = std::exp(1.0), e3 = std::exp(3.0);
  const double c = 0.6, s = 0.8;
  auto entry = [](double v) { return format_real(v); };
  Fixture rot{"rotated(exp;1,3)",
              LinearSystem::full({{entry(c * c * e1 + s * s * e3), entry(c * s * (e1 - e3))},
                                  {entry(c * s * (e1 - e3)), entry(s * s * e1 + c * c * e3)}},
                                 TimeDomain::Discrete),
              std::nullopt,
              {}};
  rot.expected["exp"] = {SpectralInterval{1, 3}};
  out.push_back(std::move(rot));
  return out;
}

std::vector<std::pair<std::string, GrowthRate>> harness_rates(TimeDomain domain) {
  std::vector<std::pair<std::string, GrowthRate>> out;
  for (const char* n : {"p", "exp", "q", "c"}) out.emplace_back(n, catalog_rate(n, domain));
  if (domain == TimeDomain::Discrete) {
    out.emplace_back("exp3", GrowthRate::power_exp(1, 3, domain));
  } else {
    out.emplace_back("glued_c_p", catalog_rate("glued_c_p", domain));
  }
  return out;
}

std::string rate_name(const GrowthRate& rate) {
  for (const auto& r : catalog_rates()) {
    if (r.rate.kind() == GrowthRate::Kind::Glued && rate.time_domain() == TimeDomain::Discrete) {
      continue;
    }
    if (r.rate.in_domain(rate.time_domain()) == rate) return r.name;
  }
  if (rate == GrowthRate::power_exp(1, 3, rate.time_domain())) return "exp3";
  return rate.label();
}

double conclusion_tolerance(const TheoremParams& params, TimeDomain domain) {
  if (params.conclusion_tol > 0) return params.conclusion_tol;
  return domain == TimeDomain::Discrete ? params.spectrum.tol_stab : 0.05;
}

const char* theorem_status_name(TheoremStatus s) {
  switch (s) {
    case TheoremStatus::Pass: return "pass";
    case TheoremStatus::Fail: return "fail";
    case TheoremStatus::Skipped: return "skipped";
  }
  return "skipped";
}

json to_json(const TheoremReport& r) {
  json hyps = json::array();
  for (const auto& h : r.hypotheses) {
    hyps.push_back({{"name", h.name}, {"verdict", h.verdict}, {"holds", h.holds}});
  }
  json j;
  j["theorem"] = r.theorem;
  j["fixture"] = r.fixture;
  j["rates"] = r.rates;
  j["status"] = theorem_status_name(r.status);
  j["hypotheses"] = hyps;
  j["conclusion"] = r.conclusion ? json(*r.conclusion) : json(nullptr);
  j["details"] = r.details;
  return j;
}

// ---------------------------------------------------------------------------

struct TheoremContext::Impl {
  TheoremParams params;
  std::mutex mutex;
  std::map<std::string, SpectrumReport> spectra;
  std::map<std::string, RelationVerdict> relations;
  std::map<std::string, ChainResult> chains;

  template <class Map, class Fn>
  const typename Map::mapped_type& memo(Map& map, const std::string& key, Fn&& compute) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      auto it = map.find(key);
      if (it != map.end()) return it->second;
    }
    auto value = compute();
    std::lock_guard<std::mutex> lock(mutex);
    return map.emplace(key, std::move(value)).first->second;
  }
};

TheoremContext::TheoremContext(TheoremParams params) : impl_(std::make_unique<Impl>()) {
  impl_->params = std::move(params);
}

TheoremContext::~TheoremContext() = default;

const TheoremParams& TheoremContext::params() const { return impl_->params; }

const SpectrumReport& TheoremContext::spectrum(const LinearSystem& system, const GrowthRate& rate) {
  const std::string key = system_to_json(system).dump() + "|" + key_of(rate);
  return impl_->memo(impl_->spectra, key,
                     [&] { return compute_spectrum(system, rate, impl_->params.spectrum); });
}

const RelationVerdict& TheoremContext::faster(const GrowthRate& mu, const GrowthRate& omega) {
  return impl_->memo(impl_->relations, "faster|" + key_of(mu) + "|" + key_of(omega),
                     [&] { return check_faster(mu, omega, impl_->params.relations); });
}

const RelationVerdict& TheoremContext::weakly_faster(const GrowthRate& mu, const GrowthRate& omega) {
  return impl_->memo(impl_->relations, "weakly|" + key_of(mu) + "|" + key_of(omega),
                     [&] { return check_weakly_faster(mu, omega, impl_->params.relations); });
}

const RelationVerdict& TheoremContext::weakly_equivalent(const GrowthRate& a, const GrowthRate& b) {
  return impl_->memo(impl_->relations, "weq|" + key_of(a) + "|" + key_of(b),
                     [&] { return check_weakly_equivalent(a, b, impl_->params.relations); });
}

const RelationVerdict& TheoremContext::equivalent(const GrowthRate& a, const GrowthRate& b) {
  return impl_->memo(impl_->relations, "eq|" + key_of(a) + "|" + key_of(b),
                     [&] { return check_equivalent(a, b, impl_->params.relations); });
}

const ChainResult& TheoremContext::chain(const std::vector<GrowthRate>& rates) {
  std::string key;
  for (const auto& r : rates) key += key_of(r) + "|";
  return impl_->memo(impl_->chains, key, [&] { return chain_check(rates, impl_->params.relations); });
}

// ---------------------------------------------------------------------------

TheoremReport verify_805(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture) {
  TheoremReport r = start("805", fixture, {rate_name(mu), rate_name(omega)});
  const auto& fast = ctx.faster(mu, omega);
  bool ok = hypothesis(r, "mu >> omega", outcome_name(fast.outcome), fast.outcome == Outcome::Holds);
  const auto& smu = ctx.spectrum(system, mu);
  const auto dich = has_mu_dichotomy(smu);
  ok = hypothesis(r, "mu-dichotomy", tri_verdict(dich.verdict), dich.verdict == Tri::True);
  if (!ok) return r;
  const auto& som = ctx.spectrum(system, omega);
  if (!settled_hypothesis(r, "omega", som)) return r;
  r.details["omega_spectrum"] = intervals_json(som);
  bool all_infinite = !som.intervals.empty();
  for (const auto& iv : som.intervals) {
    all_infinite = all_infinite && std::isinf(iv.lo) && iv.lo == iv.hi;
  }
  return conclude(r, all_infinite);
}

TheoremReport verify_806(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& omega,
                         const GrowthRate& mu, const std::string& fixture) {
  TheoremReport r = start("806", fixture, {rate_name(mu), rate_name(omega)});
  const auto& som = ctx.spectrum(system, omega);
  const auto growth = has_mu_growth(som);
  bool ok = hypothesis(r, "omega-bounded growth", growth_name(growth.outcome),
                       growth.outcome == GrowthOutcome::Holds);
  const auto& fast = ctx.faster(mu, omega);
  ok = hypothesis(r, "mu >> omega", outcome_name(fast.outcome), fast.outcome == Outcome::Holds);
  if (!ok) return r;
  const auto& smu = ctx.spectrum(system, mu);
  if (!settled_hypothesis(r, "mu", smu)) return r;
  const double tol = conclusion_tolerance(ctx.params(), system.time_domain());
  r.details["mu_spectrum"] = intervals_json(smu);
  r.details["tolerance"] = jnum(tol);
  const bool zero = smu.intervals.size() == 1 && std::fabs(smu.intervals[0].lo) <= tol &&
                    std::fabs(smu.intervals[0].hi) <= tol;
  return conclude(r, zero);
}

TheoremReport verify_808_809(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                             const GrowthRate& omega, double a, double b, const std::string& item,
                             const std::string& fixture) {
  static const std::set<std::string> items = {"808i", "808ii", "809i", "809ii", "809iii"};
  if (!items.count(item)) throw ValidationError("item", "unknown item '" + item + "'");
  const bool is808 = item.rfind("808", 0) == 0;
  if (is808 && !(a > 0)) throw ValidationError("a", "must be positive");
  if (!is808 && !(a <= 0 && 0 <= b)) throw ValidationError("a", "needs a <= 0 <= b");

  TheoremReport r = start(item, fixture, {rate_name(mu), rate_name(omega)});
  const double tol = conclusion_tolerance(ctx.params(), system.time_domain());
  r.details["a"] = jnum(a);
  r.details["b"] = jnum(b);
  r.details["tolerance"] = jnum(tol);
  const auto& weak = ctx.weakly_faster(mu, omega);
  bool ok = hypothesis(r, "mu > omega", outcome_name(weak.outcome), weak.outcome == Outcome::Holds);
  const auto& smu = ctx.spectrum(system, mu);
  const auto& som = ctx.spectrum(system, omega);
  ok = settled_hypothesis(r, "mu", smu) && ok;
  ok = settled_hypothesis(r, "omega", som) && ok;
  r.details["mu_spectrum"] = intervals_json(smu);
  r.details["omega_spectrum"] = intervals_json(som);

  if (is808) {
    ok = hypothesis(r, "a exceeds tolerance", format_real(a), a > tol) && ok;
    if (item == "808i") {
      ok = hypothesis(r, "mu-spectrum in [-inf,-a]", format_real(max_hi(smu)), max_hi(smu) <= -a) && ok;
      if (!ok) return r;
      return conclude(r, max_hi(som) <= -a + tol);
    }
    ok = hypothesis(r, "mu-spectrum in [a,+inf]", format_real(min_lo(smu)), min_lo(smu) >= a) && ok;
    if (!ok) return r;
    return conclude(r, min_lo(som) >= a - tol);
  }

  const bool upper = item == "809i" || item == "809iii";
  const bool lower = item == "809ii" || item == "809iii";
  if (upper) {
    ok = hypothesis(r, "b finite", format_real(b), std::isfinite(b)) && ok;
    ok = hypothesis(r, "positive omega-spectrum in [0,b]", format_real(positive_sup(som)),
                    positive_sup(som) <= b) && ok;
  }
  if (lower) {
    ok = hypothesis(r, "a finite", format_real(a), std::isfinite(a)) && ok;
    ok = hypothesis(r, "negative omega-spectrum in [a,0]", format_real(negative_inf(som)),
                    negative_inf(som) >= a) && ok;
  }
  if (!ok) return r;
  bool holds = true;
  if (upper) holds = holds && positive_sup(smu) <= b + tol;
  if (lower) holds = holds && negative_inf(smu) >= a - tol;
  return conclude(r, holds);
}

TheoremReport verify_811(TheoremContext& ctx, const std::vector<LinearSystem>& systems,
                         const std::vector<GrowthRate>& chain, const std::vector<std::string>& fixtures) {
  std::vector<std::string> names;
  for (const auto& c : chain) names.push_back(rate_name(c));
  std::string fixture;
  for (std::size_t i = 0; i < fixtures.size(); ++i) fixture += (i ? "," : "") + fixtures[i];
  TheoremReport r = start("811", fixture, names);
  const auto& ch = ctx.chain(chain);
  json links = json::array();
  for (const auto& l : ch.links) links.push_back(outcome_name(l.outcome));
  r.details["links"] = links;
  if (!hypothesis(r, "chain ordered", outcome_name(ch.outcome), ch.outcome == Outcome::Holds)) {
    return r;
  }
  bool holds = true;
  json per_system = json::array();
  for (std::size_t s = 0; s < systems.size(); ++s) {
    json strong = json::array();
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const auto& rep = ctx.spectrum(systems[s], chain[i]);
      if (has_mu_growth(rep).outcome == GrowthOutcome::Holds &&
          has_mu_dichotomy(rep).verdict == Tri::True) {
        strong.push_back(names[i]);
      }
    }
    holds = holds && strong.size() <= 1;
    per_system.push_back({{"system", s < fixtures.size() ? fixtures[s] : std::to_string(s)},
                          {"strong_rates", strong}});
  }
  r.details["systems"] = per_system;
  if (systems.size() == 1) {
    r.details["strong_rate"] =
        per_system[0]["strong_rates"].empty() ? json(nullptr) : per_system[0]["strong_rates"][0];
  }
  return conclude(r, holds);
}

TheoremReport verify_908(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture) {
  TheoremReport r = start("908", fixture, {rate_name(mu), rate_name(omega)});
  const auto& weq = ctx.weakly_equivalent(mu, omega);
  const bool weak = weq.outcome == Outcome::Holds;
  bool ok = true;
  if (weak) {
    hypothesis(r, "mu ~ omega", outcome_name(weq.outcome), true);
  } else {
    const auto& eq = ctx.equivalent(mu, omega);
    ok = hypothesis(r, "mu ~~ omega", outcome_name(eq.outcome), eq.outcome == Outcome::Holds);
  }
  if (!ok) return r;
  const auto& smu = ctx.spectrum(system, mu);
  const auto& som = ctx.spectrum(system, omega);
  ok = settled_hypothesis(r, "mu", smu);
  ok = settled_hypothesis(r, "omega", som) && ok;
  if (!ok) return r;
  const double tol = conclusion_tolerance(ctx.params(), system.time_domain());
  r.details["mu_spectrum"] = intervals_json(smu);
  r.details["omega_spectrum"] = intervals_json(som);
  r.details["branch"] = weak ? "equal" : "qualitative";

  if (weak) {
    bool equal = smu.intervals.size() == som.intervals.size();
    for (std::size_t i = 0; equal && i < smu.intervals.size(); ++i) {
      equal = same_extended(smu.intervals[i].lo, som.intervals[i].lo, tol) &&
              same_extended(smu.intervals[i].hi, som.intervals[i].hi, tol);
    }
    return conclude(r, equal);
  }

  r.details["mu_gaps"] = gaps_json(smu);
  r.details["omega_gaps"] = gaps_json(som);
  json items;
  items["a"] = has_point(smu, kInf) == has_point(som, kInf) &&
               has_point(smu, -kInf) == has_point(som, -kInf);
  const bool same_count = smu.gaps.size() == som.gaps.size();
  items["b"] = same_count;
  bool ordered = same_count, ranks = same_count, sides = same_count;
  for (std::size_t i = 0; same_count && i < smu.gaps.size(); ++i) {
    if (i > 0) {
      ordered = ordered && smu.gaps[i - 1].hi <= smu.gaps[i].lo && som.gaps[i - 1].hi <= som.gaps[i].lo;
    }
    ranks = ranks && smu.gaps[i].rank == som.gaps[i].rank;
    sides = sides && semiaxis(smu.gaps[i], tol) == semiaxis(som.gaps[i], tol);
  }
  items["c"] = ordered;
  items["d"] = ranks;
  items["e"] = sides;
  r.details["items"] = items;
  return conclude(r, items["a"].get<bool>() && same_count && ordered && ranks && sides);
}

TheoremReport verify_721(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture) {
  TheoremReport r = start("721", fixture, {rate_name(mu), rate_name(omega)});
  const auto& smu = ctx.spectrum(system, mu);
  const auto dich = has_mu_dichotomy(smu);
  bool ok = hypothesis(r, "mu-dichotomy", tri_verdict(dich.verdict), dich.verdict == Tri::True);
  const auto& fast = ctx.faster(mu, omega);
  ok = hypothesis(r, "mu >> omega", outcome_name(fast.outcome), fast.outcome == Outcome::Holds) && ok;
  if (!ok) return r;
  const auto& som = ctx.spectrum(system, omega);
  if (!settled_hypothesis(r, "omega", som)) return r;
  const auto growth = has_mu_growth(som);
  r.details["omega_growth"] = growth_name(growth.outcome);
  return conclude(r, growth.outcome == GrowthOutcome::Fails);
}

TheoremReport verify_722(TheoremContext& ctx, const LinearSystem& system, const GrowthRate& mu,
                         const GrowthRate& omega, const std::string& fixture) {
  TheoremReport r = start("722", fixture, {rate_name(mu), rate_name(omega)});
  const auto& som = ctx.spectrum(system, omega);
  const auto growth = has_mu_growth(som);
  bool ok = hypothesis(r, "omega-bounded growth", growth_name(growth.outcome),
                       growth.outcome == GrowthOutcome::Holds);
  const auto& fast = ctx.faster(mu, omega);
  ok = hypothesis(r, "mu >> omega", outcome_name(fast.outcome), fast.outcome == Outcome::Holds) && ok;
  if (!ok) return r;
  const auto dich = has_mu_dichotomy(ctx.spectrum(system, mu));
  r.details["mu_dichotomy"] = tri_verdict(dich.verdict);
  return conclude(r, dich.verdict != Tri::True);
}

const std::vector<std::string>& theorem_ids() {
  static const std::vector<std::string> ids = {"805", "806", "808", "809", "811", "908", "721", "722"};
  return ids;
}

namespace {

const std::vector<std::string> kItems808 = {"808i", "808ii"};
const std::vector<std::string> kItems809 = {"809i", "809ii", "809iii"};

TheoremReport derived_808_809(TheoremContext& ctx, const Fixture& f, const GrowthRate& mu,
                              const GrowthRate& om, const std::string& item, std::optional<double> a,
                              std::optional<double> b) {
  if (item.rfind("808", 0) == 0) {
    if (!a) {
      const auto& smu = ctx.spectrum(f.system, mu);
      a = item == "808i" ? -max_hi(smu) : min_lo(smu);
    }
    if (!(*a > 0) || std::isinf(*a)) {
      TheoremReport r = start(item, f.name, {rate_name(mu), rate_name(om)});
      hypothesis(r, "a exceeds tolerance", format_real(*a), false);
      return r;
    }
    return verify_808_809(ctx, f.system, mu, om, *a, kInf, item, f.name);
  }
  const auto& som = ctx.spectrum(f.system, om);
  return verify_808_809(ctx, f.system, mu, om, a.value_or(negative_inf(som)),
                        b.value_or(positive_sup(som)), item, f.name);
}

}  // namespace

std::vector<TheoremReport> run_verification(const VerifyRequest& req) {
  const auto& ids = theorem_ids();
  const bool item808 = std::find(kItems808.begin(), kItems808.end(), req.theorem) != kItems808.end();
  const bool item809 = std::find(kItems809.begin(), kItems809.end(), req.theorem) != kItems809.end();
  if (req.theorem != "all" && !item808 && !item809 &&
      std::find(ids.begin(), ids.end(), req.theorem) == ids.end()) {
    throw ValidationError("theorem", "unknown theorem '" + req.theorem + "'");
  }
  auto wanted = [&](const std::string& id) { return req.theorem == "all" || req.theorem == id; };
  std::vector<std::string> items;
  for (const auto& it : kItems808) {
    if (wanted("808") || req.theorem == it) items.push_back(it);
  }
  for (const auto& it : kItems809) {
    if (wanted("809") || req.theorem == it) items.push_back(it);
  }
  const bool any_pairwise = wanted("805") || wanted("806") || wanted("908") || wanted("721") ||
                            wanted("722") || !items.empty();

  TheoremContext ctx(req.params);
  const unsigned threads = req.params.spectrum.threads;

  // Rates per time domain: the requested pair or the harness set.
  struct DomainRates {
    std::vector<std::pair<std::string, GrowthRate>> rates;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (mu, omega) indices
    std::vector<GrowthRate> chain;
  };
  std::map<TimeDomain, DomainRates> domains;
  for (const auto& f : req.fixtures) {
    const TimeDomain d = f.system.time_domain();
    if (domains.count(d)) continue;
    DomainRates dr;
    if (req.pair) {
      dr.rates = {{req.pair->first, resolve_rate(req.pair->first, d)},
                  {req.pair->second, resolve_rate(req.pair->second, d)}};
      dr.pairs = {{0, 1}};
    } else {
      dr.rates = harness_rates(d);
      for (std::size_t i = 0; i < dr.rates.size(); ++i) {
        for (std::size_t j = 0; j < dr.rates.size(); ++j) {
          if (i != j) dr.pairs.emplace_back(i, j);
        }
      }
    }
    const std::vector<std::string> chain =
        req.chain.empty() ? std::vector<std::string>{"p", "exp", "q", "c"} : req.chain;
    for (const auto& c : chain) dr.chain.push_back(resolve_rate(c, d));
    domains.emplace(d, std::move(dr));
  }

  // Warm the caches in parallel so each spectrum and relation is computed once.
  std::vector<std::function<void()>> warm;
  for (auto& [d, dr] : domains) {
    for (const auto& [i, j] : dr.pairs) {
      const GrowthRate& mu = dr.rates[i].second;
      const GrowthRate& om = dr.rates[j].second;
      if (wanted("805") || wanted("806") || wanted("721") || wanted("722")) {
        warm.push_back([&ctx, &mu, &om] { ctx.faster(mu, om); });
        warm.push_back([&ctx, &mu, &om] { ctx.faster(om, mu); });
      }
      if (!items.empty()) warm.push_back([&ctx, &mu, &om] { ctx.weakly_faster(mu, om); });
      if (wanted("908") && (req.pair || i < j)) {
        warm.push_back([&ctx, &mu, &om] {
          if (ctx.weakly_equivalent(mu, om).outcome != Outcome::Holds) ctx.equivalent(mu, om);
        });
      }
    }
    if (wanted("811")) warm.push_back([&ctx, &dr = dr] { ctx.chain(dr.chain); });
  }
  for (const auto& f : req.fixtures) {
    const auto& dr = domains.at(f.system.time_domain());
    if (any_pairwise) {
      for (const auto& nr : dr.rates) warm.push_back([&ctx, &f, &nr] { ctx.spectrum(f.system, nr.second); });
    }
    if (wanted("811")) {
      for (const auto& r : dr.chain) warm.push_back([&ctx, &f, &r] { ctx.spectrum(f.system, r); });
    }
  }
  parallel_for(warm.size(), threads, [&](std::size_t i) { warm[i](); });

  std::vector<std::function<TheoremReport()>> tasks;
  for (const auto& f : req.fixtures) {
    const auto& dr = domains.at(f.system.time_domain());
    for (const auto& [i, j] : dr.pairs) {
      const GrowthRate& mu = dr.rates[i].second;
      const GrowthRate& om = dr.rates[j].second;
      if (wanted("805")) tasks.push_back([&, &mu = mu, &om = om] { return verify_805(ctx, f.system, mu, om, f.name); });
      if (wanted("806")) tasks.push_back([&, &mu = mu, &om = om] { return verify_806(ctx, f.system, om, mu, f.name); });
      for (const auto& item : items) {
        tasks.push_back([&, &mu = mu, &om = om, &item = item] {
          return derived_808_809(ctx, f, mu, om, item, req.a, req.b);
        });
      }
      if (wanted("908") && (req.pair || i < j)) {
        tasks.push_back([&, &mu = mu, &om = om] { return verify_908(ctx, f.system, mu, om, f.name); });
      }
      if (wanted("721")) tasks.push_back([&, &mu = mu, &om = om] { return verify_721(ctx, f.system, mu, om, f.name); });
      if (wanted("722")) tasks.push_back([&, &mu = mu, &om = om] { return verify_722(ctx, f.system, mu, om, f.name); });
    }
    if (wanted("811")) {
      tasks.push_back([&, &dr = dr] { return verify_811(ctx, {f.system}, dr.chain, {f.name}); });
    }
  }
  std::vector<TheoremReport> reports(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) { reports[i] = tasks[i](); });
  return reports;
}

std::vector<TheoremReport> verify_all(const std::string& theorem, const std::vector<Fixture>& fixtures,
                                      const TheoremParams& params) {
  VerifyRequest req;
  req.theorem = theorem;
  req.fixtures = fixtures;
  req.params = params;
  return run_verification(req);
}

}  // namespace muspec
