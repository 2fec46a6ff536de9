#include "muspec/muspec.h"

#include <cstdlib>
#include <cstring>
#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "jsonutil.hpp"
#include "muspec/catalog.hpp"
#include "muspec/descriptors.hpp"
#include "muspec/errors.hpp"
#include "muspec/relations.hpp"
#include "muspec/spectrum.hpp"
#include "muspec/theorems.hpp"

using nlohmann::json;
using namespace muspec;

struct muspec_rate {
  GrowthRate rate;
};

struct muspec_system {
  LinearSystem system;
};

struct muspec_spectrum {
  SpectrumReport report;
};

namespace {

thread_local std::string g_last_error;

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

muspec_status fail(muspec_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

struct ArgumentError {
  std::string what;
};

void need(const void* p, const char* what) {
  if (!p) throw ArgumentError{std::string(what) + " must not be null"};
}

template <class Fn>
muspec_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return MUSPEC_OK;
  } catch (const ArgumentError& e) {
    return fail(MUSPEC_ERR_ARGUMENT, e.what);
  } catch (const SyntaxError& e) {
    return fail(MUSPEC_ERR_SYNTAX, e.what());
  } catch (const DomainError& e) {
    return fail(MUSPEC_ERR_DOMAIN, e.what());
  } catch (const ValidationError& e) {
    return fail(MUSPEC_ERR_VALIDATION, e.what());
  } catch (const NumericError& e) {
    return fail(MUSPEC_ERR_NUMERIC, e.what());
  } catch (const json::exception& e) {
    return fail(MUSPEC_ERR_VALIDATION, e.what());
  } catch (const std::exception& e) {
    return fail(MUSPEC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MUSPEC_ERR_INTERNAL, "unknown error");
  }
}

TimeDomain parse_domain(const char* s) {
  if (!s || std::strcmp(s, "discrete") == 0) return TimeDomain::Discrete;
  if (std::strcmp(s, "continuous") == 0) return TimeDomain::Continuous;
  throw ValidationError("time_domain", "must be \"discrete\" or \"continuous\"");
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(path + "[" + std::to_string(i) + "]", "must be a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

TheoremParams parse_options(const json& o) {
  TheoremParams p;
  if (o.is_null()) return p;
  if (!o.is_object()) throw ValidationError("options", "must be an object");
  static const std::set<std::string> known = {
      "schedule",     "cutoff_fraction", "tol_stab",      "gamma_max",     "delta_merge",
      "sample_step",  "integration_step", "threads",      "relation_step", "epsilon_grid",
      "almost_fixed", "search_exp_lo",   "search_exp_hi", "conclusion_tol"};
  for (auto it = o.begin(); it != o.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError("options." + it.key(), "unknown option");
  }
  auto num = [&](const char* key) {
    const json& v = o.at(key);
    if (!v.is_number()) throw ValidationError(std::string("options.") + key, "must be a number");
    return v.get<double>();
  };
  auto positive = [&](const char* key) {
    const double v = num(key);
    if (!(v > 0)) throw ValidationError(std::string("options.") + key, "must be positive");
    return v;
  };
  auto integer = [&](const char* key) {
    const json& v = o.at(key);
    if (!v.is_number_integer()) throw ValidationError(std::string("options.") + key, "must be an integer");
    return v.get<long>();
  };
  if (o.contains("schedule")) {
    p.spectrum.schedule = number_list(o.at("schedule"), "options.schedule");
    p.relations.schedule = p.spectrum.schedule;
  }
  if (o.contains("cutoff_fraction")) p.spectrum.cutoff_fraction = num("cutoff_fraction");
  if (o.contains("tol_stab")) {
    p.spectrum.tol_stab = positive("tol_stab");
    p.relations.tol_stab = p.spectrum.tol_stab;
  }
  if (o.contains("gamma_max")) p.spectrum.gamma_max = positive("gamma_max");
  if (o.contains("delta_merge")) p.spectrum.delta_merge = num("delta_merge");
  if (o.contains("sample_step")) p.spectrum.sample_step = positive("sample_step");
  if (o.contains("integration_step")) p.spectrum.evolution.step = positive("integration_step");
  if (o.contains("threads")) {
    const long t = integer("threads");
    if (t < 0) throw ValidationError("options.threads", "must be non-negative");
    p.spectrum.threads = static_cast<unsigned>(t);
  }
  if (o.contains("relation_step")) p.relations.step = positive("relation_step");
  if (o.contains("epsilon_grid")) p.relations.epsilon_grid = number_list(o.at("epsilon_grid"), "options.epsilon_grid");
  if (o.contains("almost_fixed")) p.relations.almost_fixed = number_list(o.at("almost_fixed"), "options.almost_fixed");
  if (o.contains("search_exp_lo")) p.relations.search_exp_lo = static_cast<int>(integer("search_exp_lo"));
  if (o.contains("search_exp_hi")) p.relations.search_exp_hi = static_cast<int>(integer("search_exp_hi"));
  if (o.contains("conclusion_tol")) p.conclusion_tol = positive("conclusion_tol");
  if (p.relations.search_exp_lo > p.relations.search_exp_hi) {
    throw ValidationError("options.search_exp_lo", "must not exceed search_exp_hi");
  }
  for (double e : p.relations.epsilon_grid) {
    if (!(e > 0)) throw ValidationError("options.epsilon_grid", "entries must be positive");
  }
  for (double e : p.relations.almost_fixed) {
    if (!(e > 0)) throw ValidationError("options.almost_fixed", "entries must be positive");
  }
  validate_params(p.spectrum);
  return p;
}

TheoremParams parse_options(const char* text) {
  if (!text || !*text) return {};
  json o;
  try {
    o = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("options", std::string("invalid JSON: ") + e.what());
  }
  return parse_options(o);
}

muspec_outcome to_c(Outcome o) {
  switch (o) {
    case Outcome::Holds: return MUSPEC_HOLDS;
    case Outcome::Fails: return MUSPEC_FAILS;
    case Outcome::Inconclusive: return MUSPEC_INCONCLUSIVE;
  }
  return MUSPEC_INCONCLUSIVE;
}

std::string string_field(const json& j, const char* key) {
  if (!j.at(key).is_string()) throw ValidationError(std::string("request.") + key, "must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

extern "C" {

const char* muspec_last_error(void) { return g_last_error.c_str(); }

void muspec_string_free(char* s) { std::free(s); }

const char* muspec_version(void) { return "0.1.0"; }

muspec_status muspec_rate_parse(const char* spec, const char* time_domain, muspec_rate** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new muspec_rate{resolve_rate(spec, parse_domain(time_domain))};
  });
}

void muspec_rate_free(muspec_rate* rate) { delete rate; }

muspec_status muspec_rate_to_json(const muspec_rate* rate, char** out) {
  return guarded([&] {
    need(rate, "rate");
    need(out, "out");
    *out = dup(rate_to_json(rate->rate).dump());
  });
}

muspec_status muspec_rate_log(const muspec_rate* rate, double t, double* out) {
  return guarded([&] {
    need(rate, "rate");
    need(out, "out");
    *out = rate->rate.log_rate(t);
  });
}

int muspec_rate_spec_continuous_only(const char* spec) {
  return spec && rate_spec_is_continuous_only(spec) ? 1 : 0;
}

muspec_status muspec_system_parse(const char* spec, const char* base_dir, muspec_system** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new muspec_system{resolve_system(spec, base_dir ? base_dir : "")};
  });
}

void muspec_system_free(muspec_system* system) { delete system; }

muspec_status muspec_system_to_json(const muspec_system* system, char** out) {
  return guarded([&] {
    need(system, "system");
    need(out, "out");
    *out = dup(system_to_json(system->system).dump());
  });
}

size_t muspec_system_dimension(const muspec_system* system) {
  return system ? system->system.dimension() : 0;
}

int muspec_system_is_continuous(const muspec_system* system) {
  return system && system->system.time_domain() == TimeDomain::Continuous ? 1 : 0;
}

muspec_status muspec_propagate(const muspec_system* system, double to, double from,
                               const char* options_json, double* log_norm, double* unit) {
  return guarded([&] {
    need(system, "system");
    need(log_norm, "log_norm");
    const TheoremParams p = parse_options(options_json);
    const ScaledMatrix m = propagate(system->system, to, from, p.spectrum.evolution);
    *log_norm = m.log_norm;
    if (unit) {
      const std::size_t d = m.dimension();
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) unit[i * d + j] = m.unit(i, j);
      }
    }
  });
}

muspec_status muspec_spectrum_compute(const muspec_system* system, const muspec_rate* rate,
                                      const char* options_json, muspec_spectrum** out) {
  return guarded([&] {
    need(system, "system");
    need(rate, "rate");
    need(out, "out");
    if (system->system.time_domain() != rate->rate.time_domain()) {
      throw ValidationError("rate", "time domain differs from the system's");
    }
    const TheoremParams p = parse_options(options_json);
    *out = new muspec_spectrum{compute_spectrum(system->system, rate->rate, p.spectrum)};
  });
}

void muspec_spectrum_free(muspec_spectrum* spectrum) { delete spectrum; }

int muspec_spectrum_converged(const muspec_spectrum* spectrum) {
  return spectrum && spectrum->report.converged ? 1 : 0;
}

muspec_status muspec_spectrum_json(const muspec_spectrum* spectrum, char** out) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(out, "out");
    *out = dup(spectrum_to_json(spectrum->report).dump(2));
  });
}

muspec_status muspec_spectrum_csv(const muspec_spectrum* spectrum, char** out) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(out, "out");
    *out = dup(spectrum_trace_csv(spectrum->report));
  });
}

muspec_status muspec_spectrum_table(const muspec_spectrum* spectrum, char** out) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(out, "out");
    *out = dup(spectrum_table(spectrum->report));
  });
}

muspec_status muspec_spectrum_verdicts(const muspec_spectrum* spectrum, char** out) {
  return guarded([&] {
    need(spectrum, "spectrum");
    need(out, "out");
    const auto d = has_mu_dichotomy(spectrum->report);
    const auto g = has_mu_growth(spectrum->report);
    json j;
    j["dichotomy"] = {{"verdict", tri_name(d.verdict)},
                      {"projector_rank", d.projector_rank ? json(*d.projector_rank) : json(nullptr)},
                      {"projector_pattern", d.projector_pattern ? json(*d.projector_pattern) : json(nullptr)},
                      {"reason", d.reason}};
    const char* gname = g.outcome == GrowthOutcome::Holds   ? "holds"
                        : g.outcome == GrowthOutcome::Fails ? "fails"
                                                            : "inconclusive";
    j["growth"] = {{"outcome", gname}, {"a", g.a_estimate ? jnum(*g.a_estimate) : json(nullptr)}};
    *out = dup(j.dump(2));
  });
}

muspec_status muspec_compare(const muspec_rate* a, const muspec_rate* b, const char* relation,
                             const char* options_json, char** out_json, muspec_outcome* outcome) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(relation, "relation");
    need(out_json, "out_json");
    need(outcome, "outcome");
    if (a->rate.time_domain() != b->rate.time_domain()) {
      throw ValidationError("b", "rates must share a time domain");
    }
    const RelationParams p = parse_options(options_json).relations;
    const std::string rel = relation;
    const GrowthRate& x = a->rate;
    const GrowthRate& y = b->rate;
    if (rel == "profile") {
      const PairClassification c = classify_pair(x, y, p);
      *out_json = dup(to_json(c).dump(2));
      *outcome = c.disagreements.empty() ? MUSPEC_HOLDS : MUSPEC_INCONCLUSIVE;
      return;
    }
    RelationVerdict v;
    if (rel == "faster") {
      v = check_faster(x, y, p);
    } else if (rel == "faster-backward") {
      v = check_faster_backward(x, y, p);
    } else if (rel == "weakly-faster") {
      v = check_weakly_faster(x, y, p);
    } else if (rel == "almost-faster") {
      v = check_almost(x, y, AlmostDirection::Faster, p);
    } else if (rel == "almost-slower") {
      v = check_almost(x, y, AlmostDirection::Slower, p);
    } else if (rel == "weakly-equivalent") {
      v = check_weakly_equivalent(x, y, p);
    } else if (rel == "equivalent") {
      v = check_equivalent(x, y, p);
    } else if (rel == "order") {
      v = check_order(x, y, p);
    } else {
      throw ValidationError("relation", "unknown relation '" + rel + "'");
    }
    *out_json = dup(to_json(v).dump(2));
    *outcome = to_c(v.outcome);
  });
}

muspec_status muspec_chain(const muspec_rate* const* rates, size_t count, const char* options_json,
                           char** out_json, muspec_outcome* outcome) {
  return guarded([&] {
    need(rates, "rates");
    need(out_json, "out_json");
    need(outcome, "outcome");
    std::vector<GrowthRate> rs;
    for (size_t i = 0; i < count; ++i) {
      need(rates[i], "rates[i]");
      rs.push_back(rates[i]->rate);
      if (rs.back().time_domain() != rs.front().time_domain()) {
        throw ValidationError("chain", "rates must share a time domain");
      }
    }
    const ChainResult r = chain_check(rs, parse_options(options_json).relations);
    *out_json = dup(to_json(r).dump(2));
    *outcome = to_c(r.outcome);
  });
}

muspec_status muspec_verify(const char* request_json, char** out_jsonl, size_t* passed, size_t* failed,
                            size_t* skipped) {
  return guarded([&] {
    need(out_jsonl, "out_jsonl");
    json req = json::object();
    if (request_json && *request_json) {
      try {
        req = json::parse(request_json);
      } catch (const json::parse_error& e) {
        throw ValidationError("request", std::string("invalid JSON: ") + e.what());
      }
    }
    if (!req.is_object()) throw ValidationError("request", "must be an object");
    static const std::set<std::string> known = {"theorem", "systems", "mu",  "omega",
                                                "chain",   "a",       "b",   "options"};
    for (auto it = req.begin(); it != req.end(); ++it) {
      if (!known.count(it.key())) throw ValidationError("request." + it.key(), "unknown field");
    }
    VerifyRequest vr;
    if (req.contains("theorem")) vr.theorem = string_field(req, "theorem");
    if (req.contains("options")) vr.params = parse_options(req.at("options"));
    if (req.contains("systems")) {
      const json& ss = req.at("systems");
      if (!ss.is_array() || ss.empty()) throw ValidationError("request.systems", "must be a non-empty array");
      const auto catalog = catalog_fixtures();
      for (std::size_t i = 0; i < ss.size(); ++i) {
        if (!ss[i].is_string()) {
          throw ValidationError("request.systems[" + std::to_string(i) + "]", "must be a string");
        }
        std::string spec = ss[i].get<std::string>();
        const std::string name = spec.rfind("catalog:", 0) == 0 ? spec.substr(8) : spec;
        auto it = std::find_if(catalog.begin(), catalog.end(), [&](const Fixture& f) { return f.name == name; });
        if (it != catalog.end()) {
          vr.fixtures.push_back(*it);
        } else {
          vr.fixtures.push_back(Fixture{spec, resolve_system(spec), std::nullopt, {}});
        }
      }
    } else {
      vr.fixtures = harness_fixtures();
    }
    if (req.contains("mu") != req.contains("omega")) {
      throw ValidationError(req.contains("mu") ? "request.omega" : "request.mu", "mu and omega go together");
    }
    if (req.contains("mu")) vr.pair = std::make_pair(string_field(req, "mu"), string_field(req, "omega"));
    if (req.contains("chain")) {
      const json& c = req.at("chain");
      if (!c.is_array() || c.size() < 2) throw ValidationError("request.chain", "needs at least two rates");
      for (const auto& r : c) {
        if (!r.is_string()) throw ValidationError("request.chain", "entries must be strings");
        vr.chain.push_back(r.get<std::string>());
      }
    }
    for (const char* key : {"a", "b"}) {
      if (!req.contains(key)) continue;
      const json& v = req.at(key);
      double x;
      if (v.is_number()) {
        x = v.get<double>();
      } else if (v == "+inf" || v == "-inf") {
        x = v == "+inf" ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      } else {
        throw ValidationError(std::string("request.") + key, "must be a number or \"+inf\"/\"-inf\"");
      }
      (std::string(key) == "a" ? vr.a : vr.b) = x;
    }
    const auto reports = run_verification(vr);
    std::string out;
    size_t np = 0, nf = 0, ns = 0;
    for (const auto& r : reports) {
      out += to_json(r).dump() + "\n";
      if (r.status == TheoremStatus::Pass) ++np;
      if (r.status == TheoremStatus::Fail) ++nf;
      if (r.status == TheoremStatus::Skipped) ++ns;
    }
    if (passed) *passed = np;
    if (failed) *failed = nf;
    if (skipped) *skipped = ns;
    *out_jsonl = dup(out);
  });
}

muspec_status muspec_catalog_json(char** out) {
  return guarded([&] {
    need(out, "out");
    json rates = json::array();
    for (const auto& r : catalog_rates()) {
      rates.push_back({{"name", r.name}, {"summary", r.summary}, {"descriptor", rate_to_json(r.rate)}});
    }
    json systems = json::array();
    for (const auto& s : catalog_systems()) {
      systems.push_back({{"name", s.name}, {"summary", s.summary}, {"descriptor", system_to_json(s.system)}});
    }
    *out = dup(json{{"rates", rates}, {"systems", systems}}.dump(2));
  });
}

}  // extern "C"
