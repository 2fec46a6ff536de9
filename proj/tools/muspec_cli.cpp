// Command line front end. Talks to the library through the C API only.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "muspec/muspec.h"

using nlohmann::json;

namespace {

constexpr int kExitError = 1;

struct CliError {
  std::string message;
};

void check(muspec_status st) {
  if (st != MUSPEC_OK) throw CliError{muspec_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  muspec_string_free(s);
  return out;
}

using RatePtr = std::unique_ptr<muspec_rate, decltype(&muspec_rate_free)>;
using SystemPtr = std::unique_ptr<muspec_system, decltype(&muspec_system_free)>;
using SpectrumPtr = std::unique_ptr<muspec_spectrum, decltype(&muspec_spectrum_free)>;

RatePtr parse_rate(const std::string& spec, const char* domain) {
  muspec_rate* r = nullptr;
  check(muspec_rate_parse(spec.c_str(), domain, &r));
  return RatePtr(r, muspec_rate_free);
}

SystemPtr parse_system(const std::string& spec) {
  muspec_system* s = nullptr;
  check(muspec_system_parse(spec.c_str(), nullptr, &s));
  return SystemPtr(s, muspec_system_free);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CliError{"--schedule: '" + item + "' is not a number"};
    }
  }
  return out;
}

// Flag values; unset members fall back to the config file, then to defaults.
struct Settings {
  std::optional<std::string> system, rate, a, b, relation, theorem, chain, mu, omega;
  std::optional<std::string> format, output, time_domain, schedule;
  std::optional<double> tol_stab, cutoff_fraction, gamma_max, delta_merge, sample_step,
      integration_step, relation_step, conclusion_tol, bound_a, bound_b;
  std::optional<long> threads;
  std::vector<std::string> systems;
  bool json_listing = false;
  std::string config;
};

void merge_config(Settings& s) {
  if (s.config.empty()) return;
  std::ifstream in(s.config);
  if (!in) throw CliError{"--config: cannot open '" + s.config + "'"};
  json c;
  try {
    c = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError{"--config: invalid JSON: " + std::string(e.what())};
  }
  if (!c.is_object()) throw CliError{"--config: must hold a JSON object"};
  auto str = [&](const char* key, std::optional<std::string>& slot) {
    if (slot || !c.contains(key)) return;
    const json& v = c.at(key);
    if (v.is_string()) {
      slot = v.get<std::string>();
    } else if (v.is_object()) {
      slot = v.dump();
    } else if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) {
        joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
      }
      slot = joined;
    } else {
      throw CliError{std::string("config.") + key + ": must be a string"};
    }
  };
  auto num = [&](const char* key, std::optional<double>& slot) {
    if (slot || !c.contains(key)) return;
    if (!c.at(key).is_number()) throw CliError{std::string("config.") + key + ": must be a number"};
    slot = c.at(key).get<double>();
  };
  str("system", s.system);
  str("rate", s.rate);
  str("a", s.a);
  str("b", s.b);
  str("relation", s.relation);
  str("theorem", s.theorem);
  str("chain", s.chain);
  str("mu", s.mu);
  str("omega", s.omega);
  str("format", s.format);
  str("output", s.output);
  str("time_domain", s.time_domain);
  str("schedule", s.schedule);
  num("tol_stab", s.tol_stab);
  num("cutoff_fraction", s.cutoff_fraction);
  num("gamma_max", s.gamma_max);
  num("delta_merge", s.delta_merge);
  num("sample_step", s.sample_step);
  num("integration_step", s.integration_step);
  num("relation_step", s.relation_step);
  num("conclusion_tol", s.conclusion_tol);
  num("bound_a", s.bound_a);
  num("bound_b", s.bound_b);
  if (!s.threads && c.contains("threads")) {
    if (!c.at("threads").is_number_integer()) throw CliError{"config.threads: must be an integer"};
    s.threads = c.at("threads").get<long>();
  }
}

json options_of(const Settings& s) {
  json o = json::object();
  if (s.schedule) o["schedule"] = parse_schedule(*s.schedule);
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) o[key] = *v;
  };
  put("tol_stab", s.tol_stab);
  put("cutoff_fraction", s.cutoff_fraction);
  put("gamma_max", s.gamma_max);
  put("delta_merge", s.delta_merge);
  put("sample_step", s.sample_step);
  put("integration_step", s.integration_step);
  put("relation_step", s.relation_step);
  put("conclusion_tol", s.conclusion_tol);
  // MUSPEC_THREADS caps parallelism.
  std::optional<long> threads = s.threads;
  if (const char* env = std::getenv("MUSPEC_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw CliError{"MUSPEC_THREADS must be a positive integer"};
    threads = (threads && *threads > 0) ? std::min(*threads, cap) : cap;
  }
  if (threads) o["threads"] = *threads;
  return o;
}

void emit(const Settings& s, const std::string& text) {
  if (s.output) {
    std::ofstream out(*s.output);
    if (!out) throw CliError{"--output: cannot write '" + *s.output + "'"};
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return;
  }
  std::cout << text;
  if (!text.empty() && text.back() != '\n') std::cout << '\n';
}

std::string required(const std::optional<std::string>& v, const char* flag) {
  if (!v) throw CliError{std::string(flag) + " is required"};
  return *v;
}

const char* domain_for(const Settings& s, const std::vector<std::string>& specs) {
  if (s.time_domain) {
    if (*s.time_domain != "discrete" && *s.time_domain != "continuous") {
      throw CliError{"--time-domain must be discrete or continuous"};
    }
    return s.time_domain->c_str();
  }
  for (const auto& spec : specs) {
    if (muspec_rate_spec_continuous_only(spec.c_str())) return "continuous";
  }
  return "discrete";
}

int cmd_spectrum(const Settings& s) {
  const auto system = parse_system(required(s.system, "--system"));
  const char* domain = muspec_system_is_continuous(system.get()) ? "continuous" : "discrete";
  const auto rate = parse_rate(required(s.rate, "--rate"), domain);
  muspec_spectrum* raw = nullptr;
  check(muspec_spectrum_compute(system.get(), rate.get(), options_of(s).dump().c_str(), &raw));
  SpectrumPtr report(raw, muspec_spectrum_free);
  const std::string format = s.format.value_or("json");
  char* text = nullptr;
  if (format == "json") {
    check(muspec_spectrum_json(report.get(), &text));
  } else if (format == "csv") {
    check(muspec_spectrum_csv(report.get(), &text));
  } else if (format == "table") {
    check(muspec_spectrum_table(report.get(), &text));
  } else {
    throw CliError{"--format must be json, csv or table"};
  }
  emit(s, take(text));
  return muspec_spectrum_converged(report.get()) ? 0 : 2;
}

int exit_for(muspec_outcome o) {
  switch (o) {
    case MUSPEC_HOLDS: return 0;
    case MUSPEC_FAILS: return 3;
    case MUSPEC_INCONCLUSIVE: return 2;
  }
  return 2;
}

std::string outcome_text(muspec_outcome o) {
  return o == MUSPEC_HOLDS ? "holds" : (o == MUSPEC_FAILS ? "fails" : "inconclusive");
}

int cmd_compare(const Settings& s) {
  const std::string options = options_of(s).dump();
  muspec_outcome outcome = MUSPEC_INCONCLUSIVE;
  char* text = nullptr;
  if (s.chain) {
    const auto specs = split(*s.chain);
    const char* domain = domain_for(s, specs);
    std::vector<RatePtr> owned;
    std::vector<const muspec_rate*> rates;
    for (const auto& spec : specs) {
      owned.push_back(parse_rate(spec, domain));
      rates.push_back(owned.back().get());
    }
    check(muspec_chain(rates.data(), rates.size(), options.c_str(), &text, &outcome));
  } else {
    const std::string a = required(s.a ? s.a : s.mu, "--a");
    const std::string b = required(s.b ? s.b : s.omega, "--b");
    const char* domain = domain_for(s, {a, b});
    const auto ra = parse_rate(a, domain);
    const auto rb = parse_rate(b, domain);
    check(muspec_compare(ra.get(), rb.get(), s.relation.value_or("faster").c_str(), options.c_str(),
                         &text, &outcome));
  }
  const std::string body = take(text);
  const std::string format = s.format.value_or("json");
  if (format == "json") {
    emit(s, body);
  } else if (format == "table") {
    emit(s, (s.chain ? std::string("chain") : s.relation.value_or("faster")) + ": " + outcome_text(outcome));
  } else {
    throw CliError{"--format must be json or table for compare"};
  }
  return exit_for(outcome);
}

int cmd_verify(const Settings& s) {
  json req = json::object();
  req["theorem"] = s.theorem.value_or("all");
  std::vector<std::string> systems = s.systems;
  if (systems.empty() && s.system) systems = split(*s.system);
  if (!systems.empty()) req["systems"] = systems;
  if (s.mu || s.omega) {
    req["mu"] = required(s.mu, "--mu");
    req["omega"] = required(s.omega, "--omega");
  }
  if (s.chain) req["chain"] = split(*s.chain);
  if (s.bound_a) req["a"] = *s.bound_a;
  if (s.bound_b) req["b"] = *s.bound_b;
  req["options"] = options_of(s);
  char* text = nullptr;
  size_t passed = 0, failed = 0, skipped = 0;
  check(muspec_verify(req.dump().c_str(), &text, &passed, &failed, &skipped));
  const std::string body = take(text);
  const std::string format = s.format.value_or("json");
  if (format == "json") {
    emit(s, body);
    std::cerr << "pass " << passed << ", fail " << failed << ", skipped " << skipped << "\n";
  } else if (format == "table") {
    std::ostringstream os;
    std::istringstream lines(body);
    std::string line;
    while (std::getline(lines, line)) {
      const json r = json::parse(line);
      os << r["theorem"].get<std::string>() << "  " << r["fixture"].get<std::string>() << "  ";
      for (const auto& n : r["rates"]) os << n.get<std::string>() << " ";
      os << " " << r["status"].get<std::string>() << "\n";
    }
    os << "pass " << passed << "  fail " << failed << "  skipped " << skipped << "\n";
    emit(s, os.str());
  } else {
    throw CliError{"--format must be json or table for verify"};
  }
  return failed == 0 ? 0 : 3;
}

int cmd_catalog(const Settings& s) {
  char* text = nullptr;
  check(muspec_catalog_json(&text));
  const std::string body = take(text);
  if (s.json_listing || s.format.value_or("table") == "json") {
    emit(s, body);
    return 0;
  }
  const json c = json::parse(body);
  std::ostringstream os;
  os << "rates\n";
  for (const auto& r : c["rates"]) {
    os << "  " << r["name"].get<std::string>() << "  " << r["summary"].get<std::string>() << "\n"
       << "      " << r["descriptor"].dump() << "\n";
  }
  os << "systems\n";
  for (const auto& r : c["systems"]) {
    os << "  " << r["name"].get<std::string>() << "  " << r["summary"].get<std::string>() << "\n"
       << "      " << r["descriptor"].dump() << "\n";
  }
  emit(s, os.str());
  return 0;
}

template <class T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& slot, const std::string& help) {
  app->add_option_function<T>(name, [&slot](const T& v) { slot = v; }, help);
}

void common_flags(CLI::App* app, Settings& s) {
  optional_flag(app, "--format", s.format, "json, csv or table");
  optional_flag(app, "--output,-o", s.output, "write to a file instead of stdout");
  app->add_option("--config", s.config, "JSON file with defaults for any flag (flags win)");
  optional_flag(app, "--schedule", s.schedule, "window sizes, e.g. 50,100,200,400");
  optional_flag(app, "--tol-stab", s.tol_stab, "stabilization tolerance");
  optional_flag(app, "--cutoff-fraction", s.cutoff_fraction, "pair cutoff as a fraction of Lmax");
  optional_flag(app, "--gamma-max", s.gamma_max, "divergence threshold");
  optional_flag(app, "--delta-merge", s.delta_merge, "merge distance for component intervals");
  optional_flag(app, "--sample-step", s.sample_step, "sampling step of continuous windows");
  optional_flag(app, "--integration-step", s.integration_step, "continuous integration step");
  optional_flag(app, "--relation-step", s.relation_step, "sampling step of relation checks");
  optional_flag(app, "--threads", s.threads, "worker threads (0: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mu-dichotomy spectra and growth rate relations"};
  app.require_subcommand(1);
  Settings s;

  auto* spectrum = app.add_subcommand("spectrum", "spectrum of a system under a growth rate");
  optional_flag(spectrum, "--system", s.system, "catalog name, catalog:NAME, JSON or JSON file");
  optional_flag(spectrum, "--rate", s.rate, "catalog name, catalog:NAME, JSON or JSON file");
  common_flags(spectrum, s);

  auto* compare = app.add_subcommand("compare", "decide a relation between two rates");
  optional_flag(compare, "--relation", s.relation,
                "faster, faster-backward, weakly-faster, almost-faster, almost-slower, "
                "weakly-equivalent, equivalent, order or profile");
  optional_flag(compare, "--a", s.a, "first rate (mu)");
  optional_flag(compare, "--b", s.b, "second rate (omega)");
  optional_flag(compare, "--mu", s.mu, "alias of --a");
  optional_flag(compare, "--omega", s.omega, "alias of --b");
  optional_flag(compare, "--chain", s.chain, "comma separated rates checked as an ordered chain");
  optional_flag(compare, "--time-domain", s.time_domain, "discrete or continuous");
  common_flags(compare, s);

  auto* verify = app.add_subcommand("verify", "check theorems on fixtures");
  optional_flag(verify, "--theorem", s.theorem, "805, 806, 808, 809, 811, 908, 721, 722 or all");
  verify->add_option("--system", s.systems, "system spec (repeatable; default: built-in fixtures)");
  optional_flag(verify, "--mu", s.mu, "mu rate");
  optional_flag(verify, "--omega", s.omega, "omega rate");
  optional_flag(verify, "--chain", s.chain, "chain for 811, e.g. p,exp,q,c");
  optional_flag(verify, "--bound-a", s.bound_a, "a for 808/809 (default: derived)");
  optional_flag(verify, "--bound-b", s.bound_b, "b for 809 (default: derived)");
  optional_flag(verify, "--conclusion-tol", s.conclusion_tol, "tolerance of spectral conclusions");
  common_flags(verify, s);

  auto* catalog = app.add_subcommand("catalog", "list built-in rates and systems");
  catalog->add_flag("--json", s.json_listing, "print descriptors as JSON");
  optional_flag(catalog, "--output,-o", s.output, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    merge_config(s);
    if (spectrum->parsed()) return cmd_spectrum(s);
    if (compare->parsed()) return cmd_compare(s);
    if (verify->parsed()) return cmd_verify(s);
    return cmd_catalog(s);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitError;
  }
}
