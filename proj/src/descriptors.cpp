#include "muspec/descriptors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "jsonutil.hpp"
#include "muspec/catalog.hpp"
#include "muspec/errors.hpp"

namespace muspec {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "must be an object");
}

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ValidationError(path + "." + it.key(), "unknown field");
  }
}

double number_at(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path + "." + key, "missing");
  if (!j.at(key).is_number()) throw ValidationError(path + "." + key, "must be a number");
  return j.at(key).get<double>();
}

std::string string_at(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ValidationError(path + "." + key, "missing");
  if (!j.at(key).is_string()) throw ValidationError(path + "." + key, "must be a string");
  return j.at(key).get<std::string>();
}

TimeDomain domain_from(const std::string& s, const std::string& path) {
  if (s == "discrete") return TimeDomain::Discrete;
  if (s == "continuous") return TimeDomain::Continuous;
  throw ValidationError(path, "must be \"discrete\" or \"continuous\"");
}

// Re-raises validation errors from constructors under the descriptor path.
template <class Fn>
auto at_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(path + (e.path().empty() ? "" : "." + e.path()),
                          std::string(e.what()).substr(e.path().empty() ? 0 : e.path().size() + 2));
  } catch (const SyntaxError& e) {
    throw ValidationError(path, e.what());
  }
}

json expression_list(const std::vector<std::vector<std::string>>& texts, bool diagonal) {
  json a = json::array();
  for (const auto& row : texts) {
    if (diagonal) {
      a.push_back(row.front());
    } else {
      a.push_back(row);
    }
  }
  return a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_text(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string format_extended(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

GrowthRate rate_from_json(const json& j, TimeDomain domain, const std::string& path) {
  require_object(j, path);
  if (j.contains("time_domain")) {
    domain = domain_from(string_at(j, "time_domain", path), path + ".time_domain");
  }
  const std::string kind = string_at(j, "kind", path);
  if (kind == "power_exp") {
    reject_unknown(j, path, {"kind", "p", "lambda", "time_domain"});
    const double p = number_at(j, "p", path);
    const double lambda = j.contains("lambda") ? number_at(j, "lambda", path) : 1.0;
    return at_path(path, [&] { return GrowthRate::power_exp(p, lambda, domain); });
  }
  if (kind == "polynomial") {
    reject_unknown(j, path, {"kind", "time_domain"});
    return GrowthRate::polynomial(domain);
  }
  if (kind == "expression") {
    reject_unknown(j, path, {"kind", "log_rate", "time_domain"});
    const std::string text = string_at(j, "log_rate", path);
    return at_path(path + ".log_rate", [&] { return GrowthRate::expression(text, domain); });
  }
  if (kind == "glued") {
    reject_unknown(j, path, {"kind", "inner", "outer", "crossover", "time_domain"});
    if (!j.contains("inner")) throw ValidationError(path + ".inner", "missing");
    if (!j.contains("outer")) throw ValidationError(path + ".outer", "missing");
    const GrowthRate inner = rate_from_json(j.at("inner"), domain, path + ".inner");
    const GrowthRate outer = rate_from_json(j.at("outer"), domain, path + ".outer");
    std::optional<double> crossover;
    if (j.contains("crossover")) crossover = number_at(j, "crossover", path);
    return at_path(path, [&] { return GrowthRate::glued(inner, outer, crossover); });
  }
  throw ValidationError(path + ".kind", "unknown rate kind '" + kind + "'");
}

json rate_to_json(const GrowthRate& r) {
  json j;
  switch (r.kind()) {
    case GrowthRate::Kind::PowerExp:
      j = {{"kind", "power_exp"}, {"p", r.p()}, {"lambda", r.lambda()}};
      break;
    case GrowthRate::Kind::Polynomial:
      j = {{"kind", "polynomial"}};
      break;
    case GrowthRate::Kind::Expression:
      j = {{"kind", "expression"}, {"log_rate", r.expr_text()}};
      break;
    case GrowthRate::Kind::Glued: {
      json inner = rate_to_json(r.inner());
      json outer = rate_to_json(r.outer());
      inner.erase("time_domain");
      outer.erase("time_domain");
      j = {{"kind", "glued"}, {"inner", inner}, {"outer", outer}, {"crossover", r.crossover()}};
      break;
    }
  }
  j["time_domain"] = time_domain_name(r.time_domain());
  return j;
}

LinearSystem system_from_json(const json& j, const std::string& base_dir, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"time_domain", "dimension", "structure", "coefficients", "weights"});
  const TimeDomain domain =
      domain_from(string_at(j, "time_domain", path), path + ".time_domain");
  if (!j.contains("dimension")) throw ValidationError(path + ".dimension", "missing");
  const json& dj = j.at("dimension");
  if (!dj.is_number_integer() || dj.get<long>() < 1 || dj.get<long>() > 16) {
    throw ValidationError(path + ".dimension", "must be an integer between 1 and 16");
  }
  const std::size_t d = dj.get<std::size_t>();
  const std::string sname = string_at(j, "structure", path);
  Structure structure;
  if (sname == "scalar") {
    structure = Structure::Scalar;
  } else if (sname == "diagonal") {
    structure = Structure::Diagonal;
  } else if (sname == "full") {
    structure = Structure::Full;
  } else {
    throw ValidationError(path + ".structure", "must be \"scalar\", \"diagonal\" or \"full\"");
  }
  if (structure == Structure::Scalar && d != 1) {
    throw ValidationError(path + ".dimension", "scalar systems have dimension 1");
  }
  const std::string cpath = path + ".coefficients";
  if (!j.contains("coefficients")) throw ValidationError(cpath, "missing");
  const json& c = j.at("coefficients");
  require_object(c, cpath);
  if (c.size() != 1) {
    throw ValidationError(cpath, "must hold exactly one of diagonal, entries, table, potential");
  }
  reject_unknown(c, cpath, {"diagonal", "entries", "table", "potential"});

  auto string_list = [&](const json& a, const std::string& p, std::size_t n) {
    if (!a.is_array() || a.size() != n) {
      throw ValidationError(p, "must be an array of " + std::to_string(n) + " entries");
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (!a[i].is_string()) throw ValidationError(p + "[" + std::to_string(i) + "]", "must be a string");
      out.push_back(a[i].get<std::string>());
    }
    return out;
  };

  LinearSystem sys = [&]() -> LinearSystem {
    if (c.contains("diagonal")) {
      if (structure == Structure::Full) {
        throw ValidationError(cpath + ".diagonal", "full systems need \"entries\"");
      }
      const auto list = string_list(c.at("diagonal"), cpath + ".diagonal", d);
      for (std::size_t i = 0; i < d; ++i) {
        try {
          parse_expr(list[i]);
        } catch (const SyntaxError& e) {
          throw ValidationError(cpath + ".diagonal[" + std::to_string(i) + "]", e.what());
        }
      }
      return structure == Structure::Scalar ? LinearSystem::scalar(list[0], domain)
                                            : LinearSystem::diagonal(list, domain);
    }
    if (c.contains("entries")) {
      if (structure != Structure::Full) {
        throw ValidationError(cpath + ".entries", "scalar and diagonal systems need \"diagonal\"");
      }
      const json& rows = c.at("entries");
      if (!rows.is_array() || rows.size() != d) {
        throw ValidationError(cpath + ".entries", "must be an array of " + std::to_string(d) + " rows");
      }
      std::vector<std::vector<std::string>> entries;
      for (std::size_t i = 0; i < d; ++i) {
        const std::string rp = cpath + ".entries[" + std::to_string(i) + "]";
        entries.push_back(string_list(rows[i], rp, d));
        for (std::size_t k = 0; k < d; ++k) {
          try {
            parse_expr(entries[i][k]);
          } catch (const SyntaxError& e) {
            throw ValidationError(rp + "[" + std::to_string(k) + "]", e.what());
          }
        }
      }
      return LinearSystem::full(entries, domain);
    }
    if (c.contains("table")) {
      if (domain != TimeDomain::Discrete) {
        throw ValidationError(cpath + ".table", "tables are only supported in discrete time");
      }
      if (!c.at("table").is_string()) throw ValidationError(cpath + ".table", "must be a path string");
      std::filesystem::path p = c.at("table").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      Table t = at_path(path, [&] { return load_table_csv(p.string(), d, structure); });
      t.source = c.at("table").get<std::string>();
      return LinearSystem::tabulated(std::move(t), structure);
    }
    const std::string pp = cpath + ".potential";
    const json& a = c.at("potential");
    if (structure == Structure::Full) throw ValidationError(pp, "potentials describe diagonal systems");
    if (!a.is_array() || a.size() != d) {
      throw ValidationError(pp, "must be an array of " + std::to_string(d) + " entries");
    }
    std::vector<Potential> comps;
    for (std::size_t i = 0; i < d; ++i) {
      const std::string ip = pp + "[" + std::to_string(i) + "]";
      if (a[i].is_string()) {
        comps.push_back(at_path(ip, [&] { return Potential::from_expression(a[i].get<std::string>()); }));
        continue;
      }
      require_object(a[i], ip);
      reject_unknown(a[i], ip, {"rate", "slope"});
      if (!a[i].contains("rate")) throw ValidationError(ip + ".rate", "missing");
      comps.push_back(Potential::from_rate(rate_from_json(a[i].at("rate"), domain, ip + ".rate"),
                                           number_at(a[i], "slope", ip)));
    }
    return LinearSystem::closed_form(std::move(comps), domain);
  }();

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    if (!w.is_array()) throw ValidationError(path + ".weights", "must be an array");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::string wp = path + ".weights[" + std::to_string(i) + "]";
      require_object(w[i], wp);
      reject_unknown(w[i], wp, {"rate", "gamma"});
      if (!w[i].contains("rate")) throw ValidationError(wp + ".rate", "missing");
      sys = sys.weighted(rate_from_json(w[i].at("rate"), domain, wp + ".rate"),
                         number_at(w[i], "gamma", wp));
    }
  }
  return sys;
}

json system_to_json(const LinearSystem& s) {
  json j;
  j["time_domain"] = time_domain_name(s.time_domain());
  j["dimension"] = s.dimension();
  j["structure"] = structure_name(s.structure());
  switch (s.source()) {
    case LinearSystem::Source::Entries:
      if (s.structure() == Structure::Full) {
        j["coefficients"] = {{"entries", expression_list(s.entry_texts(), false)}};
      } else {
        j["coefficients"] = {{"diagonal", expression_list(s.entry_texts(), true)}};
      }
      break;
    case LinearSystem::Source::Table:
      j["coefficients"] = {{"table", s.table().source}};
      break;
    case LinearSystem::Source::ClosedForm: {
      json a = json::array();
      for (const auto& p : s.potentials()) {
        if (p.expr) {
          a.push_back(p.text);
        } else {
          json r = rate_to_json(*p.rate);
          r.erase("time_domain");
          a.push_back({{"rate", r}, {"slope", p.slope}});
        }
      }
      j["coefficients"] = {{"potential", a}};
      break;
    }
  }
  if (!s.weights().empty()) {
    json w = json::array();
    for (const auto& [rate, gamma] : s.weights()) {
      json r = rate_to_json(rate);
      r.erase("time_domain");
      w.push_back({{"rate", r}, {"gamma", gamma}});
    }
    j["weights"] = w;
  }
  return j;
}

bool rate_spec_is_continuous_only(const std::string& spec) {
  std::string name = spec.rfind("catalog:", 0) == 0 ? spec.substr(8) : spec;
  if (name == "glued_c_p") return true;
  if (!spec.empty() && spec.front() == '{') {
    try {
      const json j = json::parse(spec);
      return j.is_object() && j.value("kind", "") == "glued" && !j.contains("crossover");
    } catch (const json::parse_error&) {
      return false;
    }
  }
  return false;
}

GrowthRate resolve_rate(const std::string& spec, TimeDomain domain) {
  if (spec.rfind("catalog:", 0) == 0) return catalog_rate(spec.substr(8), domain);
  if (!spec.empty() && spec.front() == '{') return rate_from_json(parse_json_text(spec, "rate"), domain);
  if (std::filesystem::is_regular_file(spec)) {
    return rate_from_json(parse_json_text(read_file(spec), "rate"), domain);
  }
  return catalog_rate(spec, domain);
}

LinearSystem resolve_system(const std::string& spec, const std::string& base_dir) {
  if (spec.rfind("catalog:", 0) == 0) return catalog_system(spec.substr(8));
  if (!spec.empty() && spec.front() == '{') {
    return system_from_json(parse_json_text(spec, "system"), base_dir);
  }
  if (std::filesystem::is_regular_file(spec)) {
    const std::string dir = std::filesystem::path(spec).parent_path().string();
    return system_from_json(parse_json_text(read_file(spec), "system"), dir);
  }
  return catalog_system(spec);
}

json spectrum_to_json(const SpectrumReport& r) {
  json j;
  j["rate"] = rate_to_json(r.rate);
  j["system"] = system_to_json(r.system);
  j["mode"] = r.mode == SpectrumMode::Exact ? "exact" : "enclosure";
  j["converged"] = r.converged;
  json ivs = json::array();
  for (const auto& iv : r.intervals) ivs.push_back({{"lo", jnum(iv.lo)}, {"hi", jnum(iv.hi)}});
  j["intervals"] = ivs;
  json gaps = json::array();
  for (const auto& g : r.gaps) {
    json gj = {{"lo", jnum(g.lo)},
               {"hi", jnum(g.hi)},
               {"lo_closed", g.lo_closed},
               {"hi_closed", g.hi_closed},
               {"rank", g.rank}};
    gj["pattern"] = g.pattern ? json(*g.pattern) : json(nullptr);
    gaps.push_back(gj);
  }
  j["gaps"] = gaps;
  j["windows"] = jnums(r.schedule);
  j["estimator"] = {{"cutoff_fraction", jnum(r.params.cutoff_fraction)},
                    {"tol_stab", jnum(r.params.tol_stab)},
                    {"gamma_max", jnum(r.params.gamma_max)},
                    {"delta_merge", jnum(r.params.delta_merge)},
                    {"sample_step", jnum(r.params.sample_step)},
                    {"step", jnum(r.params.evolution.step)}};
  json comps = json::array();
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    const auto& e = r.components[c];
    auto side = [](const ExponentEstimate& x) {
      return json{{"value", jnum(x.value)}, {"raw", jnum(x.raw)}, {"band", jnum(x.band)},
                  {"settle", settle_name(x.settle)}};
    };
    json windows = json::array();
    for (const auto& w : e.per_window) {
      windows.push_back({{"window", jnum(w.window)},
                         {"lambda_lower", jnum(w.lower)},
                         {"lambda_upper", jnum(w.upper)},
                         {"pairs", w.pairs}});
    }
    comps.push_back({{"component", c},
                     {"lower", side(e.lower)},
                     {"upper", side(e.upper)},
                     {"diverged_lower", e.diverged_lower()},
                     {"diverged_upper", e.diverged_upper()},
                     {"pairs_used", e.pairs_used},
                     {"per_window", windows}});
  }
  j["components"] = comps;
  return j;
}

std::string spectrum_trace_csv(const SpectrumReport& r) {
  std::string out = "window,component,lambda_lower,lambda_upper\n";
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    for (const auto& w : r.components[c].per_window) {
      out += format_extended(w.window) + "," + std::to_string(c) + "," + format_extended(w.lower) +
             "," + format_extended(w.upper) + "\n";
    }
  }
  return out;
}

std::string spectrum_table(const SpectrumReport& r) {
  std::ostringstream os;
  os << "rate      " << r.rate.label() << "\n";
  os << "mode      " << (r.mode == SpectrumMode::Exact ? "exact" : "enclosure")
     << (r.converged ? ", converged" : ", not converged") << "\n";
  os << "spectrum ";
  for (std::size_t i = 0; i < r.intervals.size(); ++i) {
    const auto& iv = r.intervals[i];
    os << (i ? " u " : " ");
    if (iv.lo == iv.hi) {
      os << "{" << format_extended(iv.lo) << "}";
    } else {
      os << "[" << format_extended(iv.lo) << ", " << format_extended(iv.hi) << "]";
    }
  }
  os << "\n";
  for (const auto& g : r.gaps) {
    os << "gap       " << (g.lo_closed ? "[" : "(") << format_extended(g.lo) << ", "
       << format_extended(g.hi) << (g.hi_closed ? "]" : ")") << "  rank " << g.rank << "\n";
  }
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    const auto& e = r.components[c];
    os << "component " << c << "  lower " << format_extended(e.lower.value) << " ("
       << settle_name(e.lower.settle) << ")  upper " << format_extended(e.upper.value) << " ("
       << settle_name(e.upper.settle) << ")\n";
  }
  return os.str();
}

}  // namespace muspec
