#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "muspec/evolution.hpp"
#include "muspec/rates.hpp"
#include "muspec/spectrum.hpp"

namespace muspec {

/// Rate descriptor, e.g. {"kind":"power_exp","p":2,"lambda":1}. A missing
/// "time_domain" falls back to `domain`. Errors carry the field path.
GrowthRate rate_from_json(const nlohmann::json& j, TimeDomain domain,
                          const std::string& path = "rate");
nlohmann::json rate_to_json(const GrowthRate& rate);

/// System descriptor with "coefficients" holding one of "diagonal",
/// "entries", "table" (CSV path, relative to base_dir) or "potential".
LinearSystem system_from_json(const nlohmann::json& j, const std::string& base_dir = "",
                              const std::string& path = "system");
nlohmann::json system_to_json(const LinearSystem& system);

/// "catalog:NAME", a bare catalog name, or inline JSON.
GrowthRate resolve_rate(const std::string& spec, TimeDomain domain);
LinearSystem resolve_system(const std::string& spec, const std::string& base_dir = "");

/// Whether a rate spec can only be used in continuous time (glued rates).
bool rate_spec_is_continuous_only(const std::string& spec);

nlohmann::json spectrum_to_json(const SpectrumReport& report);

/// Per-window Bohl traces: window,component,lambda_lower,lambda_upper.
std::string spectrum_trace_csv(const SpectrumReport& report);

/// Plain text summary.
std::string spectrum_table(const SpectrumReport& report);

/// Extended real as text: 12 significant digits, "-inf"/"+inf".
std::string format_extended(double v);

}  // namespace muspec
