#pragma once

#include "glomix/assumption_checks.hpp"
#include "glomix/interval_map.hpp"

#include <json.hpp>

#include <string>

namespace glomix {

using Json = nlohmann::json;

/// Map document:
///   {"family": "GeneralizedPM" | "GeneralizedLSV" | "PerturbedPM" | "PerturbedLSV" | "StandardLSV" | "Doubling",
///    "kappa": k, "p": p, "endpoints": [a_1, ..., 1], "ratio": r,
///    "perturbation": {"epsilon": e, "branches": [{"j": 0, "type": "power", "amplitude": A, "exponent": s},
///                                               {"j": 1, "type": "quadratic", "amplitude": A}]}}
/// "endpoints" may be omitted for LSV families (a_1 is then solved for, with N = 2);
/// "ratio" selects countably many LSV branches a_j = 1 - (1 - a_1) r^{j-1}.
/// power: eta(x) = A x^s; quadratic: eta(x) = A (x - a_j)(a_{j+1} - x).
IntervalMap map_from_json(const Json& doc);

/// Reads and parses a map file; ConfigError on malformed JSON, IoError when unreadable.
Json read_json_file(const std::string& path);

Json to_json(const CheckReport& report);

/// Writes text to a file, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& text);

} // namespace glomix
