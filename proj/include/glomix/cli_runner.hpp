#pragma once

#include "glomix/io.hpp"
#include "glomix/measures.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace glomix {

enum class Command { Check, Conjugate, Density, Mix, DemoCounterexample, Orbit };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct RunConfig {
    Command command = Command::Check;
    std::string map_path;
    /// Map document used instead of map_path when not null (set by replay).
    Json map_document;
    /// Map fields replaced before the map is built; dotted keys address nested
    /// objects and values are parsed as JSON, else kept as strings.
    std::map<std::string, std::string> overrides;
    std::string output_dir = "glomix_out";
    std::optional<std::uint64_t> seed;
    std::size_t grid = 10000;
    std::size_t iters = 500;

    std::string measure = "nu_p";
    std::string F = "identity";
    std::string g = "box:0.5,1";
    std::size_t n = 30;
    std::string method = "transfer";
    std::size_t samples = 100000;
    std::vector<double> at;
    int n_max = 50;
    double x0 = 0.3;
};

/// leb | leb_o | nu_p | nu_p:p | lambda_q:q | mu. "mu" estimates the invariant
/// density of `map` with the given grid size and iteration cap.
MeasureSpec parse_measure(const std::string& spec, const IntervalMap& map, std::size_t grid = 20000,
                          std::size_t iters = 500);

Json to_json(const RunConfig& config);
RunConfig config_from_json(const Json& doc);

/// Executes one command, writing artifacts and manifest.json into output_dir.
/// Returns 0 on success, 2 when an assumption check fails (reports are still
/// written), 1 on internal errors. Progress goes to `log`, errors to `err`.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

/// Re-runs the configuration stored in a manifest. The embedded map document is
/// used, so the original map file need not exist. output_dir overrides the
/// manifest's directory when non-empty.
int replay(const std::string& manifest_path, const std::string& output_dir, std::ostream& log, std::ostream& err);

} // namespace glomix
