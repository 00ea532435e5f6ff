#include "glomix/cli_runner.hpp"

#include "glomix/conjugation.hpp"
#include "glomix/errors.hpp"
#include "glomix/mixing.hpp"
#include "glomix/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace glomix {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::vector<std::pair<Command, std::string>>& command_names() {
    static const std::vector<std::pair<Command, std::string>> names{
        {Command::Check, "check"},           {Command::Conjugate, "conjugate"},
        {Command::Density, "density"},       {Command::Mix, "mix"},
        {Command::DemoCounterexample, "demo-counterexample"}, {Command::Orbit, "orbit"}};
    return names;
}

Json parse_override_value(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::exception&) {
        return Json(text);
    }
}

Json resolve_map_document(const RunConfig& config) {
    Json doc;
    if (!config.map_document.is_null()) {
        doc = config.map_document;
    } else {
        if (config.map_path.empty()) throw ConfigError("--map is required for '" + to_string(config.command) + "'");
        doc = read_json_file(config.map_path);
    }
    if (!doc.is_object()) throw ConfigError("map document must be a JSON object");
    for (const auto& [key, value] : config.overrides) {
        std::string pointer = "/" + key;
        std::replace(pointer.begin(), pointer.end(), '.', '/');
        doc[Json::json_pointer(pointer)] = parse_override_value(value);
    }
    return doc;
}

std::string map_id(const RunConfig& config, const Json& doc) {
    if (doc.contains("id") && doc["id"].is_string()) return doc["id"].get<std::string>();
    if (!config.map_path.empty()) return fs::path(config.map_path).stem().string();
    return doc.value("family", "map");
}

class Output {
public:
    explicit Output(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
    void write(const std::string& name, const std::string& text) {
        write_text_file((dir_ / name).string(), text);
        files_.push_back(name);
    }
    [[nodiscard]] const std::vector<std::string>& files() const { return files_; }
    [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

int report_checks(const std::vector<CheckReport>& reports, Output& out, std::ostream& log) {
    Json arr = Json::array();
    bool ok = true;
    for (const auto& r : reports) {
        arr.push_back(to_json(r));
        ok = ok && r.passed;
        log << to_string(r.assumption_id) << ' ' << (r.passed ? "passed" : "FAILED");
        if (r.estimate) log << " estimate=" << fmt(*r.estimate);
        if (r.witness) log << " witness=" << fmt(*r.witness);
        if (!r.note.empty()) log << " (" << r.note << ')';
        log << '\n';
    }
    out.write("reports.json", arr.dump(2) + "\n");
    return ok ? 0 : 2;
}

int cmd_check(const RunConfig& config, const IntervalMap& map, Output& out, std::ostream& log) {
    std::vector<CheckReport> reports;
    reports.push_back(check_A2(map, 40, config.grid));
    reports.push_back(check_A3(map, config.grid));
    reports.push_back(check_A4(map, config.grid));
    reports.push_back(check_A5prime_all(map, config.grid));
    reports.push_back(check_A5(map, config.grid));
    reports.push_back(check_B3(conjugate(map), config.grid));
    if (map.perturbation()) reports.push_back(check_perturbation_bounds(map, *map.perturbation()));
    return report_checks(reports, out, log);
}

int cmd_conjugate(const RunConfig& config, const IntervalMap& map, Output& out, std::ostream& log) {
    HalfLineMap hmap = conjugate(map);
    BranchSystem sys = BranchSystem::of(hmap);
    std::vector<double> ys = config.at.empty() ? geometric_points(1e-3, 1e3, 25) : config.at;
    std::ostringstream csv;
    csv << "y,branch,T_o,psi_inv,P_one\n";
    for (double y : ys) {
        if (!(y >= 0.0)) throw DomainError("conjugate: points must be >= 0");
        std::size_t j = hmap.locate(y);
        double P1 = pf_apply_at(sys, [](double) { return 1.0; }, y);
        csv << fmt(y) << ',' << j << ',' << fmt(hmap(y)) << ',' << fmt(psi_inv(y, hmap.p())) << ',' << fmt(P1) << '\n';
    }
    out.write("conjugate.csv", csv.str());
    log << "conjugate: " << ys.size() << " points written to " << out.path("conjugate.csv") << '\n';
    return 0;
}

int cmd_density(const RunConfig& config, const IntervalMap& map, Output& out, std::ostream& log) {
    DensityOptions opt;
    opt.grid_size = config.grid;
    opt.max_iterations = config.iters;
    DensityEstimate d = estimate_invariant_density(map, opt);
    std::ostringstream csv;
    csv << "x,h,H\n";
    for (std::size_t i = 0; i < d.h.size(); ++i)
        csv << fmt(d.h.grid()[i]) << ',' << fmt(d.h.values()[i]) << ',' << fmt(d.H.values()[i]) << '\n';
    out.write("density.csv", csv.str());
    Json rep;
    rep["iterations"] = d.iterations;
    rep["converged"] = d.converged;
    rep["non_convergence"] = d.non_convergence;
    rep["H0"] = d.H0;
    rep["H0_error"] = d.H0_error;
    rep["final_variation"] = d.variation.empty() ? Json(nullptr) : Json(d.variation.back());
    out.write("density_report.json", rep.dump(2) + "\n");
    log << "density: " << d.iterations << " iterations, " << (d.converged ? "converged" : "not converged")
        << ", H(0) ~ " << fmt(d.H0) << '\n';
    return 0;
}

int cmd_mix(const RunConfig& config, const IntervalMap& map, const std::string& id, Output& out, std::ostream& log) {
    MeasureSpec measure = parse_measure(config.measure, map, std::max<std::size_t>(config.grid, 2), config.iters);
    Observable F = parse_observable(config.F);
    Observable g = parse_observable(config.g);
    Method method;
    if (config.method == "transfer") method = Method::TransferDuality;
    else if (config.method == "montecarlo") method = Method::MonteCarlo;
    else throw ConfigError("--method must be transfer or montecarlo");
    std::uint64_t seed = config.seed.value_or(1);
    MixingOptions opt;
    opt.grid_size = std::max<std::size_t>(config.grid, 2);
    MixingRun run = run_mixing(map, id, measure, F, g, config.n, method, config.samples, seed, opt);
    std::ostringstream csv;
    write_csv(run, csv);
    out.write("mix.csv", csv.str());

    GlmDiagnostic diag = glm_diagnostic(run);
    Json rep;
    rep["measure"] = measure.name();
    rep["F"] = F.name;
    rep["g"] = g.name;
    rep["method"] = to_string(method);
    rep["target"] = run.target ? Json(*run.target) : Json(nullptr);
    rep["trend"] = to_string(diag.trend);
    rep["slope"] = diag.slope;
    rep["tail_sup"] = diag.tail_sup;
    rep["target_undefined"] = diag.target_undefined;
    rep["report"] = diag.report;
    if (method == Method::TransferDuality) {
        // brute-force composition oracle for the first few terms
        Json checks = Json::array();
        double worst = 0.0;
        for (std::size_t n = 0; n <= std::min<std::size_t>(3, config.n); ++n) {
            double direct = correlation_direct(map, measure, F, g, n);
            double rel = std::abs(run.correlations[n] - direct) / std::max(std::abs(direct), 1e-300);
            worst = std::max(worst, rel);
            checks.push_back({{"n", n}, {"transfer", run.correlations[n]}, {"direct", direct}, {"relative_error", rel}});
        }
        rep["duality_checks"] = checks;
        rep["duality_ok"] = worst <= 1e-5;
        log << "mix: duality oracle worst relative error " << fmt(worst) << '\n';
    }
    out.write("mix_report.json", rep.dump(2) + "\n");
    log << "mix: " << diag.report << '\n';
    return 0;
}

int cmd_demo(const RunConfig& config, Output& out, std::ostream& log) {
    if (config.n_max < 2 || config.n_max > 170) throw ConfigError("--n-max must lie in [2, 170]");
    auto rows = counterexample_demo(config.n_max, true);
    std::ostringstream csv;
    write_csv(rows, csv);
    out.write("counterexample.csv", csv.str());
    Json exact = Json::array();
    double min_beta = 1.0;
    for (const auto& r : rows) {
        min_beta = std::min(min_beta, r.closed.leb_at_beta);
        if (r.n <= 100) {
            ExactLebesgueAverages e = counterexample_leb_exact(r.n);
            exact.push_back({{"n", r.n}, {"leb_at_alpha", e.at_alpha}, {"leb_at_beta", e.at_beta}});
        }
    }
    out.write("counterexample_exact.json", exact.dump(2) + "\n");
    log << "demo-counterexample: n = 2.." << config.n_max << ", min leb_at_beta = " << fmt(min_beta)
        << (min_beta >= 0.5 ? " (>= 1/2)" : " (< 1/2)") << '\n';
    return 0;
}

int cmd_orbit(const RunConfig& config, const IntervalMap& map, Output& out, std::ostream& log) {
    if (!(config.x0 > 0.0 && config.x0 <= 1.0)) throw DomainError("--x0 must lie in (0,1]");
    auto xs = orbit(map, config.x0, config.n);
    std::ostringstream csv;
    csv << "k,x\n";
    for (std::size_t k = 0; k < xs.size(); ++k) csv << k << ',' << fmt(xs[k]) << '\n';
    out.write("orbit.csv", csv.str());
    log << "orbit: " << xs.size() << " points\n";
    return 0;
}

} // namespace

std::string to_string(Command c) {
    for (const auto& [cmd, name] : command_names())
        if (cmd == c) return name;
    return "unknown";
}

Command command_from_string(const std::string& s) {
    for (const auto& [cmd, name] : command_names())
        if (name == s) return cmd;
    throw ConfigError("unknown command '" + s + "'");
}

MeasureSpec parse_measure(const std::string& spec, const IntervalMap& map, std::size_t grid, std::size_t iters) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto number = [&](double fallback) {
        if (arg.empty()) return fallback;
        try {
            std::size_t used = 0;
            double v = std::stod(arg, &used);
            if (used != arg.size()) throw ConfigError("bad number in measure '" + spec + "'");
            return v;
        } catch (const std::logic_error&) {
            throw ConfigError("bad number in measure '" + spec + "'");
        }
    };
    if (head == "leb") return MeasureSpec::lebesgue(Space::UnitInterval);
    if (head == "leb_o") return MeasureSpec::lebesgue(Space::HalfLine);
    if (head == "nu_p") return MeasureSpec::nu_p(number(map.p()));
    if (head == "lambda_q") {
        if (arg.empty()) throw ConfigError("lambda_q needs a parameter, e.g. lambda_q:1");
        return MeasureSpec::lambda_q(number(1.0));
    }
    if (head == "mu") {
        DensityOptions opt;
        opt.grid_size = grid;
        opt.max_iterations = iters;
        DensityEstimate d = estimate_invariant_density(map, opt);
        return MeasureSpec::estimated_mu(d.H, map.p());
    }
    throw ConfigError("unknown measure '" + spec + "' (expected leb, leb_o, nu_p, lambda_q:q or mu)");
}

Json to_json(const RunConfig& c) {
    Json j;
    j["command"] = to_string(c.command);
    j["map_path"] = c.map_path;
    j["overrides"] = c.overrides;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
    j["grid"] = c.grid;
    j["iters"] = c.iters;
    j["measure"] = c.measure;
    j["F"] = c.F;
    j["g"] = c.g;
    j["n"] = c.n;
    j["method"] = c.method;
    j["samples"] = c.samples;
    j["at"] = c.at;
    j["n_max"] = c.n_max;
    j["x0"] = c.x0;
    return j;
}

RunConfig config_from_json(const Json& j) {
    try {
        RunConfig c;
        c.command = command_from_string(j.at("command").get<std::string>());
        c.map_path = j.value("map_path", "");
        if (j.contains("overrides")) c.overrides = j["overrides"].get<std::map<std::string, std::string>>();
        c.output_dir = j.value("output_dir", c.output_dir);
        if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
        c.grid = j.value("grid", c.grid);
        c.iters = j.value("iters", c.iters);
        c.measure = j.value("measure", c.measure);
        c.F = j.value("F", c.F);
        c.g = j.value("g", c.g);
        c.n = j.value("n", c.n);
        c.method = j.value("method", c.method);
        c.samples = j.value("samples", c.samples);
        if (j.contains("at")) c.at = j["at"].get<std::vector<double>>();
        c.n_max = j.value("n_max", c.n_max);
        c.x0 = j.value("x0", c.x0);
        return c;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed run configuration: ") + e.what());
    }
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
    try {
        Output out(config.output_dir);
        bool needs_map = config.command != Command::DemoCounterexample;
        Json map_doc = needs_map || !config.map_path.empty() || !config.map_document.is_null()
                           ? resolve_map_document(config)
                           : Json(nullptr);

        Json manifest;
        manifest["tool"] = "glomix";
        manifest["version"] = kVersion;
        manifest["config"] = to_json(config);
        manifest["map"] = map_doc;

        int status = 0;
        std::optional<IntervalMap> map;
        if (!map_doc.is_null()) {
            try {
                map.emplace(map_from_json(map_doc));
            } catch (const EndpointMismatch& e) {
                CheckReport a1;
                a1.assumption_id = AssumptionId::A1;
                a1.passed = false;
                a1.note = e.what();
                if (map_doc.contains("endpoints") && map_doc["endpoints"].is_array() && !map_doc["endpoints"].empty() &&
                    map_doc["endpoints"][0].is_number())
                    a1.witness = map_doc["endpoints"][0].get<double>();
                status = report_checks({a1}, out, log);
            }
        }
        if (status == 0) {
            switch (config.command) {
            case Command::Check: status = cmd_check(config, *map, out, log); break;
            case Command::Conjugate: status = cmd_conjugate(config, *map, out, log); break;
            case Command::Density: status = cmd_density(config, *map, out, log); break;
            case Command::Mix: status = cmd_mix(config, *map, map_id(config, map_doc), out, log); break;
            case Command::DemoCounterexample: status = cmd_demo(config, out, log); break;
            case Command::Orbit: status = cmd_orbit(config, *map, out, log); break;
            }
        }
        manifest["outputs"] = out.files();
        manifest["exit_status"] = status;
        out.write("manifest.json", manifest.dump(2) + "\n");
        return status;
    } catch (const std::exception& e) {
        err << "glomix: error: " << e.what() << '\n';
        return 1;
    }
}

int replay(const std::string& manifest_path, const std::string& output_dir, std::ostream& log, std::ostream& err) {
    try {
        Json manifest = read_json_file(manifest_path);
        if (!manifest.contains("config")) throw ConfigError("manifest has no 'config' entry");
        RunConfig config = config_from_json(manifest["config"]);
        config.overrides.clear();
        if (manifest.contains("map")) config.map_document = manifest["map"];
        if (!output_dir.empty()) config.output_dir = output_dir;
        return run(config, log, err);
    } catch (const std::exception& e) {
        err << "glomix: error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace glomix
