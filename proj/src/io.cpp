#include "glomix/io.hpp"

#include "glomix/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace glomix {

namespace {

double number(const Json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number()) throw ConfigError(std::string("map field '") + key + "' must be a number");
    return doc[key].get<double>();
}

std::vector<double> pm_endpoints(double kappa, double p) {
    std::vector<double> a{0.0};
    RealFn f = [=](double x) { return x + kappa * std::pow(x, p + 1.0); };
    RealFn df = [=](double x) { return 1.0 + kappa * (p + 1.0) * std::pow(x, p); };
    for (int j = 1; j < static_cast<int>(kappa) + 1; ++j) a.push_back(solve_increasing(f, df, j, 0.0, 1.0));
    a.push_back(1.0);
    return a;
}

Perturbation make_perturbation(const Json& b, const std::vector<double>& endpoints) {
    std::string type = b.value("type", "");
    double A = number(b, "amplitude", 0.0);
    Perturbation e;
    if (type == "power") {
        double s = number(b, "exponent", 0.0);
        e.eta = [=](double x) { return A * std::pow(x, s); };
        e.d_eta = [=](double x) { return A * s * std::pow(x, s - 1.0); };
        e.dd_eta = [=](double x) { return A * s * (s - 1.0) * std::pow(x, s - 2.0); };
        return e;
    }
    if (type == "quadratic") {
        std::size_t j = b.at("j").get<std::size_t>();
        if (j + 1 >= endpoints.size()) throw ConfigError("quadratic perturbation on a missing branch");
        double lo = endpoints[j], hi = endpoints[j + 1];
        e.eta = [=](double x) { return A * (x - lo) * (hi - x); };
        e.d_eta = [=](double x) { return A * (lo + hi - 2.0 * x); };
        e.dd_eta = [=](double) { return -2.0 * A; };
        return e;
    }
    throw ConfigError("unknown perturbation type '" + type + "'");
}

PerturbationSpec perturbation_from_json(const Json& doc, const std::vector<double>& endpoints) {
    PerturbationSpec spec;
    spec.epsilon = number(doc, "epsilon", 1.0);
    if (!doc.contains("branches")) return spec;
    for (const auto& b : doc["branches"]) {
        std::size_t j = b.at("j").get<std::size_t>();
        if (spec.branches.size() <= j) spec.branches.resize(j + 1);
        spec.branches[j] = make_perturbation(b, endpoints);
    }
    return spec;
}

} // namespace

IntervalMap map_from_json(const Json& doc) {
    try {
        if (!doc.is_object()) throw ConfigError("map document must be a JSON object");
        std::string family = doc.value("family", "");
        double p = number(doc, "p", 1.0);
        if (family == "StandardLSV") return build_standard_lsv(p);
        if (family == "Doubling") return build_doubling_map();
        double kappa = number(doc, "kappa", 1.0);
        Family fam = family_from_string(family);
        std::vector<double> endpoints;
        if (doc.contains("endpoints")) endpoints = doc["endpoints"].get<std::vector<double>>();
        switch (fam) {
        case Family::GeneralizedPM: {
            if (kappa != std::floor(kappa)) throw ConfigError("GeneralizedPM needs an integer kappa");
            return build_generalized_pm(static_cast<int>(kappa), p);
        }
        case Family::GeneralizedLSV: {
            if (doc.contains("ratio")) return build_countable_lsv(kappa, p, number(doc, "ratio", 0.5));
            if (endpoints.empty()) endpoints = {first_endpoint(kappa, p), 1.0};
            return build_generalized_lsv(kappa, p, endpoints);
        }
        case Family::PerturbedPM: {
            if (kappa != std::floor(kappa)) throw ConfigError("PerturbedPM needs an integer kappa");
            PerturbationSpec spec = doc.contains("perturbation") ? perturbation_from_json(doc["perturbation"], pm_endpoints(kappa, p))
                                                                 : PerturbationSpec{};
            return build_perturbed_pm(static_cast<int>(kappa), p, std::move(spec));
        }
        case Family::PerturbedLSV: {
            Json pert = doc.value("perturbation", Json::object());
            if (endpoints.empty()) {
                // a_1 solves phi_0(a_1) = 1 including eta_0
                PerturbationSpec probe = perturbation_from_json(pert, {0.0, 0.5, 1.0});
                endpoints = {first_endpoint(kappa, p, probe.has(0) ? probe.branches[0] : Perturbation{}), 1.0};
            }
            std::vector<double> full = endpoints;
            if (full.front() != 0.0) full.insert(full.begin(), 0.0);
            return build_perturbed_lsv(kappa, p, endpoints, perturbation_from_json(pert, full));
        }
        case Family::Custom: throw ConfigError("Custom maps can only be built programmatically");
        }
        throw ConfigError("unknown family");
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed map document: ") + e.what());
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const Json::exception& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

Json to_json(const CheckReport& r) {
    Json j;
    j["assumption_id"] = to_string(r.assumption_id);
    j["passed"] = r.passed;
    j["witness"] = r.witness ? Json(*r.witness) : Json(nullptr);
    j["witness_upper"] = r.witness_upper ? Json(*r.witness_upper) : Json(nullptr);
    j["estimate"] = r.estimate ? Json(*r.estimate) : Json(nullptr);
    j["grid_size"] = r.grid_size;
    j["branch"] = r.branch ? Json(*r.branch) : Json(nullptr);
    j["note"] = r.note;
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

} // namespace glomix
