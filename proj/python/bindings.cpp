#include "glomix/assumption_checks.hpp"
#include "glomix/cli_runner.hpp"
#include "glomix/conjugation.hpp"
#include "glomix/errors.hpp"
#include "glomix/interval_map.hpp"
#include "glomix/measures.hpp"
#include "glomix/mixing.hpp"
#include "glomix/transfer.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace glomix;

namespace {

py::dict report_dict(const CheckReport& r) {
    py::dict d;
    d["assumption_id"] = to_string(r.assumption_id);
    d["passed"] = r.passed;
    d["witness"] = r.witness;
    d["witness_upper"] = r.witness_upper;
    d["estimate"] = r.estimate;
    d["grid_size"] = r.grid_size;
    d["branch"] = r.branch;
    d["note"] = r.note;
    return d;
}

py::dict averages_dict(const CounterexampleAverages& a) {
    py::dict d;
    d["leb_at_alpha"] = a.leb_at_alpha;
    d["leb_at_beta"] = a.leb_at_beta;
    d["lambda1_at_alpha"] = a.lambda1_at_alpha;
    d["lambda1_at_beta"] = a.lambda1_at_beta;
    return d;
}

} // namespace

PYBIND11_MODULE(_glomix, m) {
    m.doc() = "Intermittent interval maps, transfer operators and global-local mixing";

    static py::exception<Error> base(m, "GlomixError");
    static py::exception<DomainError> domain(m, "DomainError", base.ptr());
    static py::exception<EndpointMismatch> endpoint(m, "EndpointMismatch", base.ptr());
    static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
    static py::exception<SingularMass> singular(m, "SingularMass", base.ptr());
    static py::exception<NonIntegrable> nonint(m, "NonIntegrable", base.ptr());
    static py::exception<Overflow> overflow(m, "Overflow", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const EndpointMismatch& e) {
            py::set_error(endpoint, e.what());
        } catch (const DomainError& e) {
            py::set_error(domain, e.what());
        } catch (const ConfigError& e) {
            py::set_error(config, e.what());
        } catch (const SingularMass& e) {
            py::set_error(singular, e.what());
        } catch (const NonIntegrable& e) {
            py::set_error(nonint, e.what());
        } catch (const Overflow& e) {
            py::set_error(overflow, e.what());
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });

    py::class_<IntervalMap>(m, "IntervalMap")
        .def("__call__", &IntervalMap::operator(), py::arg("x"))
        .def("derivative", &IntervalMap::derivative, py::arg("x"))
        .def("locate", &IntervalMap::locate, py::arg("x"))
        .def("inverse", &IntervalMap::inverse, py::arg("j"), py::arg("xi"))
        .def("inverse_derivative", &IntervalMap::inverse_derivative, py::arg("j"), py::arg("xi"))
        .def("endpoint", &IntervalMap::endpoint, py::arg("j"))
        .def_property_readonly("p", &IntervalMap::p)
        .def_property_readonly("kappa", &IntervalMap::kappa)
        .def_property_readonly("branch_count", &IntervalMap::branch_count)
        .def_property_readonly("family", [](const IntervalMap& map) { return to_string(map.family()); });

    m.def("generalized_pm", &build_generalized_pm, py::arg("kappa"), py::arg("p"));
    m.def("generalized_lsv", &build_generalized_lsv, py::arg("kappa"), py::arg("p"), py::arg("endpoints"));
    m.def("standard_lsv", &build_standard_lsv, py::arg("p"));
    m.def("countable_lsv", &build_countable_lsv, py::arg("kappa"), py::arg("p"), py::arg("ratio"));
    m.def("doubling_map", &build_doubling_map);
    m.def("first_endpoint", [](double kappa, double p) { return first_endpoint(kappa, p); }, py::arg("kappa"),
          py::arg("p"));
    m.def("map_from_json", [](const std::string& text) {
        try {
            return map_from_json(Json::parse(text));
        } catch (const Json::exception& e) {
            throw ConfigError(e.what());
        }
    }, py::arg("text"));
    m.def("orbit", &orbit, py::arg("map"), py::arg("x0"), py::arg("n"));

    m.def("check_A2", [](const IntervalMap& map, std::size_t grid) { return report_dict(check_A2(map, 40, grid)); },
          py::arg("map"), py::arg("grid_size") = 10000);
    m.def("check_A3", [](const IntervalMap& map, std::size_t grid) { return report_dict(check_A3(map, grid)); },
          py::arg("map"), py::arg("grid_size") = 10000);
    m.def("check_A4", [](const IntervalMap& map, std::size_t grid) { return report_dict(check_A4(map, grid)); },
          py::arg("map"), py::arg("grid_size") = 10000);
    m.def("check_A5prime", [](const IntervalMap& map, std::size_t grid) { return report_dict(check_A5prime_all(map, grid)); },
          py::arg("map"), py::arg("grid_size") = 10000);
    m.def("check_A5", [](const IntervalMap& map, std::size_t grid) { return report_dict(check_A5(map, grid)); },
          py::arg("map"), py::arg("grid_size") = 10000);
    m.def("check_B3", [](const IntervalMap& map, std::size_t grid) { return report_dict(check_B3(conjugate(map), grid)); },
          py::arg("map"), py::arg("grid_size") = 10000);

    m.def("psi", &psi, py::arg("x"), py::arg("p"));
    m.def("psi_inv", &psi_inv, py::arg("y"), py::arg("p"));

    py::class_<HalfLineMap>(m, "HalfLineMap")
        .def("__call__", &HalfLineMap::operator(), py::arg("y"))
        .def("locate", &HalfLineMap::locate, py::arg("y"))
        .def("inverse", &HalfLineMap::inverse, py::arg("k"), py::arg("y"))
        .def("inverse_derivative", &HalfLineMap::inverse_derivative, py::arg("k"), py::arg("y"))
        .def("endpoint", &HalfLineMap::endpoint_o, py::arg("j"))
        .def_property_readonly("p", &HalfLineMap::p);
    m.def("conjugate", &conjugate, py::arg("map"));

    m.def("invariant_density", [](const IntervalMap& map, std::size_t grid, std::size_t iters) {
        DensityOptions opt;
        opt.grid_size = grid;
        opt.max_iterations = iters;
        DensityEstimate d = estimate_invariant_density(map, opt);
        py::dict out;
        out["x"] = d.h.grid();
        out["h"] = d.h.values();
        out["H"] = d.H.values();
        out["iterations"] = d.iterations;
        out["converged"] = d.converged;
        out["H0"] = d.H0;
        return out;
    }, py::arg("map"), py::arg("grid_size") = 20000, py::arg("max_iterations") = 500);

    m.def("correlations", [](const IntervalMap& map, const std::string& measure, const std::string& F,
                             const std::string& g, std::size_t n) {
        return correlation_transfer(map, parse_measure(measure, map), parse_observable(F), parse_observable(g), n);
    }, py::arg("map"), py::arg("measure"), py::arg("F"), py::arg("g"), py::arg("n"));
    m.def("correlation_direct", [](const IntervalMap& map, const std::string& measure, const std::string& F,
                                   const std::string& g, std::size_t n) {
        return correlation_direct(map, parse_measure(measure, map), parse_observable(F), parse_observable(g), n);
    }, py::arg("map"), py::arg("measure"), py::arg("F"), py::arg("g"), py::arg("n"));
    m.def("correlations_montecarlo", [](const IntervalMap& map, const std::string& measure, const std::string& F,
                                        const std::string& g, std::size_t n, std::size_t samples, std::uint64_t seed) {
        auto r = correlation_montecarlo(map, parse_measure(measure, map), parse_observable(F), parse_observable(g), n,
                                        samples, seed);
        return py::make_tuple(r.mean, r.se);
    }, py::arg("map"), py::arg("measure"), py::arg("F"), py::arg("g"), py::arg("n"), py::arg("samples") = 100000,
          py::arg("seed") = 1);

    m.def("counterexample_F", &counterexample_F, py::arg("y"));
    m.def("counterexample_averages", [](int n) { return averages_dict(counterexample_averages(n)); }, py::arg("n"));
    m.def("counterexample_leb_exact", [](int n) {
        auto e = counterexample_leb_exact(n);
        return py::make_tuple(e.at_alpha, e.at_beta);
    }, py::arg("n"));

    m.def("run", [](const std::string& config_json) {
        RunConfig c;
        try {
            c = config_from_json(Json::parse(config_json));
        } catch (const Json::exception& e) {
            throw ConfigError(e.what());
        }
        std::ostringstream log, err;
        int status;
        {
            py::gil_scoped_release release;
            status = run(c, log, err);
        }
        return py::make_tuple(status, log.str(), err.str());
    }, py::arg("config_json"));
}
