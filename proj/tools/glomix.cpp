#include "glomix/cli_runner.hpp"
#include "glomix/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
    glomix::RunConfig config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string manifest;
};

void add_common(CLI::App* sub, Flags& f, bool map_required) {
    auto* m = sub->add_option("--map", f.config.map_path, "map JSON file");
    if (map_required) m->required();
    sub->add_option("--out", f.config.output_dir, "output directory")->capture_default_str();
    sub->add_option("--set", f.overrides, "override a map field, key=value (dotted keys for nested fields)");
    sub->add_option("--grid", f.config.grid, "grid size")->capture_default_str();
    sub->add_option("--iters", f.config.iters, "iteration cap")->capture_default_str();
    sub->add_option("--threads", f.threads, "worker threads (default: GLOMIX_THREADS or hardware)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"glomix: global-local mixing experiments for intermittent interval maps"};
    app.require_subcommand(1);
    Flags f;

    auto* check = app.add_subcommand("check", "run the assumption checks on a map");
    add_common(check, f, true);

    auto* conj = app.add_subcommand("conjugate", "evaluate the half-line conjugate map");
    add_common(conj, f, true);
    conj->add_option("--at", f.config.at, "points y >= 0");

    auto* dens = app.add_subcommand("density", "estimate the invariant density");
    add_common(dens, f, true);

    auto* mix = app.add_subcommand("mix", "global-local correlations c_n");
    add_common(mix, f, true);
    mix->add_option("--measure", f.config.measure, "leb | leb_o | nu_p | lambda_q:q | mu")->capture_default_str();
    mix->add_option("--F", f.config.F, "global observable")->capture_default_str();
    mix->add_option("--g", f.config.g, "local observable")->capture_default_str();
    mix->add_option("--n", f.config.n, "largest n")->capture_default_str();
    mix->add_option("--method", f.config.method, "transfer | montecarlo")->capture_default_str();
    mix->add_option("--samples", f.config.samples, "Monte Carlo samples")->capture_default_str();
    mix->add_option("--seed", f.seed, "Monte Carlo seed");

    auto* demo = app.add_subcommand("demo-counterexample", "finite-volume averages of the counterexample");
    add_common(demo, f, false);
    demo->add_option("--n-max", f.config.n_max, "largest n, at most 170")->capture_default_str();

    auto* orb = app.add_subcommand("orbit", "orbit of a point");
    add_common(orb, f, true);
    orb->add_option("--x0", f.config.x0, "starting point in (0,1]")->capture_default_str();
    orb->add_option("--n", f.config.n, "number of steps")->capture_default_str();

    auto* rep = app.add_subcommand("replay", "re-run a manifest.json");
    rep->add_option("--manifest", f.manifest, "manifest file")->required();
    rep->add_option("--out", f.config.output_dir, "output directory (default: the manifest's)");
    rep->add_option("--threads", f.threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (f.threads > 0) glomix::set_worker_count(f.threads);

    if (rep->parsed()) {
        std::string out = rep->count("--out") ? f.config.output_dir : "";
        return glomix::replay(f.manifest, out, std::cout, std::cerr);
    }

    for (const auto& kv : f.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "glomix: error: --set expects key=value, got '" << kv << "'\n";
            return 1;
        }
        f.config.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (mix->count("--seed")) f.config.seed = f.seed;
    // the density estimate defaults to the finer grid
    if (dens->parsed() && dens->count("--grid") == 0) f.config.grid = 20000;

    CLI::App* chosen = app.get_subcommands().front();
    f.config.command = glomix::command_from_string(chosen->get_name());
    return glomix::run(f.config, std::cout, std::cerr);
}
