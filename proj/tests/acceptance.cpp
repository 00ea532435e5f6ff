// Acceptance run: one PASS/FAIL line per criterion with the measured quantities.

#include "glomix/assumption_checks.hpp"
#include "glomix/conjugation.hpp"
#include "glomix/measures.hpp"
#include "glomix/mixing.hpp"
#include "glomix/transfer.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace glomix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double l1(const std::function<double(double)>& f) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    return GK::integrate([&](double x) { return std::abs(f(x)); }, 0.0, 1.0, 20, 1e-13);
}

double integral(const std::function<double(double)>& f) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    return GK::integrate(f, 0.0, 1.0, 20, 1e-13);
}

// 1. A2-A5 on GeneralizedPM and standard LSV, plus the PM closed form against differencing.
Outcome assumption_suite() {
    std::vector<std::pair<std::string, IntervalMap>> maps;
    for (int kappa = 1; kappa <= 3; ++kappa)
        for (int p = 1; p <= 3; ++p)
            maps.emplace_back("PM(" + std::to_string(kappa) + "," + std::to_string(p) + ")", build_generalized_pm(kappa, p));
    for (int p = 1; p <= 3; ++p) maps.emplace_back("LSV(" + std::to_string(p) + ")", build_standard_lsv(p));
    std::string failures;
    for (const auto& [name, T] : maps) {
        for (const CheckReport& r : {check_A2(T, 40, 10000), check_A3(T, 10000), check_A4(T, 10000),
                                     check_A5prime_all(T, 10000), check_A5(T, 10000)})
            if (!r.passed) failures += " " + name + ":" + to_string(r.assumption_id);
    }
    std::size_t samples = 0, sign_mismatch = 0, non_positive = 0;
    for (int kappa = 1; kappa <= 3; ++kappa) {
        for (int p = 1; p <= 3; ++p) {
            IntervalMap T = build_generalized_pm(kappa, p);
            for (int j = 0; j <= kappa; ++j) {
                double lo = T.endpoint(j), hi = T.endpoint(j + 1);
                for (int i = 0; i < 1000; ++i) {
                    double s = (i + 0.5) / 1000.0;
                    double x = j == 0 ? hi * std::pow(1e-6, 1.0 - s) : lo + s * (hi - lo);
                    double z = kappa * std::pow(x, p);
                    double closed = check_A5prime_pm_closed_form(kappa, p, j, z);
                    // differencing of log((phi_j(x)/x)^{p+1} / phi_j'(x)) in 100-digit arithmetic:
                    // near 0 the change is far below double rounding
                    using Big = boost::multiprecision::cpp_bin_float_100;
                    auto logQ = [&](const Big& t) {
                        Big phi = t + kappa * pow(t, p + 1) - j;
                        Big d = 1 + kappa * (p + 1) * pow(t, p);
                        return (p + 1) * log(phi / t) - log(d);
                    };
                    Big h = Big(1e-6) * std::min(x - lo, hi - x);
                    double diff = static_cast<double>(logQ(Big(x) + h) - logQ(Big(x) - h));
                    ++samples;
                    if (!(closed > 0.0)) ++non_positive;
                    if ((closed > 0.0) != (diff > 0.0)) ++sign_mismatch;
                }
            }
        }
    }
    bool pass = failures.empty() && non_positive == 0 && sign_mismatch == 0;
    std::string detail = std::to_string(maps.size()) + " maps x 5 checks" +
                         (failures.empty() ? " all passed" : ", failed:" + failures) + "; closed form at " +
                         std::to_string(samples) + " samples: " + std::to_string(non_positive) + " non-positive, " +
                         std::to_string(sign_mismatch) + " sign mismatches";
    return {pass, detail};
}

// 2. Closed-form conjugate of LSV p=1 and the push-forward of Lebesgue.
Outcome conjugation() {
    HalfLineMap To = conjugate(build_standard_lsv(1.0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double y = i % 2 ? 0.999 * u(rng) : 1.0 + std::pow(10.0, 4 * u(rng)) - 1.0;
        double closed = y < 1.0 ? 2 * y / (1 - y) : (y + 2) * (y - 1) / (y + 3);
        double got = To(y);
        worst = std::max(worst, std::abs(got - closed) / std::max(1.0, std::abs(closed)));
    }
    double worst_mass = 0.0;
    for (double p : {1.0, 2.0}) {
        MeasureSpec nu = MeasureSpec::nu_p(p);
        MeasureSpec push = MeasureSpec::pushforward(MeasureSpec::lebesgue(Space::HalfLine), p);
        for (int i = 0; i < 500; ++i) {
            double a = std::pow(10.0, -4 * u(rng)), b = std::pow(10.0, -4 * u(rng));
            if (a > b) std::swap(a, b);
            if (a == b) continue;
            double leb_image = psi(a, p) - psi(b, p); // Lebesgue length of Psi([a,b])
            double m_nu = interval_mass(nu, a, b).value();
            double m_push = interval_mass(push, a, b).value();
            worst_mass = std::max({worst_mass, std::abs(m_nu - leb_image) / leb_image,
                                   std::abs(m_push - leb_image) / leb_image});
        }
    }
    bool pass = worst <= 1e-10 && worst_mass <= 1e-10;
    return {pass, "max rel. deviation of T_o " + fmt("%.2e", worst) + " at 1000 points; max rel. mass deviation " +
                      fmt("%.2e", worst_mass) + " on 1000 intervals"};
}

// 3. Decreasing step functions stay decreasing under the half-line operator.
Outcome cone() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0, cases = 0;
    double worst = 0.0;
    for (double p : {1.0, 2.0}) {
        HalfLineMap To = conjugate(build_standard_lsv(p));
        auto grid = halfline_grid(1e-6, 1e5, 3000);
        for (int trial = 0; trial < 50; ++trial) {
            int steps = 1 + static_cast<int>(u(rng) * 8);
            std::vector<double> at(steps), height(steps);
            for (int k = 0; k < steps; ++k) {
                at[k] = std::pow(10.0, -3 + 7 * u(rng));
                height[k] = u(rng);
            }
            std::vector<double> vals;
            for (double y : grid) {
                double v = 0;
                for (int k = 0; k < steps; ++k) v += y <= at[k] ? height[k] : 0.0;
                vals.push_back(v);
            }
            GridFunction g(grid, vals, Space::HalfLine, Interpolation::Step);
            std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 10);
            ConeReport r = check_cone_preservation(To, g, std::min<std::size_t>(n, 10), 1e-8);
            ++cases;
            if (!r.passed) ++violations;
            worst = std::max(worst, r.worst_violation);
        }
    }
    return {violations == 0, std::to_string(cases) + " step functions, " + std::to_string(violations) +
                                 " violations, worst relative increase " + fmt("%.2e", worst)};
}

// 4. L1 mass conservation and contraction on the interval.
Outcome mass_contraction() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    IntervalMap maps[] = {build_standard_lsv(1.0), build_generalized_pm(1, 1.0)};
    double worst_mass = 0.0, worst_excess = -1e300;
    for (int c = 0; c < 100; ++c) {
        const IntervalMap& T = maps[c % 2];
        BranchSystem sys = BranchSystem::of(T);
        double c0 = u(rng), c1 = 2 * u(rng), c2 = u(rng), k = 1 + 6 * u(rng);
        RealFn g = [=](double x) { return c0 + c1 * x * x + c2 * (1 + std::cos(k * x)); };
        std::size_t n = 1 + static_cast<std::size_t>(u(rng) * 8);
        RealFn Pn = pf_power(sys, g, std::min<std::size_t>(n, 8));
        double before = integral(g), after = integral(Pn);
        worst_mass = std::max(worst_mass, std::abs(after - before) / before);

        double s = 2 * u(rng) - 1;
        RealFn h = [=](double x) { return std::sin(k * x + s) + s * x; };
        RealFn Ph = pf_apply(sys, h);
        worst_excess = std::max(worst_excess, l1(Ph) - l1(h));
    }
    bool pass = worst_mass <= 1e-6 && worst_excess <= 1e-8;
    return {pass, "max rel. |L1(P^n g) - L1(g)| " + fmt("%.2e", worst_mass) + " (100 cases); max L1(Pg) - L1(g) " +
                      fmt("%.2e", worst_excess) + " for signed g"};
}

// 5. Invariant density shape near the indifferent point.
Outcome density() {
    std::string detail;
    bool pass = true;
    for (auto& [name, T] : {std::pair{std::string("PM(1,1)"), build_generalized_pm(1, 1.0)},
                            std::pair{std::string("LSV(1)"), build_standard_lsv(1.0)}}) {
        DensityOptions opt;
        opt.grid_size = 20000;
        opt.max_iterations = 500;
        DensityEstimate d = estimate_invariant_density(T, opt);
        double lo = 1e300, hi = -1e300, sum = 0.0;
        int count = 0;
        for (double x : geometric_points(1e-3, 1e-1, 400)) {
            double v = x * d.h(x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
            ++count;
        }
        double osc = (hi - lo) / (sum / count);
        double minH = 1e300;
        for (std::size_t i = 0; i < d.H.size(); ++i)
            if (d.H.grid()[i] >= 1e-4) minH = std::min(minH, d.H.values()[i]);
        bool ok = d.iterations <= 500 && osc <= 0.05 && minH > 0.0;
        pass = pass && ok;
        detail += name + ": " + std::to_string(d.iterations) + " it, x h(x) in [" + fmt("%.4f", lo) + ", " +
                  fmt("%.4f", hi) + "], oscillation " + fmt("%.1f%%", 100 * osc) + ", min H " + fmt("%.4f", minH) + "; ";
    }
    return {pass, detail};
}

// 6. Transfer duality against direct quadrature of the composition.
Outcome duality() {
    double worst = 0.0;
    for (double p : {1.0, 2.0}) {
        IntervalMap T = build_standard_lsv(p);
        MeasureSpec nu = MeasureSpec::nu_p(p);
        Observable F = identity_observable();
        Observable g = box_observable(0.5, 1.0);
        auto c = correlation_transfer(T, nu, F, g, 3);
        for (std::size_t n = 0; n <= 3; ++n) {
            double direct = correlation_direct(T, nu, F, g, n, 1e-12);
            worst = std::max(worst, std::abs(c[n] - direct) / std::abs(direct));
        }
    }
    return {worst <= 1e-5, "max rel. deviation " + fmt("%.2e", worst) + " over n <= 3, LSV p = 1, 2"};
}

// 7. Global-local correlations for LSV p=2.
Outcome mixing_decay() {
    IntervalMap T = build_standard_lsv(2.0);
    MixingRun run = run_mixing(T, "lsv_p2", MeasureSpec::nu_p(2.0), identity_observable(), box_observable(0.5, 1.0), 30,
                               Method::TransferDuality);
    GlmDiagnostic d = glm_diagnostic(run);
    double target = run.target.value_or(0.0);
    double r30 = std::abs(run.correlations[30] - target), r1 = std::abs(run.correlations[1] - target);
    bool pass = r30 < r1 / 3.0 && d.trend == Trend::Decaying;
    return {pass, "target " + fmt("%.1e", target) + ", |c_1| = " + fmt("%.6f", r1) + ", |c_30| = " + fmt("%.6f", r30) +
                      " (needs < " + fmt("%.6f", r1 / 3) + "), trend " + to_string(d.trend)};
}

// 8. Counterexample averages.
Outcome counterexample() {
    double min_beta = 1.0;
    for (int n = 2; n <= 100; ++n) min_beta = std::min(min_beta, counterexample_averages(n).leb_at_beta);
    ExactLebesgueAverages e = counterexample_leb_exact(3);
    double l10 = counterexample_averages(10).lambda1_at_alpha;
    double l10_err = std::abs(l10 - 9 * std::log(2.0) / (10 * std::log(10.0)));
    CounterexampleAverages a100 = counterexample_averages(100);
    bool pass = min_beta >= 0.5 && e.at_alpha == "5/26" && e.at_beta == "32/53" && l10_err <= 1e-12 &&
                a100.lambda1_at_alpha < 0.2 && a100.lambda1_at_beta < 0.2;
    return {pass, "min leb_at_beta " + fmt("%.6f", min_beta) + ", exact n=3: " + e.at_alpha + ", " + e.at_beta +
                      ", lambda1_at_alpha(10) error " + fmt("%.1e", l10_err) + ", lambda1 at n=100: " +
                      fmt("%.4f", a100.lambda1_at_alpha) + ", " + fmt("%.4f", a100.lambda1_at_beta)};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 9. Byte-identical CSVs across runs, replays and thread counts.
Outcome reproducibility() {
    fs::path root = GLOMIX_TEST_TMP;
    fs::remove_all(root);
    fs::create_directories(root);
    std::string cli = GLOMIX_CLI_PATH;
    std::string maps = std::string(GLOMIX_DATA_DIR) + "/maps/";
    struct Job {
        std::string name, args, csv;
    };
    std::vector<Job> jobs{
        {"mix", "mix --map " + maps + "lsv_p2.json --measure nu_p --F identity --g box:0.5,1 --n 30", "mix.csv"},
        {"mc", "mix --map " + maps + "lsv_p1.json --method montecarlo --samples 20000 --seed 5 --n 10", "mix.csv"},
        {"density", "density --map " + maps + "pm_k1_p1.json --grid 5000", "density.csv"},
        {"demo", "demo-counterexample --n-max 50", "counterexample.csv"}};
    std::size_t compared = 0, differing = 0;
    std::string bad;
    for (const auto& job : jobs) {
        std::vector<std::string> outputs;
        for (int threads : {1, 4}) {
            fs::path dir = root / (job.name + "_t" + std::to_string(threads));
            std::string cmd = "GLOMIX_THREADS=" + std::to_string(threads) + " " + cli + " " + job.args + " --out " +
                              dir.string() + " > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
            outputs.push_back(slurp(dir / job.csv));
        }
        for (int rep = 0; rep < 2; ++rep) {
            fs::path dir = root / (job.name + "_replay" + std::to_string(rep));
            std::string cmd = "GLOMIX_THREADS=" + std::to_string(rep ? 4 : 1) + " " + cli + " replay --manifest " +
                              (root / (job.name + "_t1") / "manifest.json").string() + " --out " + dir.string() +
                              " > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
            outputs.push_back(slurp(dir / job.csv));
        }
        for (std::size_t i = 1; i < outputs.size(); ++i) {
            ++compared;
            if (outputs[i] != outputs[0] || outputs[0].empty()) {
                ++differing;
                bad += " " + job.name;
            }
        }
    }
    return {differing == 0, std::to_string(compared) + " CSV comparisons (threads 1/4, replays), " +
                                std::to_string(differing) + " differing" + bad};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*fn)();
        double time_limit; // seconds, 0 for none
    };
    const Criterion criteria[] = {
        {"assumption suite", assumption_suite, 30.0},  {"conjugation", conjugation, 0.0},
        {"cone preservation", cone, 0.0},              {"mass and contraction", mass_contraction, 0.0},
        {"invariant density", density, 300.0},         {"duality oracle", duality, 0.0},
        {"mixing decay", mixing_decay, 0.0},           {"counterexample averages", counterexample, 1.0},
        {"reproducibility", reproducibility, 0.0}};
    int failed = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit > 0.0 && secs > c.time_limit) {
            o.pass = false;
            o.detail += "; exceeded the " + fmt("%.0f", c.time_limit) + " s limit";
        }
        std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of 9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}
