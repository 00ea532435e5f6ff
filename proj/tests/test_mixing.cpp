#include "glomix/mixing.hpp"
#include "glomix/parallel.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace glomix;

TEST_CASE("first correlations for LSV p=1 have closed forms") {
    IntervalMap T = build_standard_lsv(1.0);
    MeasureSpec nu = MeasureSpec::nu_p(1.0);
    auto c = correlation_transfer(T, nu, identity_observable(), box_observable(0.5, 1.0), 3);
    REQUIRE(c.size() == 4);
    // c_0 = int_{1/2}^1 x^{-1} dx, c_1 = int_{1/2}^1 (2x - 1) x^{-2} dx
    CHECK(c[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(c[1] == doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-9));
    for (std::size_t n = 0; n <= 3; ++n)
        CHECK(correlation_direct(T, nu, identity_observable(), box_observable(0.5, 1.0), n) ==
              doctest::Approx(c[n]).epsilon(1e-8));
}

TEST_CASE("interval route with Lebesgue matches direct composition") {
    IntervalMap T = build_generalized_pm(2, 1.0);
    MeasureSpec leb = MeasureSpec::lebesgue(Space::UnitInterval);
    Observable F = parse_observable("box:0.1,0.6");
    Observable g = parse_observable("box:0.3,0.9");
    auto c = correlation_transfer(T, leb, F, g, 2);
    for (std::size_t n = 0; n <= 2; ++n) CHECK(correlation_direct(T, leb, F, g, n) == doctest::Approx(c[n]).epsilon(1e-7));
}

TEST_CASE("Monte Carlo agrees with transfer duality and is thread-count independent") {
    IntervalMap T = build_standard_lsv(1.0);
    MeasureSpec nu = MeasureSpec::nu_p(1.0);
    Observable F = identity_observable();
    Observable g = box_observable(0.5, 1.0);
    auto exact = correlation_transfer(T, nu, F, g, 5);
    set_worker_count(1);
    MonteCarloResult a = correlation_montecarlo(T, nu, F, g, 5, 20000, 42);
    set_worker_count(4);
    MonteCarloResult b = correlation_montecarlo(T, nu, F, g, 5, 20000, 42);
    set_worker_count(0);
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);
    for (std::size_t n = 0; n <= 5; ++n) CHECK(std::abs(a.mean[n] - exact[n]) < 5 * a.se[n] + 1e-12);
    MonteCarloResult other = correlation_montecarlo(T, nu, F, g, 5, 20000, 43);
    CHECK(other.mean != a.mean);
}

TEST_CASE("global average targets") {
    MeasureSpec nu = MeasureSpec::nu_p(2.0);
    CHECK(global_average_target(nu, constant_observable(0.25)) == std::optional<double>(0.25));
    auto id = global_average_target(nu, identity_observable());
    REQUIRE(id);
    CHECK(std::abs(*id) < 1e-3);
    CHECK_FALSE(global_average_target(MeasureSpec::lebesgue(Space::HalfLine), counterexample_observable()));
}

TEST_CASE("GLM diagnostic classifies trends") {
    MixingRun run;
    run.target = 0.0;
    run.n_max = 40;
    for (int n = 0; n <= 40; ++n) run.correlations.push_back(1.0 / (1.0 + n));
    GlmDiagnostic d = glm_diagnostic(run);
    CHECK(d.trend == Trend::Decaying);
    CHECK(d.tail_sup == doctest::Approx(1.0 / 22.0));

    for (auto& c : run.correlations) c = 0.3;
    CHECK(glm_diagnostic(run).trend == Trend::Flat);

    for (int n = 0; n <= 40; ++n) run.correlations[n] = 0.1 * (1.0 + n);
    CHECK(glm_diagnostic(run).trend == Trend::Increasing);

    run.target.reset();
    GlmDiagnostic u = glm_diagnostic(run);
    CHECK(u.target_undefined);
    CHECK(u.report.find("TargetUndefined") != std::string::npos);
}

TEST_CASE("local-local decay envelope is non-increasing") {
    IntervalMap T = build_standard_lsv(1.0);
    LocalDecay d = local_local_decay(T, MeasureSpec::nu_p(1.0), box_observable(0.5, 1.0), box_observable(0.5, 1.0), 12);
    REQUIRE(d.envelope.size() == 13);
    for (std::size_t n = 1; n < d.envelope.size(); ++n) CHECK(d.envelope[n] <= d.envelope[n - 1]);
    for (std::size_t n = 0; n < d.envelope.size(); ++n) CHECK(d.envelope[n] >= d.magnitude[n]);
}

TEST_CASE("counterexample table with quadrature cross-checks") {
    auto rows = counterexample_demo(12, true);
    REQUIRE(rows.size() == 11);
    for (const auto& r : rows) {
        REQUIRE(r.quadrature);
        CHECK(r.quadrature->leb_at_beta == doctest::Approx(r.closed.leb_at_beta).epsilon(1e-9));
        CHECK(r.quadrature->lambda1_at_alpha == doctest::Approx(r.closed.lambda1_at_alpha).epsilon(1e-9));
    }
    std::ostringstream out;
    write_csv(rows, out);
    CHECK(out.str().rfind("n,leb_at_alpha,leb_at_beta", 0) == 0);
}

TEST_CASE("run CSV layout") {
    MixingRun run;
    run.correlations = {0.5, 0.25};
    run.method = Method::MonteCarlo;
    run.se = {0.01, 0.02};
    std::ostringstream out;
    write_csv(run, out);
    CHECK(out.str() == "n,c_n,target,residual,method,se\n0,0.5,NA,NA,MonteCarlo,0.01\n1,0.25,NA,NA,MonteCarlo,0.02\n");
}
