#include "glomix/assumption_checks.hpp"
#include "glomix/errors.hpp"
#include "glomix/interval_map.hpp"

#include <doctest.h>

#include <cmath>

using namespace glomix;

namespace {

// LSV p=1 first branch with a custom second branch phi on (1/2, 1]
IntervalMap lsv_with_second_branch(RealFn phi, RealFn dphi, RealFn ddphi) {
    BranchSpec b0;
    b0.lower = 0.0;
    b0.upper = 0.5;
    b0.forward = [](double x) { return x + 2 * x * x; };
    b0.derivative = [](double x) { return 1 + 4 * x; };
    b0.second_derivative = [](double) { return 4.0; };
    b0.displacement = [](double x) { return 2 * x * x; };
    BranchSpec b1;
    b1.lower = 0.5;
    b1.upper = 1.0;
    b1.forward = std::move(phi);
    b1.derivative = std::move(dphi);
    b1.second_derivative = std::move(ddphi);
    return IntervalMap({b0, b1}, MapParameters{1.0, 2.0, 0.25, Family::Custom});
}

} // namespace

TEST_CASE("GeneralizedPM and standard LSV satisfy A2 to A5") {
    std::vector<IntervalMap> maps;
    for (int kappa : {1, 3})
        for (double p : {1.0, 2.5}) maps.push_back(build_generalized_pm(kappa, p));
    maps.push_back(build_standard_lsv(2.0));
    for (const auto& T : maps) {
        CHECK(check_A2(T, 40, 2000).passed);
        CHECK(check_A3(T, 2000).passed);
        CHECK(check_A4(T, 2000).passed);
        CHECK(check_A5prime_all(T, 2000).passed);
        CHECK(check_A5(T, 2000).passed);
    }
}

TEST_CASE("quantities match hand-computed values for LSV p=1") {
    IntervalMap T = build_standard_lsv(1.0);
    for (double x : {0.01, 0.2, 0.45}) {
        CHECK(a2_remainder_ratio(T, x) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(a4_distortion(T, x) == doctest::Approx(4.0 / ((1 + 4 * x) * (1 + 4 * x))).epsilon(1e-12));
        double phi = x + 2 * x * x;
        CHECK(a5prime_quantity(T, 0, x) == doctest::Approx((phi / x) * (phi / x) / (1 + 4 * x)).epsilon(1e-12));
    }
    // A5 tail sum for j = 1: (xi/psi_1)^2 psi_1' with psi_1 = (xi+1)/2
    for (double xi : {0.1, 0.6}) {
        double psi1 = (xi + 1) / 2;
        CHECK(a5_tail_sum(T, 1, xi) == doctest::Approx((xi / psi1) * (xi / psi1) * 0.5).epsilon(1e-12));
    }
    CheckReport a3 = check_A3(T, 2000);
    REQUIRE(a3.estimate);
    CHECK(*a3.estimate == doctest::Approx(2.0).epsilon(1e-9)); // T'(b_o) = 1 + 4/4
}

TEST_CASE("A2 fails when the remainder is of order x^{p+1}") {
    PerturbationSpec spec;
    spec.branches = {Perturbation{[](double x) { return 0.1 * x * x; }, [](double x) { return 0.2 * x; },
                                  [](double) { return 0.2; }}};
    double a1 = first_endpoint(2.0, 1.0, spec.branches[0]);
    IntervalMap T = build_perturbed_lsv(2.0, 1.0, {a1, 1.0}, spec);
    CheckReport r = check_A2(T, 40, 2000);
    CHECK_FALSE(r.passed);
    REQUIRE(r.witness);
    CHECK(a2_remainder_ratio(T, *r.witness) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("A3 fails on a branch with a critical point") {
    IntervalMap T = lsv_with_second_branch([](double x) { return 4 * (x - 0.5) * (x - 0.5); },
                                           [](double x) { return 8 * (x - 0.5); }, [](double) { return 8.0; });
    CheckReport r = check_A3(T, 2000);
    CHECK_FALSE(r.passed);
    REQUIRE(r.witness);
    CHECK(T.derivative(*r.witness) <= 1.0 + 1e-9);
    CHECK(r.branch == std::optional<std::size_t>(1));
}

TEST_CASE("A5' fails on a steep convex branch and the witness reproduces the decrease") {
    // phi(t) = 0.8 t + 0.2 t^50 with t = 2x - 1
    IntervalMap T = lsv_with_second_branch(
        [](double x) { double t = 2 * x - 1; return 0.8 * t + 0.2 * std::pow(t, 50); },
        [](double x) { double t = 2 * x - 1; return 2 * (0.8 + 10 * std::pow(t, 49)); },
        [](double x) { double t = 2 * x - 1; return 4 * 490 * std::pow(t, 48); });
    CheckReport r = check_A5prime_all(T, 4000);
    CHECK_FALSE(r.passed);
    REQUIRE(r.witness);
    REQUIRE(r.witness_upper);
    CHECK(r.branch == std::optional<std::size_t>(1));
    CHECK(*r.witness < *r.witness_upper);
    CHECK(a5prime_quantity(T, 1, *r.witness) > a5prime_quantity(T, 1, *r.witness_upper));
}

TEST_CASE("PM closed form sign agrees with differencing the A5' quantity") {
    for (int kappa : {1, 2}) {
        for (double p : {1.0, 3.0}) {
            IntervalMap T = build_generalized_pm(kappa, p);
            for (int j = 1; j <= kappa; ++j) {
                double lo = T.endpoint(j), hi = T.endpoint(j + 1);
                for (double s : {0.1, 0.5, 0.9}) {
                    double x = lo + s * (hi - lo);
                    double z = kappa * std::pow(x, p);
                    double closed = check_A5prime_pm_closed_form(kappa, p, j, z);
                    double h = 1e-6 * (hi - lo);
                    double diff = std::log(a5prime_quantity(T, j, x + h)) - std::log(a5prime_quantity(T, j, x - h));
                    CHECK(closed > 0.0);
                    CHECK(diff > 0.0);
                }
            }
        }
    }
    CHECK_THROWS_AS(check_A5prime_pm_closed_form(1.0, 1.0, 1, 0.1), DomainError);
}

TEST_CASE("perturbation bounds for a small perturbed PM") {
    PerturbationSpec spec;
    spec.epsilon = 1.0;
    const double a1 = (std::sqrt(5.0) - 1.0) / 2.0;
    spec.branches.resize(2);
    spec.branches[1] = Perturbation{[=](double x) { return 0.01 * (x - a1) * (1 - x); },
                                    [=](double x) { return 0.01 * (a1 + 1 - 2 * x); }, [](double) { return -0.02; }};
    IntervalMap T = build_perturbed_pm(1, 1.0, spec);
    CheckReport r = check_perturbation_bounds(T, spec);
    CHECK(r.assumption_id == AssumptionId::Perturbation);
    CHECK(r.passed);
}
