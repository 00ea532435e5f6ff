#include "glomix/conjugation.hpp"
#include "glomix/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace glomix;

TEST_CASE("Psi and its inverse") {
    for (double p : {1.0, 2.0, 3.5}) {
        for (double x : {1e-8, 0.01, 0.5, 0.999}) {
            CHECK(psi(x, p) == doctest::Approx((std::pow(x, -p) - 1) / p).epsilon(1e-13));
            CHECK(psi_inv(psi(x, p), p) == doctest::Approx(x).epsilon(1e-13));
        }
        CHECK(psi(1.0, p) == 0.0);
        // no cancellation next to x = 1
        CHECK(psi(1.0 - 1e-12, p) == doctest::Approx(1e-12).epsilon(1e-6));
    }
    CHECK(std::isinf(psi(0.0, 1.0)));
    CHECK_THROWS_AS(psi(1.5, 1.0), DomainError);
    CHECK_THROWS_AS(psi_inv(-1.0, 1.0), DomainError);
}

TEST_CASE("LSV p=1 conjugate matches its closed form") {
    HalfLineMap To = conjugate(build_standard_lsv(1.0));
    for (double y : {0.0, 0.1, 0.5, 0.99}) {
        CHECK(To.locate(y) == 1);
        CHECK(To(y) == doctest::Approx(2 * y / (1 - y)).epsilon(1e-12));
    }
    for (double y : {1.0, 2.5, 100.0, 1e6}) {
        CHECK(To.locate(y) == 0);
        CHECK(To(y) == doctest::Approx((y + 2) * (y - 1) / (y + 3)).epsilon(1e-12));
    }
    // escape from infinity at speed kappa
    CHECK(To(1e9) - 1e9 == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(To.endpoint_o(1) == doctest::Approx(1.0));
    CHECK(std::isinf(To.endpoint_o(0)));
}

TEST_CASE("conjugate inverse branches and derivatives") {
    HalfLineMap To = conjugate(build_generalized_pm(2, 1.5));
    for (std::size_t k = 0; k < 3; ++k) {
        for (double y : {0.05, 1.0, 40.0}) {
            double z = To.inverse(k, y);
            CHECK(To.locate(z) == k);
            CHECK(To(z) == doctest::Approx(y).epsilon(1e-10));
            double h = 1e-5 * std::max(1.0, y);
            double fd = (To.inverse(k, y + h) - To.inverse(k, y - h)) / (2 * h);
            CHECK(To.inverse_derivative(k, y) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("B3 tail sums") {
    HalfLineMap To = conjugate(build_standard_lsv(2.0));
    for (double y : {0.3, 7.0}) {
        double explicit_sum = To.inverse_derivative(0, y) + To.inverse_derivative(1, y);
        CHECK(b3_tail_sum(To, 0, y) == doctest::Approx(explicit_sum).epsilon(1e-13));
        CHECK(b3_tail_sum(To, 1, y) == doctest::Approx(To.inverse_derivative(1, y)).epsilon(1e-13));
    }
    CHECK(check_B3(To, 2000).passed);
    CHECK(check_B3(conjugate(build_generalized_pm(3, 1.0)), 2000).passed);
}

TEST_CASE("push-forward of lambda_q") {
    MeasureSpec lam = MeasureSpec::lambda_q(0.5);
    MeasureSpec push = pushforward_density(lam, 1.0);
    for (auto [a, b] : {std::pair{0.01, 0.1}, std::pair{0.4, 1.0}}) {
        double expected = interval_mass(lam, psi(b, 1.0), psi(a, 1.0)).value();
        CHECK(interval_mass(push, a, b).value() == doctest::Approx(expected).epsilon(1e-12));
    }
}
