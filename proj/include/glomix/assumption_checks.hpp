#pragma once

#include "glomix/interval_map.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace glomix {

enum class AssumptionId { A1, A2, A3, A4, A5, A5prime, B3, Perturbation };

std::string to_string(AssumptionId id);

/// Outcome of one assumption check. A failed report always carries a witness;
/// for monotonicity checks `witness_upper` is the next grid point, so the
/// violation is reproduced by comparing the tested quantity at the two points.
struct CheckReport {
    AssumptionId assumption_id = AssumptionId::A2;
    bool passed = false;
    std::optional<double> witness;
    std::optional<double> witness_upper;
    std::optional<double> estimate;
    std::size_t grid_size = 0;
    std::optional<std::size_t> branch;
    std::string note;
};

/// Relative tolerance used on consecutive differences by the monotonicity checks.
inline constexpr double kMonotoneTolerance = 1e-10;

// Quantities tested by the checks, exposed so that reports can be re-evaluated.

/// |phi_0(x) - x - kappa x^{p+1}| / x^{p+1}.
double a2_remainder_ratio(const IntervalMap& map, double x);
/// |T''(x)| / T'(x)^2.
double a4_distortion(const IntervalMap& map, double x);
/// (phi_j(x)/x)^{p+1} / phi_j'(x).
double a5prime_quantity(const IntervalMap& map, std::size_t j, double x);
/// (xi / psi_k(xi))^{p+1} psi_k'(xi).
double a5_term(const IntervalMap& map, std::size_t k, double xi);
/// sum_{k >= j} a5_term(k, xi), truncated once a term drops below 1e-16.
double a5_tail_sum(const IntervalMap& map, std::size_t j, double xi);

/// Dyadic remainder decay r_k, k = 4..n_dyadic, and strict convexity of phi_0 on (0, b_o).
CheckReport check_A2(const IntervalMap& map, std::size_t n_dyadic = 40, std::size_t grid_size = 10000);
/// min T' on [b_o, 1) away from the endpoints a_j; passes when > 1 + 1e-9.
CheckReport check_A3(const IntervalMap& map, std::size_t grid_size = 10000, std::size_t j_max = 64);
/// Running sup of |T''|/T'^2 on a geometric grid toward 0; passes when the last decade moves it < 1%.
CheckReport check_A4(const IntervalMap& map, std::size_t grid_size = 10000, std::size_t j_max = 64);
/// Monotonicity of (phi_j(x)/x)^{p+1}/phi_j'(x) on (a_j, a_{j+1}).
CheckReport check_A5prime(const IntervalMap& map, std::size_t j, std::size_t grid_size = 10000);
/// check_A5prime over j < min(branch count, j_max); fails on the first failing branch.
CheckReport check_A5prime_all(const IntervalMap& map, std::size_t grid_size = 10000, std::size_t j_max = 64);
/// Logarithmic z-derivative of the PM (A5)' quantity, z = kappa x^p. DomainError
/// when 1 + z - j kappa^{1/p} z^{-1/p} <= 0 (x <= a_j).
double check_A5prime_pm_closed_form(double kappa, double p, int j, double z);
/// Monotonicity of the tail sums S_j(xi) = sum_{k>=j} (xi/psi_k)^{p+1} psi_k' on (0,1), j <= j_max.
CheckReport check_A5(const IntervalMap& map, std::size_t grid_size = 10000, std::size_t j_max = 64);
/// Family 3 bounds on eta_j (PerturbedPM) or family 4 conditions (PerturbedLSV).
/// estimate = max ratio |eta^{(i)}| / bound over the sampled points.
CheckReport check_perturbation_bounds(const IntervalMap& map, const PerturbationSpec& spec,
                                      std::size_t grid_size = 2000);

} // namespace glomix
