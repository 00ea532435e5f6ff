#pragma once

#include "glomix/assumption_checks.hpp"
#include "glomix/interval_map.hpp"
#include "glomix/measures.hpp"

#include <cstddef>
#include <limits>

namespace glomix {

/// Psi(x) = (x^{-p} - 1)/p, from (0,1] onto [0, inf). Psi(0) = +inf.
double psi(double x, double p);
/// Psi^{-1}(y) = (1 + p y)^{-1/p}. Psi^{-1}(+inf) = 0.
double psi_inv(double y, double p);

/// Conjugate T_o = Psi o T o Psi^{-1} of an interval map. Branch j lives over
/// I_j = [Psi(a_{j+1}), Psi(a_j)), so branch 0 is the unbounded cell.
class HalfLineMap {
public:
    explicit HalfLineMap(IntervalMap source);

    [[nodiscard]] const IntervalMap& source() const { return source_; }
    [[nodiscard]] double p() const { return source_.p(); }
    [[nodiscard]] std::size_t branch_limit() const { return source_.branch_limit(); }
    [[nodiscard]] bool truncated() const { return source_.truncated(); }

    /// Psi(a_j); +inf for j = 0.
    [[nodiscard]] double endpoint_o(std::size_t j) const;
    /// Index j with y in I_j; DomainError for y < 0.
    [[nodiscard]] std::size_t locate(double y) const;

    [[nodiscard]] double operator()(double y) const;
    /// psi_{o,k}(y) = Psi(psi_k(Psi^{-1}(y))).
    [[nodiscard]] double inverse(std::size_t k, double y) const;
    /// (psi_k(xi)/xi)^{-p-1} psi_k'(xi) at xi = Psi^{-1}(y).
    [[nodiscard]] double inverse_derivative(std::size_t k, double y) const;

    /// Largest y used by half-line grids: Psi(1e-12).
    [[nodiscard]] double y_max() const { return y_max_; }

private:
    IntervalMap source_;
    double y_max_;
};

HalfLineMap conjugate(const IntervalMap& map);

double conjugate_inverse_branch_derivative(const HalfLineMap& hmap, std::size_t k, double y);

/// sum_{k >= j} psi_{o,k}'(y), truncated once a term drops below 1e-16.
double b3_tail_sum(const HalfLineMap& hmap, std::size_t j, double y);

/// Tail sums non-increasing on a half-line grid up to y_max, for j <= j_max.
CheckReport check_B3(const HalfLineMap& hmap, std::size_t grid_size = 10000, std::size_t j_max = 64);

/// Interval measure Psi^{-1}_* m_o for an absolutely continuous half-line measure m_o.
MeasureSpec pushforward_density(const MeasureSpec& measure_o, double p);

} // namespace glomix
