#pragma once

#include "glomix/conjugation.hpp"
#include "glomix/grid.hpp"
#include "glomix/interval_map.hpp"
#include "glomix/measures.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace glomix {

/// The inverse branches of a map on either space; the only data the transfer
/// operator needs.
struct BranchSystem {
    Space space = Space::UnitInterval;
    std::size_t count = 0;
    bool truncated = false;
    std::function<double(std::size_t, double)> inverse;
    std::function<double(std::size_t, double)> inverse_derivative;

    /// The system borrows `map`; it must outlive the system.
    static BranchSystem of(const IntervalMap& map);
    static BranchSystem of(const HalfLineMap& hmap);
};

enum class Mode { Exact, Grid };

/// (Pg)(y) = sum_j psi_j'(y) g(psi_j(y)) with g evaluated exactly; tails of
/// countable systems stop once psi_j'(y) < 1e-16.
double pf_apply_at(const BranchSystem& sys, const RealFn& g, double y);
/// P g as a callable (Exact mode).
RealFn pf_apply(const BranchSystem& sys, RealFn g);
/// P^n g as a callable (Exact mode); the cost is (branch count)^n per evaluation.
RealFn pf_power(const BranchSystem& sys, RealFn g, std::size_t n);
/// Exact mode sampled on a grid.
GridFunction pf_apply(const BranchSystem& sys, const RealFn& g, const std::vector<double>& grid);
/// Grid mode: g is interpolated (as configured on g) and the result lives on g's grid.
GridFunction pf_apply(const BranchSystem& sys, const GridFunction& g);

/// Precomputed Grid-mode operator on a fixed grid: each output value is a fixed
/// linear combination of the input values.
class GridTransfer {
public:
    GridTransfer(const BranchSystem& sys, std::vector<double> grid, Space space,
                 Interpolation interpolation = Interpolation::Linear);

    [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
    [[nodiscard]] std::vector<double> apply(const std::vector<double>& values) const;
    [[nodiscard]] GridFunction apply(const GridFunction& g) const;

private:
    struct Entry {
        std::size_t index;
        double weight;
    };
    std::vector<double> grid_;
    Space space_;
    Interpolation interpolation_;
    std::vector<std::size_t> offsets_;
    std::vector<Entry> entries_;
};

/// Image of an indicator in piecewise form: P 1_{[0,a]}(y) = upper(y) for y < b, lower(y) for y >= b.
struct IndicatorImage {
    std::size_t j = 0;
    double b = 0.0;
    std::function<double(double)> upper; ///< sum_{k >= j} psi_{o,k}'
    std::function<double(double)> lower; ///< sum_{k >= j+1} psi_{o,k}'

    double operator()(double y) const { return y < b ? upper(y) : lower(y); }
};

/// The returned image borrows `hmap`.
IndicatorImage pf_indicator(const HalfLineMap& hmap, double a);

struct ConeReport {
    bool passed = true;
    double worst_violation = 0.0;
    std::size_t worst_iterate = 0;
    std::vector<GridFunction> iterates; ///< g, Pg, ..., P^n g
};

/// Applies Grid-mode P n times to a decreasing g. An iterate fails when some
/// consecutive increase exceeds tol * max|g|.
ConeReport check_cone_preservation(const HalfLineMap& hmap, const GridFunction& g, std::size_t n, double tol = 1e-8);

enum class DensityScheme { GaussSeidel, Jacobi };

struct DensityOptions {
    std::size_t max_iterations = 500;
    std::size_t grid_size = 20000;
    double x_min = 1e-6;
    double tolerance = 1e-13;
    DensityScheme scheme = DensityScheme::GaussSeidel;
};

struct DensityEstimate {
    GridFunction h;
    GridFunction H;
    std::vector<double> variation; ///< sup |H_k - H_{k-1}| / sup H_k on [x_min, 1], per iterate
    std::size_t iterations = 0;
    bool converged = false;
    bool non_convergence = false; ///< variation did not decrease over the last 10 iterates
    double H0 = 0.0;              ///< extrapolated H(0)
    double H0_error = 0.0;
};

/// Fixed point of the Lebesgue transfer operator on (0,1], started from h = 1
/// and normalized so that int_{1/2}^1 h = 1. Works with H = x^p h, which stays
/// bounded; H is held constant below x_min.
DensityEstimate estimate_invariant_density(const IntervalMap& map, const DensityOptions& options = {});

/// min(g(M), g(y)), with M inserted into the grid.
GridFunction gamma_truncate(const GridFunction& g, double M);

struct GeneralizedInverse {
    double value = 0.0;
    bool truncated = false; ///< r below every grid value: the grid end is returned
};

/// inf { y : g(y) <= r } for a decreasing g.
GeneralizedInverse generalized_inverse(const GridFunction& g, double r);

/// int F g dleb over the grid span of g, exact for piecewise polynomial F of low degree.
double integrate_against(const Observable& F, const GridFunction& g);

struct FubiniDiagnostic {
    double epsilon = 0.0;    ///< 2 sup_{a >= M} |(1/a) int_0^a F| over the grid
    double direct = 0.0;     ///< int F gamma dleb
    double via_inverse = 0.0; ///< int_0^{gamma(M)} int_0^{gamma^{-1}(r)} F dy dr
    double bound = 0.0;      ///< (epsilon/2) ||gamma||_1
    double slack = 0.0;
    bool holds = false;
};

/// Both sides of the Fubini rewriting of int F gamma and the resulting bound.
FubiniDiagnostic fubini_diagnostic(const Observable& F, const GridFunction& gamma, double M);

} // namespace glomix
