#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace glomix {

using RealFn = std::function<double(double)>;

enum class Family { GeneralizedPM, GeneralizedLSV, PerturbedPM, PerturbedLSV, Custom };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// One full increasing branch phi of the map on the cell (lower, upper].
struct BranchSpec {
    double lower = 0.0;
    double upper = 1.0;
    RealFn forward;
    RealFn derivative;
    RealFn second_derivative;
    RealFn inverse;            ///< optional closed-form inverse branch
    RealFn inverse_derivative; ///< optional closed form of the inverse derivative
    RealFn displacement;       ///< optional phi(x) - x, evaluated without cancellation
};

/// Additive branch perturbation eta with its first two derivatives.
struct Perturbation {
    RealFn eta;
    RealFn d_eta;
    RealFn dd_eta;
};

/// Perturbations for the perturbed PM / LSV families. Branches beyond the
/// vector, or with an empty eta, are unperturbed.
struct PerturbationSpec {
    std::vector<Perturbation> branches;
    double epsilon = 1.0;

    [[nodiscard]] bool has(std::size_t j) const {
        return j < branches.size() && static_cast<bool>(branches[j].eta);
    }
};

struct MapParameters {
    double p = 1.0;
    double kappa = 1.0;
    double b_o = 0.0; ///< 0 selects the default a_1 / 2
    Family family = Family::Custom;
};

/// Interval map of (0,1] with full increasing branches and an indifferent
/// fixed point at 0. Immutable after construction.
class IntervalMap {
public:
    using BranchGenerator = std::function<BranchSpec(std::size_t)>;

    /// Finitely many branches; the cells must tile (0,1].
    IntervalMap(std::vector<BranchSpec> branches, MapParameters params,
                std::optional<PerturbationSpec> perturbation = std::nullopt);

    /// Countably many branches produced on demand by `generator`. Branches are
    /// materialized while the cell width is at least `min_width`, up to `max_branches`.
    IntervalMap(BranchGenerator generator, MapParameters params, std::size_t max_branches = 4096,
                double min_width = 1e-16);

    /// nullopt for countably many branches.
    [[nodiscard]] std::optional<std::size_t> branch_count() const;
    /// Number of materialized branches (all branches when finite).
    [[nodiscard]] std::size_t branch_limit() const { return branches_.size(); }
    [[nodiscard]] bool truncated() const { return static_cast<bool>(generator_); }

    [[nodiscard]] const BranchSpec& branch(std::size_t j) const;
    /// a_j for j <= branch_limit().
    [[nodiscard]] double endpoint(std::size_t j) const;

    [[nodiscard]] double p() const { return params_.p; }
    [[nodiscard]] double kappa() const { return params_.kappa; }
    [[nodiscard]] double b_o() const { return params_.b_o; }
    [[nodiscard]] Family family() const { return params_.family; }
    [[nodiscard]] const MapParameters& parameters() const { return params_; }
    [[nodiscard]] const std::optional<PerturbationSpec>& perturbation() const { return perturbation_; }

    /// Index j with x in (a_j, a_{j+1}]; DomainError outside (0,1].
    [[nodiscard]] std::size_t locate(double x) const;

    /// T(x), clamped to [0,1].
    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double derivative(double x) const;
    [[nodiscard]] double second_derivative(double x) const;

    /// psi_j(xi) for xi in [0,1].
    [[nodiscard]] double inverse(std::size_t j, double xi) const;
    /// psi_j'(xi) = 1 / phi_j'(psi_j(xi)).
    [[nodiscard]] double inverse_derivative(std::size_t j, double xi) const;

private:
    [[nodiscard]] BranchSpec tail_branch(std::size_t j) const;
    void validate() const;

    std::vector<BranchSpec> branches_;
    std::vector<double> endpoints_;
    BranchGenerator generator_;
    MapParameters params_;
    std::optional<PerturbationSpec> perturbation_;
};

/// Inverts an increasing function on [lo, hi]: bisection to width 1e-8, then
/// bracketed Newton, at most 200 iterations. Returns lo / hi when target lies
/// outside [f(lo), f(hi)]. Throws ConvergenceError when the residual exceeds
/// 1e-14 * max(1, |target|).
double solve_increasing(const RealFn& f, const RealFn& df, double target, double lo, double hi);

/// x + kappa x^{p+1} mod 1, kappa a positive integer, p >= 1.
IntervalMap build_generalized_pm(int kappa, double p);

/// First branch x + kappa x^{p+1} on (0, a_1], linear full branches on the
/// remaining cells. `endpoints` lists 0 = a_0 < a_1 < ... < a_N = 1 (the leading
/// 0 may be omitted). Throws EndpointMismatch unless a_1 + kappa a_1^{p+1} = 1
/// within 1e-12.
IntervalMap build_generalized_lsv(double kappa, double p, std::vector<double> endpoints);

/// The two-branch LSV map with kappa = 2^p.
IntervalMap build_standard_lsv(double p);

/// Generalized LSV with countably many linear branches whose endpoints are
/// a_j = 1 - (1 - a_1) ratio^{j-1}, j >= 1.
IntervalMap build_countable_lsv(double kappa, double p, double ratio);

/// Solution a_1 of x + kappa x^{p+1} + eta0(x) = 1 in (0,1).
double first_endpoint(double kappa, double p, const Perturbation& eta0 = {});

/// Generalized PM branches plus perturbations eta_j that vanish at the cell ends.
IntervalMap build_perturbed_pm(int kappa, double p, PerturbationSpec spec);

/// Generalized LSV branches plus perturbations. a_1 must solve
/// a_1 + kappa a_1^{p+1} + eta_0(a_1) = 1 and eta_j (j >= 1) vanish at cell ends.
IntervalMap build_perturbed_lsv(double kappa, double p, std::vector<double> endpoints,
                                PerturbationSpec spec);

/// Full-branch doubling map 2x mod 1 on (0,1]; a Lebesgue-invariant test fixture
/// (p and kappa are nominal, it has no indifferent fixed point).
IntervalMap build_doubling_map();

double eval_map(const IntervalMap& map, double x);
double inverse_branch(const IntervalMap& map, std::size_t j, double xi);
double inverse_branch_derivative(const IntervalMap& map, std::size_t j, double xi);
/// [x0, T(x0), ..., T^n(x0)].
std::vector<double> orbit(const IntervalMap& map, double x0, std::size_t n);

} // namespace glomix
