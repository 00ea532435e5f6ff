#pragma once

#include "glomix/grid.hpp"
#include "glomix/interval_map.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace glomix {

/// Interval mass that may be infinite. Consumers must test `infinite` before
/// asking for the value.
struct Mass {
    double finite_value = 0.0;
    bool infinite = false;

    static Mass of(double v) { return {v, false}; }
    static Mass infinity() { return {0.0, true}; }
    /// Throws SingularMass when infinite.
    [[nodiscard]] double value() const;
};

enum class MeasureKind { Lebesgue, NuP, LambdaQ, EstimatedMu, Pushforward };

std::string to_string(MeasureKind k);

/// Reference measure on (0,1] or on [0, inf).
class MeasureSpec {
public:
    static MeasureSpec lebesgue(Space space);
    /// x^{-p-1} dx on (0,1].
    static MeasureSpec nu_p(double p);
    /// (1+y)^{-q} dy on [0, inf), q in (0,1].
    static MeasureSpec lambda_q(double q);
    /// H(x) x^{-p} dx on (0,1], with H sampled on a grid (held constant below it).
    static MeasureSpec estimated_mu(GridFunction H, double p);
    /// Image under Psi^{-1} of a half-line measure: density (d m_o/dy)(Psi(x)) x^{-p-1}.
    static MeasureSpec pushforward(const MeasureSpec& halfline, double p);

    [[nodiscard]] MeasureKind kind() const { return kind_; }
    [[nodiscard]] Space space() const { return space_; }
    /// p for NuP, EstimatedMu and Pushforward.
    [[nodiscard]] double p() const { return p_; }
    /// q for LambdaQ.
    [[nodiscard]] double q() const { return q_; }
    [[nodiscard]] const MeasureSpec* inner() const { return inner_.get(); }
    [[nodiscard]] const GridFunction* H() const { return H_.get(); }

    /// Density with respect to Lebesgue measure of the space.
    [[nodiscard]] double density(double x) const;
    /// For measures infinite at 0 on the interval: density in u = Psi(x)
    /// coordinates, i.e. x^{p+1} density(x) at x = Psi^{-1}(u).
    [[nodiscard]] double density_u(double u) const;
    /// True for interval measures with a non-integrable singularity at 0.
    [[nodiscard]] bool singular_at_zero() const;

    /// Short name used by the CLI: leb, nu_p, lambda_q:q, mu, push(...).
    [[nodiscard]] std::string name() const;

private:
    MeasureKind kind_ = MeasureKind::Lebesgue;
    Space space_ = Space::UnitInterval;
    double p_ = 1.0;
    double q_ = 1.0;
    std::shared_ptr<const MeasureSpec> inner_;
    std::shared_ptr<const GridFunction> H_;
};

/// m([a,b]). Closed forms for Lebesgue, nu_p, lambda_q and push-forwards of
/// those; quadrature for EstimatedMu. b may be +inf on the half-line.
Mass interval_mass(const MeasureSpec& measure, double a, double b);

/// Breakpoints of an integrand inside [a,b] (discontinuities or kinks).
using BreakpointFn = std::function<std::vector<double>(double, double)>;

/// int_a^b f dm with relative tolerance `tol`. Interval measures singular at 0
/// are integrated in u = Psi(x) coordinates; unbounded ranges are summed over
/// doubling blocks. Throws NonIntegrable when the blocks do not settle.
double integrate(const MeasureSpec& measure, const RealFn& f, double a, double b, double tol = 1e-10,
                 const BreakpointFn& breakpoints = {});

/// int_lo^hi g(t) dt on the half-line coordinate, hi possibly +inf.
double integrate_line(const RealFn& g, double lo, double hi, double tol = 1e-10,
                      const std::vector<double>& breakpoints = {});

enum class Role { Global, Local };

std::string to_string(Role r);

struct Observable {
    std::string name;
    Role role = Role::Global;
    RealFn evaluate;
    /// sup |evaluate| (for Global observables), +inf when unknown.
    double bound = std::numeric_limits<double>::infinity();
    std::optional<double> known_average;
    BreakpointFn breakpoints;

    double operator()(double x) const { return evaluate(x); }
};

Observable identity_observable();
Observable constant_observable(double c);
/// Indicator of [a,b].
Observable box_observable(double a, double b);
Observable counterexample_observable();
/// Piecewise-constant observable from a CSV file with columns breakpoint,value:
/// value_i on [breakpoint_i, breakpoint_{i+1}), the last value extending to +inf,
/// 0 left of the first breakpoint.
Observable table_observable(const std::string& path);
/// identity | constant:c | box:a,b | indicator:a,b | counterexample_kk | table:path
Observable parse_observable(const std::string& spec);

/// Interval: (1/m([a,1])) int_a^1 F dm. Half-line: (1/m([0,a])) int_0^a F dm.
double finite_volume_average(const MeasureSpec& measure, const Observable& F, double a, double tol = 1e-10);

struct GlobalAverage {
    double value = 0.0;
    bool converged = false;
    std::vector<double> trace;
};

/// Finite-volume averages along a_sequence; converged iff the last 5 lie within
/// tol of their mean, which is then reported as the value.
GlobalAverage estimate_global_average(const MeasureSpec& measure, const Observable& F,
                                      const std::vector<double>& a_sequence, double tol = 1e-3);

/// a_k = 2^{-k} (interval) or 2^k (half-line), k = 1..count.
std::vector<double> dyadic_sequence(Space space, std::size_t count = 40);

/// 1 on [k^k - 1, 2 k^k - 1) for some k >= 1, else 0.
double counterexample_F(double y);

double counterexample_alpha(int k);
double counterexample_beta(int k);

enum class Arithmetic { Auto, Double, Extended };

struct CounterexampleAverages {
    double leb_at_alpha = 0.0;
    double leb_at_beta = 0.0;
    double lambda1_at_alpha = 0.0;
    double lambda1_at_beta = 0.0;
};

/// Closed-form finite-volume averages of the counterexample at a = alpha_n and
/// a = beta_n, 2 <= n <= 170. Auto switches to extended exponents above n = 14;
/// Double throws Overflow once k^k leaves the double range.
CounterexampleAverages counterexample_averages(int n, Arithmetic mode = Arithmetic::Auto);

/// Exact Lebesgue averages as reduced fractions "num/den".
struct ExactLebesgueAverages {
    std::string at_alpha;
    std::string at_beta;
};
ExactLebesgueAverages counterexample_leb_exact(int n);

/// Number m 2^e with a double mantissa; used for k^k beyond the double range.
class ScaledReal {
public:
    ScaledReal() = default;
    explicit ScaledReal(double v);
    static ScaledReal power(int base, int exponent);

    ScaledReal operator+(const ScaledReal& o) const;
    ScaledReal operator-(const ScaledReal& o) const;
    ScaledReal operator*(const ScaledReal& o) const;
    /// Ratio as a double (finite whenever the ratio is representable).
    [[nodiscard]] double ratio(const ScaledReal& den) const;
    [[nodiscard]] double mantissa() const { return m_; }
    [[nodiscard]] long exponent() const { return e_; }

private:
    void normalize();
    double m_ = 0.0;
    long e_ = 0;
};

} // namespace glomix
