#pragma once

#include "glomix/conjugation.hpp"
#include "glomix/interval_map.hpp"
#include "glomix/measures.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace glomix {

struct MixingOptions {
    std::size_t grid_size = 20000;
    /// c_n for n <= exact_depth uses exact composition of P; later terms are
    /// propagated in Grid mode from the exact P^{exact_depth} g.
    std::size_t exact_depth = 3;
    double tol = 1e-10;
};

/// c_n = nu((F o T^n) g), n = 0..n_max, via c_n = leb(F P^n (g h_nu)).
/// nu_p (with the map's p) and its push-forwards run on the conjugated
/// half-line map; half-line measures run on T_o directly with half-line
/// observables; Lebesgue and estimated mu run on the interval.
std::vector<double> correlation_transfer(const IntervalMap& map, const MeasureSpec& measure, const Observable& F,
                                         const Observable& g, std::size_t n_max, const MixingOptions& options = {});

/// int F(T^n x) g(x) dnu(x) by composing T pointwise, with breakpoints at the
/// preimages of the cell endpoints. Independent of the transfer operator.
double correlation_direct(const IntervalMap& map, const MeasureSpec& measure, const Observable& F,
                          const Observable& g, std::size_t n, double tol = 1e-10);

struct MonteCarloResult {
    std::vector<double> mean;
    std::vector<double> se;
};

/// x ~ |g_pm| dnu / nu(|g_pm|) by inverse CDF on a 10^5-node grid, c_n = nu(g) mean F(T^n x).
/// Blocks of samples draw from generators seeded by (seed, block index) and are
/// merged in block order, so results do not depend on the thread count.
MonteCarloResult correlation_montecarlo(const IntervalMap& map, const MeasureSpec& measure, const Observable& F,
                                        const Observable& g, std::size_t n_max, std::size_t samples,
                                        std::uint64_t seed);

enum class Method { TransferDuality, MonteCarlo };
enum class Trend { Decaying, Flat, Increasing };

std::string to_string(Method m);
std::string to_string(Trend t);

struct MixingRun {
    std::string map_id;
    MeasureSpec measure;
    std::string F_name;
    std::string g_name;
    std::size_t n_max = 0;
    std::vector<double> correlations;
    std::vector<double> se; ///< empty for TransferDuality
    std::optional<double> target; ///< nullopt when the average of F is undefined
    Method method = Method::TransferDuality;
    std::optional<std::size_t> mc_samples;
    std::optional<std::uint64_t> seed;
};

/// nu-bar(F): known_average, else the converged dyadic estimate; nullopt otherwise.
std::optional<double> global_average_target(const MeasureSpec& measure, const Observable& F);

/// Integral of g over the whole space.
double total_integral(const MeasureSpec& measure, const Observable& g, double tol = 1e-10);

MixingRun run_mixing(const IntervalMap& map, const std::string& map_id, const MeasureSpec& measure,
                     const Observable& F, const Observable& g, std::size_t n_max, Method method,
                     std::size_t samples = 100000, std::uint64_t seed = 1, const MixingOptions& options = {});

struct GlmDiagnostic {
    double tail_sup = 0.0;
    Trend trend = Trend::Flat;
    double slope = 0.0;
    bool target_undefined = false;
    std::string report;
};

/// Residuals r_n = |c_n - target| (or |c_n - c_{n-1}| when the target is
/// undefined); tail_sup over n > n_max/2; trend from the least-squares slope of
/// log r_n over the same range, compared with +-slope_threshold.
GlmDiagnostic glm_diagnostic(const MixingRun& run, double slope_threshold = 1e-3);

struct LocalDecay {
    std::vector<double> magnitude; ///< |c_n|
    std::vector<double> envelope;  ///< max_{m >= n} |c_m|, non-increasing
};

LocalDecay local_local_decay(const IntervalMap& map, const MeasureSpec& measure, const Observable& f,
                             const Observable& g, std::size_t n_max, const MixingOptions& options = {});

struct CounterexampleRow {
    int n = 0;
    CounterexampleAverages closed;
    std::optional<CounterexampleAverages> quadrature; ///< absent where alpha_n leaves the double range
};

/// Counterexample averages for n = 2..n_max with quadrature cross-checks.
std::vector<CounterexampleRow> counterexample_demo(int n_max, bool with_quadrature = true);

/// Columns n,c_n,target,residual,method,se.
void write_csv(const MixingRun& run, std::ostream& out);
void write_csv(const std::vector<CounterexampleRow>& rows, std::ostream& out);

} // namespace glomix
