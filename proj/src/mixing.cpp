#include "glomix/mixing.hpp"

#include "glomix/errors.hpp"
#include "glomix/grid.hpp"
#include "glomix/parallel.hpp"
#include "glomix/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <set>

namespace glomix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxEndpointBranches = 64;
constexpr std::size_t kCdfNodes = 100000;
constexpr std::size_t kBlockSize = 1024;

// The correlation problem in the coordinates where it is run.
struct Problem {
    Space space = Space::UnitInterval;
    bool conjugated = false; // interval observables read through Psi^{-1}
    double p = 1.0;
    RealFn F;                // observable in run coordinates
    RealFn g;                // g times the density of the measure, in run coordinates
    std::vector<double> F_bps;
    std::vector<double> g_bps;
    std::vector<double> cells; // branch endpoints in run coordinates
    double lo = 0.0, hi = 1.0;
};

std::vector<double> observable_bps(const Observable& o, double lo, double hi) {
    return o.breakpoints ? o.breakpoints(lo, hi) : std::vector<double>{};
}

Problem make_problem(const IntervalMap& map, const MeasureSpec& m, const Observable& F, const Observable& g) {
    Problem pr;
    double p = map.p();
    std::size_t nb = std::min(map.branch_limit(), kMaxEndpointBranches);
    bool via_psi = (m.kind() == MeasureKind::NuP || m.kind() == MeasureKind::Pushforward) && m.p() == p;
    if (via_psi) {
        pr.space = Space::HalfLine;
        pr.conjugated = true;
        pr.p = p;
        pr.F = [F, p](double y) { return F(psi_inv(y, p)); };
        if (m.kind() == MeasureKind::NuP) {
            pr.g = [g, p](double y) { return g(psi_inv(y, p)); };
        } else {
            const MeasureSpec* inner = m.inner();
            MeasureSpec in = *inner;
            pr.g = [g, p, in](double y) { return g(psi_inv(y, p)) * in.density(y); };
        }
        for (double x : observable_bps(F, 0.0, 1.0))
            if (x > 0.0 && x < 1.0) pr.F_bps.push_back(psi(x, p));
        for (double x : observable_bps(g, 0.0, 1.0))
            if (x > 0.0 && x < 1.0) pr.g_bps.push_back(psi(x, p));
        for (std::size_t j = 1; j < nb; ++j) pr.cells.push_back(psi(map.endpoint(j), p));
        pr.lo = 0.0;
        pr.hi = kInf;
    } else if (m.space() == Space::HalfLine) {
        pr.space = Space::HalfLine;
        pr.p = p;
        pr.F = F.evaluate;
        pr.g = [g, m](double y) { return g(y) * m.density(y); };
        pr.F_bps = observable_bps(F, 0.0, kInf);
        pr.g_bps = observable_bps(g, 0.0, kInf);
        for (std::size_t j = 1; j < nb; ++j) pr.cells.push_back(psi(map.endpoint(j), p));
        pr.lo = 0.0;
        pr.hi = kInf;
    } else {
        pr.space = Space::UnitInterval;
        pr.p = p;
        pr.F = F.evaluate;
        pr.g = [g, m](double x) { return g(x) * m.density(x); };
        pr.F_bps = observable_bps(F, 0.0, 1.0);
        pr.g_bps = observable_bps(g, 0.0, 1.0);
        for (std::size_t j = 1; j < nb; ++j) pr.cells.push_back(map.endpoint(j));
        pr.lo = 0.0;
        pr.hi = 1.0;
    }
    return pr;
}

// Forward images T^m(b), m = 0..n, of the g breakpoints (discontinuities of P^n g).
std::vector<double> forward_images(const Problem& pr, const IntervalMap& map, const HalfLineMap* hmap, std::size_t n) {
    std::vector<double> out;
    for (double b : pr.g_bps) {
        double y = b;
        for (std::size_t m = 0; m <= n; ++m) {
            if (!(y > pr.lo && y < pr.hi) || !std::isfinite(y)) break;
            out.push_back(y);
            y = pr.space == Space::HalfLine ? (*hmap)(y) : map(y);
        }
    }
    return out;
}

double exact_correlation(const Problem& pr, const BranchSystem& sys, const IntervalMap& map, const HalfLineMap* hmap,
                         std::size_t n, double tol) {
    RealFn Png = pf_power(sys, pr.g, n);
    std::vector<double> bps = pr.F_bps;
    auto imgs = forward_images(pr, map, hmap, n);
    bps.insert(bps.end(), imgs.begin(), imgs.end());
    bps.insert(bps.end(), pr.cells.begin(), pr.cells.end());
    RealFn integrand = [&](double y) { return pr.F(y) * Png(y); };
    return integrate_line(integrand, pr.lo, pr.hi, tol, bps);
}

std::vector<double> correlations_for(const IntervalMap& map, const Problem& pr, std::size_t n_max,
                                     const MixingOptions& opt) {
    std::optional<HalfLineMap> hmap;
    if (pr.space == Space::HalfLine) hmap.emplace(map);
    BranchSystem sys = hmap ? BranchSystem::of(*hmap) : BranchSystem::of(map);
    const HalfLineMap* hp = hmap ? &*hmap : nullptr;

    std::vector<double> c(n_max + 1, 0.0);
    std::size_t depth = std::min(opt.exact_depth, n_max);
    for (std::size_t n = 0; n <= depth; ++n) c[n] = exact_correlation(pr, sys, map, hp, n, opt.tol);
    if (n_max == depth) return c;

    // Grid mode from the exact P^depth g
    std::vector<double> extra = pr.F_bps;
    extra.insert(extra.end(), pr.cells.begin(), pr.cells.end());
    for (double b : forward_images(pr, map, hp, n_max)) {
        extra.push_back(b);
        extra.push_back(b * (1.0 - 1e-10));
        extra.push_back(b * (1.0 + 1e-10));
    }
    std::vector<double> grid = pr.space == Space::HalfLine ? halfline_grid(1e-6, hp->y_max(), opt.grid_size, extra)
                                                           : interval_grid(1e-9, opt.grid_size, extra);
    RealFn seed_fn = pf_power(sys, pr.g, depth);
    std::vector<double> values(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        double y = grid[i];
        if (pr.space == Space::UnitInterval && y == 0.0) y = std::numeric_limits<double>::min();
        values[i] = seed_fn(y);
    });
    GridFunction G(grid, std::move(values), pr.space);
    GridTransfer op(sys, grid, pr.space);
    Observable Fo;
    Fo.evaluate = pr.F;
    Fo.breakpoints = [&pr](double lo, double hi) {
        std::vector<double> out;
        for (double b : pr.F_bps)
            if (b > lo && b < hi) out.push_back(b);
        return out;
    };
    for (std::size_t n = depth + 1; n <= n_max; ++n) {
        G = op.apply(G);
        c[n] = integrate_against(Fo, G);
    }
    return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Inverse-CDF sampler for a non-negative weight on [lo, hi] in run coordinates.
class Sampler {
public:
    Sampler(const RealFn& weight, std::vector<double> nodes) : nodes_(std::move(nodes)) {
        cdf_.resize(nodes_.size(), 0.0);
        double prev = weight(nodes_[0]);
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            double w = weight(nodes_[i]);
            if (!(w >= 0.0) || !std::isfinite(w)) throw SamplingError("sampling weight is negative or not finite");
            cdf_[i] = cdf_[i - 1] + 0.5 * (nodes_[i] - nodes_[i - 1]) * (prev + w);
            prev = w;
        }
        total_ = cdf_.back();
        if (!(total_ > 0.0) || !std::isfinite(total_)) throw SamplingError("sampling weight has no mass on the grid");
    }

    double draw(double u) const {
        double target = u * total_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        if (it == cdf_.begin()) return nodes_.front();
        if (it == cdf_.end()) return nodes_.back();
        std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        double span = cdf_[i] - cdf_[i - 1];
        if (!(span > 0.0)) throw SamplingError("CDF is not strictly increasing at the drawn level");
        double t = (target - cdf_[i - 1]) / span;
        return nodes_[i - 1] + t * (nodes_[i] - nodes_[i - 1]);
    }

private:
    std::vector<double> nodes_;
    std::vector<double> cdf_;
    double total_ = 0.0;
};

} // namespace

std::string to_string(Method m) { return m == Method::TransferDuality ? "TransferDuality" : "MonteCarlo"; }

std::string to_string(Trend t) {
    switch (t) {
    case Trend::Decaying: return "Decaying";
    case Trend::Flat: return "Flat";
    case Trend::Increasing: return "Increasing";
    }
    return "?";
}

std::vector<double> correlation_transfer(const IntervalMap& map, const MeasureSpec& measure, const Observable& F,
                                         const Observable& g, std::size_t n_max, const MixingOptions& options) {
    Problem pr = make_problem(map, measure, F, g);
    return correlations_for(map, pr, n_max, options);
}

double correlation_direct(const IntervalMap& map, const MeasureSpec& measure, const Observable& F, const Observable& g,
                          std::size_t n, double tol) {
    std::optional<HalfLineMap> hmap;
    bool half = measure.space() == Space::HalfLine;
    if (half) hmap.emplace(map);
    double lo = 0.0, hi = half ? kInf : 1.0;
    std::size_t nb = std::min(map.branch_limit(), kMaxEndpointBranches);

    auto forward = [&](double x) { return half ? (*hmap)(x) : map(x); };
    auto preimages = [&](const std::vector<double>& pts) {
        std::vector<double> out;
        for (double z : pts) {
            double xi = half ? psi_inv(z, map.p()) : z;
            if (!(xi > 0.0 && xi < 1.0)) continue;
            for (std::size_t k = 0; k < nb; ++k) {
                double x = map.inverse(k, xi);
                out.push_back(half ? psi(x, map.p()) : x);
            }
        }
        return out;
    };

    // discontinuities of F o T^n: T^{-m}(cell endpoints), m < n, and T^{-n}(breakpoints of F)
    std::vector<double> cells;
    for (std::size_t j = 1; j < nb; ++j)
        cells.push_back(half ? psi(map.endpoint(j), map.p()) : map.endpoint(j));
    std::vector<double> bps = observable_bps(g, lo, hi);
    std::vector<double> level = cells;
    for (std::size_t m = 0; m < n; ++m) {
        bps.insert(bps.end(), level.begin(), level.end());
        level = preimages(level);
    }
    std::vector<double> fb = observable_bps(F, lo, hi);
    for (std::size_t m = 0; m < n; ++m) fb = preimages(fb);
    bps.insert(bps.end(), fb.begin(), fb.end());

    RealFn integrand = [&](double x) {
        double y = x;
        for (std::size_t m = 0; m < n; ++m) y = forward(y);
        return F(y) * g(x);
    };
    return integrate(measure, integrand, lo, hi, tol, [bps](double a, double b) {
        std::vector<double> out;
        for (double v : bps)
            if (v > a && v < b) out.push_back(v);
        return out;
    });
}

double total_integral(const MeasureSpec& measure, const Observable& g, double tol) {
    double hi = measure.space() == Space::HalfLine ? kInf : 1.0;
    return integrate(measure, g.evaluate, 0.0, hi, tol, g.breakpoints);
}

MonteCarloResult correlation_montecarlo(const IntervalMap& map, const MeasureSpec& measure, const Observable& F,
                                        const Observable& g, std::size_t n_max, std::size_t samples,
                                        std::uint64_t seed) {
    if (samples == 0) throw DomainError("Monte Carlo needs at least one sample");
    bool half = measure.space() == Space::HalfLine;
    bool u_space = !half && measure.singular_at_zero();
    double p = measure.singular_at_zero() ? measure.p() : map.p();
    std::optional<HalfLineMap> hmap;
    if (half) hmap.emplace(map);

    // sampling coordinate t: x itself, u = Psi(x), or the half-line point
    auto to_point = [&](double t) { return u_space ? psi_inv(t, p) : t; };
    auto weight_density = [&](double t) {
        if (u_space) return measure.density_u(t);
        return measure.density(t);
    };
    std::vector<double> extra;
    for (double b : observable_bps(g, 0.0, half ? kInf : 1.0)) {
        double t = u_space ? psi(b, p) : b;
        extra.push_back(t);
        extra.push_back(t * (1.0 - 1e-12));
        extra.push_back(t * (1.0 + 1e-12));
    }
    std::vector<double> nodes;
    if (u_space || half) {
        double top = u_space ? psi(1e-12, p) : HalfLineMap(map).y_max();
        nodes = halfline_grid(1e-9, top, kCdfNodes, extra);
    } else {
        nodes = interval_grid(1e-12, kCdfNodes, extra);
    }

    struct Part {
        double sign;
        double mass;
        std::size_t count;
        std::optional<Sampler> sampler;
    };
    std::vector<Part> parts;
    for (double sign : {1.0, -1.0}) {
        Observable gp = g;
        gp.evaluate = [g, sign](double x) { return std::max(0.0, sign * g(x)); };
        double mass = total_integral(measure, gp);
        if (!(mass > 0.0)) continue;
        Part part{sign, mass, 0, std::nullopt};
        part.sampler.emplace([&](double t) { return gp(to_point(t)) * weight_density(t); }, nodes);
        parts.push_back(std::move(part));
    }
    MonteCarloResult res;
    res.mean.assign(n_max + 1, 0.0);
    res.se.assign(n_max + 1, 0.0);
    if (parts.empty()) return res;
    for (std::size_t i = 0; i < parts.size(); ++i) parts[i].count = samples / parts.size() + (i < samples % parts.size() ? 1 : 0);

    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const Part& part = parts[pi];
        std::size_t blocks = (part.count + kBlockSize - 1) / kBlockSize;
        std::vector<std::vector<double>> sum(blocks, std::vector<double>(n_max + 1, 0.0));
        std::vector<std::vector<double>> sq(blocks, std::vector<double>(n_max + 1, 0.0));
        parallel_for(blocks, [&](std::size_t b) {
            std::mt19937_64 rng(splitmix64(seed ^ splitmix64(2 * b + pi)));
            std::size_t begin = b * kBlockSize, end = std::min(part.count, begin + kBlockSize);
            for (std::size_t s = begin; s < end; ++s) {
                double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                double x = to_point(part.sampler->draw(u));
                if (!half && !(x > 0.0)) x = std::numeric_limits<double>::min();
                for (std::size_t n = 0; n <= n_max; ++n) {
                    double v = F(x);
                    sum[b][n] += v;
                    sq[b][n] += v * v;
                    if (n < n_max) x = half ? (*hmap)(x) : map(x);
                }
            }
        });
        double N = static_cast<double>(part.count);
        for (std::size_t n = 0; n <= n_max; ++n) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) {
                s += sum[b][n];
                s2 += sq[b][n];
            }
            double mean = s / N;
            double var = N > 1 ? std::max(0.0, (s2 - N * mean * mean) / (N - 1.0)) : 0.0;
            res.mean[n] += part.sign * part.mass * mean;
            double se = part.mass * std::sqrt(var / N);
            res.se[n] = std::sqrt(res.se[n] * res.se[n] + se * se);
        }
    }
    return res;
}

std::optional<double> global_average_target(const MeasureSpec& measure, const Observable& F) {
    if (F.known_average) return F.known_average;
    GlobalAverage avg = estimate_global_average(measure, F, dyadic_sequence(measure.space()));
    if (!avg.converged) return std::nullopt;
    return avg.value;
}

MixingRun run_mixing(const IntervalMap& map, const std::string& map_id, const MeasureSpec& measure, const Observable& F,
                     const Observable& g, std::size_t n_max, Method method, std::size_t samples, std::uint64_t seed,
                     const MixingOptions& options) {
    MixingRun run;
    run.map_id = map_id;
    run.measure = measure;
    run.F_name = F.name;
    run.g_name = g.name;
    run.n_max = n_max;
    run.method = method;
    if (method == Method::TransferDuality) {
        run.correlations = correlation_transfer(map, measure, F, g, n_max, options);
    } else {
        auto mc = correlation_montecarlo(map, measure, F, g, n_max, samples, seed);
        run.correlations = std::move(mc.mean);
        run.se = std::move(mc.se);
        run.mc_samples = samples;
        run.seed = seed;
    }
    if (auto avg = global_average_target(measure, F)) run.target = *avg * total_integral(measure, g);
    return run;
}

GlmDiagnostic glm_diagnostic(const MixingRun& run, double slope_threshold) {
    GlmDiagnostic d;
    const auto& c = run.correlations;
    d.target_undefined = !run.target.has_value();
    std::vector<double> r(c.size(), 0.0);
    for (std::size_t n = 0; n < c.size(); ++n) {
        if (run.target)
            r[n] = std::abs(c[n] - *run.target);
        else
            r[n] = n == 0 ? 0.0 : std::abs(c[n] - c[n - 1]);
    }
    std::size_t start = run.n_max / 2 + 1;
    if (d.target_undefined) start = std::max<std::size_t>(start, 1);
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    double floor = 1e-9 * std::max(scale, 1e-300);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t n = start; n < r.size(); ++n) {
        d.tail_sup = std::max(d.tail_sup, r[n]);
        if (r[n] <= floor) continue;
        double x = static_cast<double>(n), y = std::log(r[n]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (d.tail_sup <= floor || cnt < 2) {
        d.trend = Trend::Flat;
        d.report = "residuals at the quadrature floor";
    } else {
        double m = static_cast<double>(cnt);
        d.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        d.trend = d.slope < -slope_threshold ? Trend::Decaying
                  : d.slope > slope_threshold ? Trend::Increasing
                                              : Trend::Flat;
        char buf[160];
        std::snprintf(buf, sizeof buf, "log-residual slope %.6g over n > %zu", d.slope, run.n_max / 2);
        d.report = buf;
    }
    if (d.target_undefined) d.report += "; TargetUndefined (residuals are successive differences)";
    return d;
}

LocalDecay local_local_decay(const IntervalMap& map, const MeasureSpec& measure, const Observable& f,
                             const Observable& g, std::size_t n_max, const MixingOptions& options) {
    LocalDecay out;
    auto c = correlation_transfer(map, measure, f, g, n_max, options);
    for (double v : c) out.magnitude.push_back(std::abs(v));
    out.envelope = out.magnitude;
    for (std::size_t n = out.envelope.size(); n-- > 1;)
        out.envelope[n - 1] = std::max(out.envelope[n - 1], out.envelope[n]);
    return out;
}

std::vector<CounterexampleRow> counterexample_demo(int n_max, bool with_quadrature) {
    if (n_max < 2 || n_max > 170) throw DomainError("counterexample_demo needs 2 <= n_max <= 170");
    std::vector<CounterexampleRow> rows(static_cast<std::size_t>(n_max - 1));
    MeasureSpec leb = MeasureSpec::lebesgue(Space::HalfLine);
    MeasureSpec lam = MeasureSpec::lambda_q(1.0);
    Observable F = counterexample_observable();
    parallel_for(rows.size(), [&](std::size_t i) {
        int n = static_cast<int>(i) + 2;
        rows[i].n = n;
        rows[i].closed = counterexample_averages(n);
        double alpha = counterexample_alpha(n), beta = counterexample_beta(n);
        if (!with_quadrature || !std::isfinite(beta)) return;
        CounterexampleAverages q;
        q.leb_at_alpha = finite_volume_average(leb, F, alpha, 1e-12);
        q.leb_at_beta = finite_volume_average(leb, F, beta, 1e-12);
        q.lambda1_at_alpha = finite_volume_average(lam, F, alpha, 1e-12);
        q.lambda1_at_beta = finite_volume_average(lam, F, beta, 1e-12);
        rows[i].quadrature = q;
    });
    return rows;
}

void write_csv(const MixingRun& run, std::ostream& out) {
    out << "n,c_n,target,residual,method,se\n";
    char buf[256];
    for (std::size_t n = 0; n < run.correlations.size(); ++n) {
        std::string target = "NA", residual = "NA", se = "NA";
        if (run.target) {
            std::snprintf(buf, sizeof buf, "%.17g", *run.target);
            target = buf;
            std::snprintf(buf, sizeof buf, "%.17g", run.correlations[n] - *run.target);
            residual = buf;
        }
        if (n < run.se.size()) {
            std::snprintf(buf, sizeof buf, "%.17g", run.se[n]);
            se = buf;
        }
        std::snprintf(buf, sizeof buf, "%zu,%.17g,", n, run.correlations[n]);
        out << buf << target << ',' << residual << ',' << to_string(run.method) << ',' << se << '\n';
    }
}

void write_csv(const std::vector<CounterexampleRow>& rows, std::ostream& out) {
    out << "n,leb_at_alpha,leb_at_beta,lambda1_at_alpha,lambda1_at_beta,"
           "quad_leb_at_alpha,quad_leb_at_beta,quad_lambda1_at_alpha,quad_lambda1_at_beta\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g", r.n, r.closed.leb_at_alpha, r.closed.leb_at_beta,
                      r.closed.lambda1_at_alpha, r.closed.lambda1_at_beta);
        out << buf;
        if (r.quadrature) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g\n", r.quadrature->leb_at_alpha,
                          r.quadrature->leb_at_beta, r.quadrature->lambda1_at_alpha, r.quadrature->lambda1_at_beta);
            out << buf;
        } else {
            out << ",NA,NA,NA,NA\n";
        }
    }
}

} // namespace glomix
