#include "glomix/assumption_checks.hpp"

#include "glomix/errors.hpp"
#include "glomix/grid.hpp"
#include "glomix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glomix {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::size_t checked_branches(const IntervalMap& map, std::size_t j_max) {
    return std::min(map.branch_limit(), j_max);
}

// First index where values fail to be non-decreasing (scaled tolerance), or npos.
std::size_t first_decrease(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] - v[i - 1] < -kMonotoneTolerance * std::max(1.0, std::abs(v[i - 1]))) return i - 1;
    return static_cast<std::size_t>(-1);
}

} // namespace

std::string to_string(AssumptionId id) {
    switch (id) {
    case AssumptionId::A1: return "A1";
    case AssumptionId::A2: return "A2";
    case AssumptionId::A3: return "A3";
    case AssumptionId::A4: return "A4";
    case AssumptionId::A5: return "A5";
    case AssumptionId::A5prime: return "A5prime";
    case AssumptionId::B3: return "B3";
    case AssumptionId::Perturbation: return "Perturbation";
    }
    return "?";
}

double a2_remainder_ratio(const IntervalMap& map, double x) {
    const BranchSpec& b = map.branch(0);
    double p = map.p();
    double excess = b.displacement ? b.displacement(x) : b.forward(x) - x;
    double lead = map.kappa() * std::pow(x, p + 1.0);
    return std::abs(excess - lead) / std::pow(x, p + 1.0);
}

double a4_distortion(const IntervalMap& map, double x) {
    double d = map.derivative(x);
    return std::abs(map.second_derivative(x)) / (d * d);
}

double a5prime_quantity(const IntervalMap& map, std::size_t j, double x) {
    const BranchSpec& b = map.branch(j);
    return std::pow(b.forward(x) / x, map.p() + 1.0) / b.derivative(x);
}

double a5_term(const IntervalMap& map, std::size_t k, double xi) {
    double psi = map.inverse(k, xi);
    return std::pow(xi / psi, map.p() + 1.0) * map.inverse_derivative(k, xi);
}

double a5_tail_sum(const IntervalMap& map, std::size_t j, double xi) {
    std::vector<double> terms;
    for (std::size_t k = j; k < map.branch_limit(); ++k) {
        double t = a5_term(map, k, xi);
        terms.push_back(t);
        if (map.truncated() && t < 1e-16) break;
    }
    double s = 0.0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) s += *it;
    return s;
}

CheckReport check_A2(const IntervalMap& map, std::size_t n_dyadic, std::size_t grid_size) {
    CheckReport r;
    r.assumption_id = AssumptionId::A2;
    if (n_dyadic < 8) throw DomainError("check_A2 needs n_dyadic >= 8");
    double a1 = map.endpoint(1);
    // Ratios below this floor are rounding noise of the leading term.
    double floor = 64.0 * kEps * std::max(1.0, map.kappa());
    std::vector<double> xs, ratios;
    for (std::size_t k = 4; k <= n_dyadic; ++k) {
        double x = std::ldexp(1.0, -static_cast<int>(k));
        if (x >= a1) continue;
        double q = a2_remainder_ratio(map, x);
        xs.push_back(x);
        ratios.push_back(q < floor ? 0.0 : q);
    }
    r.grid_size = xs.size();
    bool ok = xs.size() >= 2;
    for (std::size_t i = 1; ok && i < ratios.size(); ++i) {
        if (ratios[i] > ratios[i - 1] * (1.0 + 1e-9)) {
            ok = false;
            r.witness = xs[i];
            r.witness_upper = xs[i - 1];
            r.note = "remainder ratio increases along the dyadic sequence";
        }
    }
    if (ok && !(ratios.back() == 0.0 || ratios.back() <= 0.5 * ratios.front())) {
        ok = false;
        r.witness = xs.back();
        r.witness_upper = xs.front();
        r.note = "remainder ratio does not decay toward 0";
    }
    // Decay exponent s from r_k ~ 2^{-k s}, least squares on the nonzero ratios.
    double sk = 0, sl = 0, skk = 0, skl = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ratios[i] <= 0.0) continue;
        double k = -std::log2(xs[i]);
        double l = std::log2(ratios[i]);
        sk += k;
        sl += l;
        skk += k * k;
        skl += k * l;
        ++m;
    }
    if (m >= 2) {
        double slope = (m * skl - sk * sl) / (m * skk - sk * sk);
        r.estimate = -slope;
    } else if (ok) {
        r.note = "remainder vanishes on the dyadic sequence";
    }
    if (ok) {
        const BranchSpec& b = map.branch(0);
        auto pts = cell_grid(0.0, map.b_o(), grid_size);
        r.grid_size += pts.size();
        for (double x : pts) {
            if (!(b.second_derivative(x) > 0.0)) {
                ok = false;
                r.witness = x;
                r.note = "phi_0 is not strictly convex on (0, b_o)";
                break;
            }
        }
    }
    r.passed = ok;
    return r;
}

CheckReport check_A3(const IntervalMap& map, std::size_t grid_size, std::size_t j_max) {
    CheckReport r;
    r.assumption_id = AssumptionId::A3;
    std::size_t cells = checked_branches(map, j_max);
    std::size_t per_cell = std::max<std::size_t>(64, grid_size / cells);
    double best = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    std::size_t arg_branch = 0;
    for (std::size_t j = 0; j < cells; ++j) {
        const BranchSpec& b = map.branch(j);
        double lo = std::max(b.lower, map.b_o());
        if (lo >= b.upper) continue;
        auto pts = cell_grid(lo, b.upper, per_cell);
        if (lo == map.b_o() && lo > b.lower) pts.insert(pts.begin(), lo);
        r.grid_size += pts.size();
        for (double x : pts) {
            double d = b.derivative(x);
            if (d < best) {
                best = d;
                arg = x;
                arg_branch = j;
            }
        }
    }
    r.estimate = best;
    r.passed = best > 1.0 + 1e-9;
    if (!r.passed) {
        r.witness = arg;
        r.branch = arg_branch;
    }
    return r;
}

CheckReport check_A4(const IntervalMap& map, std::size_t grid_size, std::size_t j_max) {
    CheckReport r;
    r.assumption_id = AssumptionId::A4;
    constexpr int kDecades = 15;
    double a1 = map.endpoint(1);
    const BranchSpec& b0 = map.branch(0);
    auto ratio0 = [&](double x) {
        double d = b0.derivative(x);
        return std::abs(b0.second_derivative(x)) / (d * d);
    };
    // sup over cells away from 0 (all branches j >= 1 plus branch 0 above a_1/10)
    double base = 0.0;
    std::size_t cells = checked_branches(map, j_max);
    std::size_t per_cell = std::max<std::size_t>(64, grid_size / (cells + kDecades));
    for (std::size_t j = 1; j < cells; ++j) {
        const BranchSpec& b = map.branch(j);
        for (double x : cell_grid(b.lower, b.upper, per_cell)) {
            double d = b.derivative(x);
            base = std::max(base, std::abs(b.second_derivative(x)) / (d * d));
            ++r.grid_size;
        }
    }
    for (double x : cell_grid(0.1 * a1, a1, per_cell)) {
        base = std::max(base, ratio0(x));
        ++r.grid_size;
    }
    // running sup decade by decade toward 0
    std::vector<double> sups;
    double running = base;
    double last_arg = 0.0;
    for (int d = 1; d <= kDecades; ++d) {
        double hi = a1 * std::pow(10.0, -d + 1), lo = a1 * std::pow(10.0, -d);
        for (double x : geometric_points(lo, hi, std::max<std::size_t>(16, per_cell))) {
            double v = ratio0(x);
            if (v > running) {
                running = v;
                last_arg = x;
            }
            ++r.grid_size;
        }
        sups.push_back(running);
    }
    r.estimate = running;
    double prev = sups[sups.size() - 2];
    r.passed = std::isfinite(running) && running - prev <= 0.01 * prev;
    if (!r.passed) {
        r.witness = last_arg;
        r.witness_upper = a1 * std::pow(10.0, -kDecades + 1);
        r.note = "sup of |T''|/T'^2 still grows in the last decade toward 0";
    }
    return r;
}

CheckReport check_A5prime(const IntervalMap& map, std::size_t j, std::size_t grid_size) {
    CheckReport r;
    r.assumption_id = AssumptionId::A5prime;
    r.branch = j;
    const BranchSpec& b = map.branch(j);
    auto pts = cell_grid(b.lower, b.upper, grid_size);
    std::vector<double> g(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) g[i] = a5prime_quantity(map, j, pts[i]);
    r.grid_size = pts.size();
    std::size_t bad = first_decrease(g);
    r.passed = bad == static_cast<std::size_t>(-1);
    if (!r.passed) {
        r.witness = pts[bad];
        r.witness_upper = pts[bad + 1];
    }
    return r;
}

CheckReport check_A5prime_all(const IntervalMap& map, std::size_t grid_size, std::size_t j_max) {
    CheckReport all;
    all.assumption_id = AssumptionId::A5prime;
    all.passed = true;
    std::size_t n = checked_branches(map, j_max);
    for (std::size_t j = 0; j < n; ++j) {
        CheckReport r = check_A5prime(map, j, grid_size);
        all.grid_size += r.grid_size;
        if (!r.passed) return r;
    }
    all.note = "branches checked: " + std::to_string(n);
    return all;
}

double check_A5prime_pm_closed_form(double kappa, double p, int j, double z) {
    if (!(z > 0.0)) throw DomainError("z must be positive");
    double c = static_cast<double>(j) * std::pow(kappa, 1.0 / p);
    double zp = std::pow(z, -1.0 / p);
    double bracket = 1.0 + z - c * zp;
    if (!(bracket > 0.0)) throw DomainError("z corresponds to x <= a_j");
    double num = p * z + c * zp * (1.0 / z + 2.0 * p + 1.0) / p;
    return (p + 1.0) * num / (bracket * (1.0 + (p + 1.0) * z));
}

CheckReport check_A5(const IntervalMap& map, std::size_t grid_size, std::size_t j_max) {
    CheckReport r;
    r.assumption_id = AssumptionId::A5;
    auto xi = cell_grid(0.0, 1.0, grid_size);
    std::size_t limit = map.branch_limit();
    // terms[i][k]; countable maps are truncated once a term falls below 1e-16
    std::vector<std::vector<double>> terms(xi.size());
    parallel_for(xi.size(), [&](std::size_t i) {
        auto& row = terms[i];
        for (std::size_t k = 0; k < limit; ++k) {
            double t = a5_term(map, k, xi[i]);
            row.push_back(t);
            if (map.truncated() && t < 1e-16) break;
        }
    });
    std::size_t jn = std::min(j_max + 1, limit);
    r.grid_size = xi.size();
    std::vector<std::vector<double>> sums(jn, std::vector<double>(xi.size(), 0.0));
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const auto& row = terms[i];
        double s = 0.0;
        for (std::size_t k = row.size(); k-- > 0;) {
            s += row[k];
            if (k < jn) sums[k][i] = s;
        }
    }
    r.passed = true;
    for (std::size_t j = 0; j < jn; ++j) {
        std::size_t bad = first_decrease(sums[j]);
        if (bad != static_cast<std::size_t>(-1)) {
            r.passed = false;
            r.branch = j;
            r.witness = xi[bad];
            r.witness_upper = xi[bad + 1];
            return r;
        }
    }
    r.note = "tail sums checked for j = 0.." + std::to_string(jn - 1);
    return r;
}

CheckReport check_perturbation_bounds(const IntervalMap& map, const PerturbationSpec& spec, std::size_t grid_size) {
    CheckReport r;
    r.assumption_id = AssumptionId::Perturbation;
    r.passed = true;
    double p = map.p(), eps = spec.epsilon;
    bool lsv = map.family() == Family::PerturbedLSV || map.family() == Family::GeneralizedLSV;
    double worst = 0.0;
    auto fail = [&](double x, std::size_t j, const std::string& what) {
        if (r.passed) {
            r.passed = false;
            r.witness = x;
            r.branch = j;
            r.note = what;
        }
    };
    std::size_t n = std::min(map.branch_limit(), spec.branches.size());
    for (std::size_t j = 0; j < n; ++j) {
        if (!spec.has(j)) continue;
        const Perturbation& e = spec.branches[j];
        const BranchSpec& b = map.branch(j);
        auto pts = cell_grid(b.lower, b.upper, grid_size);
        r.grid_size += pts.size();
        for (double x : pts) {
            double v = e.eta(x);
            double d1 = e.d_eta ? e.d_eta(x) : 0.0;
            double d2 = e.dd_eta ? e.dd_eta(x) : 0.0;
            if (j == 0 || !lsv) {
                double m = j == 0 ? 2.0 * p : p; // exponent of the first-derivative bound
                double ratio = std::max({std::abs(v) / (eps * std::pow(x, m + 1.0)),
                                         std::abs(d1) / (eps * std::pow(x, m)),
                                         std::abs(d2) / (eps * std::pow(x, m - 1.0))});
                worst = std::max(worst, ratio);
                if (ratio > 1.0) fail(x, j, "eta exceeds its epsilon bound");
            } else {
                double w = b.upper - b.lower;
                double cap = b.lower / w;
                double lhs = v - x * d1;
                worst = std::max(worst, lhs / cap);
                if (d2 > 1e-12) fail(x, j, "eta_j is not concave");
                if (lhs > cap * (1.0 + 1e-12)) fail(x, j, "eta_j - x eta_j' exceeds a_j / (a_{j+1} - a_j)");
            }
        }
    }
    r.estimate = worst;
    return r;
}

} // namespace glomix
