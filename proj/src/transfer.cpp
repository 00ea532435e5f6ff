#include "glomix/transfer.hpp"

#include "glomix/errors.hpp"
#include "glomix/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

namespace glomix {

namespace {

constexpr double kTailCut = 1e-16;

using Gauss20 = boost::math::quadrature::gauss<double, 20>;

// Sorted breakpoints of F inside (lo, hi).
std::vector<double> sorted_breakpoints(const Observable& F, double lo, double hi) {
    std::vector<double> bps = F.breakpoints ? F.breakpoints(lo, hi) : std::vector<double>{};
    std::sort(bps.begin(), bps.end());
    return bps;
}

// int_a^b F(y) w(y) dy split at the breakpoints in [*it, ...) lying inside (a, b).
template <class W>
double piece_integral(const Observable& F, const W& w, double a, double b, std::vector<double>::const_iterator& it,
                      std::vector<double>::const_iterator end) {
    double s = 0.0, cursor = a;
    while (it != end && *it <= a) ++it;
    auto f = [&](double y) { return F(y) * w(y); };
    while (it != end && *it < b) {
        s += Gauss20::integrate(f, cursor, *it);
        cursor = *it++;
    }
    s += Gauss20::integrate(f, cursor, b);
    return s;
}

} // namespace

BranchSystem BranchSystem::of(const IntervalMap& map) {
    BranchSystem s;
    s.space = Space::UnitInterval;
    s.count = map.branch_limit();
    s.truncated = map.truncated();
    const IntervalMap* m = &map;
    s.inverse = [m](std::size_t k, double y) { return m->inverse(k, y); };
    s.inverse_derivative = [m](std::size_t k, double y) { return m->inverse_derivative(k, y); };
    return s;
}

BranchSystem BranchSystem::of(const HalfLineMap& hmap) {
    BranchSystem s;
    s.space = Space::HalfLine;
    s.count = hmap.branch_limit();
    s.truncated = hmap.truncated();
    const HalfLineMap* m = &hmap;
    s.inverse = [m](std::size_t k, double y) { return m->inverse(k, y); };
    s.inverse_derivative = [m](std::size_t k, double y) { return m->inverse_derivative(k, y); };
    return s;
}

double pf_apply_at(const BranchSystem& sys, const RealFn& g, double y) {
    double s = 0.0;
    for (std::size_t k = 0; k < sys.count; ++k) {
        double w = sys.inverse_derivative(k, y);
        if (sys.truncated && w < kTailCut) break;
        s += w * g(sys.inverse(k, y));
    }
    return s;
}

RealFn pf_apply(const BranchSystem& sys, RealFn g) {
    return [sys, g = std::move(g)](double y) { return pf_apply_at(sys, g, y); };
}

RealFn pf_power(const BranchSystem& sys, RealFn g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) g = pf_apply(sys, std::move(g));
    return g;
}

GridFunction pf_apply(const BranchSystem& sys, const RealFn& g, const std::vector<double>& grid) {
    std::vector<double> values(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { values[i] = pf_apply_at(sys, g, grid[i]); });
    return GridFunction(grid, std::move(values), sys.space);
}

GridFunction pf_apply(const BranchSystem& sys, const GridFunction& g) {
    GridTransfer op(sys, g.grid(), g.space(), g.interpolation());
    return op.apply(g);
}

GridTransfer::GridTransfer(const BranchSystem& sys, std::vector<double> grid, Space space, Interpolation interpolation)
    : grid_(std::move(grid)), space_(space), interpolation_(interpolation) {
    std::size_t n = grid_.size();
    std::vector<std::vector<Entry>> rows(n);
    parallel_for(n, [&](std::size_t i) {
        auto& row = rows[i];
        for (std::size_t k = 0; k < sys.count; ++k) {
            double w = sys.inverse_derivative(k, grid_[i]);
            if (sys.truncated && w < kTailCut) break;
            double z = sys.inverse(k, grid_[i]);
            if (z <= grid_.front()) {
                row.push_back({0, w});
                continue;
            }
            if (z > grid_.back()) continue;
            auto it = std::lower_bound(grid_.begin(), grid_.end(), z);
            std::size_t idx = static_cast<std::size_t>(it - grid_.begin());
            if (grid_[idx] == z || interpolation_ == Interpolation::Step) {
                row.push_back({idx, w});
                continue;
            }
            double t = (z - grid_[idx - 1]) / (grid_[idx] - grid_[idx - 1]);
            row.push_back({idx - 1, w * (1.0 - t)});
            row.push_back({idx, w * t});
        }
    });
    offsets_.reserve(n + 1);
    offsets_.push_back(0);
    for (auto& row : rows) {
        entries_.insert(entries_.end(), row.begin(), row.end());
        offsets_.push_back(entries_.size());
    }
}

std::vector<double> GridTransfer::apply(const std::vector<double>& values) const {
    if (values.size() != grid_.size()) throw DomainError("GridTransfer: value count does not match the grid");
    std::vector<double> out(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) s += entries_[e].weight * values[entries_[e].index];
        out[i] = s;
    });
    return out;
}

GridFunction GridTransfer::apply(const GridFunction& g) const {
    return GridFunction(grid_, apply(g.values()), space_, interpolation_);
}

IndicatorImage pf_indicator(const HalfLineMap& hmap, double a) {
    if (!(a > 0.0)) throw DomainError("pf_indicator needs a > 0");
    IndicatorImage img;
    img.j = hmap.locate(a);
    img.b = hmap(a);
    const HalfLineMap* m = &hmap;
    std::size_t j = img.j;
    img.upper = [m, j](double y) { return b3_tail_sum(*m, j, y); };
    img.lower = [m, j](double y) { return j + 1 < m->branch_limit() ? b3_tail_sum(*m, j + 1, y) : 0.0; };
    return img;
}

ConeReport check_cone_preservation(const HalfLineMap& hmap, const GridFunction& g, std::size_t n, double tol) {
    if (!g.is_decreasing(0.0)) throw DomainError("cone check needs a decreasing initial function");
    ConeReport rep;
    double scale = 0.0;
    for (double v : g.values()) scale = std::max(scale, std::abs(v));
    rep.iterates.push_back(g);
    if (n == 0) return rep;
    GridTransfer op(BranchSystem::of(hmap), g.grid(), Space::HalfLine, g.interpolation());
    for (std::size_t k = 1; k <= n; ++k) {
        rep.iterates.push_back(op.apply(rep.iterates.back()));
        double v = rep.iterates.back().worst_increase() / scale;
        if (v > rep.worst_violation) {
            rep.worst_violation = v;
            rep.worst_iterate = k;
        }
    }
    rep.passed = rep.worst_violation <= tol;
    return rep;
}

DensityEstimate estimate_invariant_density(const IntervalMap& map, const DensityOptions& opt) {
    if (!(opt.x_min > 0.0 && opt.x_min < 0.5)) throw DomainError("x_min must lie in (0, 1/2)");
    double p = map.p();
    std::vector<double> extra{0.5};
    for (std::size_t j = 1; j < map.branch_limit(); ++j) extra.push_back(map.endpoint(j));
    std::vector<double> grid = interval_grid(opt.x_min, opt.grid_size, extra);
    std::size_t n = grid.size();
    double x0 = grid.front();
    // Below the grid H is held constant at an indifferent fixed point (H(0) > 0);
    // for an expanding fixed point the density h is held instead.
    bool hold_H = map.branch(0).derivative(x0) < 1.0 + 1e-3;

    struct Entry {
        std::size_t index;
        double weight;
    };
    std::vector<std::vector<Entry>> rows(n);
    parallel_for(n, [&](std::size_t i) {
        double x = grid[i];
        double xp = std::pow(x, p);
        for (std::size_t k = 0; k < map.branch_limit(); ++k) {
            double d = map.inverse_derivative(k, x);
            if (map.truncated() && d < kTailCut) break;
            double z = map.inverse(k, x);
            double w = xp * d * std::pow(z, -p);
            if (z <= x0) {
                rows[i].push_back({0, hold_H ? w : w * std::pow(z / x0, p)});
                continue;
            }
            auto it = std::lower_bound(grid.begin(), grid.end(), z);
            std::size_t idx = static_cast<std::size_t>(it - grid.begin());
            if (grid[idx] == z) {
                rows[i].push_back({idx, w});
                continue;
            }
            double t = (z - grid[idx - 1]) / (grid[idx] - grid[idx - 1]);
            rows[i].push_back({idx - 1, w * (1.0 - t)});
            rows[i].push_back({idx, w * t});
        }
    });

    std::vector<double> H(n);
    for (std::size_t i = 0; i < n; ++i) H[i] = std::pow(grid[i], p);
    auto normalize = [&](std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            if (grid[i - 1] < 0.5) continue;
            double h0 = v[i - 1] / std::pow(grid[i - 1], p), h1 = v[i] / std::pow(grid[i], p);
            s += 0.5 * (grid[i] - grid[i - 1]) * (h0 + h1);
        }
        for (double& e : v) e /= s;
    };
    normalize(H);

    DensityEstimate est;
    std::vector<double> prev(n);
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        prev = H;
        if (opt.scheme == DensityScheme::Jacobi) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (const auto& e : rows[i]) s += e.weight * prev[e.index];
                H[i] = s;
            }
        } else {
            // ascending in-place sweep; branch-0 preimages lie below x
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0, self = 0.0;
                for (const auto& e : rows[i]) {
                    if (e.index == i)
                        self += e.weight;
                    else
                        s += e.weight * H[e.index];
                }
                H[i] = self < 1.0 - 1e-14 ? s / (1.0 - self) : s + self * H[i];
            }
        }
        normalize(H);
        double diff = 0.0, top = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diff = std::max(diff, std::abs(H[i] - prev[i]));
            top = std::max(top, std::abs(H[i]));
        }
        est.variation.push_back(diff / top);
        est.iterations = it + 1;
        if (diff / top < opt.tolerance) {
            est.converged = true;
            break;
        }
    }
    std::size_t m = est.variation.size();
    if (!est.converged && m > 10 && est.variation[m - 1] >= est.variation[m - 11]) est.non_convergence = true;

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = H[i] / std::pow(grid[i], p);

    // H(0) by a least-squares line through the nodes in [x_min, 10 x_min]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n && grid[i] <= 10.0 * x0; ++i) {
        sx += grid[i];
        sy += H[i];
        sxx += grid[i] * grid[i];
        sxy += grid[i] * H[i];
        ++cnt;
    }
    if (cnt >= 2) {
        double c = static_cast<double>(cnt);
        double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
        est.H0 = (sy - slope * sx) / c;
        double resid = 0.0;
        for (std::size_t i = 0; i < cnt; ++i) resid = std::max(resid, std::abs(H[i] - est.H0 - slope * grid[i]));
        est.H0_error = std::abs(est.H0 - H[0]) + resid + (est.variation.empty() ? 0.0 : est.variation.back());
    } else {
        est.H0 = H[0];
        est.H0_error = std::abs(H[0]);
    }
    est.H = GridFunction(grid, std::move(H), Space::UnitInterval);
    est.h = GridFunction(std::move(grid), std::move(h), Space::UnitInterval);
    return est;
}

GridFunction gamma_truncate(const GridFunction& g, double M) {
    const auto& grid = g.grid();
    if (M >= grid.back()) return g;
    double gM = g(M);
    std::vector<double> ys, vs;
    ys.reserve(grid.size() + 1);
    vs.reserve(grid.size() + 1);
    bool inserted = M <= grid.front();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!inserted && grid[i] > M) {
            ys.push_back(M);
            vs.push_back(gM);
            inserted = true;
        }
        if (grid[i] == M) inserted = true;
        ys.push_back(grid[i]);
        vs.push_back(std::min(gM, g.values()[i]));
    }
    return GridFunction(std::move(ys), std::move(vs), g.space(), g.interpolation());
}

GeneralizedInverse generalized_inverse(const GridFunction& g, double r) {
    const auto& y = g.grid();
    const auto& v = g.values();
    double start = g.space() == Space::HalfLine ? 0.0 : y.front();
    if (v.front() <= r) return {start, false};
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (v[i] > r) continue;
        if (g.interpolation() == Interpolation::Step) return {y[i - 1], false};
        double t = (v[i - 1] - r) / (v[i - 1] - v[i]);
        return {y[i - 1] + t * (y[i] - y[i - 1]), false};
    }
    return {y.back(), true};
}

double integrate_against(const Observable& F, const GridFunction& g) {
    const auto& y = g.grid();
    const auto& v = g.values();
    auto bps = sorted_breakpoints(F, y.front(), y.back());
    auto it = bps.cbegin();
    double s = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        double a = y[i - 1], b = y[i], va = v[i - 1], vb = v[i];
        if (g.interpolation() == Interpolation::Step) {
            s += piece_integral(F, [vb](double) { return vb; }, a, b, it, bps.cend());
        } else {
            double w = b - a;
            s += piece_integral(F, [=](double t) { return va + (vb - va) * (t - a) / w; }, a, b, it, bps.cend());
        }
    }
    return s;
}

FubiniDiagnostic fubini_diagnostic(const Observable& F, const GridFunction& gamma, double M) {
    const auto& y = gamma.grid();
    auto bps = sorted_breakpoints(F, 0.0, y.back());
    // Phi(y_i) = int_0^{y_i} F, then Phi(a) by a partial cell
    std::vector<double> cum(y.size(), 0.0);
    {
        auto it = bps.cbegin();
        double prev = 0.0, acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] > prev) acc += piece_integral(F, [](double) { return 1.0; }, prev, y[i], it, bps.cend());
            cum[i] = acc;
            prev = y[i];
        }
    }
    auto Phi = [&](double a) {
        if (a <= y.front()) {
            auto it = bps.cbegin();
            return a > 0.0 ? piece_integral(F, [](double) { return 1.0; }, 0.0, a, it, bps.cend()) : 0.0;
        }
        auto pos = std::upper_bound(y.begin(), y.end(), a);
        std::size_t i = static_cast<std::size_t>(pos - y.begin()) - 1;
        if (y[i] == a) return cum[i];
        auto it = std::lower_bound(bps.cbegin(), bps.cend(), y[i]);
        return cum[i] + piece_integral(F, [](double) { return 1.0; }, y[i], a, it, bps.cend());
    };

    FubiniDiagnostic d;
    double sup = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] >= M && y[i] > 0.0) sup = std::max(sup, std::abs(cum[i] / y[i]));
    d.epsilon = 2.0 * sup;
    d.direct = integrate_against(F, gamma);

    // r-integral, split at the distinct node values of gamma
    double top = gamma(M);
    std::vector<double> levels{0.0, top};
    for (double v : gamma.values())
        if (v > 0.0 && v < top) levels.push_back(v);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    auto inner = [&](double r) { return Phi(generalized_inverse(gamma, r).value); };
    double via = 0.0;
    for (std::size_t i = 1; i < levels.size(); ++i) via += Gauss20::integrate(inner, levels[i - 1], levels[i]);
    d.via_inverse = via;

    double norm = gamma.l1_norm();
    d.bound = 0.5 * d.epsilon * norm;
    d.slack = std::abs(d.direct - d.via_inverse) + 1e-10 * std::max(1.0, norm);
    d.holds = std::abs(d.direct) <= d.bound + d.slack;
    return d;
}

} // namespace glomix
