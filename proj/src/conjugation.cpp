#include "glomix/conjugation.hpp"

#include "glomix/errors.hpp"
#include "glomix/grid.hpp"
#include "glomix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glomix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double psi(double x, double p) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("Psi is defined on [0,1]");
    if (x == 0.0) return kInf;
    return std::expm1(-p * std::log(x)) / p;
}

double psi_inv(double y, double p) {
    if (!(y >= 0.0)) throw DomainError("Psi^{-1} is defined on [0, inf)");
    if (y == kInf) return 0.0;
    return std::exp(-std::log1p(p * y) / p);
}

HalfLineMap::HalfLineMap(IntervalMap source) : source_(std::move(source)), y_max_(psi(1e-12, source_.p())) {}

double HalfLineMap::endpoint_o(std::size_t j) const {
    if (j == 0) return kInf;
    return psi(source_.endpoint(j), p());
}

std::size_t HalfLineMap::locate(double y) const {
    if (!(y >= 0.0)) throw DomainError("half-line point must be >= 0");
    if (y == kInf) throw DomainError("half-line point must be finite");
    // y in [Psi(a_{j+1}), Psi(a_j))  <=>  x = Psi^{-1}(y) in (a_j, a_{j+1}]
    return source_.locate(psi_inv(y, p()));
}

double HalfLineMap::operator()(double y) const {
    double p = this->p();
    double x = psi_inv(y, p);
    std::size_t j = source_.locate(x);
    if (j == 0) {
        const BranchSpec& b = source_.branch(0);
        if (b.displacement) {
            // Psi(x + d) with x^{-p} = 1 + p y, avoiding the cancellation in x + d - x
            double d = b.displacement(x);
            return std::max(0.0, ((1.0 + p * y) * std::exp(-p * std::log1p(d / x)) - 1.0) / p);
        }
    }
    return psi(source_(x), p);
}

double HalfLineMap::inverse(std::size_t k, double y) const {
    double xi = psi_inv(y, p());
    return psi(source_.inverse(k, xi), p());
}

double HalfLineMap::inverse_derivative(std::size_t k, double y) const {
    double xi = psi_inv(y, p());
    double x = source_.inverse(k, xi);
    return std::pow(x / xi, -p() - 1.0) * source_.inverse_derivative(k, xi);
}

HalfLineMap conjugate(const IntervalMap& map) { return HalfLineMap(map); }

double conjugate_inverse_branch_derivative(const HalfLineMap& hmap, std::size_t k, double y) {
    return hmap.inverse_derivative(k, y);
}

double b3_tail_sum(const HalfLineMap& hmap, std::size_t j, double y) {
    std::vector<double> terms;
    for (std::size_t k = j; k < hmap.branch_limit(); ++k) {
        double t = hmap.inverse_derivative(k, y);
        terms.push_back(t);
        if (hmap.truncated() && t < 1e-16) break;
    }
    double s = 0.0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) s += *it;
    return s;
}

CheckReport check_B3(const HalfLineMap& hmap, std::size_t grid_size, std::size_t j_max) {
    CheckReport r;
    r.assumption_id = AssumptionId::B3;
    auto ys = halfline_grid(1e-9, hmap.y_max(), grid_size);
    std::size_t limit = hmap.branch_limit();
    std::vector<std::vector<double>> terms(ys.size());
    parallel_for(ys.size(), [&](std::size_t i) {
        for (std::size_t k = 0; k < limit; ++k) {
            double t = hmap.inverse_derivative(k, ys[i]);
            terms[i].push_back(t);
            if (hmap.truncated() && t < 1e-16) break;
        }
    });
    std::size_t jn = std::min(j_max + 1, limit);
    r.grid_size = ys.size();
    r.passed = true;
    std::vector<double> sums(ys.size());
    for (std::size_t j = 0; j < jn && r.passed; ++j) {
        for (std::size_t i = 0; i < ys.size(); ++i) {
            double s = 0.0;
            const auto& row = terms[i];
            for (std::size_t k = row.size(); k-- > j;) s += row[k];
            sums[i] = s;
        }
        for (std::size_t i = 1; i < ys.size(); ++i) {
            if (sums[i] - sums[i - 1] > kMonotoneTolerance * std::max(1.0, std::abs(sums[i - 1]))) {
                r.passed = false;
                r.branch = j;
                r.witness = ys[i - 1];
                r.witness_upper = ys[i];
                break;
            }
        }
    }
    if (r.passed) r.note = "tail sums checked for j = 0.." + std::to_string(jn - 1);
    return r;
}

MeasureSpec pushforward_density(const MeasureSpec& measure_o, double p) { return MeasureSpec::pushforward(measure_o, p); }

} // namespace glomix
