#include "glomix/grid.hpp"

#include "glomix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace glomix {

std::string to_string(Space s) { return s == Space::UnitInterval ? "interval" : "halfline"; }

GridFunction::GridFunction(std::vector<double> grid, std::vector<double> values, Space space,
                           Interpolation interpolation)
    : grid_(std::move(grid)), values_(std::move(values)), space_(space),
      interpolation_(interpolation) {
    if (grid_.size() != values_.size())
        throw DomainError("GridFunction: grid and values differ in length");
    if (grid_.empty()) throw DomainError("GridFunction: empty grid");
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw DomainError("GridFunction: grid must be strictly increasing");
}

double GridFunction::operator()(double y) const {
    if (y <= grid_.front()) return values_.front();
    if (y > grid_.back()) return 0.0;
    auto it = std::lower_bound(grid_.begin(), grid_.end(), y);
    std::size_t k = static_cast<std::size_t>(it - grid_.begin());
    if (grid_[k] == y) return values_[k];
    if (interpolation_ == Interpolation::Step) return values_[k];
    double t = (y - grid_[k - 1]) / (grid_[k] - grid_[k - 1]);
    return values_[k - 1] + t * (values_[k] - values_[k - 1]);
}

double GridFunction::integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        double w = grid_[i] - grid_[i - 1];
        if (interpolation_ == Interpolation::Step)
            s += w * values_[i];
        else
            s += 0.5 * w * (values_[i] + values_[i - 1]);
    }
    return s;
}

double GridFunction::l1_norm() const {
    double s = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        double w = grid_[i] - grid_[i - 1];
        double a = values_[i - 1], b = values_[i];
        if (interpolation_ == Interpolation::Step) {
            s += w * std::abs(b);
        } else if ((a >= 0) == (b >= 0)) {
            s += 0.5 * w * std::abs(a + b);
        } else {
            // sign change inside the cell
            double t = a / (a - b);
            s += 0.5 * w * (t * std::abs(a) + (1 - t) * std::abs(b));
        }
    }
    return s;
}

bool GridFunction::is_decreasing(double tol) const {
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (values_[i] - values_[i - 1] > tol) return false;
    return true;
}

double GridFunction::worst_increase() const {
    double worst = 0.0;
    for (std::size_t i = 1; i < values_.size(); ++i)
        worst = std::max(worst, values_[i] - values_[i - 1]);
    return worst;
}

void GridFunction::scale(double factor) {
    for (double& v : values_) v *= factor;
}

void GridFunction::write_csv(std::ostream& out) const {
    out << "y,value\n";
    char buf[64];
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid_[i], values_[i]);
        out << buf;
    }
}

std::vector<double> geometric_points(double lo, double hi, std::size_t n) {
    if (!(lo > 0 && hi > lo) || n < 2) throw DomainError("geometric_points: need 0 < lo < hi, n >= 2");
    std::vector<double> pts(n);
    double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        pts[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
    pts.front() = lo;
    pts.back() = hi;
    return pts;
}

void normalize_grid(std::vector<double>& grid) {
    std::sort(grid.begin(), grid.end());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double v : grid) {
        if (!out.empty() && v - out.back() <= 1e-15 * std::max(1.0, std::abs(v))) continue;
        out.push_back(v);
    }
    grid.swap(out);
}

std::vector<double> interval_grid(double x_min, std::size_t n, std::span<const double> extra) {
    if (!(x_min > 0 && x_min < 1)) throw DomainError("interval_grid: x_min must lie in (0,1)");
    // Geometric spacing alone gets coarse near 1; blend with a uniform part.
    std::size_t n_geo = n - n / 4;
    std::vector<double> grid = geometric_points(x_min, 1.0, std::max<std::size_t>(n_geo, 2));
    std::size_t n_uni = n / 4;
    for (std::size_t i = 1; i < n_uni; ++i)
        grid.push_back(static_cast<double>(i) / static_cast<double>(n_uni));
    for (double e : extra)
        if (e >= x_min && e <= 1.0) grid.push_back(e);
    normalize_grid(grid);
    return grid;
}

std::vector<double> halfline_grid(double y_min, double y_max, std::size_t n, std::span<const double> extra) {
    if (!(y_min > 0 && y_max > y_min)) throw DomainError("halfline_grid: need 0 < y_min < y_max");
    std::size_t n_uni = std::min<double>(y_max, 64.0) > 1 ? n / 4 : 0;
    std::vector<double> grid = geometric_points(y_min, y_max, std::max<std::size_t>(n - n_uni, 2));
    grid.push_back(0.0);
    // Uniform body on [0, min(y_max, 64)] where the branch structure lives.
    double span = std::min(y_max, 64.0);
    for (std::size_t i = 1; i < n_uni; ++i)
        grid.push_back(span * static_cast<double>(i) / static_cast<double>(n_uni));
    for (double e : extra)
        if (e >= 0.0 && e <= y_max) grid.push_back(e);
    normalize_grid(grid);
    return grid;
}

std::vector<double> cell_grid(double lo, double hi, std::size_t n) {
    if (!(hi > lo)) throw DomainError("cell_grid: empty cell");
    if (n < 8) n = 8;
    double w = hi - lo;
    std::vector<double> pts;
    pts.reserve(n + 8);
    std::size_t n_end = n / 8;
    std::size_t n_body = n - 2 * n_end;
    for (std::size_t i = 0; i < n_end; ++i) {
        double e = -12.0 + 11.0 * static_cast<double>(i) / static_cast<double>(n_end);
        double off = w * std::pow(10.0, e);
        pts.push_back(lo + off);
        pts.push_back(hi - off);
    }
    for (std::size_t i = 0; i < n_body; ++i)
        pts.push_back(lo + w * (static_cast<double>(i) + 0.5) / static_cast<double>(n_body));
    normalize_grid(pts);
    std::erase_if(pts, [&](double v) { return !(v > lo && v < hi); });
    return pts;
}

} // namespace glomix
