#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace glomix {

enum class Space { UnitInterval, HalfLine };

std::string to_string(Space s);

/// How a GridFunction is evaluated between nodes.
enum class Interpolation {
    Linear, ///< piecewise linear; monotone data stays monotone
    Step,   ///< left-continuous step: value of the right node on (y_i, y_{i+1}]
};

/// Sampled function on a strictly increasing grid. Left of the grid the first
/// value is held; right of the grid the function is zero.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::vector<double> grid, std::vector<double> values, Space space,
                 Interpolation interpolation = Interpolation::Linear);

    [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }
    [[nodiscard]] Space space() const { return space_; }
    [[nodiscard]] Interpolation interpolation() const { return interpolation_; }
    [[nodiscard]] std::size_t size() const { return grid_.size(); }

    [[nodiscard]] double operator()(double y) const;

    /// Trapezoid L1 norm over the grid span (exact for Linear data).
    [[nodiscard]] double l1_norm() const;
    /// Trapezoid integral over the grid span (exact for Linear data).
    [[nodiscard]] double integral() const;
    /// Consecutive differences all <= tol.
    [[nodiscard]] bool is_decreasing(double tol = 0.0) const;
    /// Largest consecutive increase (0 when decreasing).
    [[nodiscard]] double worst_increase() const;

    void scale(double factor);

    /// CSV with header "y,value", values printed with 17 significant digits.
    void write_csv(std::ostream& out) const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    Space space_ = Space::HalfLine;
    Interpolation interpolation_ = Interpolation::Linear;
};

/// Points lo, lo*r, ..., hi (n points, geometric).
std::vector<double> geometric_points(double lo, double hi, std::size_t n);

/// Interval grid on [x_min, 1]: geometric toward x_min, with `extra` points merged in.
std::vector<double> interval_grid(double x_min, std::size_t n, std::span<const double> extra = {});

/// Half-line grid on [0, y_max]: 0, then geometric from y_min to y_max, with `extra` merged in.
std::vector<double> halfline_grid(double y_min, double y_max, std::size_t n,
                                  std::span<const double> extra = {});

/// Strictly interior sample points of (lo, hi): geometric clusters toward both
/// ends (down to 1e-12 of the width) plus a uniform body. Returned sorted.
std::vector<double> cell_grid(double lo, double hi, std::size_t n);

/// Sorts, removes duplicates and points closer than a relative 1e-15.
void normalize_grid(std::vector<double>& grid);

} // namespace glomix
