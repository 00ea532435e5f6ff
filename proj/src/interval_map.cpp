#include "glomix/interval_map.hpp"

#include "glomix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace glomix {

namespace {

constexpr double kSurjectivityTol = 1e-12;
constexpr int kMaxIterations = 200;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Root of kappa x^2 + x - c = 0 in [0, inf), written without cancellation.
double quadratic_root(double kappa, double c) { return 2.0 * c / (1.0 + std::sqrt(1.0 + 4.0 * kappa * c)); }

BranchSpec pm_branch(double kappa, double p, int j, double lo, double hi) {
    BranchSpec b;
    b.lower = lo;
    b.upper = hi;
    double shift = static_cast<double>(j);
    b.forward = [=](double x) { return x + kappa * std::pow(x, p + 1.0) - shift; };
    b.derivative = [=](double x) { return 1.0 + kappa * (p + 1.0) * std::pow(x, p); };
    b.second_derivative = [=](double x) { return kappa * (p + 1.0) * p * std::pow(x, p - 1.0); };
    if (p == 1.0) {
        b.inverse = [=](double xi) { return quadratic_root(kappa, xi + shift); };
        b.inverse_derivative = [=](double xi) {
            return 1.0 / (1.0 + 2.0 * kappa * quadratic_root(kappa, xi + shift));
        };
    }
    if (j == 0) b.displacement = [=](double x) { return kappa * std::pow(x, p + 1.0); };
    return b;
}

BranchSpec linear_branch(double lo, double hi) {
    BranchSpec b;
    b.lower = lo;
    b.upper = hi;
    double w = hi - lo;
    b.forward = [=](double x) { return (x - lo) / w; };
    b.derivative = [=](double) { return 1.0 / w; };
    b.second_derivative = [](double) { return 0.0; };
    b.inverse = [=](double xi) { return lo + xi * w; };
    b.inverse_derivative = [=](double) { return w; };
    return b;
}

BranchSpec perturb(BranchSpec b, const Perturbation& eta) {
    auto f = b.forward, d = b.derivative, dd = b.second_derivative, disp = b.displacement;
    auto e = eta.eta;
    auto de = eta.d_eta ? eta.d_eta : RealFn([](double) { return 0.0; });
    auto dde = eta.dd_eta ? eta.dd_eta : RealFn([](double) { return 0.0; });
    b.forward = [=](double x) { return f(x) + e(x); };
    b.derivative = [=](double x) { return d(x) + de(x); };
    b.second_derivative = [=](double x) { return dd(x) + dde(x); };
    if (disp) b.displacement = [=](double x) { return disp(x) + e(x); };
    b.inverse = nullptr;
    b.inverse_derivative = nullptr;
    return b;
}

double pm_endpoint(double kappa, double p, int j) {
    if (j == 0) return 0.0;
    RealFn f = [=](double x) { return x + kappa * std::pow(x, p + 1.0); };
    RealFn df = [=](double x) { return 1.0 + kappa * (p + 1.0) * std::pow(x, p); };
    return solve_increasing(f, df, static_cast<double>(j), 0.0, 1.0);
}

std::vector<double> normalize_endpoints(std::vector<double> endpoints) {
    if (endpoints.empty()) throw EndpointMismatch("endpoint list is empty");
    if (endpoints.front() != 0.0) endpoints.insert(endpoints.begin(), 0.0);
    if (endpoints.size() < 3) throw EndpointMismatch("need at least a_1 and a_N = 1");
    if (endpoints.back() != 1.0) throw EndpointMismatch("last endpoint must equal 1");
    for (std::size_t i = 1; i < endpoints.size(); ++i)
        if (!(endpoints[i] > endpoints[i - 1]))
            throw EndpointMismatch("endpoints must be strictly increasing");
    return endpoints;
}

void validate_branch(const BranchSpec& b, std::size_t j) {
    if (!b.forward || !b.derivative || !b.second_derivative)
        throw DomainError("branch " + std::to_string(j) + " is missing forward or derivative functions");
    if (!(b.upper > b.lower)) throw EndpointMismatch("branch " + std::to_string(j) + " has an empty cell");
    double lo = b.forward(b.lower), hi = b.forward(b.upper);
    if (std::abs(lo) > kSurjectivityTol || std::abs(hi - 1.0) > kSurjectivityTol)
        throw EndpointMismatch("branch " + std::to_string(j) + " is not onto [0,1]: phi(a_j) = " + fmt(lo) +
                               ", phi(a_{j+1}) = " + fmt(hi));
    for (int i = 1; i < 16; ++i) {
        double x = b.lower + (b.upper - b.lower) * i / 16.0;
        if (!(b.derivative(x) > 0.0))
            throw DomainError("branch " + std::to_string(j) + " is not strictly increasing at x = " + fmt(x));
    }
}

} // namespace

std::string to_string(Family f) {
    switch (f) {
    case Family::GeneralizedPM: return "GeneralizedPM";
    case Family::GeneralizedLSV: return "GeneralizedLSV";
    case Family::PerturbedPM: return "PerturbedPM";
    case Family::PerturbedLSV: return "PerturbedLSV";
    case Family::Custom: return "Custom";
    }
    return "Custom";
}

Family family_from_string(const std::string& s) {
    for (Family f : {Family::GeneralizedPM, Family::GeneralizedLSV, Family::PerturbedPM, Family::PerturbedLSV,
                     Family::Custom})
        if (to_string(f) == s) return f;
    throw ConfigError("unknown map family '" + s + "'");
}

double solve_increasing(const RealFn& f, const RealFn& df, double target, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (target <= flo) return lo;
    if (target >= fhi) return hi;
    double a = lo, b = hi;
    int it = 0;
    while (b - a > 1e-8 && it < kMaxIterations) {
        double m = 0.5 * (a + b);
        if (f(m) < target)
            a = m;
        else
            b = m;
        ++it;
    }
    double x = 0.5 * (a + b);
    for (; it < kMaxIterations; ++it) {
        double r = f(x) - target;
        if (r == 0.0) break;
        if (r < 0.0)
            a = x;
        else
            b = x;
        double next = x - r / df(x);
        if (!(next >= a && next <= b)) next = 0.5 * (a + b);
        double step = std::abs(next - x);
        x = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
    }
    double residual = std::abs(f(x) - target);
    if (!(residual <= 1e-14 * std::max(1.0, std::abs(target))))
        throw ConvergenceError("root finder failed: residual " + fmt(residual) + " at target " + fmt(target));
    return x;
}

IntervalMap::IntervalMap(std::vector<BranchSpec> branches, MapParameters params,
                         std::optional<PerturbationSpec> perturbation)
    : branches_(std::move(branches)), params_(params), perturbation_(std::move(perturbation)) {
    if (branches_.empty()) throw DomainError("map needs at least one branch");
    endpoints_.push_back(branches_.front().lower);
    for (const auto& b : branches_) endpoints_.push_back(b.upper);
    if (endpoints_.back() != 1.0) throw EndpointMismatch("cells must end at 1");
    if (params_.b_o == 0.0) params_.b_o = 0.5 * endpoints_[1];
    validate();
}

IntervalMap::IntervalMap(BranchGenerator generator, MapParameters params, std::size_t max_branches,
                         double min_width)
    : generator_(std::move(generator)), params_(params) {
    for (std::size_t j = 0; j < max_branches; ++j) {
        BranchSpec b = generator_(j);
        // a cell that only reaches 1 by rounding belongs to the unmaterialized tail
        if (j > 0 && (b.upper - b.lower < min_width || (b.upper >= 1.0 && b.upper - b.lower < 1e-12))) break;
        branches_.push_back(std::move(b));
        if (branches_.back().upper >= 1.0) {
            generator_ = nullptr;
            break;
        }
    }
    endpoints_.push_back(branches_.front().lower);
    for (const auto& b : branches_) endpoints_.push_back(b.upper);
    if (params_.b_o == 0.0) params_.b_o = 0.5 * endpoints_[1];
    validate();
}

void IntervalMap::validate() const {
    if (params_.p < 1.0) throw DomainError("p must be >= 1");
    if (!(params_.kappa > 0.0)) throw DomainError("kappa must be positive");
    if (endpoints_.front() != 0.0) throw EndpointMismatch("first cell must start at 0");
    for (std::size_t j = 0; j < branches_.size(); ++j) {
        if (j > 0 && branches_[j].lower != branches_[j - 1].upper)
            throw EndpointMismatch("cells are not contiguous at branch " + std::to_string(j));
        validate_branch(branches_[j], j);
    }
    if (!(params_.b_o > 0.0 && params_.b_o < endpoints_[1]))
        throw DomainError("b_o must lie in (0, a_1)");
}

std::optional<std::size_t> IntervalMap::branch_count() const {
    if (generator_) return std::nullopt;
    return branches_.size();
}

const BranchSpec& IntervalMap::branch(std::size_t j) const {
    if (j >= branches_.size()) throw DomainError("branch index " + std::to_string(j) + " out of range");
    return branches_[j];
}

BranchSpec IntervalMap::tail_branch(std::size_t j) const {
    if (j < branches_.size()) return branches_[j];
    if (!generator_) throw DomainError("branch index " + std::to_string(j) + " out of range");
    return generator_(j);
}

double IntervalMap::endpoint(std::size_t j) const {
    if (j < endpoints_.size()) return endpoints_[j];
    if (!generator_) throw DomainError("endpoint index out of range");
    return generator_(j).lower;
}

std::size_t IntervalMap::locate(double x) const {
    if (!(x > 0.0 && x <= 1.0)) throw DomainError("x = " + fmt(x) + " is outside (0,1]");
    if (x <= endpoints_.back()) {
        auto it = std::lower_bound(endpoints_.begin() + 1, endpoints_.end(), x);
        return static_cast<std::size_t>(it - (endpoints_.begin() + 1));
    }
    // countable tail beyond the materialized cells
    std::size_t j = branches_.size();
    for (;; ++j) {
        BranchSpec b = generator_(j);
        if (x <= b.upper || b.upper >= 1.0) return j;
    }
}

double IntervalMap::operator()(double x) const {
    std::size_t j = locate(x);
    double v = j < branches_.size() ? branches_[j].forward(x) : tail_branch(j).forward(x);
    return std::clamp(v, 0.0, 1.0);
}

double IntervalMap::derivative(double x) const {
    std::size_t j = locate(x);
    return j < branches_.size() ? branches_[j].derivative(x) : tail_branch(j).derivative(x);
}

double IntervalMap::second_derivative(double x) const {
    std::size_t j = locate(x);
    return j < branches_.size() ? branches_[j].second_derivative(x) : tail_branch(j).second_derivative(x);
}

double IntervalMap::inverse(std::size_t j, double xi) const {
    if (!(xi >= 0.0 && xi <= 1.0)) throw DomainError("xi = " + fmt(xi) + " is outside [0,1]");
    auto solve = [xi](const BranchSpec& b) {
        if (b.inverse) return b.inverse(xi);
        return solve_increasing(b.forward, b.derivative, xi, b.lower, b.upper);
    };
    if (j < branches_.size()) return solve(branches_[j]);
    return solve(tail_branch(j));
}

double IntervalMap::inverse_derivative(std::size_t j, double xi) const {
    auto eval = [&](const BranchSpec& b) {
        if (b.inverse_derivative) {
            if (!(xi >= 0.0 && xi <= 1.0)) throw DomainError("xi = " + fmt(xi) + " is outside [0,1]");
            return b.inverse_derivative(xi);
        }
        return 1.0 / b.derivative(inverse(j, xi));
    };
    if (j < branches_.size()) return eval(branches_[j]);
    return eval(tail_branch(j));
}

IntervalMap build_generalized_pm(int kappa, double p) {
    if (kappa < 1) throw DomainError("kappa must be a positive integer");
    if (p < 1.0) throw DomainError("p must be >= 1");
    double k = static_cast<double>(kappa);
    std::vector<BranchSpec> branches;
    double lo = 0.0;
    for (int j = 0; j <= kappa; ++j) {
        double hi = j == kappa ? 1.0 : pm_endpoint(k, p, j + 1);
        branches.push_back(pm_branch(k, p, j, lo, hi));
        lo = hi;
    }
    MapParameters params{p, k, 0.5 * branches.front().upper, Family::GeneralizedPM};
    return IntervalMap(std::move(branches), params);
}

IntervalMap build_generalized_lsv(double kappa, double p, std::vector<double> endpoints) {
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    if (p < 1.0) throw DomainError("p must be >= 1");
    endpoints = normalize_endpoints(std::move(endpoints));
    double a1 = endpoints[1];
    double mismatch = a1 + kappa * std::pow(a1, p + 1.0) - 1.0;
    if (std::abs(mismatch) > kSurjectivityTol)
        throw EndpointMismatch("a_1 + kappa a_1^{p+1} - 1 = " + fmt(mismatch));
    std::vector<BranchSpec> branches;
    BranchSpec first = pm_branch(kappa, p, 0, 0.0, a1);
    branches.push_back(std::move(first));
    for (std::size_t j = 1; j + 1 < endpoints.size(); ++j) branches.push_back(linear_branch(endpoints[j], endpoints[j + 1]));
    MapParameters params{p, kappa, 0.5 * a1, Family::GeneralizedLSV};
    return IntervalMap(std::move(branches), params);
}

IntervalMap build_standard_lsv(double p) { return build_generalized_lsv(std::pow(2.0, p), p, {0.0, 0.5, 1.0}); }

IntervalMap build_countable_lsv(double kappa, double p, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("ratio must lie in (0,1)");
    double a1 = first_endpoint(kappa, p);
    auto endpoint = [=](std::size_t j) {
        if (j == 0) return 0.0;
        return 1.0 - (1.0 - a1) * std::pow(ratio, static_cast<double>(j - 1));
    };
    auto generator = [=](std::size_t j) {
        if (j == 0) return pm_branch(kappa, p, 0, 0.0, a1);
        return linear_branch(endpoint(j), endpoint(j + 1));
    };
    MapParameters params{p, kappa, 0.5 * a1, Family::GeneralizedLSV};
    return IntervalMap(generator, params);
}

double first_endpoint(double kappa, double p, const Perturbation& eta0) {
    RealFn f = [=](double x) { return x + kappa * std::pow(x, p + 1.0) + (eta0.eta ? eta0.eta(x) : 0.0); };
    RealFn df = [=](double x) {
        return 1.0 + kappa * (p + 1.0) * std::pow(x, p) + (eta0.d_eta ? eta0.d_eta(x) : 0.0);
    };
    return solve_increasing(f, df, 1.0, 0.0, 1.0);
}

IntervalMap build_perturbed_pm(int kappa, double p, PerturbationSpec spec) {
    if (kappa < 1) throw DomainError("kappa must be a positive integer");
    if (p < 1.0) throw DomainError("p must be >= 1");
    double k = static_cast<double>(kappa);
    std::vector<BranchSpec> branches;
    double lo = 0.0;
    for (int j = 0; j <= kappa; ++j) {
        double hi = j == kappa ? 1.0 : pm_endpoint(k, p, j + 1);
        BranchSpec b = pm_branch(k, p, j, lo, hi);
        if (spec.has(static_cast<std::size_t>(j))) b = perturb(std::move(b), spec.branches[static_cast<std::size_t>(j)]);
        branches.push_back(std::move(b));
        lo = hi;
    }
    MapParameters params{p, k, 0.5 * branches.front().upper, Family::PerturbedPM};
    return IntervalMap(std::move(branches), params, std::move(spec));
}

IntervalMap build_perturbed_lsv(double kappa, double p, std::vector<double> endpoints, PerturbationSpec spec) {
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    if (p < 1.0) throw DomainError("p must be >= 1");
    endpoints = normalize_endpoints(std::move(endpoints));
    double a1 = endpoints[1];
    double eta_a1 = spec.has(0) ? spec.branches[0].eta(a1) : 0.0;
    double mismatch = a1 + kappa * std::pow(a1, p + 1.0) + eta_a1 - 1.0;
    if (std::abs(mismatch) > kSurjectivityTol)
        throw EndpointMismatch("phi_0(a_1) - 1 = " + fmt(mismatch));
    std::vector<BranchSpec> branches;
    for (std::size_t j = 0; j + 1 < endpoints.size(); ++j) {
        BranchSpec b = j == 0 ? pm_branch(kappa, p, 0, 0.0, a1) : linear_branch(endpoints[j], endpoints[j + 1]);
        if (spec.has(j)) b = perturb(std::move(b), spec.branches[j]);
        branches.push_back(std::move(b));
    }
    MapParameters params{p, kappa, 0.5 * a1, Family::PerturbedLSV};
    return IntervalMap(std::move(branches), params, std::move(spec));
}

IntervalMap build_doubling_map() {
    std::vector<BranchSpec> branches{linear_branch(0.0, 0.5), linear_branch(0.5, 1.0)};
    MapParameters params{1.0, 1.0, 0.25, Family::Custom};
    return IntervalMap(std::move(branches), params);
}

double eval_map(const IntervalMap& map, double x) { return map(x); }

double inverse_branch(const IntervalMap& map, std::size_t j, double xi) { return map.inverse(j, xi); }

double inverse_branch_derivative(const IntervalMap& map, std::size_t j, double xi) {
    return map.inverse_derivative(j, xi);
}

std::vector<double> orbit(const IntervalMap& map, double x0, std::size_t n) {
    std::vector<double> out;
    out.reserve(n + 1);
    out.push_back(x0);
    double x = x0;
    for (std::size_t i = 0; i < n; ++i) {
        x = map(x);
        out.push_back(x);
    }
    if (n == 0) (void)map.locate(x0);
    return out;
}

} // namespace glomix
