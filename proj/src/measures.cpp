#include "glomix/measures.hpp"

#include "glomix/conjugation.hpp"
#include "glomix/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace glomix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBlocks = 200;

std::vector<double> parse_numbers(const std::string& s, std::size_t expected, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw ConfigError("");
        } catch (const std::exception&) {
            throw ConfigError("malformed number '" + item + "' in observable " + what);
        }
    }
    if (out.size() != expected) throw ConfigError("observable " + what + " expects " + std::to_string(expected) + " numbers");
    return out;
}

// lambda_q([0,a])
double lambda_cdf(double q, double a) {
    if (a == kInf) return kInf;
    if (q == 1.0) return std::log1p(a);
    return std::expm1((1.0 - q) * std::log1p(a)) / (1.0 - q);
}

struct PieceSum {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

void integrate_piece(const RealFn& g, double a, double b, double tol, PieceSum& acc) {
    if (!(b > a)) return;
    double err = 0.0, l1 = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 15, tol, &err, &l1);
    acc.value += v;
    acc.error += err;
    acc.l1 += l1;
}

} // namespace

double Mass::value() const {
    if (infinite) throw SingularMass("the mass is infinite");
    return finite_value;
}

std::string to_string(MeasureKind k) {
    switch (k) {
    case MeasureKind::Lebesgue: return "Lebesgue";
    case MeasureKind::NuP: return "NuP";
    case MeasureKind::LambdaQ: return "LambdaQ";
    case MeasureKind::EstimatedMu: return "EstimatedMu";
    case MeasureKind::Pushforward: return "Pushforward";
    }
    return "?";
}

std::string to_string(Role r) { return r == Role::Global ? "global" : "local"; }

MeasureSpec MeasureSpec::lebesgue(Space space) {
    MeasureSpec m;
    m.kind_ = MeasureKind::Lebesgue;
    m.space_ = space;
    return m;
}

MeasureSpec MeasureSpec::nu_p(double p) {
    if (!(p > 0.0)) throw DomainError("nu_p needs p > 0");
    MeasureSpec m;
    m.kind_ = MeasureKind::NuP;
    m.space_ = Space::UnitInterval;
    m.p_ = p;
    return m;
}

MeasureSpec MeasureSpec::lambda_q(double q) {
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("lambda_q needs q in (0,1]");
    MeasureSpec m;
    m.kind_ = MeasureKind::LambdaQ;
    m.space_ = Space::HalfLine;
    m.q_ = q;
    return m;
}

MeasureSpec MeasureSpec::estimated_mu(GridFunction H, double p) {
    if (H.space() != Space::UnitInterval) throw DomainError("estimated mu needs an interval grid function");
    MeasureSpec m;
    m.kind_ = MeasureKind::EstimatedMu;
    m.space_ = Space::UnitInterval;
    m.p_ = p;
    m.H_ = std::make_shared<const GridFunction>(std::move(H));
    return m;
}

MeasureSpec MeasureSpec::pushforward(const MeasureSpec& halfline, double p) {
    if (halfline.space() != Space::HalfLine) throw DomainError("push-forward needs a half-line measure");
    MeasureSpec m;
    m.kind_ = MeasureKind::Pushforward;
    m.space_ = Space::UnitInterval;
    m.p_ = p;
    m.inner_ = std::make_shared<const MeasureSpec>(halfline);
    return m;
}

bool MeasureSpec::singular_at_zero() const {
    return kind_ == MeasureKind::NuP || kind_ == MeasureKind::EstimatedMu || kind_ == MeasureKind::Pushforward;
}

double MeasureSpec::density(double x) const {
    switch (kind_) {
    case MeasureKind::Lebesgue: return 1.0;
    case MeasureKind::NuP: return std::pow(x, -p_ - 1.0);
    case MeasureKind::LambdaQ: return std::pow(1.0 + x, -q_);
    case MeasureKind::EstimatedMu: return (*H_)(x) * std::pow(x, -p_);
    case MeasureKind::Pushforward: return inner_->density(psi(x, p_)) * std::pow(x, -p_ - 1.0);
    }
    return 0.0;
}

double MeasureSpec::density_u(double u) const {
    switch (kind_) {
    case MeasureKind::NuP: return 1.0;
    case MeasureKind::EstimatedMu: {
        double x = psi_inv(u, p_);
        return x * (*H_)(x);
    }
    case MeasureKind::Pushforward: return inner_->density(u);
    default: throw DomainError("density_u is only defined for measures infinite at 0");
    }
}

std::string MeasureSpec::name() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case MeasureKind::Lebesgue: return space_ == Space::UnitInterval ? "leb" : "leb_o";
    case MeasureKind::NuP: os << "nu_p:" << p_; break;
    case MeasureKind::LambdaQ: os << "lambda_q:" << q_; break;
    case MeasureKind::EstimatedMu: return "mu";
    case MeasureKind::Pushforward: os << "push(" << inner_->name() << ")"; break;
    }
    return os.str();
}

Mass interval_mass(const MeasureSpec& m, double a, double b) {
    if (!(a >= 0.0 && b >= a)) throw DomainError("interval_mass needs 0 <= a <= b");
    if (m.space() == Space::UnitInterval && b > 1.0) throw DomainError("interval_mass: b exceeds 1");
    if (a == b) return Mass::of(0.0);
    switch (m.kind()) {
    case MeasureKind::Lebesgue:
        if (b == kInf) return Mass::infinity();
        return Mass::of(b - a);
    case MeasureKind::NuP:
        if (a == 0.0) return Mass::infinity();
        return Mass::of(psi(a, m.p()) - psi(b, m.p()));
    case MeasureKind::LambdaQ:
        if (b == kInf) return Mass::infinity();
        return Mass::of(lambda_cdf(m.q(), b) - lambda_cdf(m.q(), a));
    case MeasureKind::EstimatedMu:
        if (a == 0.0) return Mass::infinity();
        return Mass::of(integrate(m, [](double) { return 1.0; }, a, b, 1e-10));
    case MeasureKind::Pushforward:
        return interval_mass(*m.inner(), psi(b, m.p()), a == 0.0 ? kInf : psi(a, m.p()));
    }
    return Mass::of(0.0);
}

double integrate_line(const RealFn& g, double lo, double hi, double tol, const std::vector<double>& breakpoints) {
    if (!(hi >= lo)) throw DomainError("integrate_line needs lo <= hi");
    if (hi == lo) return 0.0;
    std::vector<double> bps;
    for (double b : breakpoints)
        if (b > lo && b < hi) bps.push_back(b);
    std::sort(bps.begin(), bps.end());
    auto next_bp = bps.begin();

    // doubling block boundaries above lo: 1, 2, 4, ...
    double edge = 1.0;
    while (edge <= lo) edge *= 2.0;

    PieceSum total;
    double cursor = lo;
    int quiet = 0;
    int blocks = 0;
    while (cursor < hi) {
        double block_end = std::min(edge, hi);
        double before = total.value;
        while (next_bp != bps.end() && *next_bp < block_end) {
            integrate_piece(g, cursor, *next_bp, tol, total);
            cursor = *next_bp++;
        }
        integrate_piece(g, cursor, block_end, tol, total);
        cursor = block_end;
        edge *= 2.0;
        ++blocks;
        if (hi == kInf) {
            double contribution = std::abs(total.value - before);
            quiet = contribution <= tol * std::abs(total.value) ? quiet + 1 : 0;
            if (quiet >= 3 && blocks >= 4 && next_bp == bps.end()) break;
            if (blocks >= kMaxBlocks)
                throw NonIntegrable("integral over an unbounded range did not settle after " +
                                    std::to_string(kMaxBlocks) + " doubling blocks");
        }
    }
    if (!std::isfinite(total.value) || total.error > std::max(1e3 * tol, 1e-6) * std::max(total.l1, 1e-300))
        throw NonIntegrable("adaptive quadrature did not reach the requested accuracy");
    return total.value;
}

double integrate(const MeasureSpec& m, const RealFn& f, double a, double b, double tol, const BreakpointFn& breakpoints) {
    if (!(b >= a && a >= 0.0)) throw DomainError("integrate needs 0 <= a <= b");
    if (a == b) return 0.0;
    std::vector<double> bps = breakpoints ? breakpoints(a, b) : std::vector<double>{};
    if (m.space() == Space::UnitInterval) {
        if (b > 1.0) throw DomainError("integrate: b exceeds 1");
        if (m.singular_at_zero()) {
            double p = m.p();
            std::vector<double> ubps;
            for (double x : bps)
                if (x > 0.0) ubps.push_back(psi(x, p));
            RealFn g = [&](double u) { return f(psi_inv(u, p)) * m.density_u(u); };
            return integrate_line(g, psi(b, p), a == 0.0 ? kInf : psi(a, p), tol, ubps);
        }
        return integrate_line([&](double x) { return f(x); }, a, b, tol, bps);
    }
    if (m.kind() == MeasureKind::Lebesgue) return integrate_line(f, a, b, tol, bps);
    return integrate_line([&](double y) { return f(y) * m.density(y); }, a, b, tol, bps);
}

Observable identity_observable() {
    Observable o;
    o.name = "identity";
    o.role = Role::Global;
    o.evaluate = [](double x) { return x; };
    o.bound = 1.0;
    return o;
}

Observable constant_observable(double c) {
    Observable o;
    std::ostringstream os;
    os.precision(17);
    os << "constant:" << c;
    o.name = os.str();
    o.role = Role::Global;
    o.evaluate = [c](double) { return c; };
    o.bound = std::abs(c);
    o.known_average = c;
    return o;
}

Observable box_observable(double a, double b) {
    if (!(b > a)) throw ConfigError("box observable needs a < b");
    Observable o;
    std::ostringstream os;
    os.precision(17);
    os << "box:" << a << "," << b;
    o.name = os.str();
    o.role = Role::Local;
    o.evaluate = [a, b](double x) { return x >= a && x <= b ? 1.0 : 0.0; };
    o.bound = 1.0;
    o.breakpoints = [a, b](double lo, double hi) {
        std::vector<double> out;
        for (double v : {a, b})
            if (v > lo && v < hi) out.push_back(v);
        return out;
    };
    return o;
}

double counterexample_alpha(int k) { return std::pow(static_cast<double>(k), k) - 1.0; }
double counterexample_beta(int k) { return 2.0 * std::pow(static_cast<double>(k), k) - 1.0; }

double counterexample_F(double y) {
    if (!(y >= 0.0)) throw DomainError("counterexample_F needs y >= 0");
    // alpha_k for k = 1..143; alpha_144 overflows
    static const std::vector<double> alphas = [] {
        std::vector<double> a;
        for (int k = 1; std::isfinite(counterexample_alpha(k)); ++k) a.push_back(counterexample_alpha(k));
        return a;
    }();
    auto it = std::upper_bound(alphas.begin(), alphas.end(), y);
    int k = static_cast<int>(it - alphas.begin()); // largest k with alpha_k <= y
    return y < counterexample_beta(k) ? 1.0 : 0.0;
}

Observable counterexample_observable() {
    Observable o;
    o.name = "counterexample_kk";
    o.role = Role::Global;
    o.evaluate = counterexample_F;
    o.bound = 1.0;
    o.breakpoints = [](double lo, double hi) {
        std::vector<double> out;
        for (int k = 1;; ++k) {
            double al = counterexample_alpha(k), be = counterexample_beta(k);
            if (!std::isfinite(al) || al >= hi) break;
            if (al > lo) out.push_back(al);
            if (be > lo && be < hi) out.push_back(be);
        }
        return out;
    };
    return o;
}

Observable table_observable(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open observable table '" + path + "'");
    std::vector<double> bps, vals;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.find_first_not_of("0123456789+-.eE, ") != std::string::npos) continue;
        }
        auto nums = parse_numbers(line, 2, "table:" + path);
        if (!bps.empty() && !(nums[0] > bps.back()))
            throw ConfigError("table breakpoints must be strictly increasing");
        bps.push_back(nums[0]);
        vals.push_back(nums[1]);
    }
    if (bps.empty()) throw ConfigError("observable table '" + path + "' is empty");
    Observable o;
    o.name = "table:" + path;
    o.role = Role::Global;
    o.evaluate = [bps, vals](double x) {
        auto it = std::upper_bound(bps.begin(), bps.end(), x);
        if (it == bps.begin()) return 0.0;
        return vals[static_cast<std::size_t>(it - bps.begin()) - 1];
    };
    o.bound = 0.0;
    for (double v : vals) o.bound = std::max(o.bound, std::abs(v));
    o.breakpoints = [bps](double lo, double hi) {
        std::vector<double> out;
        for (double b : bps)
            if (b > lo && b < hi) out.push_back(b);
        return out;
    };
    return o;
}

Observable parse_observable(const std::string& spec) {
    if (spec == "identity") return identity_observable();
    if (spec == "counterexample_kk") return counterexample_observable();
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("unknown observable '" + spec + "'");
    std::string head = spec.substr(0, colon), rest = spec.substr(colon + 1);
    if (head == "constant") return constant_observable(parse_numbers(rest, 1, spec)[0]);
    if (head == "box" || head == "indicator") {
        auto v = parse_numbers(rest, 2, spec);
        return box_observable(v[0], v[1]);
    }
    if (head == "table") return table_observable(rest);
    throw ConfigError("unknown observable '" + spec + "'");
}

double finite_volume_average(const MeasureSpec& m, const Observable& F, double a, double tol) {
    if (F.role != Role::Global) throw DomainError("finite-volume averages are taken of global observables");
    double lo = 0.0, hi = a;
    if (m.space() == Space::UnitInterval) {
        if (!(a > 0.0 && a < 1.0)) throw DomainError("a must lie in (0,1)");
        lo = a;
        hi = 1.0;
    } else if (!(a > 0.0 && std::isfinite(a))) {
        throw DomainError("a must be a positive real");
    }
    double mass = interval_mass(m, lo, hi).value();
    return integrate(m, F.evaluate, lo, hi, tol, F.breakpoints) / mass;
}

GlobalAverage estimate_global_average(const MeasureSpec& m, const Observable& F, const std::vector<double>& a_sequence,
                                      double tol) {
    GlobalAverage out;
    for (double a : a_sequence) out.trace.push_back(finite_volume_average(m, F, a));
    if (out.trace.size() < 5) return out;
    double mean = 0.0;
    for (std::size_t i = out.trace.size() - 5; i < out.trace.size(); ++i) mean += out.trace[i];
    mean /= 5.0;
    out.value = mean;
    out.converged = true;
    for (std::size_t i = out.trace.size() - 5; i < out.trace.size(); ++i)
        if (std::abs(out.trace[i] - mean) > tol) out.converged = false;
    return out;
}

std::vector<double> dyadic_sequence(Space space, std::size_t count) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= count; ++k)
        out.push_back(std::ldexp(1.0, space == Space::UnitInterval ? -static_cast<int>(k) : static_cast<int>(k)));
    return out;
}

ScaledReal::ScaledReal(double v) : m_(v) { normalize(); }

void ScaledReal::normalize() {
    if (m_ == 0.0) {
        e_ = 0;
        return;
    }
    int e = 0;
    m_ = std::frexp(m_, &e);
    e_ += e;
}

ScaledReal ScaledReal::power(int base, int exponent) {
    ScaledReal r(1.0);
    ScaledReal b(static_cast<double>(base));
    for (int i = 0; i < exponent; ++i) r = r * b;
    return r;
}

ScaledReal ScaledReal::operator*(const ScaledReal& o) const {
    ScaledReal r;
    r.m_ = m_ * o.m_;
    r.e_ = e_ + o.e_;
    r.normalize();
    return r;
}

ScaledReal ScaledReal::operator+(const ScaledReal& o) const {
    if (m_ == 0.0) return o;
    if (o.m_ == 0.0) return *this;
    ScaledReal r;
    if (e_ >= o.e_) {
        r.m_ = m_ + std::ldexp(o.m_, static_cast<int>(std::max<long>(o.e_ - e_, -2000)));
        r.e_ = e_;
    } else {
        r.m_ = o.m_ + std::ldexp(m_, static_cast<int>(std::max<long>(e_ - o.e_, -2000)));
        r.e_ = o.e_;
    }
    r.normalize();
    return r;
}

ScaledReal ScaledReal::operator-(const ScaledReal& o) const {
    ScaledReal neg = o;
    neg.m_ = -neg.m_;
    return *this + neg;
}

double ScaledReal::ratio(const ScaledReal& den) const {
    if (den.m_ == 0.0) throw DomainError("ScaledReal: division by zero");
    long e = e_ - den.e_;
    return std::ldexp(m_ / den.m_, static_cast<int>(std::clamp<long>(e, -4000, 4000)));
}

CounterexampleAverages counterexample_averages(int n, Arithmetic mode) {
    if (n < 2 || n > 170) throw DomainError("counterexample_averages needs 2 <= n <= 170");
    CounterexampleAverages out;
    bool extended = mode == Arithmetic::Extended || (mode == Arithmetic::Auto && n > 14);
    if (extended) {
        ScaledReal below;
        for (int k = 1; k < n; ++k) below = below + ScaledReal::power(k, k);
        ScaledReal nn = ScaledReal::power(n, n);
        ScaledReal one(1.0);
        out.leb_at_alpha = below.ratio(nn - one);
        out.leb_at_beta = (below + nn).ratio(nn + nn - one);
    } else {
        double below = 0.0;
        for (int k = 1; k < n; ++k) below += std::pow(static_cast<double>(k), k);
        double nn = std::pow(static_cast<double>(n), n);
        if (!std::isfinite(nn)) throw Overflow("n^n exceeds the double range; use extended arithmetic");
        out.leb_at_alpha = below / (nn - 1.0);
        out.leb_at_beta = (below + nn) / (2.0 * nn - 1.0);
    }
    double dn = static_cast<double>(n);
    double nlogn = dn * std::log(dn);
    out.lambda1_at_alpha = (dn - 1.0) * std::log(2.0) / nlogn;
    out.lambda1_at_beta = dn * std::log(2.0) / (std::log(2.0) + nlogn);
    return out;
}

ExactLebesgueAverages counterexample_leb_exact(int n) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    if (n < 2) throw DomainError("counterexample_leb_exact needs n >= 2");
    cpp_int below = 0;
    for (int k = 1; k < n; ++k) below += boost::multiprecision::pow(cpp_int(k), static_cast<unsigned>(k));
    cpp_int nn = boost::multiprecision::pow(cpp_int(n), static_cast<unsigned>(n));
    cpp_rational at_alpha(below, nn - 1);
    cpp_rational at_beta(below + nn, 2 * nn - 1);
    return {at_alpha.str(), at_beta.str()};
}

} // namespace glomix
