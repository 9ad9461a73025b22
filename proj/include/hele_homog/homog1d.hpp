#pragma once

// One-dimensional reduction: the front ODE x' = q g^eps(x, t), effective
// velocity estimates, clipped obstacle fronts with their flatness, and the
// bisection for the homogenized velocity candidates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "medium.hpp"
#include "parallel.hpp"

namespace hele_homog {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FrontProblem {
    Medium medium;
    double q{1.0};
    double x0{0.0};
    double eps{1.0};
};

struct FrontTrace {
    std::vector<double> times;
    std::vector<double> positions;
    double dt{};
};

namespace detail {

inline void validate(const FrontProblem& p) {
    if (p.medium.dim() != 1) throw std::invalid_argument("front problem needs a one-dimensional medium");
    if (!(p.q > 0.0)) throw std::invalid_argument("front problem needs q > 0");
    if (!(p.eps > 0.0)) throw std::invalid_argument("front problem needs eps > 0");
}

inline double front_speed(const FrontProblem& p, double x, double t) {
    const double v = p.q * p.medium.eval1(x / p.eps, t / p.eps);
    if (!std::isfinite(v)) throw NumericalError("medium evaluated to a non-finite value");
    return v;
}

inline double rk4_step(const FrontProblem& p, double x, double t, double dt) {
    const double k1 = front_speed(p, x, t);
    const double k2 = front_speed(p, x + 0.5 * dt * k1, t + 0.5 * dt);
    const double k3 = front_speed(p, x + 0.5 * dt * k2, t + 0.5 * dt);
    const double k4 = front_speed(p, x + dt * k3, t + dt);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Number of steps so that the grid lands exactly on T.
inline std::size_t step_count(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("integration needs T > 0 and dt > 0");
    return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

}  // namespace detail

/// Classical RK4 on a uniform grid of [0, T]; dt is shrunk so the grid hits T.
inline FrontTrace integrate_front(const FrontProblem& p, double T, double dt) {
    detail::validate(p);
    const std::size_t n = detail::step_count(T, dt);
    FrontTrace tr;
    tr.dt = T / static_cast<double>(n);
    tr.times.reserve(n + 1);
    tr.positions.reserve(n + 1);
    double x = p.x0;
    tr.times.push_back(0.0);
    tr.positions.push_back(x);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * tr.dt;
        x = detail::rk4_step(p, x, t, tr.dt);
        tr.times.push_back(static_cast<double>(k + 1) * tr.dt);
        tr.positions.push_back(x);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Effective velocity

struct VelocityEstimate {
    double q{};
    double r_hat{};
    double T{};
    double error_bound{};  // 1/T
    double r_richardson{};  // 2 r(T) - r(T/2)
    double x0{};
};

inline constexpr double kDefaultVelocityDt = 0.005;

/// r_hat = (x(T) - x0)/T for x' = q g(x, t).
inline VelocityEstimate effective_velocity(const Medium& g, double q, double T, double x0 = 0.0,
                                           double dt = kDefaultVelocityDt) {
    if (!(T >= 10.0)) throw std::invalid_argument("effective_velocity needs T >= 10");
    FrontProblem p{g, q, x0, 1.0};
    detail::validate(p);
    std::size_t n = detail::step_count(T, dt);
    if (n % 2) ++n;
    const double h = T / static_cast<double>(n);
    double x = x0, x_half = x0;
    for (std::size_t k = 0; k < n; ++k) {
        x = detail::rk4_step(p, x, static_cast<double>(k) * h, h);
        if (k + 1 == n / 2) x_half = x;
    }
    VelocityEstimate e;
    e.q = q;
    e.T = T;
    e.x0 = x0;
    e.r_hat = (x - x0) / T;
    e.error_bound = 1.0 / T;
    e.r_richardson = 2.0 * (x - x_half) / T;
    return e;
}

class TimeDependentMedium : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// True when sampled values change with t at fixed x.
inline bool sampled_time_dependence(const Medium& g, int samples = 512, double tol = 1e-12) {
    std::mt19937_64 rng(0x7173);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(g.dim()));
    for (int i = 0; i < samples; ++i) {
        for (auto& v : x) v = u(rng);
        const double a = g(x, u(rng)), b = g(x, u(rng));
        if (std::abs(a - b) > tol * (1.0 + std::abs(a))) return true;
    }
    return false;
}

/// q (int_0^1 g(y)^{-1} dy)^{-1} for a time-independent one-dimensional medium.
inline double harmonic_mean_oracle(const Medium& g, double q) {
    if (g.dim() != 1) throw std::invalid_argument("harmonic mean oracle needs a one-dimensional medium");
    if (sampled_time_dependence(g)) throw TimeDependentMedium("harmonic mean oracle: medium depends on time");
    auto inv = [&](double y) {
        const double v = g.eval1(y, 0.0);
        if (!(v > 0.0)) throw NonPositiveMedium("harmonic mean oracle: medium not positive");
        return 1.0 / v;
    };
    using boost::math::quadrature::gauss_kronrod;
    const double integral = gauss_kronrod<double, 61>::integrate(inv, 0.0, 1.0, 20, 1e-10);
    return q / integral;
}

// ---------------------------------------------------------------------------
// Obstacle fronts and flatness

enum class ObstacleSide { Sub, Super };

inline const char* to_string(ObstacleSide s) { return s == ObstacleSide::Sub ? "sub" : "super"; }

struct FlatnessTrace {
    std::vector<double> times;
    std::vector<double> phi;
    ObstacleSide side{ObstacleSide::Super};
    double dt{};
};

struct ObstacleFront {
    double q{};
    double r{};
    double eps{};
    ObstacleSide side{ObstacleSide::Super};
    FrontTrace trace;
};

struct ObstacleRun {
    ObstacleFront front;
    FlatnessTrace flatness;
};

namespace detail {

// Flatness at time T only, without storing the trace.
inline double obstacle_flatness_at(const Medium& g, double q, double r, double eps, ObstacleSide side, double T, double dt) {
    const std::size_t n = step_count(T, dt);
    const double h = T / static_cast<double>(n);
    double x = 0.0, phi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        const double t1 = static_cast<double>(k + 1) * h;
        const double free = x + h * q * g.eval1(x / eps, t / eps);
        if (side == ObstacleSide::Super) {
            x = std::max(free, r * t1);
            phi = std::max(phi, x - r * t1);
        } else {
            x = std::min(free, r * t1);
            phi = std::max(phi, r * t1 - x);
        }
    }
    if (!std::isfinite(phi)) throw NumericalError("obstacle front produced a non-finite flatness");
    return phi;
}

}  // namespace detail

/// Explicit steps clipped from below (Super) or above (Sub) by the obstacle
/// front r t; flatness is the running max detachment.
inline ObstacleRun obstacle_front(double q, double r, double eps, ObstacleSide side, double T, double dt, const Medium& g) {
    FrontProblem p{g, q, 0.0, eps};
    detail::validate(p);
    if (!(dt <= eps / 10.0)) throw std::invalid_argument("obstacle_front needs dt <= eps/10");
    const std::size_t n = detail::step_count(T, dt);
    const double h = T / static_cast<double>(n);

    ObstacleRun run;
    run.front = {q, r, eps, side, {}};
    auto& tr = run.front.trace;
    auto& fl = run.flatness;
    tr.dt = fl.dt = h;
    fl.side = side;
    tr.times.reserve(n + 1);
    tr.positions.reserve(n + 1);
    fl.phi.reserve(n + 1);

    double x = 0.0, phi = 0.0;
    tr.times.push_back(0.0);
    tr.positions.push_back(x);
    fl.phi.push_back(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        const double t1 = static_cast<double>(k + 1) * h;
        const double free = x + h * detail::front_speed(p, x, t);
        if (side == ObstacleSide::Super) {
            x = std::max(free, r * t1);
            phi = std::max(phi, x - r * t1);
        } else {
            x = std::min(free, r * t1);
            phi = std::max(phi, r * t1 - x);
        }
        tr.times.push_back(t1);
        tr.positions.push_back(x);
        fl.phi.push_back(phi);
    }
    fl.times = tr.times;
    return run;
}

struct FlatnessCheck {
    bool starts_at_zero{true};
    bool monotone{true};
    bool lipschitz{true};
    double worst_excess{-std::numeric_limits<double>::infinity()};  // max of increment - bound - slack
    std::size_t pairs{};
    bool pass() const { return starts_at_zero && monotone && lipschitz; }
};

/// Checks Phi nondecreasing and Phi(t+h) <= Phi(t) + h (M q - r)_+ (Super) or
/// h (r - m q)_+ (Sub) on every consecutive pair, with slack q L dt.
inline FlatnessCheck flatness_lipschitz_check(const FlatnessTrace& tr, double q, double r, const MediumBounds& b) {
    FlatnessCheck c;
    if (tr.phi.empty()) return c;
    c.starts_at_zero = tr.phi.front() == 0.0;
    const double rate = tr.side == ObstacleSide::Super ? std::max(b.M * q - r, 0.0) : std::max(r - b.m * q, 0.0);
    const double slack = q * b.L * tr.dt;
    for (std::size_t k = 0; k + 1 < tr.phi.size(); ++k) {
        const double h = tr.times[k + 1] - tr.times[k];
        const double inc = tr.phi[k + 1] - tr.phi[k];
        if (inc < 0.0) c.monotone = false;
        const double excess = inc - h * rate - slack;
        c.worst_excess = std::max(c.worst_excess, excess);
        if (excess > 1e-12 * (1.0 + std::abs(tr.phi[k]))) c.lipschitz = false;
        ++c.pairs;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Homogenized velocity candidates

struct CandidateOptions {
    double beta{0.9};
    double T{1.0};
    double dt_per_eps{1.0 / 20.0};  // dt = eps * dt_per_eps
    double tolerance{1e-4};
    std::optional<MediumBounds> bounds;
    int bounds_resolution{64};
};

struct CandidateDiagnostic {
    double eps{};
    double threshold{};  // eps^beta
    double phi_lower{};  // sub-side flatness at r_lower
    double phi_upper{};  // super-side flatness at r_upper
};

struct Candidates {
    double r_lower{};
    double r_upper{};
    double range_lo{};  // m q
    double range_hi{};  // M q
    bool lower_bracketed{true};
    bool upper_bracketed{true};
    std::vector<CandidateDiagnostic> diagnostics;
    bool bracketed() const { return lower_bracketed && upper_bracketed; }
};

/// Expected |r_lower - r_upper| for a given eps list: twice the smallest
/// threshold plus the bisection tolerance.
inline double tolerance_from(const std::vector<double>& eps_list, double beta = 0.9, double bisection_tol = 1e-4) {
    if (eps_list.empty()) throw std::invalid_argument("tolerance_from needs a non-empty eps list");
    const double e = *std::min_element(eps_list.begin(), eps_list.end());
    return 2.0 * std::pow(e, beta) + bisection_tol;
}

inline Candidates homogenized_candidates(const Medium& g, double q, const std::vector<double>& eps_list,
                                         const CandidateOptions& opt = {}) {
    if (g.dim() != 1) throw std::invalid_argument("candidates need a one-dimensional medium");
    if (!(q > 0.0)) throw std::invalid_argument("candidates need q > 0");
    if (!(opt.beta > 0.8 && opt.beta < 1.0)) throw std::invalid_argument("beta must lie in (4/5, 1)");
    if (eps_list.empty()) throw std::invalid_argument("candidates need at least one eps");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw std::invalid_argument("eps values must be positive");
        if (i && !(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("eps list must be decreasing");
    }
    if (!(opt.dt_per_eps > 0.0 && opt.dt_per_eps <= 0.1)) throw std::invalid_argument("dt must be at most eps/10");

    const MediumBounds b = opt.bounds ? *opt.bounds : estimate_bounds(g, opt.bounds_resolution);
    Candidates c;
    c.range_lo = b.m * q;
    c.range_hi = b.M * q;

    auto flat = [&](double r, ObstacleSide side, double eps) {
        return detail::obstacle_flatness_at(g, q, r, eps, side, opt.T, eps * opt.dt_per_eps);
    };
    auto flat_for_all = [&](double r, ObstacleSide side) {
        for (double eps : eps_list)
            if (!(flat(r, side, eps) < std::pow(eps, opt.beta))) return false;
        return true;
    };

    // Sub side: predicate true at small r.
    if (c.range_hi - c.range_lo <= opt.tolerance) {
        c.r_lower = c.r_upper = 0.5 * (c.range_lo + c.range_hi);
    } else {
        double lo = c.range_lo, hi = c.range_hi;
        if (!flat_for_all(lo, ObstacleSide::Sub)) {
            c.lower_bracketed = false;
            c.r_lower = lo;
        } else if (flat_for_all(hi, ObstacleSide::Sub)) {
            c.lower_bracketed = false;
            c.r_lower = hi;
        } else {
            while (hi - lo > opt.tolerance) {
                const double mid = 0.5 * (lo + hi);
                (flat_for_all(mid, ObstacleSide::Sub) ? lo : hi) = mid;
            }
            c.r_lower = lo;
        }
        // Super side: predicate true at large r.
        lo = c.range_lo;
        hi = c.range_hi;
        if (!flat_for_all(hi, ObstacleSide::Super)) {
            c.upper_bracketed = false;
            c.r_upper = hi;
        } else if (flat_for_all(lo, ObstacleSide::Super)) {
            c.upper_bracketed = false;
            c.r_upper = lo;
        } else {
            while (hi - lo > opt.tolerance) {
                const double mid = 0.5 * (lo + hi);
                (flat_for_all(mid, ObstacleSide::Super) ? hi : lo) = mid;
            }
            c.r_upper = hi;
        }
    }
    for (double eps : eps_list)
        c.diagnostics.push_back({eps, std::pow(eps, opt.beta), flat(c.r_lower, ObstacleSide::Sub, eps),
                                 flat(c.r_upper, ObstacleSide::Super, eps)});
    return c;
}

// ---------------------------------------------------------------------------
// Velocity curve

struct VelocityCurve {
    std::vector<VelocityEstimate> points;
    std::vector<std::size_t> apparent_jumps;  // i such that the step i -> i+1 looks discontinuous
};

/// Flags steps whose increment exceeds both M dq + 2/T and five times the
/// median increment; these are candidates, not certified discontinuities.
inline std::vector<std::size_t> apparent_jumps(const std::vector<VelocityEstimate>& pts, double M) {
    std::vector<std::size_t> out;
    if (pts.size() < 3) return out;
    std::vector<double> inc;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) inc.push_back(std::abs(pts[i + 1].r_hat - pts[i].r_hat));
    std::vector<double> sorted = inc;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (std::size_t i = 0; i < inc.size(); ++i) {
        const double dq = pts[i + 1].q - pts[i].q;
        if (inc[i] > M * dq + 2.0 / pts[i].T && inc[i] > 5.0 * median) out.push_back(i);
    }
    return out;
}

inline VelocityCurve velocity_curve(const Medium& g, double q_min, double q_max, int samples, double T, int jobs = 1,
                                    double dt = kDefaultVelocityDt) {
    if (!(q_min > 0.0 && q_min < q_max)) throw std::invalid_argument("velocity curve needs 0 < q_min < q_max");
    if (samples < 2) throw std::invalid_argument("velocity curve needs at least 2 samples");
    VelocityCurve c;
    const auto n = static_cast<std::size_t>(samples);
    c.points = parallel_map<VelocityEstimate>(n, jobs, [&](std::size_t i) {
        const double q = q_min + (q_max - q_min) * static_cast<double>(i) / static_cast<double>(n - 1);
        return effective_velocity(g, q, T, 0.0, dt);
    });
    c.apparent_jumps = apparent_jumps(c.points, estimate_bounds(g, 64).M);
    return c;
}

}  // namespace hele_homog
