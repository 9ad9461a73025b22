#pragma once

// Space-time periodic media g(x, t): parsing, scaled evaluation, and
// sampled audits of the bounds m <= g <= M, the Lipschitz constant L and
// Z^{n+1}-periodicity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "expression.hpp"

namespace hele_homog {

class Medium {
public:
    Medium() : Medium(parse_medium("1", 1)) {}

    explicit Medium(MediumExpr expr) : expr_(std::move(expr)), program_(expr_) {}

    static Medium parse(std::string_view src, int dim) { return Medium(parse_medium(src, dim)); }

    int dim() const noexcept { return expr_.dim(); }
    const MediumExpr& expr() const noexcept { return expr_; }
    std::string source() const { return expr_.to_string(); }

    bool is_time_independent() const { return !expr_.uses_time(); }
    bool depends_on_axis(int axis) const { return expr_.uses_axis(axis); }

    /// g(x, t); `x` must hold at least dim() coordinates.
    double operator()(std::span<const double> x, double t) const {
        if (static_cast<int>(x.size()) < dim())
            throw std::invalid_argument("medium evaluated with too few coordinates");
        return program_(x.data(), t);
    }

    /// Fast path for one-dimensional media (only x1 is read).
    double eval1(double x, double t) const { return program_(&x, t); }

    /// Same medium viewed in a higher spatial dimension, constant in the new axes.
    Medium extended_to(int dim) const { return Medium(expr_.with_dim(dim)); }

private:
    MediumExpr expr_;
    CompiledExpr program_;
};

/// g^eps(x, t) = g(x/eps, t/eps).
inline double eval_scaled(const Medium& g, double eps, std::span<const double> x, double t) {
    if (!(eps > 0.0)) throw std::invalid_argument("eval_scaled: eps must be positive");
    std::vector<double> y(x.begin(), x.end());
    for (auto& v : y) v /= eps;
    const double value = g(y, t / eps);
    if (!std::isfinite(value)) throw std::domain_error("medium evaluated to a non-finite value");
    return value;
}

inline double eval_scaled(const Medium& g, double eps, double x, double t) {
    if (!(eps > 0.0)) throw std::invalid_argument("eval_scaled: eps must be positive");
    return g.eval1(x / eps, t / eps);
}

// ---------------------------------------------------------------------------
// Built-in media

struct BuiltinMedium {
    std::string_view name;
    std::string_view expr;
    int dim;
    std::string_view description;
};

inline constexpr BuiltinMedium kBuiltinMedia[] = {
    {"pinning", "sin(pi*(x1-t))^2+1", 1, "front velocity pinned at r(q) = 1 for q in [1/2, 1]"},
    {"pinning_reversed", "sin(pi*(-x1-t))^2+1", 1, "same medium travelling against the front; no pinning"},
    {"multi_pinning", "sin(2*pi*(x1-3*t))*sin(2*pi*(2*t+x1))+11/10", 1, "several pinning intervals"},
    {"stationary", "1+sin(pi*x1)^2", 1, "time independent; harmonic mean speed sqrt(2)"},
};

inline Medium builtin_medium(std::string_view name) {
    for (const auto& b : kBuiltinMedia)
        if (b.name == name) return Medium::parse(b.expr, b.dim);
    throw std::invalid_argument("unknown builtin medium '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Bounds

class NonPositiveMedium : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct MediumBounds {
    double m{1.0};
    double M{1.0};
    double L{0.0};
    int resolution{0};  // samples per period axis; 0 when supplied by the caller
};

namespace detail {

// Compass search on the periodic unit cell, polishing a grid extremum.
template <class F>
std::vector<double> polish_extremum(F&& f, std::vector<double> p, double step, double sign) {
    double best = sign * f(p);
    std::vector<double> trial(p.size());
    while (step > 1e-13) {
        bool improved = false;
        for (std::size_t k = 0; k < p.size(); ++k) {
            for (double dir : {1.0, -1.0}) {
                trial = p;
                trial[k] += dir * step;
                const double v = sign * f(trial);
                if (v < best) {
                    best = v;
                    p = trial;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return p;
}

}  // namespace detail

/// Samples g on a res^{n+1} grid of the unit cell. m and M are the sampled
/// extrema polished by a local compass search; L is the largest forward
/// difference gradient norm on the grid.
inline MediumBounds estimate_bounds(const Medium& g, int resolution) {
    if (resolution < 8) throw std::invalid_argument("estimate_bounds: resolution must be >= 8");
    const int axes = g.dim() + 1;  // spatial axes then time
    std::size_t total = 1;
    for (int k = 0; k < axes; ++k) total *= static_cast<std::size_t>(resolution);
    if (total > 50'000'000) throw std::invalid_argument("estimate_bounds: sampling grid too large");

    const double h = 1.0 / resolution;
    auto at = [&](std::span<const double> p) { return g(p.first(static_cast<std::size_t>(g.dim())), p.back()); };

    std::vector<double> values(total);
    std::vector<double> p(static_cast<std::size_t>(axes));
    std::vector<int> idx(static_cast<std::size_t>(axes), 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rem = lin;
        for (int k = 0; k < axes; ++k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(rem % static_cast<std::size_t>(resolution));
            rem /= static_cast<std::size_t>(resolution);
            p[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)] * h;
        }
        const double v = at(p);
        if (!std::isfinite(v)) throw std::domain_error("medium is not finite on the unit cell");
        if (v <= 0.0) throw NonPositiveMedium("medium is not positive on the unit cell");
        values[lin] = v;
    }

    std::size_t stride = 1;
    double L = 0.0;
    std::vector<double> grad2(total, 0.0);
    for (int k = 0; k < axes; ++k) {
        for (std::size_t lin = 0; lin < total; ++lin) {
            const std::size_t coord = (lin / stride) % static_cast<std::size_t>(resolution);
            const std::size_t next = coord + 1 == static_cast<std::size_t>(resolution) ? lin - coord * stride : lin + stride;
            const double slope = (values[next] - values[lin]) / h;
            grad2[lin] += slope * slope;
        }
        stride *= static_cast<std::size_t>(resolution);
    }
    for (double g2 : grad2) L = std::max(L, std::sqrt(g2));

    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    auto point_of = [&](std::size_t lin) {
        std::vector<double> q(static_cast<std::size_t>(axes));
        for (int k = 0; k < axes; ++k) {
            q[static_cast<std::size_t>(k)] = static_cast<double>(lin % static_cast<std::size_t>(resolution)) * h;
            lin /= static_cast<std::size_t>(resolution);
        }
        return q;
    };
    MediumBounds b;
    b.resolution = resolution;
    b.m = *lo;
    b.M = *hi;
    if (*lo != *hi) {
        const auto pmin = detail::polish_extremum(at, point_of(static_cast<std::size_t>(lo - values.begin())), h / 2, 1.0);
        const auto pmax = detail::polish_extremum(at, point_of(static_cast<std::size_t>(hi - values.begin())), h / 2, -1.0);
        b.m = std::min(b.m, at(pmin));
        b.M = std::max(b.M, at(pmax));
        if (b.m <= 0.0) throw NonPositiveMedium("medium is not positive on the unit cell");
    }
    b.L = L;
    return b;
}

// ---------------------------------------------------------------------------
// Periodicity

struct PeriodicityReport {
    double max_deviation{0.0};
    int trials{0};
};

/// Max |g(x + k, t + l) - g(x, t)| over random points and lattice shifts |k_i|, |l| <= 3.
inline PeriodicityReport check_periodicity(const Medium& g, int trials, std::uint64_t seed = 0x5eed) {
    if (trials < 1) throw std::invalid_argument("check_periodicity: trials must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    std::uniform_int_distribution<int> shift(-3, 3);
    const auto n = static_cast<std::size_t>(g.dim());
    std::vector<double> x(n), xs(n);
    PeriodicityReport rep;
    rep.trials = trials;
    for (int i = 0; i < trials; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = coord(rng);
            xs[k] = x[k] + shift(rng);
        }
        const double t = coord(rng);
        const double ts = t + shift(rng);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(g(xs, ts) - g(x, t)));
    }
    return rep;
}

}  // namespace hele_homog
