#pragma once

// Planar travelling waves P_{q,r}, their translation ordering, the cone
// domain geometry used for the obstacle problem, and the lattice
// approximation utilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>

namespace hele_homog {

using Vec = Eigen::VectorXd;

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Planar waves

/// P^eta_{q,r}(x, t) = (|q| r t + (x - eta nu) . q)_+ with nu = -q/|q|.
struct PlanarWave {
    Vec q;
    double r{1.0};
    double eta{0.0};

    PlanarWave(Vec gradient, double speed, double offset = 0.0) : q(std::move(gradient)), r(speed), eta(offset) {
        if (q.size() == 0 || q.norm() == 0.0) throw GeometryError("planar wave gradient must be nonzero");
        if (!(r > 0.0)) throw GeometryError("planar wave speed must be positive");
    }

    Vec normal() const { return -q / q.norm(); }
    double slope() const { return q.norm(); }

    double operator()(const Vec& x, double t) const {
        const double v = slope() * r * t + (x - eta * normal()).dot(q);
        return std::max(v, 0.0);
    }

    /// Position of the free boundary along nu at time t.
    double front(double t) const { return r * t + eta; }
};

inline double planar_eval(const PlanarWave& p, const Vec& x, double t) { return p(x, t); }

enum class Order { BelowOrEqual, AboveOrEqual, Both, Neither };

/// Compares P(x - y, t - tau) against P(x, t) for all (x, t).
inline Order translation_order(const PlanarWave& p, const Vec& y, double tau, double tol = 0.0) {
    const double gap = y.dot(p.normal()) - p.r * tau;
    if (std::abs(gap) <= tol) return Order::Both;
    return gap < 0.0 ? Order::BelowOrEqual : Order::AboveOrEqual;
}

enum class PlanarClass { Neither, Subsolution, Supersolution, Both };

/// Sub iff r <= m|q|, super iff r >= M|q|.
inline PlanarClass planar_admissible_range(const Vec& q, double r, double m, double M) {
    if (q.size() == 0 || q.norm() == 0.0) throw GeometryError("gradient must be nonzero");
    const bool sub = r <= m * q.norm();
    const bool super = r >= M * q.norm();
    if (sub && super) return PlanarClass::Both;
    if (sub) return PlanarClass::Subsolution;
    if (super) return PlanarClass::Supersolution;
    return PlanarClass::Neither;
}

/// Open cone {x : (x - v) . p > |x - v| |p| cos(angle) + tol}.
inline bool in_cone(const Vec& x, const Vec& vertex, const Vec& axis, double angle, double tol = 0.0) {
    if (axis.norm() == 0.0) throw GeometryError("cone axis must be nonzero");
    if (!(angle > 0.0 && angle < std::numbers::pi / 2)) throw GeometryError("cone angle must lie in (0, pi/2)");
    const Vec d = x - vertex;
    return d.dot(axis) > d.norm() * axis.norm() * std::cos(angle) + tol;
}

// ---------------------------------------------------------------------------
// Cone domain

struct ConeGeometry {
    Vec q;
    double r{};
    double m{};
    double M{};
    double theta{};
    double theta_plus{};
    double theta_minus{};
    double phi_minus{};
    Vec nu;
    Vec vertex;  // V = -nu
    double rV_plus{};
    double rV_minus{};
    Vec V0_plus;
    Vec V0_minus;

    int dim() const { return static_cast<int>(q.size()); }

    Vec vertex_plus(double t) const { return V0_plus + rV_plus * t * nu; }
    Vec vertex_minus(double t) const { return V0_minus + rV_minus * t * nu; }

    /// x in Omega_q.
    bool in_domain(const Vec& x, double tol = 0.0) const { return in_cone(x, vertex, nu, theta, tol); }
    bool in_cone_plus(const Vec& x, double t, double tol = 0.0) const {
        return in_cone(x, vertex_plus(t), -nu, theta_plus, tol);
    }
    bool in_cone_minus(const Vec& x, double t, double tol = 0.0) const {
        return in_cone(x, vertex_minus(t), nu, theta_minus, tol);
    }

    /// Radii of Omega_q, C_t^+ and C_t^- on the front slice Gamma_t = {x . nu = r t}.
    struct SliceRadii {
        double domain;
        double plus;
        double minus;
    };
    SliceRadii slice_radii(double t) const {
        const double front = r * t;
        return {(front - vertex.dot(nu)) * std::tan(theta), (vertex_plus(t).dot(nu) - front) * std::tan(theta_plus),
                (front - vertex_minus(t).dot(nu)) * std::tan(theta_minus)};
    }
};

inline ConeGeometry cone_geometry(const Vec& q, double r, double m, double M) {
    if (q.size() < 2) throw GeometryError("cone geometry requires dimension n >= 2");
    if (q.norm() == 0.0) throw GeometryError("gradient must be nonzero");
    if (!(r > 0.0)) throw GeometryError("speed must be positive");
    if (!(m > 0.0)) throw GeometryError("lower bound m must be positive");
    if (!(m < M)) throw GeometryError("cone geometry requires m < M (homogenization is trivial when m = M)");

    ConeGeometry g;
    g.q = q;
    g.r = r;
    g.m = m;
    g.M = M;
    g.theta = std::acos(std::sqrt(m / M));
    g.theta_plus = std::numbers::pi / 2 - g.theta;
    g.phi_minus = std::acos(m / M);
    g.theta_minus = std::numbers::pi / 2 + g.theta - g.phi_minus;
    g.nu = -q / q.norm();
    g.vertex = -g.nu;
    g.rV_plus = (M / m) * r;
    g.rV_minus = (1.0 - std::tan(g.theta) / std::tan(g.theta_minus)) * r;
    // Both vertices pass through V = -nu at t = -1/r.
    g.V0_plus = (g.rV_plus / r - 1.0) * g.nu;
    g.V0_minus = (g.rV_minus / r - 1.0) * g.nu;
    return g;
}

// ---------------------------------------------------------------------------
// Directions in Xi = {|xi| = 1, xi . nu = cos theta}

namespace detail {

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base), f = inv, v = 0.0;
    while (i > 0) {
        v += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return v;
}

inline constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};

// Orthonormal basis of the complement of unit vector nu.
inline std::vector<Vec> complement_basis(const Vec& nu) {
    const auto n = nu.size();
    std::vector<Vec> basis;
    for (Eigen::Index k = 0; k < n && static_cast<Eigen::Index>(basis.size()) < n - 1; ++k) {
        Vec e = Vec::Unit(n, k);
        e -= e.dot(nu) * nu;
        for (const auto& b : basis) e -= e.dot(b) * b;
        if (e.norm() > 1e-8) basis.push_back(e / e.norm());
    }
    return basis;
}

}  // namespace detail

/// Deterministic low-discrepancy sample xi_i = cos(theta) nu + sin(theta) e_i of Xi.
inline Vec xi_sample(const ConeGeometry& g, std::uint64_t index) {
    const auto basis = detail::complement_basis(g.nu);
    Vec e = Vec::Zero(g.nu.size());
    if (basis.size() == 1) {
        e = detail::radical_inverse(index + 1, 2) < 0.5 ? -basis[0] : basis[0];
    } else {
        if (basis.size() > std::size(detail::kPrimes)) throw GeometryError("dimension too large for xi sampling");
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const double u = detail::radical_inverse(index + 1, detail::kPrimes[k]);
            e += std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0) * basis[k];
        }
        if (e.norm() == 0.0) e = basis[0];
        e /= e.norm();
    }
    return std::cos(g.theta) * g.nu + std::sin(g.theta) * e;
}

// ---------------------------------------------------------------------------
// Matching planar waves

enum class Side { Plus, Minus };

/// R^pm_xi(x, t) = P_{-mu eta, r_pm}(x, t - T_pm); for the distinguished value
/// xi = 0 the wave is P_{q, max(M|q|, r)} (plus) or P_{q, min(m|q|, r)} (minus).
struct MatchingWave {
    Vec xi;  // empty for the distinguished xi = 0
    Side side{Side::Plus};
    Vec eta_normal;
    double mu{};
    double speed{};
    double T_shift{};

    PlanarWave wave() const { return PlanarWave(-mu * eta_normal, speed); }
    double operator()(const Vec& x, double t) const { return wave()(x, t - T_shift); }
};

struct MatchingPair {
    MatchingWave plus;
    MatchingWave minus;
};

inline MatchingPair matching_wave(const ConeGeometry& g, const Vec& xi) {
    if (xi.size() != g.nu.size()) throw GeometryError("direction has the wrong dimension");
    if (std::abs(xi.norm() - 1.0) > 1e-12 || std::abs(xi.dot(g.nu) - std::cos(g.theta)) > 1e-12)
        throw GeometryError("direction is not in Xi");

    // Unit tangent e with xi = cos(theta) nu + sin(theta) e.
    const Vec e = (xi - std::cos(g.theta) * g.nu) / std::sin(g.theta);
    const double qn = g.q.norm();
    const double cos_theta = std::cos(g.theta);

    MatchingPair out;
    // C_t^+ opens along -nu with half angle theta_plus; its normal on the
    // matching ray is eta_plus = xi, so cos(phi_plus) = 1.
    {
        MatchingWave& w = out.plus;
        w.xi = xi;
        w.side = Side::Plus;
        w.eta_normal = std::sin(g.theta_plus) * g.nu + std::cos(g.theta_plus) * e;
        const double cos_phi = xi.dot(w.eta_normal);
        w.speed = g.r * cos_phi / cos_theta;
        w.mu = qn * cos_theta / cos_phi;
        w.T_shift = 1.0 / g.rV_plus - 1.0 / g.r;
    }
    {
        MatchingWave& w = out.minus;
        w.xi = xi;
        w.side = Side::Minus;
        w.eta_normal = std::sin(g.theta_minus) * g.nu - std::cos(g.theta_minus) * e;
        const double cos_phi = xi.dot(w.eta_normal);
        w.speed = g.r * cos_phi / cos_theta;
        w.mu = qn * cos_theta / cos_phi;
        w.T_shift = 1.0 / g.rV_minus - 1.0 / g.r;
    }
    return out;
}

inline MatchingPair matching_wave_zero(const ConeGeometry& g) {
    const double qn = g.q.norm();
    MatchingPair out;
    out.plus.side = Side::Plus;
    out.plus.eta_normal = g.nu;
    out.plus.mu = qn;
    out.plus.speed = std::max(g.M * qn, g.r);
    out.minus.side = Side::Minus;
    out.minus.eta_normal = g.nu;
    out.minus.mu = qn;
    out.minus.speed = std::min(g.m * qn, g.r);
    return out;
}

struct AdmissibilityReport {
    double plus_ratio{};   // r+/mu+
    double minus_ratio{};  // r-/mu-
    double plus_margin{};  // r+/mu+ - M, must be >= 0
    double minus_margin{}; // m - r-/mu-, must be >= 0
    bool ok{};
};

/// Checks that R^+_xi is a supersolution (r+ >= M mu+) and R^-_xi a subsolution (r- <= m mu-).
inline AdmissibilityReport verify_admissibility(const ConeGeometry& g, const Vec& xi, double tol = 1e-12) {
    const double ratio = g.r / g.q.norm();
    if (ratio < g.m * (1.0 - 1e-15) || ratio > g.M * (1.0 + 1e-15))
        throw GeometryError("restriction m <= r/|q| <= M violated");
    const auto pair = matching_wave(g, xi);
    AdmissibilityReport rep;
    rep.plus_ratio = pair.plus.speed / pair.plus.mu;
    rep.minus_ratio = pair.minus.speed / pair.minus.mu;
    rep.plus_margin = rep.plus_ratio - g.M;
    rep.minus_margin = g.m - rep.minus_ratio;
    rep.ok = rep.plus_margin >= -tol && rep.minus_margin >= -tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Lattice approximation

struct GridCoverReport {
    bool hypothesis_holds{true};
    bool covered{true};
    std::size_t samples{0};
    std::optional<Vec> counterexample;     // E sample with no lattice point of A within lambda eps
    std::optional<Vec> hypothesis_witness; // E sample whose lambda eps ball leaves A
    double worst_distance{0.0};            // max over samples of the nearest admissible lattice distance
};

using SetPredicate = std::function<bool(const Vec&)>;

/// Samples E on a grid over [box_lo, box_hi] and checks that every sample has a
/// point of A cap eps Z^d within distance lambda*eps. The hypothesis
/// E + B_{lambda eps} subset A is checked on a sphere of probe points first;
/// when it fails the report carries no coverage claim.
inline GridCoverReport grid_cover_check(const SetPredicate& A, const SetPredicate& E, double lambda, double eps,
                                        const Vec& box_lo, const Vec& box_hi, int samples_per_axis = 16) {
    const auto d = box_lo.size();
    if (d < 1 || box_hi.size() != d) throw GeometryError("grid_cover_check: bad sampling box");
    if (!(lambda > 0.5 * std::sqrt(static_cast<double>(d))))
        throw GeometryError("grid_cover_check: lambda must exceed sqrt(d)/2");
    if (!(eps > 0.0)) throw GeometryError("grid_cover_check: eps must be positive");
    const double radius = lambda * eps;

    // Probe directions for the ball inclusion: axes, diagonals and the shell of a small grid.
    std::vector<Vec> probes;
    {
        const int k = d <= 2 ? 8 : 3;
        std::vector<int> idx(static_cast<std::size_t>(d), -k);
        for (;;) {
            Vec v(d);
            for (Eigen::Index i = 0; i < d; ++i) v[i] = idx[static_cast<std::size_t>(i)];
            if (v.norm() > 0) probes.push_back(v / v.norm());
            std::size_t i = 0;
            while (i < idx.size() && ++idx[i] > k) idx[i++] = -k;
            if (i == idx.size()) break;
        }
    }

    GridCoverReport rep;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    const int n = std::max(samples_per_axis, 2);
    for (;;) {
        Vec x(d);
        for (Eigen::Index i = 0; i < d; ++i)
            x[i] = box_lo[i] + (box_hi[i] - box_lo[i]) * idx[static_cast<std::size_t>(i)] / (n - 1);
        if (E(x)) {
            ++rep.samples;
            // Hypothesis: the open ball stays inside A (probe just inside the boundary).
            if (rep.hypothesis_holds) {
                if (!A(x)) rep.hypothesis_holds = false;
                for (const auto& u : probes) {
                    if (!rep.hypothesis_holds) break;
                    if (!A(x + (1.0 - 1e-9) * radius * u)) rep.hypothesis_holds = false;
                }
                if (!rep.hypothesis_holds) rep.hypothesis_witness = x;
            }
            // Exhaustive lattice search in the bounding cube of the ball.
            double best = std::numeric_limits<double>::infinity();
            std::vector<long> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d)), cur;
            for (Eigen::Index i = 0; i < d; ++i) {
                lo[static_cast<std::size_t>(i)] = static_cast<long>(std::floor((x[i] - radius) / eps));
                hi[static_cast<std::size_t>(i)] = static_cast<long>(std::ceil((x[i] + radius) / eps));
            }
            cur = lo;
            for (;;) {
                Vec z(d);
                for (Eigen::Index i = 0; i < d; ++i) z[i] = eps * static_cast<double>(cur[static_cast<std::size_t>(i)]);
                const double dist = (z - x).norm();
                if (dist < best && A(z)) best = dist;
                std::size_t i = 0;
                while (i < cur.size() && ++cur[i] > hi[i]) {
                    cur[i] = lo[i];
                    ++i;
                }
                if (i == cur.size()) break;
            }
            if (!(best < radius)) {
                if (!rep.counterexample) rep.counterexample = x;
                rep.covered = false;
            } else {
                rep.worst_distance = std::max(rep.worst_distance, best);
            }
        }
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] >= n) idx[i++] = 0;
        if (i == idx.size()) break;
    }
    return rep;
}

/// Margin mu = (lambda / sin theta) eps for approximating a cone of half angle theta.
inline double cone_grid_margin(double lambda, double theta, double eps) { return lambda / std::sin(theta) * eps; }

}  // namespace hele_homog
