#pragma once

// Closed-form radial barriers for the Hele-Shaw problem and the quantitative
// bounds they imply, the thin-cylinder comparison function, the radial
// perturbation profile, and a sampled superbarrier checker.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace hele_homog {

class BarrierError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Expanding self-similar barrier  phi(x, t) = psi(x / rho(t)),  rho = sqrt(alpha K m t)

struct RadialExpanding {
    int n{2};
    double m{1.0};
    double K{1.0};
    double A{0.5};
    double alpha{};

    double radius(double t) const { return std::sqrt(alpha * K * m * t); }
    double radius_rate(double t) const { return alpha * K * m / (2.0 * radius(t)); }

    /// Profile psi(s) at |y| = s (zero for s >= 1, K at s = A).
    double profile(double s) const {
        if (s >= 1.0) return 0.0;
        if (n == 2) return K * std::log(1.0 / s) / std::log(1.0 / A);
        return K * (std::pow(s, 2.0 - n) - 1.0) / (std::pow(A, 2.0 - n) - 1.0);
    }

    /// |psi'(s)| on the positive side, s <= 1.
    double profile_slope(double s) const {
        if (n == 2) return K / (s * std::log(1.0 / A));
        return K * (n - 2) * std::pow(s, 1.0 - n) / (std::pow(A, 2.0 - n) - 1.0);
    }

    double operator()(double abs_x, double t) const { return profile(abs_x / radius(t)); }

    /// |D phi^+| on the free boundary |x| = rho(t).
    double front_gradient(double t) const { return profile_slope(1.0) / radius(t); }
};

inline RadialExpanding expanding_barrier(int n, double m, double K, double A) {
    if (n < 2) throw BarrierError("expanding barrier needs n >= 2");
    if (!(m > 0.0) || !(K > 0.0)) throw BarrierError("expanding barrier needs m > 0 and K > 0");
    if (!(A > 0.0 && A < 1.0)) throw BarrierError("expanding barrier needs A in (0, 1)");
    RadialExpanding b{n, m, K, A, 0.0};
    b.alpha = n == 2 ? 2.0 / (-std::log(A)) : 2.0 * (n - 2) / (std::pow(A, 2.0 - n) - 1.0);
    return b;
}

/// |rho'(t) - m |D phi^+|| on the free boundary.
inline double check_expanding_fbc(const RadialExpanding& b, double t) {
    if (!(t > 0.0)) throw BarrierError("free boundary check needs t > 0");
    return std::abs(b.radius_rate(t) - b.m * b.front_gradient(t));
}

// ---------------------------------------------------------------------------
// Contracting barrier

/// Left-hand side of the contracting radius equation, decreasing from 0 at
/// rho = 0 to -mu^2/(2n) at rho = mu.
inline double contracting_lhs(int n, double mu, double rho) {
    if (n == 2) return 0.5 * rho * rho * (std::log(rho / mu) - 0.5);
    return mu * mu / (2.0 - n) * (rho * rho / (2.0 * mu * mu) - std::pow(rho / mu, n) / n);
}

/// Cumulative data K(t) = int_0^t chi(s) ds (negative for t < 0).
using CumulativeData = std::function<double(double)>;

/// K(t) by adaptive Gauss-Kronrod quadrature of chi.
inline CumulativeData cumulative_from_chi(std::function<double(double)> chi, double tol = 1e-10) {
    return [chi = std::move(chi), tol](double t) {
        if (t == 0.0) return 0.0;
        using boost::math::quadrature::gauss_kronrod;
        const double lo = std::min(t, 0.0), hi = std::max(t, 0.0);
        const double v = gauss_kronrod<double, 21>::integrate(chi, lo, hi, 15, tol);
        return t < 0.0 ? -v : v;
    };
}

struct RadialContracting {
    int n{2};
    double M{1.0};
    double mu{1.0};
    std::function<double(double)> chi;
    CumulativeData K;

    /// True when M K(t) lies in (-mu^2/(2n), 0), i.e. t in (t0, 0).
    bool admissible(double t) const {
        if (!(t < 0.0)) return false;
        const double mk = M * K(t);
        return mk > -mu * mu / (2.0 * n) && mk < 0.0;
    }

    /// Free boundary radius rho(t) by bisection to 1e-12 (relative to mu).
    double radius(double t) const {
        if (!admissible(t)) throw BarrierError("contracting radius: t outside the admissible window (t0, 0)");
        const double target = M * K(t);
        const double lo = 1e-14 * mu, hi = mu - 1e-14 * mu;
        auto f = [&](double rho) { return contracting_lhs(n, mu, rho) - target; };
        if (f(lo) <= 0.0) return lo;
        if (f(hi) >= 0.0) return hi;
        auto done = [&](double a, double b) { return std::abs(b - a) <= 1e-12 * mu; };
        const auto [a, b] = boost::math::tools::bisect(f, lo, hi, done);
        return 0.5 * (a + b);
    }

    /// |D phi^+| on |x| = rho at time t.
    double front_gradient(double t) const {
        const double rho = radius(t);
        if (n == 2) return chi(t) / (rho * std::log(mu / rho));
        return chi(t) * (n - 2) * std::pow(rho, 1.0 - n) / (std::pow(rho, 2.0 - n) - std::pow(mu, 2.0 - n));
    }

    double operator()(double abs_x, double t) const {
        const double rho = radius(t);
        if (abs_x <= rho) return 0.0;
        if (n == 2) return chi(t) * std::log(abs_x / rho) / std::log(mu / rho);
        return chi(t) * (std::pow(rho, 2.0 - n) - std::pow(abs_x, 2.0 - n)) /
               (std::pow(rho, 2.0 - n) - std::pow(mu, 2.0 - n));
    }
};

inline RadialContracting contracting_barrier(int n, double M, double mu, std::function<double(double)> chi,
                                             CumulativeData K = {}) {
    if (n < 2) throw BarrierError("contracting barrier needs n >= 2");
    if (!(M > 0.0) || !(mu > 0.0)) throw BarrierError("contracting barrier needs M > 0 and mu > 0");
    if (!chi) throw BarrierError("contracting barrier needs boundary data chi");
    if (!K) K = cumulative_from_chi(chi);
    return RadialContracting{n, M, mu, std::move(chi), std::move(K)};
}

inline double contracting_radius(int n, double M, double mu, const CumulativeData& K, double t) {
    return contracting_barrier(n, M, mu, [](double) { return 1.0; }, K).radius(t);
}

/// True iff int_{t1}^{t2} chi < mu^2/(2nM).
inline bool closing_criterion(int n, double M, double mu, const std::function<double(double)>& chi, double t1,
                              double t2, double tol = 1e-10) {
    if (!(t1 < t2)) throw BarrierError("closing criterion needs t1 < t2");
    using boost::math::quadrature::gauss_kronrod;
    const double integral = gauss_kronrod<double, 21>::integrate(chi, t1, t2, 15, tol);
    return integral < mu * mu / (2.0 * n * M);
}

/// sup_Q u >= mu^2 / (2 n M dt).
inline double nondegeneracy_bound(int n, double M, double mu, double dt) {
    if (n < 1 || !(M > 0.0) || !(mu > 0.0) || !(dt > 0.0)) throw BarrierError("nondegeneracy bound needs positive data");
    return mu * mu / (2.0 * n * M * dt);
}

/// rho = sqrt(2 n K M dt).
inline double expansion_radius(int n, double K, double M, double dt) {
    if (n < 1 || !(K > 0.0) || !(M > 0.0) || dt < 0.0) throw BarrierError("expansion radius needs positive data");
    return std::sqrt(2.0 * n * K * M * dt);
}

/// sigma < eps (exp(mu^2 / (2 n M A)) - 1).
inline bool rational_bound_check(int n, double M, double mu, double sigma, double A, double eps) {
    if (n < 1 || !(M > 0.0) || !(mu > 0.0) || !(A > 0.0) || sigma < 0.0 || eps < 0.0)
        throw BarrierError("rational bound needs positive data");
    return sigma < eps * std::expm1(mu * mu / (2.0 * n * M * A));
}

// ---------------------------------------------------------------------------
// Thin cylinder comparison function  phi = sqrt(1 + |x'|^2/n) cos(x_n) - 3/2

struct ThinCylinderValue {
    double value;
    double laplacian;
};

inline ThinCylinderValue thin_cylinder_phi(double xp_norm, double xn, int n) {
    if (n < 2) throw BarrierError("thin cylinder needs n >= 2");
    const double r2 = xp_norm * xp_norm;
    const double value = std::sqrt(1.0 + r2 / n) * std::cos(xn) - 1.5;
    const double lap = -(n + 2.0 * r2 + n * r2 + r2 * r2) * std::cos(xn) / (n * n * std::pow((n + r2) / n, 1.5));
    return {value, lap};
}

inline double thin_cylinder_constant(int n) { return 6.0 * std::sqrt(static_cast<double>(n)) / std::numbers::pi; }

/// R' = R - c (K + 2) delta with c = 6 sqrt(n) / pi.
inline double thin_cylinder_margin(int n, double K, double delta, double R) {
    return R - thin_cylinder_constant(n) * (K + 2.0) * delta;
}

// ---------------------------------------------------------------------------
// Radial perturbation profile with rho Laplace(rho) >= (n-1) |D rho|^2

struct RadialPerturbation {
    int n{3};
    double a{};      // phi^{2-n}(s) = a + b s^{2-n} on 1 <= s <= 2
    double b{};
    double delta{};  // phi > 5 on [1, 1 + delta]
    double R{};      // rho(x) = phi(delta |x|) on R <= |x| <= 2R

    double phi(double s) const { return std::pow(a + b * std::pow(s, 2.0 - n), 1.0 / (2.0 - n)); }
    double phi_d1(double s) const {
        const double w = a + b * std::pow(s, 2.0 - n);
        return std::pow(w, 1.0 / (2.0 - n) - 1.0) * b * std::pow(s, 1.0 - n);
    }
    double phi_d2(double s) const {
        const double w = a + b * std::pow(s, 2.0 - n);
        const double e = 1.0 / (2.0 - n) - 1.0;
        const double dw = (2.0 - n) * b * std::pow(s, 1.0 - n);
        return e * std::pow(w, e - 1.0) * dw * b * std::pow(s, 1.0 - n) +
               std::pow(w, e) * b * (1.0 - n) * std::pow(s, -static_cast<double>(n));
    }

    double rho(double r) const { return phi(delta * r); }
    double rho_d1(double r) const { return delta * phi_d1(delta * r); }
    double rho_d2(double r) const { return delta * delta * phi_d2(delta * r); }
    double rho_laplacian(double r) const { return rho_d2(r) + (n - 1) / r * rho_d1(r); }

    /// rho Laplace(rho) - (n-1)|D rho|^2 at radius r in [R, 2R].
    double inequality_residual(double r) const {
        const double d1 = rho_d1(r);
        return rho(r) * rho_laplacian(r) - (n - 1) * d1 * d1;
    }
};

inline RadialPerturbation radial_perturbation(int n) {
    if (n < 3) throw BarrierError("radial perturbation is only constructed for n >= 3");
    RadialPerturbation p;
    p.n = n;
    // phi(2) = 1, phi(1) = 6 for phi^{2-n} = a + b s^{2-n}.
    const double p1 = std::pow(6.0, 2.0 - n);
    const double s2 = std::pow(2.0, 2.0 - n);
    p.b = (1.0 - p1) / (s2 - 1.0);
    p.a = p1 - p.b;
    // phi(1 + delta) = 5, shrunk so that phi > 5 on the closed interval.
    auto f = [&](double s) { return p.phi(s) - 5.0; };
    auto done = [](double lo, double hi) { return hi - lo < 1e-14; };
    const auto [lo, hi] = boost::math::tools::bisect(f, 1.0, 2.0, done);
    p.delta = 0.99 * (0.5 * (lo + hi) - 1.0);
    p.R = 1.0 / p.delta;
    return p;
}

// ---------------------------------------------------------------------------
// Superbarrier check on sampled space-time points

struct FieldSample {
    double value{};
    double time_derivative{};
    Eigen::VectorXd gradient;
    double laplacian{};
};

using SpaceTimeField = std::function<FieldSample(const Eigen::VectorXd& x, double t)>;
using SpeedFunction = std::function<double(const Eigen::VectorXd& x, double t)>;

struct SpaceTimePoint {
    Eigen::VectorXd x;
    double t{};
};

struct BarrierCheck {
    std::string name;
    double residual{};  // worst (most negative) margin over the checked points, minus c
    std::size_t points{};
    bool pass{};
};

struct BarrierReport {
    std::vector<BarrierCheck> checks;
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const BarrierCheck& c) { return c.pass; });
    }
};

/// Verifies -Laplace(phi) > c in the positive set and |D phi| > c,
/// phi_t - f |D phi|^2 > c on the front; front points are those with
/// |phi| <= front_tol.
inline BarrierReport check_superbarrier(const SpaceTimeField& field, const SpeedFunction& speed,
                                        const std::vector<SpaceTimePoint>& sample, double c,
                                        double front_tol = 1e-8) {
    if (!(c > 0.0)) throw BarrierError("superbarrier check needs c > 0");
    BarrierCheck interior{"-laplacian > c (positive set)", std::numeric_limits<double>::infinity(), 0, true};
    BarrierCheck gradient{"|D phi+| > c (front)", std::numeric_limits<double>::infinity(), 0, true};
    BarrierCheck velocity{"phi_t - f |D phi+|^2 > c (front)", std::numeric_limits<double>::infinity(), 0, true};
    for (const auto& p : sample) {
        const FieldSample s = field(p.x, p.t);
        if (std::abs(s.value) <= front_tol) {
            const double g2 = s.gradient.squaredNorm();
            gradient.residual = std::min(gradient.residual, std::sqrt(g2) - c);
            velocity.residual = std::min(velocity.residual, s.time_derivative - speed(p.x, p.t) * g2 - c);
            ++gradient.points;
            ++velocity.points;
        } else if (s.value > 0.0) {
            interior.residual = std::min(interior.residual, -s.laplacian - c);
            ++interior.points;
        }
    }
    BarrierReport rep;
    for (auto* chk : {&interior, &gradient, &velocity}) {
        if (chk->points == 0) chk->residual = 0.0;
        chk->pass = chk->points == 0 || chk->residual > 0.0;
        rep.checks.push_back(*chk);
    }
    return rep;
}


/// psi = phi - kappa (|x|^2 - rho(t)^2)_+ built on the contracting barrier with
/// constant boundary data chi. Strictly superharmonic in its positive set; on
/// the front psi_t - M |D psi|^2 stays positive for small kappa.
inline SpaceTimeField perturbed_contracting_field(const RadialContracting& b, double chi_const, double kappa) {
    return [b, chi_const, kappa](const Eigen::VectorXd& x, double t) {
        const int n = b.n;
        const double rho = b.radius(t);
        const double norm = x.norm();
        const double lhs_slope = n == 2 ? rho * std::log(rho / b.mu)
                                        : (rho - std::pow(rho, n - 1.0) / std::pow(b.mu, n - 2.0)) / (2.0 - n);
        const double rho_rate = b.M * chi_const / lhs_slope;

        FieldSample out;
        out.gradient = Eigen::VectorXd::Zero(x.size());
        // Points within rounding of the sphere |x| = rho count as front points.
        if (norm < rho * (1.0 - 1e-12)) return out;
        const double s = std::max(norm, rho);
        double dphi_drho = 0.0, radial = 0.0;
        if (n == 2) {
            const double lr = std::log(b.mu / rho);
            out.value = chi_const * std::log(s / rho) / lr;
            dphi_drho = chi_const * std::log(s / b.mu) / (rho * lr * lr);
            radial = chi_const / (s * lr);
        } else {
            const double d = std::pow(rho, 2.0 - n) - std::pow(b.mu, 2.0 - n);
            out.value = chi_const * (std::pow(rho, 2.0 - n) - std::pow(s, 2.0 - n)) / d;
            dphi_drho = chi_const * (2.0 - n) * std::pow(rho, 1.0 - n) * (std::pow(s, 2.0 - n) - std::pow(b.mu, 2.0 - n)) / (d * d);
            radial = chi_const * (n - 2) * std::pow(s, 1.0 - n) / d;
        }
        out.value -= kappa * (s * s - rho * rho);
        if (s == rho) out.value = 0.0;
        out.time_derivative = dphi_drho * rho_rate + 2.0 * kappa * rho * rho_rate;
        out.gradient = (radial / norm) * x - 2.0 * kappa * x;
        out.laplacian = -2.0 * n * kappa;
        return out;
    };
}

}  // namespace hele_homog
