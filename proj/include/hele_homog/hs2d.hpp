#pragma once

// Two-dimensional Hele-Shaw strip simulator. The wet region 0 < x < h(y),
// periodic in y, is mapped to the unit rectangle by xi = x / h(y); pressure
// solves the transformed Laplace equation and the front advances by
// h_t = g^eps |Du| sqrt(1 + h'^2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "geometry.hpp"
#include "homog1d.hpp"
#include "medium.hpp"
#include "parallel.hpp"

namespace hele_homog {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StripDomain {
    double Lx{3.0};
    double Ly{1.0};
    int nx{64};
    int ny{64};

    double dy() const { return Ly / ny; }
    double y(int j) const { return j * dy(); }

    void validate() const {
        if (nx < 8 || ny < 8) throw std::invalid_argument("strip domain needs nx, ny >= 8");
        if (!(Lx > 0.0) || !(Ly > 0.0)) throw std::invalid_argument("strip domain needs Lx, Ly > 0");
    }
};

struct FrontGraph {
    std::vector<double> h;
    double t{0.0};
};

struct SimConfig {
    StripDomain domain;
    Medium medium;  // dim 2 (x1 across the strip, x2 along it) or dim 1 extended in y
    double eps{0.1};
    double psi0{1.0};
    double psi_rate{0.0};  // psi(t) = psi0 + psi_rate t
    double h0{1.0};
    double h0_amplitude{0.0};  // h(y, 0) = h0 + amplitude cos(2 pi y / Ly)
    std::vector<double> h_init;  // overrides h0 when non-empty
    std::optional<double> dt;    // fixed step; otherwise chosen from the CFL number
    double cfl{0.4};
    double T{1.0};
    double save_interval{0.1};

    double psi(double t) const { return psi0 + psi_rate * t; }
};

struct StepDiagnostics {
    double min_pressure{};
    double max_pressure{};
    double max_gradient{};
};

namespace detail {

inline Medium strip_medium(const Medium& g) {
    if (g.dim() == 2) return g;
    if (g.dim() == 1) return g.extended_to(2);
    throw std::invalid_argument("strip simulator needs a medium of dimension 1 or 2");
}

inline bool medium_is_constant(const Medium& g) { return g.expr().is_constant(); }

}  // namespace detail

/// Pressure solve on the mapped rectangle. Reuses the sparsity analysis across calls.
class StripSolver {
public:
    explicit StripSolver(const StripDomain& d) : d_(d) { d_.validate(); }

    /// Returns U at interior nodes (i = 1..nx-1), stored as U[(i - 1) * ny + j].
    const Eigen::VectorXd& solve(const std::vector<double>& h, double psi) {
        const int nx = d_.nx, ny = d_.ny;
        const double dxi = 1.0 / nx, dy = d_.dy();
        const int N = (nx - 1) * ny;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(N) * 9);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
        auto id = [&](int i, int j) { return (i - 1) * ny + ((j % ny) + ny) % ny; };
        auto add = [&](int row, int i, int j, double c) {
            if (i == 0) rhs[row] -= c * psi;
            else if (i == nx) return;  // U = 0 on the front
            else trip.emplace_back(row, id(i, j), c);
        };
        for (int j = 0; j < ny; ++j) {
            const double hj = h[static_cast<std::size_t>(j)];
            const double hp = (h[static_cast<std::size_t>((j + 1) % ny)] - h[static_cast<std::size_t>((j + ny - 1) % ny)]) / (2 * dy);
            const double hpp = (h[static_cast<std::size_t>((j + 1) % ny)] - 2 * hj + h[static_cast<std::size_t>((j + ny - 1) % ny)]) / (dy * dy);
            for (int i = 1; i < nx; ++i) {
                const double xi = i * dxi;
                const double a = -xi * hp / hj;
                const double A = 1.0 / (hj * hj) + a * a;
                const double B = 2.0 * a;
                const double D = xi * (2.0 * hp * hp / (hj * hj) - hpp / hj);
                const int row = id(i, j);
                add(row, i, j, -2.0 * A / (dxi * dxi) - 2.0 / (dy * dy));
                add(row, i + 1, j, A / (dxi * dxi) + D / (2 * dxi));
                add(row, i - 1, j, A / (dxi * dxi) - D / (2 * dxi));
                add(row, i, j + 1, 1.0 / (dy * dy));
                add(row, i, j - 1, 1.0 / (dy * dy));
                const double m = B / (4 * dxi * dy);
                add(row, i + 1, j + 1, m);
                add(row, i + 1, j - 1, -m);
                add(row, i - 1, j + 1, -m);
                add(row, i - 1, j - 1, m);
            }
        }
        Eigen::SparseMatrix<double> A(N, N);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        if (!analyzed_) {
            lu_.analyzePattern(A);
            analyzed_ = true;
        }
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success) throw SimulationError("pressure matrix factorization failed");
        U_ = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success || !U_.allFinite()) throw SimulationError("pressure solve failed");
        return U_;
    }

    /// One-sided second-order U_xi at the front for column j.
    double front_derivative(int j) const {
        const int nx = d_.nx, ny = d_.ny;
        const double u1 = U_[(nx - 2) * ny + j];
        const double u2 = U_[(nx - 3) * ny + j];
        return (-4.0 * u1 + u2) * nx / 2.0;
    }

private:
    StripDomain d_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_{false};
    Eigen::VectorXd U_;
};

/// Advances the front by dt. Throws if the front leaves the strip or stops being a graph.
inline FrontGraph step(const FrontGraph& s, const SimConfig& cfg, StripSolver& solver, double dt,
                       StepDiagnostics* diag = nullptr) {
    const auto& d = cfg.domain;
    const int ny = d.ny;
    const double psi = cfg.psi(s.t);
    const Eigen::VectorXd& U = solver.solve(s.h, psi);
    FrontGraph next{s.h, s.t + dt};
    double gmax = 0.0;
    double pt[2];
    for (int j = 0; j < ny; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const double hj = s.h[ju];
        const double hp = (s.h[static_cast<std::size_t>((j + 1) % ny)] - s.h[static_cast<std::size_t>((j + ny - 1) % ny)]) / (2 * d.dy());
        const double grad = std::abs(solver.front_derivative(j)) * std::sqrt(1.0 + hp * hp) / hj;
        pt[0] = hj / cfg.eps;
        pt[1] = d.y(j) / cfg.eps;
        const double g = cfg.medium(std::span<const double>(pt, 2), s.t / cfg.eps);
        if (!std::isfinite(g)) throw SimulationError("medium evaluated to a non-finite value");
        next.h[ju] = hj + dt * g * grad * std::sqrt(1.0 + hp * hp);
        gmax = std::max(gmax, grad);
    }
    for (int j = 0; j < ny; ++j) {
        const double hj = next.h[static_cast<std::size_t>(j)];
        if (!std::isfinite(hj) || hj >= d.Lx - 2.0 * d.Lx / d.nx) throw SimulationError("front left the strip");
        const double slope = std::abs(next.h[static_cast<std::size_t>((j + 1) % ny)] - hj) / d.dy();
        if (slope > 10.0) throw SimulationError("front is no longer a graph");
    }
    if (diag) {
        diag->min_pressure = std::min(0.0, U.minCoeff());
        diag->max_pressure = std::max(psi, U.maxCoeff());
        diag->max_gradient = gmax;
    }
    return next;
}

struct SimResult {
    std::vector<FrontGraph> history;  // one entry per save time, including t = 0
    std::size_t steps{0};
    double min_pressure{0.0};
    double max_pressure{0.0};
    double max_psi{0.0};
    bool max_principle{true};  // interior pressure within [0, psi] at every step
    bool monotone{true};       // h_j nondecreasing at every step
    std::vector<double> dt_per_interval;
};

inline FrontGraph initial_front(const SimConfig& cfg) {
    const auto& d = cfg.domain;
    FrontGraph f;
    if (!cfg.h_init.empty()) {
        if (static_cast<int>(cfg.h_init.size()) != d.ny) throw std::invalid_argument("h_init must have ny entries");
        f.h = cfg.h_init;
    } else {
        f.h.resize(static_cast<std::size_t>(d.ny));
        for (int j = 0; j < d.ny; ++j)
            f.h[static_cast<std::size_t>(j)] = cfg.h0 + cfg.h0_amplitude * std::cos(2.0 * std::numbers::pi * d.y(j) / d.Ly);
    }
    for (double v : f.h)
        if (!(v > 0.0 && v < d.Lx)) throw std::invalid_argument("initial front must satisfy 0 < h < Lx");
    return f;
}

/// Validates the configuration and the eps resolution requirements.
inline void validate_config(const SimConfig& cfg) {
    cfg.domain.validate();
    if (!(cfg.psi0 > 0.0)) throw std::invalid_argument("boundary pressure psi0 must be positive");
    if (cfg.psi_rate < 0.0) throw std::invalid_argument("boundary pressure must not decrease (psi_rate >= 0)");
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(cfg.T > 0.0) || !(cfg.save_interval > 0.0)) throw std::invalid_argument("T and save_interval must be positive");
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
    if (cfg.dt && !(*cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const Medium g = detail::strip_medium(cfg.medium);
    if (!detail::medium_is_constant(g)) {
        const auto& d = cfg.domain;
        if (cfg.eps < 4.0 * d.Lx / d.nx)
            throw std::invalid_argument("eps resolves fewer than 4 grid cells across the strip");
        if (g.depends_on_axis(1) && cfg.eps < 4.0 * d.dy())
            throw std::invalid_argument("eps resolves fewer than 4 grid cells along the strip");
    }
}

inline SimResult simulate(SimConfig cfg) {
    validate_config(cfg);
    cfg.medium = detail::strip_medium(cfg.medium);
    const bool constant = detail::medium_is_constant(cfg.medium);
    const MediumBounds bounds = constant ? MediumBounds{cfg.medium(std::vector<double>{0.0, 0.0}, 0.0),
                                                        cfg.medium(std::vector<double>{0.0, 0.0}, 0.0), 0.0, 0}
                                         : estimate_bounds(cfg.medium, 24);
    const auto& d = cfg.domain;
    StripSolver solver(d);
    SimResult res;
    FrontGraph state = initial_front(cfg);
    res.history.push_back(state);
    res.max_psi = cfg.psi(cfg.T);

    const auto intervals = static_cast<std::size_t>(std::llround(std::ceil(cfg.T / cfg.save_interval - 1e-9)));
    for (std::size_t k = 0; k < intervals; ++k) {
        const double t_end = std::min(cfg.T, static_cast<double>(k + 1) * cfg.save_interval);
        const double span = t_end - state.t;
        double dt = span;
        if (cfg.dt) {
            dt = std::min(dt, *cfg.dt);
        } else {
            // CFL from the current front; the boundary pressure at t_end bounds |Du| growth.
            const double hmin = *std::min_element(state.h.begin(), state.h.end());
            StepDiagnostics probe;
            (void)step(state, cfg, solver, 0.0, &probe);
            const double gest = std::max(probe.max_gradient, 1e-12) * cfg.psi(t_end) / cfg.psi(state.t);
            dt = std::min(dt, cfg.cfl * std::min(hmin / d.nx, d.dy()) / (bounds.M * gest));
        }
        if (!constant) dt = std::min(dt, cfg.eps / 20.0);
        const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
        dt = span / static_cast<double>(n);
        res.dt_per_interval.push_back(dt);
        for (std::size_t s = 0; s < n; ++s) {
            StepDiagnostics diag;
            FrontGraph next = step(state, cfg, solver, dt, &diag);
            const double psi = cfg.psi(state.t);
            res.min_pressure = std::min(res.min_pressure, diag.min_pressure);
            res.max_pressure = std::max(res.max_pressure, diag.max_pressure);
            if (diag.min_pressure < -1e-10 * psi || diag.max_pressure > psi * (1.0 + 1e-10)) res.max_principle = false;
            for (std::size_t j = 0; j < next.h.size(); ++j)
                if (next.h[j] < state.h[j]) res.monotone = false;
            state = std::move(next);
            ++res.steps;
        }
        state.t = t_end;
        res.history.push_back(state);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Hausdorff distance

struct PointSet {
    int dim{2};
    std::vector<double> coords;  // row-major, dim entries per point
    std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
};

/// Optional periodic axis used when measuring distances.
struct Periodicity {
    int axis{-1};
    double period{0.0};
};

/// max(sup_a inf_b |a - b|, sup_b inf_a |a - b|) by brute force.
inline double hausdorff(const PointSet& A, const PointSet& B, Periodicity per = {}) {
    if (A.dim != B.dim) throw std::invalid_argument("hausdorff: point sets of different dimension");
    if (A.size() == 0 || B.size() == 0) throw std::invalid_argument("hausdorff: empty point set");
    const int dim = A.dim;
    auto dist2 = [&](const double* a, const double* b) {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            double dk = std::abs(a[k] - b[k]);
            if (k == per.axis && per.period > 0.0) {
                dk = std::fmod(dk, per.period);
                dk = std::min(dk, per.period - dk);
            }
            s += dk * dk;
        }
        return s;
    };
    auto directed = [&](const PointSet& X, const PointSet& Y) {
        double worst = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            const double* a = &X.coords[i * static_cast<std::size_t>(dim)];
            for (std::size_t k = 0; k < Y.size() && best > worst; ++k)
                best = std::min(best, dist2(a, &Y.coords[k * static_cast<std::size_t>(dim)]));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(std::max(directed(A, B), directed(B, A)));
}

/// Front points (h_j, y_j) at one save time.
inline PointSet front_points(const FrontGraph& f, const StripDomain& d) {
    PointSet p{2, {}};
    for (int j = 0; j < d.ny; ++j) {
        p.coords.push_back(f.h[static_cast<std::size_t>(j)]);
        p.coords.push_back(d.y(j));
    }
    return p;
}

/// Space-time front set {(h_j(t_k), y_j, t_k)} over all saved times.
inline PointSet spacetime_front(const std::vector<FrontGraph>& history, const StripDomain& d) {
    PointSet p{3, {}};
    for (const auto& f : history)
        for (int j = 0; j < d.ny; ++j) {
            p.coords.push_back(f.h[static_cast<std::size_t>(j)]);
            p.coords.push_back(d.y(j));
            p.coords.push_back(f.t);
        }
    return p;
}

// ---------------------------------------------------------------------------
// Convergence study

struct HausdorffPair {
    double eps_a{};
    double eps_b{};
    double final_front{};
    double spacetime{};
};

struct HausdorffReport {
    std::vector<double> eps;
    std::vector<double> front_speed;  // (mean h(T) - mean h(T/2)) / (T/2)
    std::vector<HausdorffPair> pairs;  // consecutive eps values
    bool monotone_decrease() const {
        for (std::size_t i = 0; i + 1 < pairs.size(); ++i)
            if (pairs[i + 1].spacetime > pairs[i].spacetime) return false;
        return true;
    }
};

/// Mean front speed over the second half of the run.
inline double measured_front_speed(const std::vector<FrontGraph>& history) {
    if (history.size() < 3) throw std::invalid_argument("front speed needs at least three saved fronts");
    const auto mean = [](const FrontGraph& f) {
        double s = 0.0;
        for (double v : f.h) s += v;
        return s / static_cast<double>(f.h.size());
    };
    const FrontGraph& last = history.back();
    const double t_half = 0.5 * last.t;
    std::size_t k = 0;
    while (k + 1 < history.size() && history[k].t < t_half - 1e-12) ++k;
    return (mean(last) - mean(history[k])) / (last.t - history[k].t);
}

inline HausdorffReport convergence_study(const SimConfig& base, const std::vector<double>& eps_list, int jobs = 1) {
    if (eps_list.size() < 3) throw std::invalid_argument("convergence study needs at least three eps values");
    for (double e : eps_list) {
        SimConfig c = base;
        c.eps = e;
        validate_config(c);
    }
    const auto runs = parallel_map<SimResult>(eps_list.size(), jobs, [&](std::size_t i) {
        SimConfig c = base;
        c.eps = eps_list[i];
        return simulate(c);
    });
    HausdorffReport rep;
    rep.eps = eps_list;
    for (const auto& r : runs) rep.front_speed.push_back(measured_front_speed(r.history));
    const Periodicity per{1, base.domain.Ly};
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        HausdorffPair p;
        p.eps_a = eps_list[i];
        p.eps_b = eps_list[i + 1];
        p.final_front = hausdorff(front_points(runs[i].history.back(), base.domain),
                                  front_points(runs[i + 1].history.back(), base.domain), per);
        p.spacetime = hausdorff(spacetime_front(runs[i].history, base.domain),
                                spacetime_front(runs[i + 1].history, base.domain), per);
        rep.pairs.push_back(p);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Flatness of the simulated front against a planar wave

struct Flatness2d {
    FlatnessTrace upper;  // running max of (front - planar front) along nu
    FlatnessTrace lower;  // running max of (planar front - front) along nu
};

inline Flatness2d flatness2d(const std::vector<FrontGraph>& history, const StripDomain& d, const PlanarWave& P) {
    if (P.q.size() != 2) throw std::invalid_argument("flatness2d needs a two-dimensional planar wave");
    const Vec nu = P.normal();
    if (!(nu[0] > 0.0)) throw std::invalid_argument("flatness2d needs the planar front to advance in +x");
    Flatness2d out;
    out.upper.side = ObstacleSide::Super;
    out.lower.side = ObstacleSide::Sub;
    double up = 0.0, lo = 0.0;
    for (const auto& f : history) {
        const double front = P.front(f.t);
        for (int j = 0; j < d.ny; ++j) {
            const double s = f.h[static_cast<std::size_t>(j)] * nu[0] + d.y(j) * nu[1] - front;
            up = std::max(up, s);
            lo = std::max(lo, -s);
        }
        out.upper.times.push_back(f.t);
        out.lower.times.push_back(f.t);
        out.upper.phi.push_back(up);
        out.lower.phi.push_back(lo);
    }
    if (history.size() > 1) out.upper.dt = out.lower.dt = history[1].t - history[0].t;
    return out;
}

}  // namespace hele_homog
