#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <hele_homog/barriers.hpp>
#include <hele_homog/geometry.hpp>

using namespace hele_homog;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Expanding, Examples) {
    const auto b3 = expanding_barrier(3, 1.0, 1.0, 0.5);
    EXPECT_NEAR(b3.alpha, 2.0, 1e-15);
    EXPECT_NEAR(b3.radius(1.0), std::sqrt(2.0), 1e-15);
    const auto b2 = expanding_barrier(2, 1.0, 1.0, 0.25);
    EXPECT_NEAR(b2.alpha, 2.0 / std::log(4.0), 1e-15);
    EXPECT_NEAR(b2.alpha, 1.442695, 1e-6);
    EXPECT_NEAR(b2.radius(1.0), 1.201122, 1e-6);
    EXPECT_THROW(expanding_barrier(2, 1.0, 1.0, 1.0), BarrierError);
    EXPECT_THROW(expanding_barrier(1, 1.0, 1.0, 0.5), BarrierError);
}

TEST(Expanding, FreeBoundaryCondition) {
    EXPECT_LE(check_expanding_fbc(expanding_barrier(3, 1.0, 1.0, 0.5), 1.0), 1e-10);
    EXPECT_LE(check_expanding_fbc(expanding_barrier(2, 1.0, 1.0, 0.25), 0.5), 1e-10);
    EXPECT_THROW(check_expanding_fbc(expanding_barrier(2, 1.0, 1.0, 0.25), 0.0), BarrierError);
}

TEST(Expanding, RadiusRateMatchesFiniteDifference) {
    const auto b = expanding_barrier(4, 0.7, 1.3, 0.4);
    for (double t : {0.2, 1.0, 5.0}) {
        const double h = 1e-6 * t;
        const double fd = (b.radius(t + h) - b.radius(t - h)) / (2 * h);
        EXPECT_NEAR(b.radius_rate(t), fd, 1e-7 * fd);
        // Oracle for |D phi| on the front: centered difference of the profile in |x|.
        const double rho = b.radius(t), dx = 1e-6 * rho;
        const double slope = (b(rho - dx, t) - b(rho - 3 * dx, t)) / (2 * dx);
        EXPECT_NEAR(-slope, b.front_gradient(t), 1e-4 * b.front_gradient(t));
    }
}

TEST(Expanding, SelfSimilarityAndBoundaryValue) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 50; ++i) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const auto b = expanding_barrier(n, 0.5 + u(rng), 0.5 + u(rng), u(rng));
        const double t1 = 0.1 + u(rng), t2 = 3.0 + u(rng);
        const double c1 = b.radius(t1) * b.radius(t1) / t1, c2 = b.radius(t2) * b.radius(t2) / t2;
        EXPECT_NEAR(c1, c2, 1e-12 * c1);
        EXPECT_NEAR(b(b.A * b.radius(t1), t1), b.K, 1e-12 * b.K);
        EXPECT_EQ(b(b.radius(t1) * 1.0001, t1), 0.0);
    }
}

TEST(Contracting, ExampleRootN2) {
    const auto b = contracting_barrier(2, 1.0, 1.0, [](double) { return 1.0; }, [](double t) { return t; });
    const double rho = b.radius(-0.1);
    EXPECT_GT(rho, 0.0);
    EXPECT_LT(rho, 1.0);
    EXPECT_NEAR(0.5 * rho * rho * (std::log(rho) - 0.5), -0.1, 1e-12);
}

TEST(Contracting, LimitsAndMonotonicity) {
    for (int n : {2, 3, 5}) {
        const double M = 1.5, mu = 2.0;
        const auto b = contracting_barrier(n, M, mu, [](double) { return 1.0; }, [](double t) { return t; });
        const double t0 = -mu * mu / (2.0 * n * M);
        EXPECT_LT(b.radius(-1e-9), 1e-3);
        EXPECT_GT(b.radius(t0 * (1 - 1e-9)), 0.99 * mu);
        double prev = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double t = t0 * (1.0 - k / 101.0);  // increasing towards 0
            const double rho = b.radius(t);
            EXPECT_NEAR(contracting_lhs(n, mu, rho), M * t, 1e-10);
            if (k > 1) EXPECT_LT(rho, prev);
            prev = rho;
        }
        EXPECT_THROW(b.radius(0.0), BarrierError);
        EXPECT_THROW(b.radius(t0 * 1.01), BarrierError);
    }
}

TEST(Contracting, QuadratureCumulative) {
    auto chi = [](double s) { return 1.0 + 0.5 * std::sin(s); };
    const auto K = cumulative_from_chi(chi);
    const double t = -0.1;
    const double exact = t + 0.5 * (1.0 - std::cos(t));  // int_0^t chi
    EXPECT_NEAR(K(t), exact, 1e-12);
    const auto b = contracting_barrier(3, 1.0, 1.0, chi);
    EXPECT_NEAR(contracting_lhs(3, 1.0, b.radius(t)), exact, 1e-10);
    EXPECT_NEAR(contracting_radius(3, 1.0, 1.0, K, t), b.radius(t), 1e-13);
}

TEST(Contracting, FreeBoundaryVelocity) {
    // rho'(t) = -M |D phi+| on the front (n = 3, chi = 1).
    const auto b = contracting_barrier(3, 1.2, 1.0, [](double) { return 1.0; }, [](double t) { return t; });
    for (double t : {-0.12, -0.08, -0.02}) {
        const double h = 1e-6;
        const double rate = (b.radius(t + h) - b.radius(t - h)) / (2 * h);
        EXPECT_NEAR(rate, -b.M * b.front_gradient(t), 1e-5 * std::abs(rate));
    }
}

TEST(Closing, Criterion) {
    auto one = [](double) { return 1.0; };
    EXPECT_TRUE(closing_criterion(2, 1.0, 1.0, one, 0.0, 0.2));
    EXPECT_FALSE(closing_criterion(2, 1.0, 1.0, one, 0.0, 0.3));
    auto three = [](double) { return 3.0; };
    EXPECT_EQ(closing_criterion(3, 2.0, 1.5, three, 1.0, 1.01), 0.01 * 3.0 < 1.5 * 1.5 / 12.0);
    EXPECT_THROW(closing_criterion(2, 1.0, 1.0, one, 0.2, 0.1), BarrierError);
}

TEST(Bounds, NondegeneracyExpansionRational) {
    EXPECT_DOUBLE_EQ(nondegeneracy_bound(2, 1.0, 1.0, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(nondegeneracy_bound(2, 1.0, 2.0, 1.0), 4.0 * 0.25);
    EXPECT_LT(nondegeneracy_bound(2, 1.0, 1.0, 1e12), 1e-12);
    EXPECT_DOUBLE_EQ(expansion_radius(2, 1.0, 1.0, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(expansion_radius(2, 1.0, 1.0, 0.0), 0.0);
    EXPECT_NEAR(expansion_radius(3, 2.0, 1.0, 1.0), std::sqrt(12.0), 1e-15);
    // mu^2 / (2 n M A) = ln 2 with n = 2, M = 1, mu = 1: A = 1 / (4 ln 2).
    const double A = 1.0 / (4.0 * std::log(2.0));
    EXPECT_TRUE(rational_bound_check(2, 1.0, 1.0, 0.999, A, 1.0));
    EXPECT_FALSE(rational_bound_check(2, 1.0, 1.0, 1.001, A, 1.0));
    EXPECT_TRUE(rational_bound_check(2, 1.0, 1.0, 0.0, A, 1.0));
    EXPECT_FALSE(rational_bound_check(2, 1.0, 1.0, 0.1, A, 1e-9));
}

TEST(ThinCylinder, ValuesAndSign) {
    for (int n : {2, 3, 6}) {
        const auto v = thin_cylinder_phi(0.0, 0.0, n);
        EXPECT_DOUBLE_EQ(v.value, -0.5);
        EXPECT_NEAR(v.laplacian, -1.0 / n, 1e-15);
        EXPECT_NEAR(thin_cylinder_phi(0.7, kPi / 2, n).laplacian, 0.0, 1e-15);
    }
    EXPECT_NEAR(thin_cylinder_margin(2, 1.0, 0.1, 1.0), 1.0 - 6.0 * std::sqrt(2.0) / kPi * 0.3, 1e-15);
    EXPECT_NEAR(thin_cylinder_margin(2, 1.0, 0.1, 1.0), 0.1897153, 1e-7);
}

TEST(ThinCylinder, LaplacianMatchesFiniteDifferences) {
    // Oracle: 5-point stencil in (r, x_n) with the radial term (n - 2)/r for x' in R^{n-1}.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ur(0.2, 2.0), uz(-1.4, 1.4);
    for (int i = 0; i < 100; ++i) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const double r = ur(rng), z = uz(rng), h = 1e-4;
        auto f = [&](double rr, double zz) { return thin_cylinder_phi(rr, zz, n).value; };
        const double frr = (f(r + h, z) - 2 * f(r, z) + f(r - h, z)) / (h * h);
        const double fr = (f(r + h, z) - f(r - h, z)) / (2 * h);
        const double fzz = (f(r, z + h) - 2 * f(r, z) + f(r, z - h)) / (h * h);
        const double lap = frr + (n - 2) / r * fr + fzz;
        EXPECT_NEAR(thin_cylinder_phi(r, z, n).laplacian, lap, 1e-5);
    }
}

TEST(ThinCylinder, StrictlySuperharmonic) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(0.0, 10.0), uz(-(kPi / 2 - 1e-3), kPi / 2 - 1e-3);
    for (int i = 0; i < 1000; ++i) {
        const int n = 2 + static_cast<int>(rng() % 5);
        EXPECT_LT(thin_cylinder_phi(ur(rng), uz(rng), n).laplacian, 0.0);
    }
}

TEST(RadialPerturbation, BoundaryValuesAndMidpoint) {
    const auto p = radial_perturbation(3);
    EXPECT_NEAR(p.phi(2.0), 1.0, 1e-14);
    EXPECT_NEAR(p.phi(1.0), 6.0, 1e-13);
    // n = 3: 1/phi is linear in 1/s; 1/phi(1.5) = 1/6 + (5/6)(1/1.5 - 1/1)/(1/2 - 1) = 13/18.
    EXPECT_NEAR(p.phi(1.5), 18.0 / 13.0, 1e-14);
    EXPECT_GT(p.phi(1.0 + p.delta), 5.0);
    EXPECT_THROW(radial_perturbation(2), BarrierError);
}

TEST(RadialPerturbation, InequalityOnAnnulus) {
    for (int n : {3, 4, 7}) {
        const auto p = radial_perturbation(n);
        for (int k = 0; k <= 100; ++k) {
            const double r = p.R * (1.0 + k / 100.0);
            EXPECT_GE(p.inequality_residual(r), -1e-9) << "n=" << n << " r=" << r;
        }
        // Derivatives against centered differences.
        const double s = 1.3, h = 1e-5;
        EXPECT_NEAR(p.phi_d1(s), (p.phi(s + h) - p.phi(s - h)) / (2 * h), 1e-7);
        EXPECT_NEAR(p.phi_d2(s), (p.phi(s + h) - 2 * p.phi(s) + p.phi(s - h)) / (h * h), 1e-4);
    }
}

namespace {

std::vector<SpaceTimePoint> contracting_sample(const RadialContracting& b, int n, const std::vector<double>& times) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nrm;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SpaceTimePoint> pts;
    for (double t : times) {
        const double rho = b.radius(t);
        for (int k = 0; k < 50; ++k) {
            Eigen::VectorXd dir(n);
            for (int i = 0; i < n; ++i) dir[i] = nrm(rng);
            dir /= dir.norm();
            pts.push_back({rho * dir, t});
            pts.push_back({(rho + (b.mu - rho) * (0.05 + 0.9 * u(rng))) * dir, t});
        }
    }
    return pts;
}

}  // namespace

TEST(Superbarrier, PerturbedContractingBarrierPasses) {
    for (int n : {2, 3}) {
        const double M = 1.0, delta = 0.1, mu = 1.0;
        // Barrier built with speed M + delta; checked against the medium bound M.
        const auto b = contracting_barrier(n, M + delta, mu, [](double) { return 1.0; }, [](double t) { return t; });
        const double kappa = 0.01;
        const auto field = perturbed_contracting_field(b, 1.0, kappa);
        const double t0 = -mu * mu / (2.0 * n * (M + delta));
        const auto pts = contracting_sample(b, n, {0.8 * t0, 0.5 * t0, 0.2 * t0});
        const auto rep = check_superbarrier(field, [&](const Eigen::VectorXd&, double) { return M; }, pts, 1e-3);
        EXPECT_TRUE(rep.pass()) << "n=" << n;
        for (const auto& c : rep.checks) EXPECT_GT(c.points, 0u) << c.name;
    }
}

TEST(Superbarrier, PlanarWaveFailsInteriorCheck) {
    Eigen::VectorXd q(2);
    q << 1.0, 0.0;
    const PlanarWave P(q, 3.0);  // r > M |q| with M = 2
    SpaceTimeField field = [&](const Eigen::VectorXd& x, double t) {
        FieldSample s;
        s.value = P(x, t);
        s.gradient = P(x, t) > 0.0 ? Eigen::VectorXd(q) : Eigen::VectorXd::Zero(2);
        s.time_derivative = P(x, t) > 0.0 ? q.norm() * P.r : 0.0;
        s.laplacian = 0.0;
        if (std::abs(x.dot(P.normal()) - P.front(t)) < 1e-12) {
            s.value = 0.0;
            s.gradient = q;
            s.time_derivative = q.norm() * P.r;
        }
        return s;
    };
    std::vector<SpaceTimePoint> pts;
    for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd x(2);
        x << -0.5 + 0.1 * k, 0.3 * k;
        pts.push_back({x, 1.0});
    }
    Eigen::VectorXd front(2);
    front << -3.0, 0.0;
    pts.push_back({front, 1.0});
    const auto rep = check_superbarrier(field, [](const Eigen::VectorXd&, double) { return 2.0; }, pts, 1e-3);
    EXPECT_FALSE(rep.pass());
    EXPECT_FALSE(rep.checks[0].pass);
    EXPECT_TRUE(rep.checks[1].pass);
    EXPECT_TRUE(rep.checks[2].pass);
}

TEST(Superbarrier, MarginLargerThanActualFails) {
    const auto b = contracting_barrier(3, 1.1, 1.0, [](double) { return 1.0; }, [](double t) { return t; });
    const auto field = perturbed_contracting_field(b, 1.0, 0.01);
    const auto pts = contracting_sample(b, 3, {-0.05});
    EXPECT_FALSE(check_superbarrier(field, [](const Eigen::VectorXd&, double) { return 1.0; }, pts, 10.0).pass());
}
