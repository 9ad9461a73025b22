#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <hele_homog/geometry.hpp>

using namespace hele_homog;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

struct Draw {
    Vec q;
    double r, m, M;
};

Draw random_draw(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nrm;
    const int n = 2 + static_cast<int>(rng() % 3);
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = nrm(rng);
    q *= (0.2 + 2.8 * u(rng)) / q.norm();
    const double m = 0.1 + 1.9 * u(rng);
    const double M = m * (1.1 + 3.0 * u(rng));
    const double r = q.norm() * (m + (M - m) * u(rng));
    return {q, r, m, M};
}

// Uniform-ish sample of Omega_q x (0, 3] by rejection from a box.
std::pair<Vec, double> sample_Q(const ConeGeometry& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-4.0, 4.0), ut(0.0, 3.0);
    for (;;) {
        Vec x(g.dim());
        for (int i = 0; i < g.dim(); ++i) x[i] = u(rng);
        if (g.in_domain(x)) return {x, ut(rng) + 1e-9};
    }
}

}  // namespace

TEST(PlanarWave, Examples) {
    EXPECT_DOUBLE_EQ(planar_eval(PlanarWave(vec2(1, 0), 1.0), vec2(0, 0), 1.0), 1.0);
    EXPECT_DOUBLE_EQ(planar_eval(PlanarWave(vec2(1, 0), 1.0), vec2(-2, 0), 1.0), 0.0);
    EXPECT_DOUBLE_EQ(planar_eval(PlanarWave(vec2(1, 0), 1.0, 0.5), vec2(-1, 0), 1.0), 0.5);
    EXPECT_THROW(PlanarWave(vec2(0, 0), 1.0), GeometryError);
}

TEST(PlanarWave, ZeroSetIsHalfSpaceBeyondFront) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    const PlanarWave p(vec2(0.6, -0.8) * 1.7, 1.3, 0.25);
    EXPECT_NEAR(p.normal().norm(), 1.0, 1e-15);
    for (int i = 0; i < 1000; ++i) {
        const Vec x = vec2(u(rng), u(rng));
        const double t = std::abs(u(rng));
        const double v = p(x, t);
        EXPECT_GE(v, 0.0);
        EXPECT_EQ(v == 0.0, x.dot(p.normal()) >= p.front(t));
    }
}

TEST(PlanarWave, ScalingCovariance) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    const PlanarWave p(vec2(1.2, 0.4), 0.9);
    for (int i = 0; i < 200; ++i) {
        const Vec x = vec2(u(rng), u(rng));
        const double t = std::abs(u(rng));
        const double a = 0.1 + std::abs(u(rng));
        EXPECT_NEAR(a * p(x / a, t / a), p(x, t), 1e-12);
    }
}

TEST(TranslationOrder, Examples) {
    const PlanarWave p(vec2(1, 0), 1.0);
    EXPECT_EQ(translation_order(p, vec2(-1, 0), 1.0), Order::Both);
    EXPECT_EQ(translation_order(p, vec2(-2, 0), 1.0), Order::AboveOrEqual);
    EXPECT_EQ(translation_order(p, vec2(1, 0), 0.0), Order::BelowOrEqual);
}

TEST(TranslationOrder, AgreesWithPointwiseGridOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const PlanarWave p(vec2(0.8, 0.6) * 1.5, 0.7);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec y = vec2(u(rng), u(rng));
        const double tau = u(rng);
        bool below = true, above = true;
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j)
                for (int k = 0; k < 10; ++k) {
                    const Vec x = vec2(-4.0 + 8.0 * i / 19, -4.0 + 8.0 * j / 19);
                    const double t = 3.0 * k / 9;
                    const double shifted = p(x - y, t - tau), base = p(x, t);
                    if (shifted > base + 1e-12) below = false;
                    if (shifted < base - 1e-12) above = false;
                }
        const Order o = translation_order(p, y, tau);
        if (o == Order::BelowOrEqual) EXPECT_TRUE(below && !above);
        if (o == Order::AboveOrEqual) EXPECT_TRUE(above && !below);
    }
}

TEST(PlanarClass, Examples) {
    EXPECT_EQ(planar_admissible_range(vec2(1, 0), 0.5, 1.0, 2.0), PlanarClass::Subsolution);
    EXPECT_EQ(planar_admissible_range(vec2(1, 0), 3.0, 1.0, 2.0), PlanarClass::Supersolution);
    EXPECT_EQ(planar_admissible_range(vec2(1, 0), 1.5, 1.0, 2.0), PlanarClass::Neither);
    EXPECT_EQ(planar_admissible_range(vec2(0, 1), 1.0, 1.0, 1.0), PlanarClass::Both);
}

TEST(InCone, Examples) {
    const Vec v = vec2(0, 0), axis = vec2(0, 1);
    EXPECT_FALSE(in_cone(v, v, axis, kPi / 4));
    EXPECT_TRUE(in_cone(v + axis, v, axis, kPi / 4));
    EXPECT_TRUE(in_cone(vec2(1, 1.01), v, axis, kPi / 4));
    EXPECT_FALSE(in_cone(vec2(1, 0.99), v, axis, kPi / 4));
    EXPECT_THROW(in_cone(v, v, vec2(0, 0), kPi / 4), GeometryError);
    EXPECT_THROW(in_cone(v, v, axis, kPi / 2), GeometryError);
}

TEST(Cone, AnglesAndVertexSpeeds) {
    const auto g = cone_geometry(vec2(1, 0), 1.0, 1.0, 2.0);
    EXPECT_NEAR(g.theta, kPi / 4, 1e-15);
    EXPECT_NEAR(g.theta_plus, kPi / 4, 1e-15);
    EXPECT_NEAR(g.phi_minus, kPi / 3, 1e-15);
    EXPECT_NEAR(g.theta_minus, 5 * kPi / 12, 1e-15);
    EXPECT_DOUBLE_EQ(g.rV_plus, 2.0);
    EXPECT_NEAR(g.rV_minus, std::sqrt(3.0) - 1.0, 1e-15);
    EXPECT_THROW(cone_geometry(vec2(1, 0), 1.0, 2.0, 2.0), GeometryError);
    Vec q1(1);
    q1 << 1.0;
    EXPECT_THROW(cone_geometry(q1, 1.0, 1.0, 2.0), GeometryError);
}

TEST(Cone, InvariantsOnRandomDraws) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const Draw d = random_draw(rng);
        const auto g = cone_geometry(d.q, d.r, d.m, d.M);
        EXPECT_GT(g.theta, 0.0);
        EXPECT_LT(g.theta, kPi / 2);
        EXPECT_GT(g.theta_minus, g.theta);
        EXPECT_LT(g.theta_minus, kPi / 2);
        EXPECT_GT(g.rV_plus, g.r);
        EXPECT_GT(g.r, g.rV_minus);
        EXPECT_GT(g.rV_minus, 0.0);
        // Both vertices pass through V = -nu at t = -1/r.
        EXPECT_NEAR((g.vertex_plus(-1.0 / g.r) - g.vertex).norm(), 0.0, 1e-12);
        EXPECT_NEAR((g.vertex_minus(-1.0 / g.r) - g.vertex).norm(), 0.0, 1e-12);
        for (double t : {0.0, 0.5, 2.0}) {
            const auto s = g.slice_radii(t);
            EXPECT_NEAR(s.plus, s.domain, 1e-10 * (1 + s.domain));
            EXPECT_NEAR(s.minus, s.domain, 1e-10 * (1 + s.domain));
        }
    }
}

TEST(Matching, ExamplesAtMEqualOneMEqualTwo) {
    const auto g = cone_geometry(vec2(1, 0), 1.0, 1.0, 2.0);
    const auto w = matching_wave(g, xi_sample(g, 0));
    EXPECT_NEAR(w.plus.speed, std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(w.plus.mu, 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(w.plus.speed / w.plus.mu, 2.0, 1e-14);
    EXPECT_NEAR(w.minus.speed, 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(w.minus.mu, std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(w.minus.speed / w.minus.mu, 0.5, 1e-14);
    EXPECT_THROW(matching_wave(g, vec2(1, 0)), GeometryError);
}

TEST(Matching, Admissibility) {
    const auto g1 = cone_geometry(vec2(1, 0), 1.0, 1.0, 2.0);
    const auto a1 = verify_admissibility(g1, xi_sample(g1, 3));
    EXPECT_NEAR(a1.plus_ratio, 2.0, 1e-14);
    EXPECT_TRUE(a1.ok);
    const auto g2 = cone_geometry(vec2(1, 0), 2.0, 1.0, 2.0);
    const auto a2 = verify_admissibility(g2, xi_sample(g2, 3));
    EXPECT_NEAR(a2.plus_ratio, 4.0, 1e-14);
    EXPECT_NEAR(a2.plus_margin, 2.0, 1e-14);
    const auto g3 = cone_geometry(vec2(1, 0), 0.5, 1.0, 2.0);
    EXPECT_THROW(verify_admissibility(g3, xi_sample(g3, 3)), GeometryError);
}

TEST(Matching, RatioIdentitiesAndRayEquality) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const Draw d = random_draw(rng);
        const auto g = cone_geometry(d.q, d.r, d.m, d.M);
        const PlanarWave P(d.q, d.r);
        const Vec xi = xi_sample(g, static_cast<std::uint64_t>(i));
        EXPECT_NEAR(xi.dot(g.nu), std::cos(g.theta), 1e-12);
        const auto w = matching_wave(g, xi);
        const double base = d.r / d.q.norm();
        EXPECT_NEAR(w.plus.speed / w.plus.mu, base * d.M / d.m, 1e-12 * (1 + base * d.M / d.m));
        EXPECT_NEAR(w.minus.speed / w.minus.mu, base * d.m / d.M, 1e-12);
        EXPECT_GT(w.plus.mu, 0.0);
        EXPECT_GT(w.minus.mu, 0.0);
        EXPECT_TRUE(verify_admissibility(g, xi).ok);
        for (int k = 0; k < 50; ++k) {
            const double sigma = 5.0 * k / 49.0;
            const double t = 3.0 * ((k * 7) % 50) / 49.0;
            const Vec x = g.vertex + sigma * xi;
            const double p = P(x, t);
            EXPECT_NEAR(w.plus(x, t), p, 1e-9);
            EXPECT_NEAR(w.minus(x, t), p, 1e-9);
        }
    }
}

TEST(Matching, SandwichOnConeDomain) {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 20; ++i) {
        const Draw d = random_draw(rng);
        const auto g = cone_geometry(d.q, d.r, d.m, d.M);
        const PlanarWave P(d.q, d.r);
        const auto w = matching_wave(g, xi_sample(g, static_cast<std::uint64_t>(i)));
        const auto w0 = matching_wave_zero(g);
        for (int k = 0; k < 1000; ++k) {
            const auto [x, t] = sample_Q(g, rng);
            const double p = P(x, t);
            const double tol = 1e-10 * (1.0 + p);
            EXPECT_LE(w.minus(x, t), p + tol);
            EXPECT_GE(w.plus(x, t), p - tol);
            EXPECT_LE(w0.minus(x, t), p + tol);
            EXPECT_GE(w0.plus(x, t), p - tol);
        }
        // Special waves agree with P at t = 0.
        const Vec x0 = g.vertex + 0.5 * g.nu;
        EXPECT_NEAR(w0.plus(x0, 0.0), P(x0, 0.0), 1e-14);
        EXPECT_NEAR(w0.minus(x0, 0.0), P(x0, 0.0), 1e-14);
    }
}

TEST(GridCover, OneDimensionalInterval) {
    Vec lo(1), hi(1);
    lo << -1.0;
    hi << 11.0;
    auto A = [](const Vec& x) { return x[0] >= 0.0 && x[0] <= 10.0; };
    auto E = [](const Vec& x) { return x[0] >= 0.8 && x[0] <= 9.2; };
    const auto rep = grid_cover_check(A, E, 0.8, 1.0, lo, hi, 241);
    EXPECT_TRUE(rep.hypothesis_holds);
    EXPECT_TRUE(rep.covered);
    EXPECT_GT(rep.samples, 0u);
    EXPECT_LT(rep.worst_distance, 0.8);
}

TEST(GridCover, EmptyAndHypothesisFailure) {
    Vec lo(2), hi(2);
    lo << -2, -2;
    hi << 2, 2;
    auto A = [](const Vec& x) { return x.norm() < 1.5; };
    const auto empty = grid_cover_check(A, [](const Vec&) { return false; }, 0.8, 0.5, lo, hi);
    EXPECT_TRUE(empty.covered);
    EXPECT_EQ(empty.samples, 0u);
    const auto bad = grid_cover_check(A, [](const Vec& x) { return x.norm() < 1.4; }, 0.8, 0.5, lo, hi);
    EXPECT_FALSE(bad.hypothesis_holds);
    EXPECT_TRUE(bad.hypothesis_witness.has_value());
    EXPECT_THROW(grid_cover_check(A, A, 0.7, 0.5, lo, hi), GeometryError);
}

TEST(GridCover, ConeMargin) { EXPECT_NEAR(cone_grid_margin(1.0, kPi / 6, 0.1), 0.2, 1e-15); }
