#pragma once

// Principal-branch Lambert W and the nonlinear time rescalings built from it.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hele_homog {

class TimescaleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace detail {

// 1/e split as a double plus its rounding error.
inline constexpr double kInvEHi = 0.36787944117144233;
inline constexpr double kInvELo = -1.2428753672788363e-17;

// W0 near the branch point in p = sqrt(2(ex + 1)).
inline double lambert_branch_series(double p) {
    static constexpr double c[] = {-1.0,
                                   1.0,
                                   -1.0 / 3.0,
                                   11.0 / 72.0,
                                   -43.0 / 540.0,
                                   769.0 / 17280.0,
                                   -221.0 / 8505.0,
                                   680863.0 / 43545600.0,
                                   -1963.0 / 204120.0,
                                   226287557.0 / 37623398400.0};
    double acc = 0.0;
    for (int k = 9; k >= 0; --k) acc = acc * p + c[k];
    return acc;
}

inline double halley_refine(double w, double x) {
    for (int it = 0; it < 60; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

}  // namespace detail

/// Principal branch W0(x) for x >= -1/e.
inline double lambert_w0(double x) {
    if (std::isnan(x)) throw TimescaleError("lambert_w0: NaN argument");
    const double branch = std::numbers::e * ((x + detail::kInvEHi) + detail::kInvELo);  // e x + 1
    if (branch <= 0.0) {
        if (branch > -4.0 * std::numeric_limits<double>::epsilon()) return -1.0;
        throw TimescaleError("lambert_w0: argument below -1/e");
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;

    const double p = std::sqrt(2.0 * branch);
    if (p < 1e-3) return detail::lambert_branch_series(p);
    if (p < 0.3) return detail::halley_refine(detail::lambert_branch_series(p), x);

    double w;
    if (x < 1.0) {
        w = std::log1p(x);
        w = w > 0.0 ? w * (1.0 - w / 2.0 + w * w / 3.0) : w;
    } else if (x < 3.0) {
        w = 0.5 + 0.25 * (x - 1.0);
    } else {
        const double l1 = std::log(x), l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    return detail::halley_refine(w, x);
}

/// W0(exp(L)) without forming exp(L), for arguments that would overflow.
inline double lambert_w0_exp(double L) {
    if (L < 700.0) return lambert_w0(std::exp(L));
    double w = L - std::log(L);
    for (int it = 0; it < 60; ++it) {
        const double step = (w + std::log(w) - L) / (1.0 + 1.0 / w);
        w -= step;
        if (std::abs(step) <= 1e-16 * w) break;
    }
    return w;
}

/// Value, first and second derivatives, and the auxiliary h = alpha gamma (1 + W).
struct ScalingEval {
    double value{};
    double d1{1.0};
    double d2{0.0};
    double h{std::numeric_limits<double>::infinity()};
};

// ---------------------------------------------------------------------------

struct SubScaling {
    double alpha{1.0};
    double gamma{1.0};
    double lambda{0.0};

    SubScaling() = default;
    SubScaling(double a, double g, double l) : alpha(a), gamma(g), lambda(l) {
        if (!(alpha > 0.0) || !(gamma > 0.0) || !(lambda >= 0.0))
            throw TimescaleError("sub scaling needs alpha > 0, gamma > 0, lambda >= 0");
    }

    double xi() const { return gamma + lambda - alpha * gamma; }
    bool identity() const { return xi() <= 0.0; }
};

/// f(t) = t + xi - ag W((xi/ag) e^{(t+xi)/ag}), ag = alpha gamma.
inline ScalingEval f_sub_eval(double t, const SubScaling& s) {
    if (!(t >= 0.0)) throw TimescaleError("f_sub needs t >= 0");
    if (s.identity()) return {t, 1.0, 0.0, std::numeric_limits<double>::infinity()};
    const double ag = s.alpha * s.gamma;
    const double xi = s.xi();
    const double w = lambert_w0_exp(std::log(xi / ag) + (t + xi) / ag);
    ScalingEval e;
    e.value = t + xi - ag * w;
    e.h = ag * (1.0 + w);
    e.d1 = ag / e.h;
    const double hp = (e.h - ag) / e.h;
    e.d2 = -ag * hp / (e.h * e.h);
    return e;
}

inline double f_sub(double t, const SubScaling& s) { return f_sub_eval(t, s).value; }

// ---------------------------------------------------------------------------

struct SuperScaling {
    double alpha{1.0};
    double gamma{1.0};
    double lambda{0.0};

    SuperScaling() = default;
    SuperScaling(double a, double g, double l) : alpha(a), gamma(g), lambda(l) {
        if (!(alpha > 0.0) || !(gamma > 0.0) || !(lambda >= 0.0) || !(gamma > lambda))
            throw TimescaleError("super scaling needs alpha > 0 and gamma > lambda >= 0");
    }

    double eta() const { return gamma - lambda - alpha * gamma; }
    bool identity() const { return eta() >= 0.0; }

    /// Time at which the W argument reaches -1/e; infinite on the identity branch.
    double t_max() const {
        if (identity()) return std::numeric_limits<double>::infinity();
        const double ag = alpha * gamma;
        const double eta_ = eta();
        return ag * (std::log(ag / -eta_) - 1.0) - eta_;
    }
};

/// f(t) = t + eta - ag W((eta/ag) e^{(t+eta)/ag}) on [0, t_max).
inline ScalingEval f_super_eval(double t, const SuperScaling& s) {
    if (!(t >= 0.0)) throw TimescaleError("f_super needs t >= 0");
    if (s.identity()) return {t, 1.0, 0.0, std::numeric_limits<double>::infinity()};
    if (t >= s.t_max()) throw TimescaleError("f_super: t beyond the blow-up time t_max");
    const double ag = s.alpha * s.gamma;
    const double eta = s.eta();
    const double w = lambert_w0((eta / ag) * std::exp((t + eta) / ag));
    ScalingEval e;
    e.value = t + eta - ag * w;
    e.h = ag * (1.0 + w);
    e.d1 = ag / e.h;
    const double hp = (e.h - ag) / e.h;
    e.d2 = -ag * hp / (e.h * e.h);
    return e;
}

inline double f_super(double t, const SuperScaling& s) { return f_super_eval(t, s).value; }

// ---------------------------------------------------------------------------

struct ThetaShift {
    double gamma{1.0};
    double lambda{0.0};

    ThetaShift() = default;
    ThetaShift(double g, double l) : gamma(g), lambda(l) {
        if (!(gamma > 0.0) || !(lambda >= 0.0) || lambda > gamma)
            throw TimescaleError("theta shift needs gamma > 0 and lambda in [0, gamma]");
    }

    /// log(gamma/lambda) + lambda/gamma - 1; infinite when lambda = 0.
    double t_lambda() const {
        if (lambda == 0.0) return std::numeric_limits<double>::infinity();
        return std::log(gamma / lambda) + lambda / gamma - 1.0;
    }
};

/// theta(t) = t - gamma W(-(lambda/gamma) e^{-lambda/gamma} e^{t/gamma}); d1 is theta'.
inline ScalingEval theta_shift_eval(double t, const ThetaShift& sh) {
    if (!(t >= 0.0)) throw TimescaleError("theta shift needs t >= 0");
    if (sh.lambda == 0.0) return {t, 1.0, 0.0, std::numeric_limits<double>::infinity()};
    const double tl = sh.t_lambda();
    if (t > tl * (1.0 + 1e-14) + 1e-300) throw TimescaleError("theta shift: t beyond t_lambda");
    const double ratio = sh.lambda / sh.gamma;
    const double w = t >= tl ? -1.0 : lambert_w0(-ratio * std::exp(t / sh.gamma - ratio));
    ScalingEval e;
    e.value = t - sh.gamma * w;
    e.h = sh.gamma * (1.0 + w);
    e.d1 = 1.0 + w > 0.0 ? 1.0 / (1.0 + w) : std::numeric_limits<double>::infinity();
    e.d2 = 1.0 + w > 0.0 ? -w / (sh.gamma * std::pow(1.0 + w, 3)) : std::numeric_limits<double>::infinity();
    return e;
}

inline double theta_shift(double t, const ThetaShift& sh) { return theta_shift_eval(t, sh).value; }

}  // namespace hele_homog
