#pragma once

#include <algorithm>
#include <cmath>

namespace gptcloak::detail {

struct Mat2 {
    double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

    friend Mat2 operator*(const Mat2& l, const Mat2& r) noexcept {
        return {l.m11 * r.m11 + l.m12 * r.m21, l.m11 * r.m12 + l.m12 * r.m22,
                l.m21 * r.m11 + l.m22 * r.m21, l.m21 * r.m12 + l.m22 * r.m22};
    }

    double max_abs() const noexcept {
        return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
    }
};

/// Matrix times 2^exponent. Products are renormalized by exact powers of two.
struct ScaledMat2 {
    Mat2 m;
    int exponent = 0;

    void renormalize() noexcept {
        const double mx = m.max_abs();
        if (mx == 0.0 || !std::isfinite(mx)) return;
        int e = 0;
        std::frexp(mx, &e);
        m.m11 = std::ldexp(m.m11, -e);
        m.m12 = std::ldexp(m.m12, -e);
        m.m21 = std::ldexp(m.m21, -e);
        m.m22 = std::ldexp(m.m22, -e);
        exponent += e;
    }

    friend ScaledMat2 operator*(const ScaledMat2& l, const ScaledMat2& r) noexcept {
        ScaledMat2 out{l.m * r.m, l.exponent + r.exponent};
        out.renormalize();
        return out;
    }
};

/// Interface factor conjugated by diag(1, r_1^{2k}); t = (r / r_1)^{2k}.
inline Mat2 balanced_factor(double sigma_inner, double sigma_outer, double t) noexcept {
    const double sum = sigma_inner + sigma_outer;
    const double diff = sigma_inner - sigma_outer;
    return {sum, diff / t, diff * t, sum};
}

/// d/d(sigma_inner) of balanced_factor.
inline Mat2 balanced_factor_d_inner(double t) noexcept { return {1.0, 1.0 / t, t, 1.0}; }

/// d/d(sigma_outer) of balanced_factor.
inline Mat2 balanced_factor_d_outer(double t) noexcept { return {1.0, -1.0 / t, -t, 1.0}; }

/// (r / r_1)^{2k}
inline double relative_power(double r, double r1, int k) noexcept {
    return std::pow(r / r1, 2.0 * k);
}

}  // namespace gptcloak::detail
