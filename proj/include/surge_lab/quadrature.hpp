#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "surge_lab/errors.hpp"

namespace surge_lab {

/// Adaptive Simpson settings. `abs_tol` bounds the estimated error of one call.
struct QuadratureOptions {
    double abs_tol = 1e-9;
    int max_depth = 50;
    int initial_panels = 16;
};

namespace detail {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
inline Vec<N> axpy(const Vec<N>& a, const Vec<N>& b, double sb) {
    Vec<N> out{};
    for (std::size_t k = 0; k < N; ++k) out[k] = a[k] + sb * b[k];
    return out;
}

template <std::size_t N>
inline void check_finite(const Vec<N>& v, double x) {
    for (double c : v)
        if (!std::isfinite(c)) throw NumericError("non-finite integrand value at tau = " + std::to_string(x));
}

template <std::size_t N, class F>
Vec<N> simpson_recurse(const F& f, double a, double b, const Vec<N>& fa, const Vec<N>& fm, const Vec<N>& fb,
                       const Vec<N>& whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const Vec<N> flm = f(lm);
    const Vec<N> frm = f(rm);
    check_finite(flm, lm);
    check_finite(frm, rm);
    const double h = (b - a) / 12.0;
    Vec<N> left{}, right{}, err{};
    double worst = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        left[k] = h * (fa[k] + 4.0 * flm[k] + fm[k]);
        right[k] = h * (fm[k] + 4.0 * frm[k] + fb[k]);
        err[k] = left[k] + right[k] - whole[k];
        worst = std::max(worst, std::abs(err[k]));
    }
    if (depth <= 0 || worst <= 15.0 * tol) {
        Vec<N> out{};
        for (std::size_t k = 0; k < N; ++k) out[k] = left[k] + right[k] + err[k] / 15.0;
        return out;
    }
    const Vec<N> l = simpson_recurse<N>(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    const Vec<N> r = simpson_recurse<N>(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    return axpy<N>(l, r, 1.0);
}

}  // namespace detail

/**
 * Adaptive Simpson quadrature of a vector-valued integrand on [a, b].
 * Refinement is driven by the worst component. Throws NumericError when the
 * integrand returns a non-finite value.
 */
template <std::size_t N, class F>
std::array<double, N> integrate_vector(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
    std::array<double, N> total{};
    if (!(b > a)) return total;
    if (!std::isfinite(a) || !std::isfinite(b)) throw NumericError("quadrature bounds must be finite");
    const int panels = std::max(1, opt.initial_panels);
    const double width = (b - a) / panels;
    std::array<double, N> fa = f(a);
    detail::check_finite<N>(fa, a);
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double hi = (p + 1 == panels) ? b : a + (p + 1) * width;
        const double mid = 0.5 * (lo + hi);
        const auto fm = f(mid);
        const auto fb = f(hi);
        detail::check_finite<N>(fm, mid);
        detail::check_finite<N>(fb, hi);
        std::array<double, N> whole{};
        for (std::size_t k = 0; k < N; ++k) whole[k] = (hi - lo) / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]);
        const auto part = detail::simpson_recurse<N>(f, lo, hi, fa, fm, fb, whole, opt.abs_tol / panels, opt.max_depth);
        for (std::size_t k = 0; k < N; ++k) total[k] += part[k];
        fa = fb;
    }
    return total;
}

/// Scalar convenience wrapper around integrate_vector.
template <class F>
double integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
    return integrate_vector<1>([&](double x) { return std::array<double, 1>{f(x)}; }, a, b, opt)[0];
}

}  // namespace surge_lab
