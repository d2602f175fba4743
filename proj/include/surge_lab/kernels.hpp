#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <map>
#include <vector>

#include "surge_lab/interval_set.hpp"
#include "surge_lab/model.hpp"
#include "surge_lab/quadrature.hpp"
#include "surge_lab/transition.hpp"
#include "surge_lab/trip_dist.hpp"

namespace surge_lab {

/**
 * Unnormalized per-state quantities for a (state, policy) pair:
 *
 *   f_sigma = F_i(sigma_i)
 *   t_tilde = 1 + lambda_i * int_sigma tau dF_i
 *   q_tilde = lambda_ij + lambda_i * int_sigma q_ij(tau) dF_i
 *   w_tilde = lambda_i * int_sigma w_i(tau) dF_i
 *   rate    = w_tilde / t_tilde
 */
struct StateAggregates {
    double f_sigma = 0.0;
    double t_tilde = 1.0;
    double q_tilde = 0.0;
    double w_tilde = 0.0;
    double rate = 0.0;
};

/// Raw policy-restricted moments int_sigma {1, tau, q(tau), w(tau)} dF.
using Moments = std::array<double, 4>;

namespace detail {

/// Splits a policy into quadrature pieces inside (0, truncation), cut at density breakpoints.
inline std::vector<std::pair<double, double>> quadrature_pieces(const TripDist& dist, const IntervalSet& policy) {
    const double trunc = dist.truncation_point();
    const auto breaks = dist.breakpoints();
    std::vector<std::pair<double, double>> pieces;
    for (const auto& iv : policy.intervals()) {
        const double lo = iv.lower;
        const double hi = std::min(iv.upper, trunc);
        if (!(hi > lo)) continue;
        double cur = lo;
        for (double b : breaks) {
            if (b > cur && b < hi) {
                pieces.emplace_back(cur, b);
                cur = b;
            }
        }
        pieces.emplace_back(cur, hi);
    }
    return pieces;
}

}  // namespace detail

/// int_sigma g(tau) dF(tau) for a vector-valued g, by adaptive Simpson on the density.
template <std::size_t N, class G>
std::array<double, N> integrate_over_policy_vector(const G& g, const TripDist& dist, const IntervalSet& policy,
                                                   const QuadratureOptions& opt = {}) {
    std::array<double, N> total{};
    for (const auto& [lo, hi] : detail::quadrature_pieces(dist, policy)) {
        const auto part = integrate_vector<N>(
            [&](double t) {
                auto v = g(t);
                const double f = dist.pdf(t);
                for (auto& c : v) c *= f;
                return v;
            },
            lo, hi, opt);
        for (std::size_t k = 0; k < N; ++k) total[k] += part[k];
    }
    return total;
}

/// int_sigma g(tau) dF(tau). Infinite upper endpoints are replaced by the truncation point.
template <class G>
double integrate_over_policy(const G& g, const TripDist& dist, const IntervalSet& policy,
                             const QuadratureOptions& opt = {}) {
    return integrate_over_policy_vector<1>([&](double t) { return std::array<double, 1>{g(t)}; }, dist, policy, opt)[0];
}

/// Every pricing family is linear in {1, tau, q(tau)}, so int w dF follows from those moments.
inline double payment_moment(const PricingSpec& w, double f, double t, double q) {
    switch (w.family()) {
        case PricingFamily::Multiplicative: return w.m() * t;
        case PricingFamily::Affine: return w.m() * t + w.offset() * f;
        case PricingFamily::ICForm: return w.m() * t + w.offset() * q;
    }
    return 0.0;
}

/// {F, int tau, int q, int w} over `policy`.
inline Moments policy_moments(const StateView& v, const IntervalSet& policy) {
    const auto m = integrate_over_policy_vector<3>([&](double t) { return std::array<double, 3>{1.0, t, v.q(t)}; },
                                                   v.dist, policy);
    return {m[0], m[1], m[2], payment_moment(v.pricing, m[0], m[1], m[2])};
}

inline StateAggregates aggregates_from_moments(const StateView& v, const Moments& m) {
    StateAggregates a;
    a.f_sigma = std::clamp(m[0], 0.0, 1.0);
    a.t_tilde = 1.0 + v.lambda * m[1];
    a.q_tilde = v.lambda_out + v.lambda * m[2];
    a.w_tilde = v.lambda * m[3];
    a.rate = a.w_tilde == 0.0 ? 0.0 : a.w_tilde / a.t_tilde;
    return a;
}

inline StateAggregates aggregates(const ModelPrimitives& p, WorldState state, const IntervalSet& policy) {
    const auto v = p.view(state);
    return aggregates_from_moments(v, policy_moments(v, policy));
}

/// Measure F(sigma) of a policy, straight from the CDF.
inline double measure_fraction(const IntervalSet& policy, const TripDist& dist) {
    double total = 0.0;
    for (const auto& iv : policy.intervals()) total += dist.cdf(iv.upper) - dist.cdf(iv.lower);
    return std::clamp(total, 0.0, 1.0);
}

/**
 * Memoized cumulative moments C(t) = int_0^t {1, tau, q, w} dF for one state.
 * Policy aggregates become sums of C(u) - C(l), which keeps grid searches
 * cheap. Not thread-safe; give each worker its own cache.
 */
class MomentCache {
public:
    explicit MomentCache(StateView view) : view_(view), trunc_(view.dist.truncation_point()) {
        cache_.emplace(0.0, Moments{});
    }

    [[nodiscard]] const StateView& view() const { return view_; }
    [[nodiscard]] double truncation() const { return trunc_; }

    const Moments& cumulative(double t) {
        t = std::clamp(t, 0.0, trunc_);
        auto it = cache_.lower_bound(t);
        if (it != cache_.end() && it->first == t) return it->second;
        auto base = std::prev(it);
        Moments value = base->second;
        const auto part = policy_moments(view_, IntervalSet({Interval{base->first, t}}));
        for (std::size_t k = 0; k < 4; ++k) value[k] += part[k];
        return cache_.emplace_hint(it, t, value)->second;
    }

    Moments moments(const IntervalSet& policy) {
        Moments total{};
        for (const auto& iv : policy.intervals()) {
            const Moments hi = cumulative(iv.upper);
            const Moments& lo = cumulative(iv.lower);
            for (std::size_t k = 0; k < 4; ++k) total[k] += hi[k] - lo[k];
        }
        return total;
    }

    StateAggregates aggregates(const IntervalSet& policy) { return aggregates_from_moments(view_, moments(policy)); }

private:
    StateView view_;
    double trunc_;
    std::map<double, Moments> cache_;
};

}  // namespace surge_lab
