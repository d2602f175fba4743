#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "surge_lab/errors.hpp"

namespace surge_lab {

/// Weibull trip lengths: shape k (dimensionless), scale in hours.
struct Weibull {
    double shape = 2.0;
    double scale = 1.0;
};

/// Piecewise-uniform density on bins [edges[k], edges[k+1]) carrying probabilities[k].
struct EmpiricalTable {
    std::vector<double> edges;
    std::vector<double> probabilities;
};

/**
 * Distribution of trip lengths in hours.
 *
 * Integrals over "(0, inf)" are taken over (0, truncation_point()); for Weibull
 * the truncation point leaves a tail of mass kTailMass, for a table it is the
 * last bin edge and the tail is empty.
 */
class TripDist {
public:
    static constexpr double kTailMass = 1e-12;

    TripDist() : TripDist(Weibull{}) {}
    explicit TripDist(Weibull w) : impl_(w) {
        // shape < 1 has an unbounded density at 0
        if (!(w.shape >= 1.0) || !std::isfinite(w.shape)) throw ValidationError("Weibull shape must be >= 1 and finite");
        if (!(w.scale > 0.0) || !std::isfinite(w.scale)) throw ValidationError("Weibull scale must be positive and finite");
    }
    explicit TripDist(EmpiricalTable t) : impl_(validated(std::move(t))) {}

    static TripDist weibull(double shape, double scale) { return TripDist(Weibull{shape, scale}); }
    static TripDist weibull_with_mean(double shape, double mean) {
        if (!(mean > 0.0)) throw ValidationError("Weibull mean must be positive");
        return TripDist(Weibull{shape, mean / std::tgamma(1.0 + 1.0 / shape)});
    }
    static TripDist table(std::vector<double> edges, std::vector<double> probabilities) {
        return TripDist(EmpiricalTable{std::move(edges), std::move(probabilities)});
    }

    [[nodiscard]] bool is_weibull() const { return std::holds_alternative<Weibull>(impl_); }
    [[nodiscard]] const Weibull& as_weibull() const { return std::get<Weibull>(impl_); }
    [[nodiscard]] const EmpiricalTable& as_table() const { return std::get<EmpiricalTable>(impl_); }

    [[nodiscard]] double pdf(double t) const {
        if (t < 0.0) return 0.0;
        if (const auto* w = std::get_if<Weibull>(&impl_)) {
            if (t == 0.0) return w->shape == 1.0 ? 1.0 / w->scale : 0.0;
            const double x = t / w->scale;
            return w->shape / w->scale * std::pow(x, w->shape - 1.0) * std::exp(-std::pow(x, w->shape));
        }
        const auto& tb = std::get<EmpiricalTable>(impl_);
        const auto k = bin_of(tb, t);
        if (k < 0) return 0.0;
        return tb.probabilities[k] / (tb.edges[k + 1] - tb.edges[k]);
    }

    [[nodiscard]] double cdf(double t) const {
        if (t <= 0.0) return 0.0;
        if (std::isinf(t)) return 1.0;
        if (const auto* w = std::get_if<Weibull>(&impl_)) return -std::expm1(-std::pow(t / w->scale, w->shape));
        const auto& tb = std::get<EmpiricalTable>(impl_);
        if (t >= tb.edges.back()) return 1.0;
        const auto k = bin_of(tb, t);
        double below = 0.0;
        for (int i = 0; i < k; ++i) below += tb.probabilities[i];
        return below + tb.probabilities[k] * (t - tb.edges[k]) / (tb.edges[k + 1] - tb.edges[k]);
    }

    /// Inverse CDF for p in [0, 1).
    [[nodiscard]] double quantile(double p) const {
        if (!(p >= 0.0 && p < 1.0)) {
            if (p == 1.0) return truncation_point();
            throw DomainError("quantile requires p in [0,1]");
        }
        if (const auto* w = std::get_if<Weibull>(&impl_)) return w->scale * std::pow(-std::log1p(-p), 1.0 / w->shape);
        const auto& tb = std::get<EmpiricalTable>(impl_);
        double acc = 0.0;
        for (std::size_t k = 0; k < tb.probabilities.size(); ++k) {
            const double pk = tb.probabilities[k];
            if (pk > 0.0 && p < acc + pk) return tb.edges[k] + (p - acc) / pk * (tb.edges[k + 1] - tb.edges[k]);
            acc += pk;
        }
        return tb.edges.back();
    }

    [[nodiscard]] double median() const { return quantile(0.5); }

    /// Closed-form mean over the untruncated support.
    [[nodiscard]] double mean() const {
        if (const auto* w = std::get_if<Weibull>(&impl_)) return w->scale * std::tgamma(1.0 + 1.0 / w->shape);
        const auto& tb = std::get<EmpiricalTable>(impl_);
        double m = 0.0;
        for (std::size_t k = 0; k < tb.probabilities.size(); ++k)
            m += tb.probabilities[k] * 0.5 * (tb.edges[k] + tb.edges[k + 1]);
        return m;
    }

    [[nodiscard]] double truncation_point() const {
        if (const auto* w = std::get_if<Weibull>(&impl_))
            return w->scale * std::pow(-std::log(kTailMass), 1.0 / w->shape);
        return std::get<EmpiricalTable>(impl_).edges.back();
    }

    /// Points inside (0, truncation_point) where the density is not smooth.
    [[nodiscard]] std::vector<double> breakpoints() const {
        if (is_weibull()) return {};
        const auto& e = as_table().edges;
        return {e.begin() + 1, e.end() - 1};
    }

    /// Same family with every length multiplied by `factor`.
    [[nodiscard]] TripDist rescaled(double factor) const {
        if (const auto* w = std::get_if<Weibull>(&impl_)) return weibull(w->shape, w->scale * factor);
        auto tb = as_table();
        for (auto& e : tb.edges) e *= factor;
        return TripDist(std::move(tb));
    }

private:
    static int bin_of(const EmpiricalTable& tb, double t) {
        if (t < tb.edges.front() || t >= tb.edges.back()) return -1;
        auto it = std::upper_bound(tb.edges.begin(), tb.edges.end(), t);
        return static_cast<int>(it - tb.edges.begin()) - 1;
    }

    static EmpiricalTable validated(EmpiricalTable t) {
        if (t.edges.size() < 2 || t.probabilities.size() + 1 != t.edges.size())
            throw ValidationError("table needs n+1 edges for n probabilities");
        if (t.edges.front() != 0.0) throw ValidationError("table edges must start at 0");
        for (std::size_t i = 1; i < t.edges.size(); ++i)
            if (!(t.edges[i] > t.edges[i - 1]) || !std::isfinite(t.edges[i]))
                throw ValidationError("table edges must be finite and strictly increasing");
        double total = 0.0;
        for (double p : t.probabilities) {
            if (!(p >= 0.0)) throw ValidationError("table probabilities must be nonnegative");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ValidationError("table probabilities must sum to 1");
        // a sum already at rounding level is left alone so a dump/load round trip is exact
        if (std::abs(total - 1.0) > 64 * std::numeric_limits<double>::epsilon())
            for (double& p : t.probabilities) p /= total;
        return t;
    }

    std::variant<Weibull, EmpiricalTable> impl_;
};

}  // namespace surge_lab
