#pragma once

#include <cmath>
#include <string>

#include "surge_lab/errors.hpp"
#include "surge_lab/interval_set.hpp"
#include "surge_lab/pricing.hpp"
#include "surge_lab/trip_dist.hpp"

namespace surge_lab {

/// World state. State 2 is the surge state.
enum class WorldState : int { NonSurge = 1, Surge = 2 };

inline WorldState other(WorldState s) { return s == WorldState::NonSurge ? WorldState::Surge : WorldState::NonSurge; }
inline int index_of(WorldState s) { return static_cast<int>(s) - 1; }

inline WorldState state_from_int(int s) {
    if (s != 1 && s != 2) throw DomainError("world state must be 1 or 2, got " + std::to_string(s));
    return static_cast<WorldState>(s);
}

/// Everything the model needs about one world state, seen from that state.
struct StateView {
    double lambda;      // request arrival rate (1/h)
    double lambda_out;  // world rate i -> j
    double lambda_in;   // world rate j -> i
    const TripDist& dist;
    const PricingSpec& pricing;

    [[nodiscard]] double price(double tau) const { return pricing.evaluate(tau, lambda_out, lambda_in); }
    [[nodiscard]] double q(double s) const { return q_transition(lambda_out, lambda_in, s); }
};

/// A full problem instance: rates in events per hour, trip lengths in hours, prices in dollars.
struct ModelPrimitives {
    double lambda_1 = 1.0;
    double lambda_2 = 1.0;
    double lambda_12 = 1.0;
    double lambda_21 = 1.0;
    TripDist dist_1;
    TripDist dist_2;
    PricingSpec pricing_1;
    PricingSpec pricing_2;

    void validate() const {
        auto check = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ValidationError(std::string(name) + " must be strictly positive and finite");
        };
        check(lambda_1, "lambda_1");
        check(lambda_2, "lambda_2");
        check(lambda_12, "lambda_12");
        check(lambda_21, "lambda_21");
    }

    [[nodiscard]] StateView view(WorldState s) const {
        if (s == WorldState::NonSurge) return {lambda_1, lambda_12, lambda_21, dist_1, pricing_1};
        return {lambda_2, lambda_21, lambda_12, dist_2, pricing_2};
    }

    [[nodiscard]] const PricingSpec& pricing(WorldState s) const {
        return s == WorldState::NonSurge ? pricing_1 : pricing_2;
    }
    PricingSpec& pricing(WorldState s) { return s == WorldState::NonSurge ? pricing_1 : pricing_2; }
    [[nodiscard]] const TripDist& dist(WorldState s) const { return s == WorldState::NonSurge ? dist_1 : dist_2; }

    /// Both states share (lambda, dist, pricing); the world rates are kept as given.
    static ModelPrimitives symmetric(double lambda, double lambda_12, double lambda_21, const TripDist& dist,
                                     const PricingSpec& pricing) {
        return {lambda, lambda, lambda_12, lambda_21, dist, dist, pricing, pricing};
    }
};

/// Payment for a trip of length tau > 0 starting in `state`.
inline double price(const ModelPrimitives& p, WorldState state, double tau) {
    const auto v = p.view(state);
    return price(v.pricing, tau, v.lambda_out, v.lambda_in);
}

/// One acceptance policy per world state.
struct PolicyPair {
    IntervalSet sigma_1 = IntervalSet::accept_all();
    IntervalSet sigma_2 = IntervalSet::accept_all();

    [[nodiscard]] const IntervalSet& get(WorldState s) const { return s == WorldState::NonSurge ? sigma_1 : sigma_2; }
    IntervalSet& get(WorldState s) { return s == WorldState::NonSurge ? sigma_1 : sigma_2; }

    static PolicyPair accept_all() { return {}; }
    static PolicyPair both(const IntervalSet& s) { return {s, s}; }
    friend bool operator==(const PolicyPair&, const PolicyPair&) = default;
};

}  // namespace surge_lab
