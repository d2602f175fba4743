#pragma once

#include <array>
#include <limits>

#include "surge_lab/errors.hpp"
#include "surge_lab/kernels.hpp"
#include "surge_lab/model.hpp"

namespace surge_lab {

/// Long-run earnings of a policy pair, decomposed by world state. Index 0 is state 1.
struct EarningsBreakdown {
    double total_rate = 0.0;
    std::array<double, 2> per_state_rate{};
    std::array<double, 2> occupancy{};
    std::array<double, 2> accepted_fraction{};
    std::array<StateAggregates, 2> aggregates{};
};

/// Renewal-reward earnings rate of a single-state driver.
inline double single_state_rate(const StateView& view, const IntervalSet& policy) {
    // q is not needed here, and lambda_out may be unset for a single-state view
    const auto m = integrate_over_policy_vector<2>(
        [&](double t) { return std::array<double, 2>{t, view.price(t)}; }, view.dist, policy);
    const double w = view.lambda * m[1];
    return w == 0.0 ? 0.0 : w / (1.0 + view.lambda * m[0]);
}

/**
 * R = lambda * int_sigma w dF / (1 + lambda * int_sigma tau dF), and 0 for an
 * empty policy. The IC form depends on world rates and has no single-state
 * meaning, so it is rejected here.
 */
inline double single_state_rate(const PricingSpec& w, const IntervalSet& policy, double lambda, const TripDist& dist) {
    if (w.family() == PricingFamily::ICForm) throw ConfigError("IC-form pricing needs world rates; use the dynamic model");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return single_state_rate(StateView{lambda, nan, nan, dist, w}, policy);
}

/// mu_i = T_i Q_j / (T_j Q_i + T_i Q_j) on unnormalized aggregates.
inline std::array<double, 2> occupancy_from_aggregates(const StateAggregates& a1, const StateAggregates& a2) {
    const double n1 = a1.t_tilde * a2.q_tilde;
    const double n2 = a2.t_tilde * a1.q_tilde;
    const double mu1 = n1 / (n1 + n2);
    return {mu1, 1.0 - mu1};
}

inline EarningsBreakdown dynamic_rate_from_aggregates(const StateAggregates& a1, const StateAggregates& a2) {
    EarningsBreakdown out;
    out.aggregates = {a1, a2};
    out.occupancy = occupancy_from_aggregates(a1, a2);
    out.per_state_rate = {a1.rate, a2.rate};
    out.accepted_fraction = {a1.f_sigma, a2.f_sigma};
    out.total_rate = out.occupancy[0] * a1.rate + out.occupancy[1] * a2.rate;
    return out;
}

inline std::array<double, 2> occupancy_fractions(const ModelPrimitives& p, const PolicyPair& policies) {
    return occupancy_from_aggregates(aggregates(p, WorldState::NonSurge, policies.sigma_1),
                                     aggregates(p, WorldState::Surge, policies.sigma_2));
}

inline EarningsBreakdown dynamic_rate(const ModelPrimitives& p, const PolicyPair& policies) {
    p.validate();
    return dynamic_rate_from_aggregates(aggregates(p, WorldState::NonSurge, policies.sigma_1),
                                        aggregates(p, WorldState::Surge, policies.sigma_2));
}

}  // namespace surge_lab
