#pragma once

#include <cmath>

#include "surge_lab/errors.hpp"

namespace surge_lab {

/**
 * Probability that a two-state world CTMC starting in state i is in state j
 * after s hours (an odd number of flips):
 *
 *   q(s) = lambda_ij / (lambda_ij + lambda_ji) * (1 - exp(-(lambda_ij + lambda_ji) s))
 */
inline double q_transition(double lambda_ij, double lambda_ji, double s) {
    if (!(s >= 0.0)) throw DomainError("q_transition requires s >= 0");
    const double total = lambda_ij + lambda_ji;
    if (std::isinf(s)) return lambda_ij / total;
    return lambda_ij / total * -std::expm1(-total * s);
}

/// Stationary limit of q_transition as s -> infinity.
inline double q_limit(double lambda_ij, double lambda_ji) { return lambda_ij / (lambda_ij + lambda_ji); }

/// Expected time the world spends in the start state (phi_same) and in the other state over a horizon.
struct OccupancySplit {
    double phi_same = 0.0;
    double phi_other = 0.0;
};

inline OccupancySplit occupancy(double lambda_ij, double lambda_ji, double tau) {
    if (!(tau >= 0.0) || std::isinf(tau)) throw DomainError("occupancy requires finite tau >= 0");
    const double total = lambda_ij + lambda_ji;
    const double same = lambda_ji / total * tau + q_transition(lambda_ij, lambda_ji, tau) / total;
    // phi_other computed as the complement so the pair sums to tau exactly
    return {same, tau - same};
}

}  // namespace surge_lab
