#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "surge_lab/errors.hpp"
#include "surge_lab/kernels.hpp"
#include "surge_lab/model.hpp"
#include "surge_lab/pricing.hpp"

namespace surge_lab {

/// Open interval (lo, hi).
struct OpenInterval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double x) const { return x > lo && x < hi; }
    [[nodiscard]] double midpoint() const { return 0.5 * (lo + hi); }
};

/// T and Q of both states when every trip is accepted. These do not depend on pricing.
struct AcceptAllAggregates {
    double t1, q1, t2, q2;
};

inline AcceptAllAggregates accept_all_aggregates(const ModelPrimitives& p) {
    p.validate();
    const auto a1 = aggregates(p, WorldState::NonSurge, IntervalSet::accept_all());
    const auto a2 = aggregates(p, WorldState::Surge, IntervalSet::accept_all());
    return {a1.t_tilde, a1.q_tilde, a2.t_tilde, a2.q_tilde};
}

/// Lower bound on R_1/R_2 for fully IC prices of the form m*tau + z*q(tau).
inline double feasibility_constant(const ModelPrimitives& p) {
    const auto [t1, q1, t2, q2] = accept_all_aggregates(p);
    const double l12 = p.lambda_12;
    const double a = q2 * (l12 * t1 - q1);
    const double num = a + q1 * (t2 * l12 + q2);
    const double den = a + l12 * (t2 * l12 + q2);
    // Clamp guards roundoff when F_1's mean is tiny and the bracket vanishes.
    return std::clamp(1.0 - num / (t1 * den), 0.0, std::nextafter(1.0, 0.0));
}

/// Feasible values of z_2/(m_2 - R_1).
inline OpenInterval z2_ratio_interval(const ModelPrimitives& p) {
    const auto [t1, q1, t2, q2] = accept_all_aggregates(p);
    const double l21 = p.lambda_21;
    const double b = l21 * t2 - q2;
    const double c = q1 + t1 * l21;
    return {(t1 * b - c) / (q1 * b + l21 * c), (q2 * t1 + q1) / (q1 * (q2 - l21))};
}

/// Feasible values of z_1/R_2 when m_1 = R_2.
inline OpenInterval z1_interval(const ModelPrimitives& p) {
    const auto [t1, q1, t2, q2] = accept_all_aggregates(p);
    const double l12 = p.lambda_12;
    const double d = t2 * l12 + q2;
    return {-d / (q2 * (l12 * t1 - q1) + l12 * d), 1.0 / (q1 - l12)};
}

enum class Feasibility { Full, SurgeOnlyPartial, Infeasible };

inline std::string to_string(Feasibility f) {
    switch (f) {
        case Feasibility::Full: return "Full";
        case Feasibility::SurgeOnlyPartial: return "SurgeOnlyPartial";
        case Feasibility::Infeasible: return "Infeasible";
    }
    return "Unknown";
}

struct ICConstruction {
    PricingSpec w_1{ICForm{0.0, 0.0}};
    PricingSpec w_2{ICForm{0.0, 0.0}};
    Feasibility feasibility = Feasibility::Infeasible;
    double C = 0.0;
    OpenInterval z1_interval;
    OpenInterval z2_ratio_interval;
    double rho = 0.0;  ///< chosen z_2/(m_2 - R_1)
    double target_r1 = 0.0;
    double target_r2 = 0.0;

    /// Primitives with w_1, w_2 installed.
    [[nodiscard]] ModelPrimitives apply(ModelPrimitives p) const {
        p.pricing_1 = w_1;
        p.pricing_2 = w_2;
        return p;
    }
};

struct ICOptions {
    /// Position of rho inside (max(lo,0), hi); 0.5 is the midpoint.
    double rho_position = 0.5;
};

/**
 * Prices w_i(tau) = m_i tau + z_i q_{i->j}(tau) hitting accept-all rates R_1 and
 * R_2. The per-state earnings constraint uses W_i = m_i (T_i - 1) + z_i (Q_i - lambda_ij).
 *
 * Full when R_1/R_2 lies in (C, 1). Below C only the surge state can be made IC;
 * the non-surge state then gets z_1 = 0 and a plain multiplier matching R_1.
 * R_1 >= R_2 is Infeasible and carries zero prices.
 */
inline ICConstruction construct_ic_prices(const ModelPrimitives& p, double r1, double r2, const ICOptions& opt = {}) {
    if (!(r1 > 0.0) || !(r2 > 0.0) || !std::isfinite(r1) || !std::isfinite(r2))
        throw ValidationError("target rates must be positive and finite");
    if (!(opt.rho_position > 0.0 && opt.rho_position < 1.0))
        throw ValidationError("rho_position must lie in (0, 1)");
    ICConstruction out;
    out.target_r1 = r1;
    out.target_r2 = r2;
    out.C = feasibility_constant(p);
    out.z1_interval = z1_interval(p);
    out.z2_ratio_interval = z2_ratio_interval(p);
    if (r1 >= r2) return out;

    const auto [t1, q1, t2, q2] = accept_all_aggregates(p);
    const double l12 = p.lambda_12, l21 = p.lambda_21;

    const double lo = std::max(out.z2_ratio_interval.lo, 0.0);
    const double hi = out.z2_ratio_interval.hi;
    const double rho = lo + opt.rho_position * (hi - lo);
    const double m2 = (r2 * t2 + rho * r1 * (q2 - l21)) / (t2 - 1.0 + rho * (q2 - l21));
    out.rho = rho;
    out.w_2 = ICForm{m2, rho * (m2 - r1)};

    const double ratio = r1 / r2;
    const double z1 = (r1 * t1 - r2 * (t1 - 1.0)) / (q1 - l12);
    if (ratio > out.C && out.z1_interval.contains(z1 / r2)) {
        out.w_1 = ICForm{r2, z1};
        out.feasibility = Feasibility::Full;
    } else {
        out.w_1 = ICForm{r1 * t1 / (t1 - 1.0), 0.0};
        out.feasibility = Feasibility::SurgeOnlyPartial;
    }
    return out;
}

/// Multiplier m with accept-all rate R in `state`: m = R T / (T - 1).
inline double calibrate_multiplicative(const ModelPrimitives& p, WorldState state, double target) {
    if (!(target >= 0.0) || !std::isfinite(target)) throw ValidationError("target rate must be finite and >= 0");
    p.validate();
    const double t = aggregates(p, state, IntervalSet::accept_all()).t_tilde;
    if (!(t > 1.0)) throw NumericError("accept-all T must exceed 1");
    return target * t / (t - 1.0);
}

inline double calibrate_multiplicative_surge(const ModelPrimitives& p, double r2) {
    return calibrate_multiplicative(p, WorldState::Surge, r2);
}

/// Offset a_2 for w_2(tau) = m_1 tau + a_2 with accept-all surge rate R_2.
inline double calibrate_additive_surge(const ModelPrimitives& p, double m1, double r2) {
    if (!(m1 >= 0.0) || !std::isfinite(m1)) throw ValidationError("m_1 must be finite and >= 0");
    if (!std::isfinite(r2)) throw ValidationError("target rate must be finite");
    p.validate();
    const double t2 = aggregates(p, WorldState::Surge, IntervalSet::accept_all()).t_tilde;
    const double a2 = (r2 * t2 - m1 * (t2 - 1.0)) / p.lambda_2;
    // Tiny negatives from roundoff at R_2 == base rate count as zero.
    if (a2 < 0.0) {
        if (a2 > -1e-12 * std::max(1.0, m1)) return 0.0;
        throw InfeasibleTargetError("R_2 is below the surge rate of base pricing; additive offset would be negative");
    }
    return a2;
}

}  // namespace surge_lab
