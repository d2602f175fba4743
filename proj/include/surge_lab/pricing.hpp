#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "surge_lab/errors.hpp"
#include "surge_lab/transition.hpp"

namespace surge_lab {

/// w(tau) = m * tau
struct Multiplicative {
    double m = 1.0;
};

/// w(tau) = m * tau + a; `a` may be negative.
struct Affine {
    double m = 1.0;
    double a = 0.0;
};

/// w(tau) = m * tau + z * q_{i->j}(tau), the incentive-compatible family.
struct ICForm {
    double m = 1.0;
    double z = 0.0;
};

enum class PricingFamily { Multiplicative, Affine, ICForm };

/// Per-state payment function (dollars as a function of trip length in hours).
class PricingSpec {
public:
    PricingSpec() : PricingSpec(Multiplicative{}) {}
    PricingSpec(Multiplicative p) : impl_(p) { check_m(p.m); }
    PricingSpec(Affine p) : impl_(p) {
        check_m(p.m);
        if (!std::isfinite(p.a)) throw ValidationError("affine offset must be finite");
    }
    PricingSpec(ICForm p) : impl_(p) {
        check_m(p.m);
        if (!std::isfinite(p.z)) throw ValidationError("IC-form z must be finite");
    }

    [[nodiscard]] PricingFamily family() const { return static_cast<PricingFamily>(impl_.index()); }
    [[nodiscard]] double m() const {
        return std::visit([](const auto& p) { return p.m; }, impl_);
    }
    /// Affine offset `a` or IC-form `z`; zero for multiplicative pricing.
    [[nodiscard]] double offset() const {
        if (const auto* a = std::get_if<Affine>(&impl_)) return a->a;
        if (const auto* z = std::get_if<ICForm>(&impl_)) return z->z;
        return 0.0;
    }

    template <class T>
    [[nodiscard]] const T* get_if() const {
        return std::get_if<T>(&impl_);
    }

    [[nodiscard]] PricingSpec scaled(double alpha) const {
        return std::visit(
            [alpha](auto p) -> PricingSpec {
                p.m *= alpha;
                if constexpr (std::is_same_v<decltype(p), Affine>) p.a *= alpha;
                if constexpr (std::is_same_v<decltype(p), ICForm>) p.z *= alpha;
                return p;
            },
            impl_);
    }

    /**
     * Evaluates the payment for a trip of length tau that starts in a state
     * whose outgoing world rate is lambda_out (i->j) and incoming rate is
     * lambda_in (j->i). Only the IC form uses the rates. Requires tau >= 0.
     */
    [[nodiscard]] double evaluate(double tau, double lambda_out, double lambda_in) const {
        if (const auto* p = std::get_if<Multiplicative>(&impl_)) return p->m * tau;
        if (const auto* p = std::get_if<Affine>(&impl_)) return p->m * tau + p->a;
        const auto& p = std::get<ICForm>(impl_);
        return p.m * tau + p.z * q_transition(lambda_out, lambda_in, tau);
    }

private:
    static void check_m(double m) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw ValidationError("pricing multiplier m must be finite and >= 0");
    }

    std::variant<Multiplicative, Affine, ICForm> impl_;
};

/// Checked evaluation: the payment for a trip of strictly positive length.
inline double price(const PricingSpec& pricing, double tau, double lambda_out, double lambda_in) {
    if (!(tau > 0.0)) throw DomainError("price requires tau > 0");
    return pricing.evaluate(tau, lambda_out, lambda_in);
}

inline std::string to_string(PricingFamily f) {
    switch (f) {
        case PricingFamily::Multiplicative: return "multiplicative";
        case PricingFamily::Affine: return "affine";
        case PricingFamily::ICForm: return "ic_form";
    }
    return "unknown";
}

}  // namespace surge_lab
