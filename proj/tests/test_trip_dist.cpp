#include <gtest/gtest.h>

#include <cmath>

#include "surge_lab/kernels.hpp"
#include "surge_lab/pricing.hpp"
#include "surge_lab/trip_dist.hpp"
#include "test_support.hpp"

using namespace surge_lab;

TEST(TripDist, WeibullMeanMatchesQuadrature) {
    for (double shape : {1.0, 1.5, 2.0, 3.0, 5.0}) {
        for (double mean : {0.05, 1.0 / 3.0, 1.0}) {
            const auto d = TripDist::weibull_with_mean(shape, mean);
            EXPECT_NEAR(d.mean(), mean, 1e-14 * mean);
            const double q = integrate_over_policy([](double t) { return t; }, d, IntervalSet::accept_all());
            EXPECT_NEAR(q / mean, 1.0, 1e-8) << "shape " << shape;
            EXPECT_NEAR(integrate_over_policy([](double) { return 1.0; }, d, IntervalSet::accept_all()), 1.0, 1e-8);
        }
    }
}

TEST(TripDist, CdfShapeInvariants) {
    for (const auto& d : {fixtures::fig3_dist(), TripDist::weibull(1.0, 0.4), TripDist::table({0, 0.2, 0.5, 2}, {0.3, 0.5, 0.2})}) {
        EXPECT_EQ(d.cdf(0.0), 0.0);
        EXPECT_GE(d.cdf(d.truncation_point()), 1.0 - 1e-9);
        double prev = 0.0;
        for (int k = 1; k <= 2000; ++k) {
            const double t = d.truncation_point() * k / 2000.0;
            const double c = d.cdf(t);
            EXPECT_GE(c, prev);
            EXPECT_LT(c - prev, 0.02);  // no jumps at this resolution
            prev = c;
        }
    }
}

TEST(TripDist, QuantileInvertsCdf) {
    const auto d = fixtures::fig3_dist();
    for (double p : {0.0, 0.1, 0.5, 0.9, 0.999999}) EXPECT_NEAR(d.cdf(d.quantile(p)), p, 1e-12);
    const auto tb = TripDist::table({0, 1, 3}, {0.25, 0.75});
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.99}) EXPECT_NEAR(tb.cdf(tb.quantile(p)), p, 1e-12);
    EXPECT_THROW((void)d.quantile(1.5), DomainError);
    EXPECT_THROW((void)d.quantile(-0.1), DomainError);
}

TEST(TripDist, TableMeanAndPdf) {
    const auto tb = TripDist::table({0, 1, 3}, {0.25, 0.75});
    EXPECT_DOUBLE_EQ(tb.mean(), 0.25 * 0.5 + 0.75 * 2.0);
    EXPECT_DOUBLE_EQ(tb.pdf(0.5), 0.25);
    EXPECT_DOUBLE_EQ(tb.pdf(2.0), 0.375);
    EXPECT_DOUBLE_EQ(tb.pdf(3.5), 0.0);
    EXPECT_NEAR(integrate_over_policy([](double t) { return t; }, tb, IntervalSet::accept_all()), tb.mean(), 1e-10);
}

TEST(TripDist, Validation) {
    EXPECT_THROW(TripDist::weibull(0.5, 1.0), ValidationError);
    EXPECT_THROW(TripDist::weibull(2.0, 0.0), ValidationError);
    EXPECT_THROW(TripDist::weibull_with_mean(2.0, -1.0), ValidationError);
    EXPECT_THROW(TripDist::table({0, 1}, {0.5}), ValidationError);
    EXPECT_THROW(TripDist::table({0.1, 1}, {1.0}), ValidationError);
    EXPECT_THROW(TripDist::table({0, 2, 1}, {0.5, 0.5}), ValidationError);
    EXPECT_THROW(TripDist::table({0, 1, 2}, {0.5, -0.5}), ValidationError);
}

TEST(TripDist, RescaledKeepsShape) {
    const auto d = fixtures::fig3_dist().rescaled(3.0);
    EXPECT_NEAR(d.mean(), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(d.as_weibull().shape, 2.0);
    const auto tb = TripDist::table({0, 1, 3}, {0.25, 0.75}).rescaled(2.0);
    EXPECT_DOUBLE_EQ(tb.as_table().edges.back(), 6.0);
}

TEST(Pricing, Examples) {
    EXPECT_DOUBLE_EQ(price(Multiplicative{1.25}, 0.4, 1, 4), 0.5);
    EXPECT_DOUBLE_EQ(price(Affine{1.0, -0.1}, 0.05, 1, 4), 1.0 * 0.05 - 0.1);
    // State 2 of lambda_12 = 1, lambda_21 = 4 uses q_{2->1}: lambda_out = 4, lambda_in = 1.
    EXPECT_NEAR(price(ICForm{1.0, 0.5}, 0.25, 4, 1), 0.25 + 0.5 * 0.8 * -std::expm1(-1.25), 1e-15);
    EXPECT_NEAR(price(ICForm{1.0, 0.5}, 0.25, 4, 1), 0.53541, 7.5e-4);  // Monte Carlo reference
    EXPECT_NEAR(price(ICForm{1.0, 0.5}, 50.0, 4, 1) - 50.0, 0.5 * 0.8, 1e-12);
    EXPECT_THROW(price(Multiplicative{1.0}, 0.0, 1, 4), DomainError);
    EXPECT_THROW(price(Multiplicative{1.0}, -1.0, 1, 4), DomainError);
    EXPECT_THROW(PricingSpec(Multiplicative{-1.0}), ValidationError);
    EXPECT_THROW(PricingSpec(Affine{1.0, std::nan("")}), ValidationError);
}

TEST(Pricing, ModelLevelPriceUsesStateRates) {
    auto p = fixtures::fig3();
    p.pricing_2 = ICForm{1.0, 0.5};
    EXPECT_NEAR(price(p, WorldState::Surge, 0.25), 0.5 * 0.8 * -std::expm1(-1.25) + 0.25, 1e-15);
    p.pricing_1 = ICForm{1.0, 0.5};
    EXPECT_NEAR(price(p, WorldState::NonSurge, 0.25), 0.25 + 0.5 * 0.2 * -std::expm1(-1.25), 1e-15);
}

TEST(PricingProperty, MultiplicativeRatioIsExact) {
    CounterRng rng(5, "price-props");
    for (int k = 0; k < 1000; ++k) {
        const double m = rng.uniform(0, 5), tau = fixtures::log_uniform(rng, 1e-6, 1e3);
        EXPECT_EQ(price(Multiplicative{m}, tau, 1, 4) / tau, m * tau / tau);
    }
}

TEST(PricingProperty, ICFormExcessMonotoneAndBounded) {
    CounterRng rng(6, "icform-props");
    for (int k = 0; k < 200; ++k) {
        const double m = rng.uniform(0, 3), z = rng.uniform(0, 2);
        const double lo = fixtures::log_uniform(rng, 0.5, 40), li = fixtures::log_uniform(rng, 0.5, 40);
        const double bound = std::abs(z) * lo / (lo + li);
        double prev = 0.0;
        for (int j = 1; j <= 200; ++j) {
            const double tau = 0.02 * j;
            const double excess = price(ICForm{m, z}, tau, lo, li) - m * tau;
            const double eps = 1e-14 * (1 + m * tau);  // the subtraction cancels m * tau
            EXPECT_GE(excess, prev - eps);
            EXPECT_LE(excess, bound + eps);
            prev = excess;
        }
    }
}

TEST(PricingProperty, ScaledMultipliesEverything) {
    const PricingSpec w = Affine{1.5, -0.2};
    const auto s = w.scaled(2.0);
    EXPECT_DOUBLE_EQ(s.evaluate(0.3, 1, 4), 2.0 * w.evaluate(0.3, 1, 4));
}
