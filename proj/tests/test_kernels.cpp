#include <gtest/gtest.h>

#include <cmath>

#include "surge_lab/best_response.hpp"
#include "surge_lab/kernels.hpp"
#include "test_support.hpp"

using namespace surge_lab;
using surge_lab::fixtures::fig3;
using surge_lab::fixtures::fig3_dist;

TEST(Quadrature, PolynomialsAndErrors) {
    EXPECT_NEAR(integrate([](double x) { return x * x * x; }, 0, 2), 4.0, 1e-12);
    EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0, M_PI), 2.0, 1e-9);
    EXPECT_EQ(integrate([](double) { return 1.0; }, 1, 1), 0.0);
    EXPECT_THROW(integrate([](double x) { return 1.0 / (x - 0.5); }, 0, 1), NumericError);
    EXPECT_THROW(integrate([](double) { return std::nan(""); }, 0, 1), NumericError);
    EXPECT_THROW(integrate([](double) { return 1.0; }, 0, kInf), NumericError);
}

TEST(IntegrateOverPolicy, Examples) {
    const auto d = fig3_dist();
    EXPECT_NEAR(integrate_over_policy([](double) { return 1.0; }, d, IntervalSet::accept_all()), 1.0, 1e-8);
    EXPECT_NEAR(integrate_over_policy([](double t) { return t; }, d, IntervalSet::accept_all()), 1.0 / 3.0, 1e-8);
    EXPECT_EQ(integrate_over_policy([](double t) { return t; }, d, IntervalSet::empty()), 0.0);
}

TEST(IntegrateOverPolicy, MatchesDenseMidpointRule) {
    const auto d = fig3_dist();
    const double med = d.median();
    const double quad = integrate_over_policy([](double t) { return t; }, d, IntervalSet({{0, med}}));
    const double brute = fixtures::midpoint_integral([](double t) { return t; }, d, 0, med, 1000000);
    EXPECT_NEAR(quad, brute, 1e-6);
    // A two-interval policy, with q in the integrand.
    const IntervalSet pol({{0.05, 0.2}, {0.4, kInf}});
    auto g = [](double t) { return q_transition(4, 1, t); };
    const double brute2 = fixtures::midpoint_integral(g, d, 0.05, 0.2, 500000) +
                          fixtures::midpoint_integral(g, d, 0.4, d.truncation_point(), 500000);
    EXPECT_NEAR(integrate_over_policy(g, d, pol), brute2, 1e-7);
}

TEST(IntegrateOverPolicy, TableSplitsAtBinEdges) {
    const auto tb = TripDist::table({0, 0.1, 0.5, 1.0}, {0.2, 0.5, 0.3});
    const double exact = 0.2 * 0.05 + 0.5 * 0.3 + 0.3 * 0.75;
    EXPECT_NEAR(integrate_over_policy([](double t) { return t; }, tb, IntervalSet::accept_all()), exact, 1e-12);
    EXPECT_NEAR(integrate_over_policy([](double) { return 1.0; }, tb, IntervalSet({{0.05, 0.3}})),
                0.2 * 0.5 + 0.5 * 0.5, 1e-12);
}

TEST(Aggregates, Examples) {
    auto p = fig3();
    const auto a = aggregates(p, WorldState::NonSurge, IntervalSet::accept_all());
    EXPECT_NEAR(a.t_tilde, 5.0, 1e-9);
    EXPECT_NEAR(a.w_tilde, 4.0, 1e-9);
    EXPECT_NEAR(a.rate, 0.8, 1e-10);
    EXPECT_NEAR(a.f_sigma, 1.0, 1e-9);
    const auto e = aggregates(p, WorldState::Surge, IntervalSet::empty());
    EXPECT_EQ(e.f_sigma, 0.0);
    EXPECT_EQ(e.t_tilde, 1.0);
    EXPECT_EQ(e.q_tilde, p.lambda_21);
    EXPECT_EQ(e.w_tilde, 0.0);
    EXPECT_EQ(e.rate, 0.0);
}

TEST(Aggregates, ICFormPaymentIdentity) {
    CounterRng rng(31, "icform-identity");
    for (int trial = 0; trial < 30; ++trial) {
        auto p = fixtures::random_instance(rng);
        const double m = rng.uniform(0, 3), z = rng.uniform(-2, 2);
        p.pricing_1 = ICForm{m, z};
        p.pricing_2 = ICForm{m, z};
        const auto pol = random_structural_policy(rng, p.dist_1.truncation_point());
        for (auto s : {WorldState::NonSurge, WorldState::Surge}) {
            const auto a = aggregates(p, s, pol);
            const double l_out = p.view(s).lambda_out;
            EXPECT_NEAR(a.w_tilde, m * (a.t_tilde - 1) + z * (a.q_tilde - l_out), 1e-8);
        }
    }
}

TEST(AggregatesProperty, BoundsAndMaximality) {
    CounterRng rng(32, "aggregate-props");
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = fixtures::random_instance(rng);
        for (auto s : {WorldState::NonSurge, WorldState::Surge}) {
            const auto v = p.view(s);
            const auto all = aggregates(p, s, IntervalSet::accept_all());
            for (int k = 0; k < 10; ++k) {
                const auto pol = random_structural_policy(rng, v.dist.truncation_point());
                const auto a = aggregates(p, s, pol);
                EXPECT_GE(a.t_tilde, 1.0);
                EXPECT_GE(a.q_tilde, v.lambda_out);
                EXPECT_GE(v.lambda_out * a.t_tilde - a.q_tilde, -1e-12);
                EXPECT_LE(a.q_tilde, all.q_tilde + 1e-10);
                EXPECT_LE(v.lambda_out * a.t_tilde - a.q_tilde, v.lambda_out * all.t_tilde - all.q_tilde + 1e-10);
            }
        }
    }
}

TEST(AggregatesProperty, NestedPoliciesAreOrdered) {
    CounterRng rng(33, "nested-props");
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = fixtures::random_instance(rng);
        const double trunc = p.dist_1.truncation_point();
        double a = rng.uniform(0, trunc), b = rng.uniform(0, trunc);
        if (a > b) std::swap(a, b);
        const IntervalSet inner({{a, b}});
        const IntervalSet outer({{a * rng.uniform(), b + rng.uniform(0, trunc)}});
        ASSERT_TRUE(inner.subset_of(outer));
        const auto ai = aggregates(p, WorldState::NonSurge, inner);
        const auto ao = aggregates(p, WorldState::NonSurge, outer);
        EXPECT_LE(ai.q_tilde, ao.q_tilde + 1e-12);
        EXPECT_LE(ai.t_tilde, ao.t_tilde + 1e-12);
    }
}

TEST(MomentCache, AgreesWithDirectAggregates) {
    CounterRng rng(34, "cache");
    for (int trial = 0; trial < 20; ++trial) {
        auto p = fixtures::random_instance(rng);
        p.pricing_2 = Affine{rng.uniform(0.5, 2), rng.uniform(-0.3, 0.3)};
        MomentCache cache(p.view(WorldState::Surge));
        for (int k = 0; k < 10; ++k) {
            const auto pol = random_structural_policy(rng, cache.truncation());
            const auto direct = aggregates(p, WorldState::Surge, pol);
            const auto cached = cache.aggregates(pol);
            EXPECT_NEAR(direct.t_tilde, cached.t_tilde, 1e-8);
            EXPECT_NEAR(direct.q_tilde, cached.q_tilde, 1e-8);
            EXPECT_NEAR(direct.w_tilde, cached.w_tilde, 1e-8);
            EXPECT_NEAR(direct.rate, cached.rate, 1e-8);
        }
    }
}
