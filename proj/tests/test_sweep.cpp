#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "surge_lab/json_io.hpp"
#include "surge_lab/sweep.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace surge_lab;

namespace {

SweepConfig config_file(const std::string& name) {
    return json_io::sweep_config_from_json(json_io::read_file(std::string(SURGE_LAB_CONFIGS) + "/" + name));
}

const SweepRow& find_row(const std::vector<SweepRow>& rows, std::vector<double> params, PricingMode m) {
    for (const auto& r : rows) {
        bool ok = r.mode == m;
        for (std::size_t k = 0; k < params.size(); ++k) ok = ok && std::abs(r.params[k] - params[k]) < 1e-9;
        if (ok) return r;
    }
    throw std::runtime_error("row not found");
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

struct ThreadEnv {
    explicit ThreadEnv(const char* n) { setenv("SURGE_LAB_THREADS", n, 1); }
    ~ThreadEnv() { unsetenv("SURGE_LAB_THREADS"); }
};

SweepConfig small_grid() {
    SweepConfig cfg;
    cfg.base = fixtures::fig5a(30.0);
    cfg.axes = {{"R_2", {}}, {"lambda_2", {5, 10, 15, 20, 25, 30, 35, 40}}};
    for (int k = 0; k < 10; ++k) cfg.axes[0].values.push_back(1.1 + 0.2 * k);
    cfg.modes = {PricingMode::Multiplicative};
    cfg.r1 = 1.0;
    cfg.fix_nonsurge_accept_all = true;
    return cfg;
}

}  // namespace

TEST(Sweep, RowCountAndOrder) {
    const auto cfg = small_grid();
    const auto rows = run_sweep(cfg);
    ASSERT_EQ(rows.size(), 80u);
    EXPECT_EQ(rows[0].params, (std::vector<double>{1.1, 5}));
    EXPECT_EQ(rows[1].params, (std::vector<double>{1.1, 10}));
    EXPECT_EQ(rows[8].params[0], cfg.axes[0].values[1]);
    const auto csv = lines(sweep_csv(cfg, rows));
    ASSERT_EQ(csv.size(), 82u);
    EXPECT_EQ(csv[0], "# schema=1");
    EXPECT_EQ(csv[1], "R_2,lambda_2,pricing_mode,m1,a_or_z1,m2,a2_or_z2,frac_accept_1,frac_accept_2,rate,is_accept_all,C,status");
}

TEST(Sweep, OutputIndependentOfThreadCount) {
    auto cfg = small_grid();
    cfg.threads = 1;
    const auto one = sweep_csv(cfg, run_sweep(cfg));
    cfg.threads = 4;
    EXPECT_EQ(thread_count(80, 4), 4);
    const auto four = sweep_csv(cfg, run_sweep(cfg));
    EXPECT_EQ(one, four);
    {
        ThreadEnv env("2");
        EXPECT_EQ(thread_count(80, 4), 2);
        EXPECT_EQ(sweep_csv(cfg, run_sweep(cfg)), one);
    }
    EXPECT_EQ(thread_count(3, 8), 3);
    {
        ThreadEnv env("zero");
        EXPECT_THROW(thread_count(4), ConfigError);
    }
}

TEST(Sweep, FigureFiveReferenceRows) {
    const auto cfg = config_file("fig5a.json");
    ASSERT_EQ(cfg.point_count(), 20u * 8u * 2u);
    auto one = cfg;
    one.axes = {{"R_2", {2.0}}, {"lambda_2", {30.0}}};
    const auto rows = run_sweep(one);
    const auto& add = find_row(rows, {2.0, 30.0}, PricingMode::Additive);
    const auto& mul = find_row(rows, {2.0, 30.0}, PricingMode::Multiplicative);
    // T_1 = 1 + 10(0.3) = 4 and T_2 = 1 + 30(0.3) = 10
    EXPECT_NEAR(add.m1, 4.0 / 3.0, 1e-10);
    EXPECT_NEAR(add.offset2, (2.0 * 10 - 4.0 / 3.0 * 9) / 30, 1e-8);
    EXPECT_TRUE(add.is_accept_all);
    EXPECT_NEAR(mul.m2, 20.0 / 9.0, 1e-8);
    EXPECT_FALSE(mul.is_accept_all);

    const auto& q = mul.primitives;
    const auto other = oracle::accept_all_midpoint(q, WorldState::NonSurge);
    const auto scan = oracle::threshold_scan(q, WorldState::Surge, other, true, 40000, one.search.delta);
    const double h = q.dist_2.truncation_point() / 40000;
    EXPECT_EQ(mul.best.forms[1].kind, FormKind::LowerThreshold);
    EXPECT_NEAR(mul.best.max_rate, scan.best_rate, 1e-7);
    EXPECT_NEAR(mul.rate, scan.best_rate, scan.best_rate * one.search.delta + 1e-7);
    EXPECT_NEAR(mul.best.forms[1].a, scan.tie_t, 2 * h);
    EXPECT_NEAR(mul.frac2, 1.0 - q.dist_2.cdf(mul.best.forms[1].a), 1e-8);
    const auto all = oracle::dynamic_rate(other, oracle::accept_all_midpoint(q, WorldState::Surge));
    EXPECT_NEAR(mul.best.accept_all_rate, all, 1e-7);
    EXPECT_GT(scan.best_rate, all * (1 + 1e-4));
}

TEST(Sweep, MultiplicativeICStatusChangesOnceAlongR2) {
    auto cfg = small_grid();
    cfg.axes = {{"R_2", {}}};
    for (int k = 0; k < 20; ++k) cfg.axes[0].values.push_back(1.1 + 0.1 * k);
    const auto rows = run_sweep(cfg);
    int flips = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) flips += rows[k].is_accept_all != rows[k - 1].is_accept_all;
    EXPECT_LE(flips, 1);
    EXPECT_FALSE(rows.back().is_accept_all);
}

TEST(Sweep, FeasibilityConstantIncreasesWithMeanTrip) {
    const auto cfg = config_file("fig4a.json");
    const auto rows = run_sweep(cfg);
    ASSERT_EQ(rows.size(), 40u);
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_GT(rows[k].C, rows[k - 1].C);
    for (const auto& r : rows) {
        if (2.0 / 3.0 > r.C) {
            EXPECT_EQ(r.status, "ok");
            EXPECT_TRUE(r.is_accept_all) << "mean " << r.params[0];
        } else {
            EXPECT_EQ(r.status, "surge_only_partial");
            EXPECT_TRUE(r.best.policy_pair.sigma_2.is_accept_all()) << "mean " << r.params[0];
        }
    }
}

TEST(Sweep, InfeasibleRows) {
    auto cfg = small_grid();
    cfg.axes = {{"R_2", {0.5, 1.0}}};
    cfg.modes = {PricingMode::Additive, PricingMode::ICForm};
    const auto rows = run_sweep(cfg);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].status, "infeasible");  // additive below base rate
    EXPECT_TRUE(std::isnan(rows[0].rate));
    EXPECT_EQ(rows[1].status, "infeasible");  // IC form with R_1 >= R_2
    EXPECT_EQ(rows[3].status, "infeasible");
    const auto csv = lines(sweep_csv(cfg, rows));
    EXPECT_NE(csv[2].find(",nan,"), std::string::npos);
    EXPECT_NE(csv[2].find("infeasible"), std::string::npos);
}

TEST(Sweep, UnknownParameterIsConfigError) {
    auto cfg = small_grid();
    cfg.axes = {{"lambda_3", {1.0}}};
    EXPECT_THROW(run_sweep(cfg), ConfigError);
    cfg.axes = {};
    EXPECT_THROW(run_sweep(cfg), ConfigError);
    auto j = json_io::read_file(std::string(SURGE_LAB_CONFIGS) + "/fig5a.json");
    j["pricing_mode"] = "progressive";
    EXPECT_THROW(json_io::sweep_config_from_json(j), ConfigError);
}

TEST(Sweep, AcceptAllRowsCertify) {
    auto cfg = config_file("fig5a.json");
    cfg.axes[0].values = {1.1, 1.5, 2.0, 2.5, 3.0};
    cfg.axes[1].values = {5, 20, 40};
    const auto rows = run_sweep(cfg);
    int checked = 0;
    for (const auto& r : rows) {
        if (!r.is_accept_all) continue;
        CertificateOptions opt;
        opt.check_nonsurge = !cfg.fix_nonsurge_accept_all;
        const auto rep = ic_certificate(r.primitives, opt);
        EXPECT_GE(rep.min_r, -1e-9) << to_string(r.mode) << " R_2=" << r.params[0] << " lambda_2=" << r.params[1];
        ++checked;
    }
    EXPECT_GT(checked, 5);
}

TEST(Sweep, CalibrationsHitTargets) {
    auto cfg = config_file("fig5a.json");
    cfg.axes[0].values = {1.3, 2.7};
    cfg.axes[1].values = {5, 40};
    for (const auto& r : run_sweep(cfg)) {
        if (r.status != "ok") continue;
        EXPECT_NEAR(aggregates(r.primitives, WorldState::NonSurge, IntervalSet::accept_all()).rate, 1.0, 1e-8);
        EXPECT_NEAR(aggregates(r.primitives, WorldState::Surge, IntervalSet::accept_all()).rate, r.params[0], 1e-8);
    }
}

TEST(MuCurve, EndpointsAndInteriorPeak) {
    const auto p = fixtures::fig3();
    const double trunc = p.dist_2.truncation_point();
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(trunc * k / 40.0);
    const auto rows = run_mu_curve(p, grid);
    EXPECT_NEAR(rows.front().mu_2, 0.2, 1e-9);
    EXPECT_NEAR(rows.front().rate, dynamic_rate(p, PolicyPair::accept_all()).total_rate, 1e-10);
    const auto empty2 = occupancy_fractions(p, {IntervalSet::accept_all(), IntervalSet::empty()});
    EXPECT_NEAR(rows.back().mu_2, empty2[1], 1e-8);
    double peak = 0.0, at = 0.0;
    for (const auto& r : rows)
        if (r.mu_2 > peak) peak = r.mu_2, at = r.t;
    EXPECT_GT(peak, 0.2);
    EXPECT_GT(at, 0.0);
    EXPECT_LT(at, trunc);
    EXPECT_NEAR(peak, 0.2051, 2e-4);
    EXPECT_THROW(run_mu_curve(p, {-1.0}), ValidationError);
    const auto csv = lines(mu_curve_csv(rows));
    EXPECT_EQ(csv[1], "t,mu_2,rate");
    EXPECT_EQ(csv.size(), 43u);
}

TEST(JsonIO, PrimitivesRoundTrip) {
    CounterRng rng(81, "json");
    for (int trial = 0; trial < 20; ++trial) {
        auto p = fixtures::random_instance(rng);
        p.pricing_1 = Affine{rng.uniform(0.5, 2), rng.uniform(-0.3, 0.3)};
        p.pricing_2 = ICForm{rng.uniform(0.5, 2), rng.uniform(-0.3, 0.3)};
        if (trial % 2) p.dist_2 = fixtures::random_table(rng, 0.05);
        const auto text = json_io::to_json(p).dump();
        const auto q = json_io::primitives_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(json_io::to_json(q).dump(), text);
        EXPECT_EQ(dynamic_rate(q, PolicyPair::accept_all()).total_rate, dynamic_rate(p, PolicyPair::accept_all()).total_rate);
    }
}

TEST(JsonIO, RejectsBadInstances) {
    using nlohmann::json;
    EXPECT_THROW(json_io::primitives_from_json(json::array()), ConfigError);
    EXPECT_THROW(json_io::primitives_from_json(json{{"lambda_1", 1}}), ConfigError);
    auto j = json::parse(R"({"lambda_1": 1, "lambda_2": 1, "lambda_12": 1, "lambda_21": -1,
                             "dist": {"family": "weibull", "shape": 2, "mean": 0.3}})");
    EXPECT_THROW(json_io::primitives_from_json(j), ConfigError);
    j["lambda_21"] = 1;
    j["dist"]["family"] = "pareto";
    EXPECT_THROW(json_io::primitives_from_json(j), ConfigError);
    j["dist"] = json{{"family", "weibull"}, {"shape", 0.5}, {"mean", 0.3}};
    EXPECT_THROW(json_io::primitives_from_json(j), ConfigError);
    EXPECT_THROW(json_io::read_file("/nonexistent/x.json"), ConfigError);
}
