#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "surge_lab/best_response.hpp"
#include "surge_lab/earnings.hpp"
#include "surge_lab/errors.hpp"
#include "surge_lab/ic_pricing.hpp"
#include "surge_lab/model.hpp"

namespace surge_lab {

enum class PricingMode { Multiplicative, Additive, ICForm };

inline std::string to_string(PricingMode m) {
    switch (m) {
        case PricingMode::Multiplicative: return "multiplicative";
        case PricingMode::Additive: return "additive";
        case PricingMode::ICForm: return "ic_form";
    }
    return "unknown";
}

inline PricingMode pricing_mode_from_string(const std::string& s) {
    if (s == "multiplicative") return PricingMode::Multiplicative;
    if (s == "additive") return PricingMode::Additive;
    if (s == "ic_form" || s == "ic") return PricingMode::ICForm;
    throw ConfigError("unknown pricing mode '" + s + "'");
}

/// Pricing calibrated to per-state accept-all targets.
struct Calibration {
    PricingMode mode = PricingMode::Multiplicative;
    ModelPrimitives primitives;  ///< input with pricing replaced
    double m1 = 0.0, offset1 = 0.0, m2 = 0.0, offset2 = 0.0;
    bool feasible = true;
    std::string status = "ok";
};

/**
 * Multiplicative: m_i = R_i T_i/(T_i - 1) in each state.
 * Additive: m_1 as above and w_2 = m_1 tau + a_2.
 * IC form: construct_ic_prices; a SurgeOnlyPartial construction is reported as such.
 * Unreachable targets give feasible = false instead of throwing.
 */
inline Calibration calibrate(const ModelPrimitives& base, PricingMode mode, double r1, double r2) {
    Calibration c;
    c.mode = mode;
    c.primitives = base;
    auto& p = c.primitives;
    auto infeasible = [&](const std::string& why) {
        c.feasible = false;
        c.status = why;
        return c;
    };
    switch (mode) {
        case PricingMode::Multiplicative:
            c.m1 = calibrate_multiplicative(p, WorldState::NonSurge, r1);
            c.m2 = calibrate_multiplicative(p, WorldState::Surge, r2);
            p.pricing_1 = Multiplicative{c.m1};
            p.pricing_2 = Multiplicative{c.m2};
            return c;
        case PricingMode::Additive:
            c.m1 = calibrate_multiplicative(p, WorldState::NonSurge, r1);
            c.m2 = c.m1;
            p.pricing_1 = Multiplicative{c.m1};
            try {
                c.offset2 = calibrate_additive_surge(p, c.m1, r2);
            } catch (const InfeasibleTargetError&) {
                return infeasible("infeasible");
            }
            p.pricing_2 = Affine{c.m1, c.offset2};
            return c;
        case PricingMode::ICForm: {
            const auto ic = construct_ic_prices(p, r1, r2);
            if (ic.feasibility == Feasibility::Infeasible) return infeasible("infeasible");
            p = ic.apply(p);
            c.m1 = ic.w_1.m();
            c.offset1 = ic.w_1.offset();
            c.m2 = ic.w_2.m();
            c.offset2 = ic.w_2.offset();
            if (ic.feasibility == Feasibility::SurgeOnlyPartial) c.status = "surge_only_partial";
            return c;
        }
    }
    throw ConfigError("unsupported pricing mode");
}

/// One swept parameter with its values in sweep order.
struct SweepAxis {
    std::string path;
    std::vector<double> values;
};

struct SweepConfig {
    ModelPrimitives base;
    std::vector<SweepAxis> axes;
    std::vector<PricingMode> modes{PricingMode::Multiplicative};
    double r1 = 1.0, r2 = 1.0;
    bool fix_nonsurge_accept_all = false;
    SearchOptions search;
    std::string output_path;
    int threads = 0;  ///< 0: hardware concurrency

    /// Rows emitted: product of axis lengths, times the number of modes.
    [[nodiscard]] std::size_t point_count() const {
        std::size_t n = modes.size();
        for (const auto& a : axes) n *= a.values.size();
        return n;
    }
};

inline const std::vector<std::string>& sweepable_paths() {
    static const std::vector<std::string> paths{
        "lambda_1", "lambda_2", "lambda_12", "lambda_21", "dist.mean", "dist_1.mean", "dist_2.mean",
        "dist.shape", "dist_1.shape", "dist_2.shape", "R_1", "R_2"};
    return paths;
}

namespace detail {

inline TripDist with_mean(const TripDist& d, double mean) {
    if (!(mean > 0.0)) throw ValidationError("mean trip length must be positive");
    return d.rescaled(mean / d.mean());
}

inline TripDist with_shape(const TripDist& d, double shape) {
    if (!d.is_weibull()) throw ConfigError("shape can only be swept for Weibull trip lengths");
    return TripDist::weibull_with_mean(shape, d.mean());
}

}  // namespace detail

/// Sets one parameter on (primitives, targets); unknown paths are configuration errors.
inline void apply_parameter(ModelPrimitives& p, double& r1, double& r2, const std::string& path, double v) {
    if (path == "lambda_1") p.lambda_1 = v;
    else if (path == "lambda_2") p.lambda_2 = v;
    else if (path == "lambda_12") p.lambda_12 = v;
    else if (path == "lambda_21") p.lambda_21 = v;
    else if (path == "dist.mean") {
        p.dist_1 = detail::with_mean(p.dist_1, v);
        p.dist_2 = detail::with_mean(p.dist_2, v);
    } else if (path == "dist_1.mean") p.dist_1 = detail::with_mean(p.dist_1, v);
    else if (path == "dist_2.mean") p.dist_2 = detail::with_mean(p.dist_2, v);
    else if (path == "dist.shape") {
        p.dist_1 = detail::with_shape(p.dist_1, v);
        p.dist_2 = detail::with_shape(p.dist_2, v);
    } else if (path == "dist_1.shape") p.dist_1 = detail::with_shape(p.dist_1, v);
    else if (path == "dist_2.shape") p.dist_2 = detail::with_shape(p.dist_2, v);
    else if (path == "R_1") r1 = v;
    else if (path == "R_2") r2 = v;
    else throw ConfigError("unknown sweep parameter '" + path + "'");
}

struct SweepRow {
    std::vector<double> params;
    PricingMode mode = PricingMode::Multiplicative;
    double m1 = NAN, offset1 = NAN, m2 = NAN, offset2 = NAN;
    double frac1 = NAN, frac2 = NAN, rate = NAN, C = NAN;
    bool is_accept_all = false;
    std::string status = "ok";
    BestResponseResult best;  ///< not serialized
    ModelPrimitives primitives;
};

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// Workers for `jobs` tasks: `requested` (0 = hardware concurrency), capped by SURGE_LAB_THREADS.
inline int thread_count(std::size_t jobs, int requested = 0) {
    unsigned n = requested > 0 ? static_cast<unsigned>(requested) : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SURGE_LAB_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap < 1) throw std::invalid_argument("nonpositive");
            n = std::min(n, static_cast<unsigned>(cap));
        } catch (const std::exception&) {
            throw ConfigError("SURGE_LAB_THREADS must be a positive integer");
        }
    }
    return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs f(0..n-1) on a worker pool; the first exception is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t n, F&& f, int requested_threads = 0) {
    const int workers = thread_count(n, requested_threads);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < workers; ++k) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline SweepRow run_sweep_point(const SweepConfig& cfg, const std::vector<double>& values, PricingMode mode) {
    SweepRow row;
    row.params = values;
    row.mode = mode;
    ModelPrimitives p = cfg.base;
    double r1 = cfg.r1, r2 = cfg.r2;
    for (std::size_t k = 0; k < cfg.axes.size(); ++k) apply_parameter(p, r1, r2, cfg.axes[k].path, values[k]);
    p.validate();
    row.C = feasibility_constant(p);
    const auto cal = calibrate(p, mode, r1, r2);
    row.m1 = cal.m1;
    row.offset1 = cal.offset1;
    row.m2 = cal.m2;
    row.offset2 = cal.offset2;
    row.status = cal.status;
    row.primitives = cal.primitives;
    if (!cal.feasible) {
        if (mode == PricingMode::Additive) row.offset2 = NAN, row.m2 = NAN;
        return row;
    }
    row.best = dynamic_best_response(cal.primitives, cfg.fix_nonsurge_accept_all, cfg.search);
    row.frac1 = row.best.accepted_fractions[0];
    row.frac2 = row.best.accepted_fractions[1];
    row.rate = row.best.rate;
    row.is_accept_all = row.best.is_accept_all;
    return row;
}

/// All grid points in row-major order over the listed axes, modes innermost.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    if (cfg.axes.empty()) throw ConfigError("sweep needs at least one axis");
    if (cfg.modes.empty()) throw ConfigError("sweep needs at least one pricing mode");
    for (const auto& a : cfg.axes) {
        if (a.values.empty()) throw ConfigError("axis '" + a.path + "' has no values");
        if (std::find(sweepable_paths().begin(), sweepable_paths().end(), a.path) == sweepable_paths().end())
            throw ConfigError("unknown sweep parameter '" + a.path + "'");
    }
    const std::size_t n = cfg.point_count();
    std::vector<SweepRow> rows(n);
    parallel_for(n, [&](std::size_t idx) {
        std::size_t rest = idx;
        const auto mode = cfg.modes[rest % cfg.modes.size()];
        rest /= cfg.modes.size();
        std::vector<double> values(cfg.axes.size());
        for (std::size_t k = cfg.axes.size(); k-- > 0;) {
            values[k] = cfg.axes[k].values[rest % cfg.axes[k].values.size()];
            rest /= cfg.axes[k].values.size();
        }
        rows[idx] = run_sweep_point(cfg, values, mode);
    }, cfg.threads);
    return rows;
}

inline std::string sweep_csv(const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
    std::string out = "# schema=1\n";
    for (const auto& a : cfg.axes) out += a.path + ",";
    out += "pricing_mode,m1,a_or_z1,m2,a2_or_z2,frac_accept_1,frac_accept_2,rate,is_accept_all,C,status\n";
    for (const auto& r : rows) {
        for (double v : r.params) out += format_number(v) + ",";
        out += to_string(r.mode);
        for (double v : {r.m1, r.offset1, r.m2, r.offset2, r.frac1, r.frac2, r.rate}) out += "," + format_number(v);
        out += r.is_accept_all ? ",true," : ",false,";
        out += format_number(r.C) + "," + r.status + "\n";
    }
    return out;
}

struct MuCurveRow {
    double t = 0.0;
    double mu_2 = 0.0;
    double rate = 0.0;
};

/// Occupancy of the surge state and total rate with sigma_1 = (0,inf), sigma_2 = (t,inf).
inline std::vector<MuCurveRow> run_mu_curve(const ModelPrimitives& p, const std::vector<double>& t_grid) {
    p.validate();
    MomentCache c1(p.view(WorldState::NonSurge));
    MomentCache c2(p.view(WorldState::Surge));
    const auto a1 = c1.aggregates(IntervalSet::accept_all());
    std::vector<MuCurveRow> rows;
    for (double t : t_grid) {
        if (!(t >= 0.0)) throw ValidationError("mu-curve thresholds must be >= 0");
        const auto br = dynamic_rate_from_aggregates(a1, c2.aggregates(StructuralForm::lower(t).to_policy()));
        rows.push_back({t, br.occupancy[1], br.total_rate});
    }
    return rows;
}

inline std::string mu_curve_csv(const std::vector<MuCurveRow>& rows) {
    std::string out = "# schema=1\nt,mu_2,rate\n";
    for (const auto& r : rows) out += format_number(r.t) + "," + format_number(r.mu_2) + "," + format_number(r.rate) + "\n";
    return out;
}

}  // namespace surge_lab
