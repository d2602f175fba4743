#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "surge_lab/errors.hpp"
#include "surge_lab/model.hpp"
#include "surge_lab/rng.hpp"

namespace surge_lab {

struct SimConfig {
    double horizon_hours = 1e4;
    std::uint64_t seed = 1;
    int batch_count = 50;
    double warmup_hours = -1.0;  ///< negative means 5% of the horizon

    [[nodiscard]] double warmup() const { return warmup_hours < 0.0 ? 0.05 * horizon_hours : warmup_hours; }

    void validate() const {
        if (!std::isfinite(horizon_hours) || !(horizon_hours > 0.0)) throw ValidationError("horizon must be positive");
        if (!(warmup() >= 0.0) || !(warmup() < horizon_hours)) throw ValidationError("need horizon > warmup >= 0");
        if (batch_count < 10) throw ValidationError("batch_count must be >= 10");
    }
};

struct SimResult {
    double rate_mean = 0.0;
    double rate_ci_halfwidth = 0.0;
    std::array<double, 2> mu_mean{};
    std::array<double, 2> mu_ci_halfwidth{};
    std::uint64_t n_trips_accepted = 0;  ///< accepted after warmup
    std::uint64_t n_requests = 0;  ///< requests arriving while open
    std::uint64_t n_world_transitions = 0;
    bool starved = false;          ///< no trip accepted after warmup
    double total_earnings = 0.0;   ///< payments credited after warmup
    double open_time = 0.0;        ///< measured window only
    double trip_time = 0.0;

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// One accepted trip, for audits.
struct TripRecord {
    double start = 0.0;
    double tau = 0.0;
    WorldState start_state = WorldState::NonSurge;
    WorldState end_state = WorldState::NonSurge;
    double payment = 0.0;
};

namespace detail {

/// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + comp; }
};

/// Time and earnings per equal-length batch on [warmup, horizon].
class BatchLedger {
public:
    BatchLedger(double warmup, double horizon, int batches)
        : start_(warmup), end_(horizon), width_((horizon - warmup) / batches), time_(batches), earn_(batches) {}

    /// Attribute [a, b) to `state`, split across batch boundaries.
    void add_time(int state, double a, double b, bool on_trip) {
        a = std::max(a, start_);
        b = std::min(b, end_);
        while (a < b) {
            const std::size_t k = batch_of(a);
            const double edge = k + 1 == time_.size() ? end_ : start_ + width_ * static_cast<double>(k + 1);
            const double stop = std::min(b, edge);
            time_[k][state].add(stop - a);
            total_time_[state].add(stop - a);
            (on_trip ? trip_total_ : open_total_).add(stop - a);
            a = stop;
        }
    }

    void add_earnings(double at, double amount) {
        if (at < start_ || at > end_) return;
        earn_[batch_of(at)].add(amount);
        total_earn_.add(amount);
    }

    [[nodiscard]] std::size_t batches() const { return time_.size(); }
    [[nodiscard]] double batch_width(std::size_t k) const {
        return k + 1 == time_.size() ? end_ - (start_ + width_ * static_cast<double>(k)) : width_;
    }
    [[nodiscard]] double time(std::size_t k, int s) const { return time_[k][s].value(); }
    [[nodiscard]] double earnings(std::size_t k) const { return earn_[k].value(); }
    [[nodiscard]] double total_time(int s) const { return total_time_[s].value(); }
    [[nodiscard]] double total_earnings() const { return total_earn_.value(); }
    [[nodiscard]] double open_total() const { return open_total_.value(); }
    [[nodiscard]] double trip_total() const { return trip_total_.value(); }
    [[nodiscard]] double length() const { return end_ - start_; }

private:
    std::size_t batch_of(double t) const {
        const auto k = static_cast<std::size_t>(std::floor((t - start_) / width_));
        return std::min(k, time_.size() - 1);
    }

    double start_, end_, width_;
    std::vector<std::array<CompensatedSum, 2>> time_;
    std::vector<CompensatedSum> earn_;
    std::array<CompensatedSum, 2> total_time_{};
    CompensatedSum total_earn_, open_total_, trip_total_;
};

/// Mean and 95% Student-t halfwidth of batch values.
inline std::array<double, 2> batch_ci(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t dist(n - 1.0);
    return {mean, boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(n)};
}

}  // namespace detail

/**
 * Discrete-event simulation of the world chain and one driver following a
 * fixed policy pair.
 *
 * The world path and the request stream are generated independently of the
 * driver: requests arrive at the full rate lambda_i of the current world
 * state, and each request draws a trip length whether or not the driver can
 * take it. The policy only thins the stream. Payment is fixed by the state at
 * trip start and credited at trip end; trip time counts toward the start state.
 */
inline SimResult simulate(const ModelPrimitives& p, const PolicyPair& policies, const SimConfig& cfg,
                          const std::function<void(const TripRecord&)>& on_trip = {}) {
    p.validate();
    cfg.validate();
    CounterRng world_rng(cfg.seed, "world");
    CounterRng request_rng(cfg.seed, "request");
    CounterRng trip_rng(cfg.seed, "trip-length");

    const double horizon = cfg.horizon_hours;
    const double warmup = cfg.warmup();
    detail::BatchLedger ledger(warmup, horizon, cfg.batch_count);
    const std::array<StateView, 2> views{p.view(WorldState::NonSurge), p.view(WorldState::Surge)};
    const std::array<double, 2> arrival{p.lambda_1, p.lambda_2};
    const std::array<double, 2> leave{p.lambda_12, p.lambda_21};
    const std::array<const IntervalSet*, 2> sigma{&policies.sigma_1, &policies.sigma_2};

    SimResult out;
    const double pi2 = p.lambda_12 / (p.lambda_12 + p.lambda_21);
    int world = world_rng.uniform() < pi2 ? 1 : 0;
    double t = 0.0;
    double next_flip = world_rng.exponential(leave[world]);
    double next_request = request_rng.exponential(arrival[world]);

    // Driver: open since `open_since`, or on a trip until `busy_until`.
    bool busy = false;
    double open_since = 0.0;
    double busy_until = 0.0;
    int trip_state = 0;
    double trip_start = 0.0, trip_tau = 0.0, trip_pay = 0.0;

    auto finish_trip = [&] {
        ledger.add_time(trip_state, trip_start, busy_until, true);
        ledger.add_earnings(busy_until, trip_pay);
        if (busy_until >= warmup && busy_until <= horizon) {
            if (on_trip)
                on_trip({trip_start, trip_tau, state_from_int(trip_state + 1), state_from_int(world + 1), trip_pay});
        }
        busy = false;
        open_since = busy_until;
    };

    while (true) {
        const double next = std::min(next_flip, next_request);
        if (busy && busy_until <= next) {
            if (busy_until > horizon) break;
            finish_trip();
        }
        if (next > horizon) break;
        t = next;
        if (next_flip <= next_request) {
            if (!busy) {
                ledger.add_time(world, open_since, t, false);
                open_since = t;
            }
            world = 1 - world;
            if (t >= warmup) ++out.n_world_transitions;
            next_flip = t + world_rng.exponential(leave[world]);
            next_request = t + request_rng.exponential(arrival[world]);
            continue;
        }
        const double tau = views[world].dist.quantile(trip_rng.uniform());
        next_request = t + request_rng.exponential(arrival[world]);
        if (busy) continue;
        if (t >= warmup) ++out.n_requests;
        if (!sigma[world]->contains(tau)) continue;
        ledger.add_time(world, open_since, t, false);
        busy = true;
        trip_state = world;
        trip_start = t;
        trip_tau = tau;
        trip_pay = views[world].price(tau);
        busy_until = t + tau;
        if (t >= warmup) ++out.n_trips_accepted;
    }
    if (busy) ledger.add_time(trip_state, trip_start, horizon, true);
    else ledger.add_time(world, open_since, horizon, false);

    const double len = ledger.length();
    out.total_earnings = ledger.total_earnings();
    out.open_time = ledger.open_total();
    out.trip_time = ledger.trip_total();
    std::vector<double> rate_b, mu1_b, mu2_b;
    for (std::size_t k = 0; k < ledger.batches(); ++k) {
        const double w = ledger.batch_width(k);
        rate_b.push_back(ledger.earnings(k) / w);
        mu1_b.push_back(ledger.time(k, 0) / w);
        mu2_b.push_back(ledger.time(k, 1) / w);
    }
    out.starved = out.n_trips_accepted == 0;
    const auto r = detail::batch_ci(rate_b);
    out.rate_mean = out.starved ? 0.0 : out.total_earnings / len;
    out.rate_ci_halfwidth = out.starved ? 0.0 : r[1];
    out.mu_mean = {ledger.total_time(0) / len, ledger.total_time(1) / len};
    out.mu_ci_halfwidth = {detail::batch_ci(mu1_b)[1], detail::batch_ci(mu2_b)[1]};
    return out;
}

}  // namespace surge_lab
