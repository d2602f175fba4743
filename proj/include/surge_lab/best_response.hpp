#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surge_lab/earnings.hpp"
#include "surge_lab/errors.hpp"
#include "surge_lab/kernels.hpp"
#include "surge_lab/model.hpp"
#include "surge_lab/rng.hpp"

namespace surge_lab {

// ---------------------------------------------------------------------------
// Single-state model
// ---------------------------------------------------------------------------

/// Thrown when the ratio iteration does not settle; carries the best iterate seen.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double best_value, IntervalSet best_policy)
        : NumericError(what), best_value(best_value), best_policy(std::move(best_policy)) {}
    double best_value;
    IntervalSet best_policy;
};

/**
 * {tau in (0, inf) : w(tau) >= c * tau}, located by scanning a log grid and
 * bisecting each sign change. The grid is dense on (0, truncation] and sparse
 * on the tail up to 1e4 * truncation; a set still open at the end runs to inf.
 */
inline IntervalSet superlevel_set(const StateView& view, double c, int scan_points = 4000) {
    const double trunc = view.dist.truncation_point();
    const double lo = trunc * 1e-9;
    auto h = [&](double t) { return view.price(t) - c * t; };
    std::vector<double> grid(scan_points);
    for (int k = 0; k < scan_points; ++k)
        grid[k] = lo * std::pow(trunc / lo, static_cast<double>(k) / (scan_points - 1));
    for (int k = 1; k <= scan_points / 10; ++k) grid.push_back(trunc * std::pow(1e4, k / (scan_points / 10.0)));
    auto crossing = [&](double a, double b) {
        const bool sa = h(a) >= 0.0;
        for (int it = 0; it < 80 && b - a > 1e-15 * b; ++it) {
            const double m = 0.5 * (a + b);
            if ((h(m) >= 0.0) == sa) a = m; else b = m;
        }
        return 0.5 * (a + b);
    };
    std::vector<Interval> out;
    bool inside = h(grid[0]) >= 0.0;
    double start = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const bool now = h(grid[k]) >= 0.0;
        if (now == inside) continue;
        const double x = crossing(grid[k - 1], grid[k]);
        if (inside) out.push_back({start, x});
        else start = x;
        inside = now;
    }
    if (inside) out.push_back({start, kInf});
    return IntervalSet(std::move(out));
}

struct SingleStateBest {
    double c_star = 0.0;      ///< threshold on w(tau)/tau defining the policy
    IntervalSet policy;       ///< {tau : w(tau)/tau >= c_star}
    double rate = 0.0;        ///< R(policy); equals c_star at the fixed point
    int iterations = 0;
};

/**
 * Optimal single-state acceptance policy. Threshold policies are optimal, and
 * the optimum is the fixed point c = R({w/tau >= c}). Iterates
 * c <- R({w/tau >= c}) from c = R((0, inf)); each step is a Dinkelbach
 * update and the sequence increases monotonically.
 */
inline SingleStateBest single_state_best(const StateView& view, int max_iterations = 200) {
    SingleStateBest best;
    best.policy = IntervalSet::accept_all();
    double c = single_state_rate(view, best.policy);
    best.c_star = c;
    best.rate = c;
    for (int it = 1; it <= max_iterations; ++it) {
        auto policy = superlevel_set(view, c);
        const double next = single_state_rate(view, policy);
        best.iterations = it;
        if (next >= best.rate) {
            best.rate = next;
            best.policy = policy;
            best.c_star = c;
        }
        if (std::abs(next - c) <= 1e-13 * std::max(1.0, std::abs(c))) {
            best.c_star = next;
            best.rate = next;
            best.policy = std::move(policy);
            return best;
        }
        c = next;
    }

    // Fallback: exhaustive scan of thresholds, then one more fixed-point attempt.
    double lo = best.rate, hi = best.rate;
    const double trunc = view.dist.truncation_point();
    for (int k = 1; k <= 2000; ++k) {
        const double t = trunc * k / 2000.0;
        hi = std::max(hi, view.price(t) / t);
    }
    double scan_best = best.rate;
    double scan_c = best.c_star;
    for (int k = 0; k < 10000; ++k) {
        const double cc = lo + (hi - lo) * k / 9999.0;
        const double r = single_state_rate(view, superlevel_set(view, cc));
        if (r > scan_best) {
            scan_best = r;
            scan_c = cc;
        }
    }
    auto policy = superlevel_set(view, scan_best);
    const double fixed = single_state_rate(view, policy);
    if (std::abs(fixed - scan_best) < 1e-8) return {fixed, policy, fixed, max_iterations};
    throw ConvergenceError("single_state_best did not converge; best rate " + std::to_string(scan_best) +
                               " at threshold " + std::to_string(scan_c),
                           scan_best, superlevel_set(view, scan_c));
}

inline SingleStateBest single_state_best(const PricingSpec& w, double lambda, const TripDist& dist) {
    if (w.family() == PricingFamily::ICForm) throw ConfigError("IC-form pricing needs world rates; use the dynamic model");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return single_state_best(StateView{lambda, nan, nan, dist, w});
}

/// Sufficient (not necessary) condition for affine pricing m*tau + a to be IC in one state: 0 <= a <= m/lambda.
inline bool affine_ic_sufficient(double m, double a, double lambda) {
    if (!(m > 0.0)) throw DomainError("affine_ic_sufficient requires m > 0");
    if (!(lambda > 0.0)) throw DomainError("affine_ic_sufficient requires lambda > 0");
    return a >= 0.0 && a <= m / lambda;
}

// ---------------------------------------------------------------------------
// Structural policy forms
// ---------------------------------------------------------------------------

enum class FormKind { AcceptAll, UpperThreshold, Window, LowerThreshold, SplitUnion };

inline std::string to_string(FormKind k) {
    switch (k) {
        case FormKind::AcceptAll: return "AcceptAll";
        case FormKind::UpperThreshold: return "UpperThreshold";
        case FormKind::Window: return "Window";
        case FormKind::LowerThreshold: return "LowerThreshold";
        case FormKind::SplitUnion: return "SplitUnion";
    }
    return "Unknown";
}

/**
 * Parametric policy shape:
 *   UpperThreshold(t)  -> (0, t)         rejects long trips
 *   Window(a, b)       -> (a, b)         rejects short and long trips
 *   LowerThreshold(t)  -> (t, inf)       rejects short trips
 *   SplitUnion(a, b)   -> (0, a) u (b, inf)  rejects medium trips
 * Parameters may be 0 or inf; degenerate parameters give empty or full sets.
 */
struct StructuralForm {
    FormKind kind = FormKind::AcceptAll;
    double a = 0.0;
    double b = kInf;

    static StructuralForm accept_all() { return {FormKind::AcceptAll, 0.0, kInf}; }
    static StructuralForm upper(double t) { return {FormKind::UpperThreshold, t, kInf}; }
    static StructuralForm lower(double t) { return {FormKind::LowerThreshold, t, kInf}; }
    static StructuralForm window(double lo, double hi) { return {FormKind::Window, lo, hi}; }
    static StructuralForm split(double lo, double hi) { return {FormKind::SplitUnion, lo, hi}; }

    [[nodiscard]] int parameter_count() const {
        switch (kind) {
            case FormKind::AcceptAll: return 0;
            case FormKind::UpperThreshold:
            case FormKind::LowerThreshold: return 1;
            default: return 2;
        }
    }

    [[nodiscard]] IntervalSet to_policy() const {
        if ((kind == FormKind::Window || kind == FormKind::SplitUnion) && !(a < b))
            throw ValidationError(to_string(kind) + " requires its first parameter below the second");
        if (a < 0.0 || b < 0.0) throw ValidationError("structural form parameters must be >= 0");
        std::vector<Interval> out;
        switch (kind) {
            case FormKind::AcceptAll: out.push_back({0.0, kInf}); break;
            case FormKind::UpperThreshold:
                if (a > 0.0) out.push_back({0.0, a});
                break;
            case FormKind::LowerThreshold:
                if (!std::isinf(a)) out.push_back({a, kInf});
                break;
            case FormKind::Window: out.push_back({a, b}); break;
            case FormKind::SplitUnion:
                if (a > 0.0) out.push_back({0.0, a});
                if (!std::isinf(b)) out.push_back({b, kInf});
                break;
        }
        return IntervalSet(std::move(out));
    }

    friend bool operator==(const StructuralForm&, const StructuralForm&) = default;
};

inline std::string to_string(const StructuralForm& f) {
    switch (f.parameter_count()) {
        case 0: return to_string(f.kind);
        case 1: return to_string(f.kind) + "(" + detail::format_endpoint(f.a) + ")";
        default:
            return to_string(f.kind) + "(" + detail::format_endpoint(f.a) + "," + detail::format_endpoint(f.b) + ")";
    }
}

/// Forms that can be optimal in `state` for the state's pricing family.
inline std::vector<FormKind> candidate_forms(const PricingSpec& pricing, WorldState state) {
    const bool surge = state == WorldState::Surge;
    switch (pricing.family()) {
        case PricingFamily::Multiplicative:
            return {surge ? FormKind::LowerThreshold : FormKind::UpperThreshold};
        case PricingFamily::Affine:
            if (surge) return {pricing.offset() > 0.0 ? FormKind::SplitUnion : FormKind::LowerThreshold};
            return {pricing.offset() >= 0.0 ? FormKind::UpperThreshold : FormKind::Window};
        case PricingFamily::ICForm:
            if (pricing.offset() == 0.0) return {surge ? FormKind::LowerThreshold : FormKind::UpperThreshold};
            return {FormKind::UpperThreshold, FormKind::Window, FormKind::LowerThreshold, FormKind::SplitUnion};
    }
    throw ConfigError("unsupported pricing family");
}

// ---------------------------------------------------------------------------
// Dynamic model grid search
// ---------------------------------------------------------------------------

struct SearchOptions {
    int grid_points = 64;            ///< coarse points per parameter, once log-spaced and once linear
    double grid_min_fraction = 1e-4; ///< smallest coarse point, relative to the truncation point
    int refine_passes = 2;
    int refine_points = 60;
    double delta = 1e-6;             ///< relative rate tolerance for the tie-break
    double accept_fraction = 0.999;  ///< per-state fraction that counts as accepting everything
    int max_rounds = 10;
};

struct BestResponseResult {
    PolicyPair policy_pair;
    std::array<StructuralForm, 2> forms{StructuralForm::accept_all(), StructuralForm::accept_all()};
    double rate = 0.0;             ///< rate of the returned policy pair
    double max_rate = 0.0;         ///< highest rate found by the search
    double accept_all_rate = 0.0;
    std::array<double, 2> accepted_fractions{};
    bool is_accept_all = false;
    int rounds = 0;
    EarningsBreakdown breakdown;
};

namespace detail {

struct Candidate {
    StructuralForm form;
    IntervalSet policy;
    double rate;
    double fraction;
};

/// {0} u log grid u linear grid on (0, trunc] u {inf}; the linear part keeps resolution near the truncation point.
inline std::vector<double> coarse_grid(double trunc, const SearchOptions& opt) {
    std::vector<double> g;
    g.push_back(0.0);
    const double lo = trunc * opt.grid_min_fraction;
    for (int k = 0; k < opt.grid_points; ++k) {
        g.push_back(lo * std::pow(trunc / lo, static_cast<double>(k) / (opt.grid_points - 1)));
        g.push_back(trunc * (k + 1) / opt.grid_points);
    }
    g.push_back(kInf);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [&](double a, double b) { return std::abs(a - b) <= 1e-12 * trunc; }), g.end());
    return g;
}

/// Points in the bracket around `x` within `grid`; 0 and inf stay fixed.
inline std::vector<double> refine_around(double x, const std::vector<double>& grid, int points) {
    if (x == 0.0 || std::isinf(x)) return {x};
    auto it = std::lower_bound(grid.begin(), grid.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double left = i > 0 ? grid[i - 1] : x;
    double right = i + 1 < grid.size() ? grid[i + 1] : x;
    if (std::isinf(right)) right = x + (x - left);
    std::vector<double> out;
    for (int k = 0; k < points; ++k) out.push_back(left + (right - left) * k / (points - 1));
    return out;
}

class StateSearch {
public:
    StateSearch(WorldState state, MomentCache& own, const StateAggregates& other, const SearchOptions& opt)
        : state_(state), own_(own), other_(other), opt_(opt) {}

    Candidate evaluate(const StructuralForm& form) {
        auto policy = form.to_policy();
        const auto agg = own_.aggregates(policy);
        const auto br = state_ == WorldState::NonSurge ? dynamic_rate_from_aggregates(agg, other_)
                                                       : dynamic_rate_from_aggregates(other_, agg);
        return {form, std::move(policy), br.total_rate, agg.f_sigma};
    }

    void push(const StructuralForm& form) { all_.push_back(evaluate(form)); }

    void scan(FormKind kind, const std::vector<double>& ga, const std::vector<double>& gb) {
        switch (kind) {
            case FormKind::AcceptAll: push(StructuralForm::accept_all()); break;
            case FormKind::UpperThreshold:
                for (double t : ga) push(StructuralForm::upper(t));
                break;
            case FormKind::LowerThreshold:
                for (double t : ga) push(StructuralForm::lower(t));
                break;
            case FormKind::Window:
            case FormKind::SplitUnion:
                for (double x : ga)
                    for (double y : gb)
                        if (x < y) push(StructuralForm{kind, x, y});
                break;
        }
    }

    [[nodiscard]] const Candidate& best() const {
        return *std::max_element(all_.begin(), all_.end(),
                                 [](const Candidate& l, const Candidate& r) { return l.rate < r.rate; });
    }

    [[nodiscard]] std::optional<StructuralForm> best_of(FormKind kind) const {
        const Candidate* top = nullptr;
        for (const auto& c : all_)
            if (c.form.kind == kind && (!top || c.rate > top->rate)) top = &c;
        if (!top) return std::nullopt;
        return top->form;
    }

    [[nodiscard]] double cutoff(double floor) const {
        const double top = best().rate;
        return std::max(top - opt_.delta * std::max(std::abs(top), 1e-12), floor);
    }

    /// Max accepted fraction among candidates within delta of the best rate and not below `floor`.
    [[nodiscard]] const Candidate& choose(double floor) const {
        const double cutoff = this->cutoff(floor);
        const Candidate* pick = nullptr;
        for (const auto& c : all_) {
            if (c.rate < cutoff) continue;
            if (!pick || c.fraction > pick->fraction) pick = &c;
        }
        return pick ? *pick : best();
    }

    [[nodiscard]] std::size_t size() const { return all_.size(); }

private:
    WorldState state_;
    MomentCache& own_;
    StateAggregates other_;
    SearchOptions opt_;
    std::vector<Candidate> all_;
};


/// Moves each parameter of `c` in the direction that accepts more trips, as far as the rate stays at or
/// above `cutoff`; the grid alone only locates the edge of the tie band to its own spacing.
inline Candidate push_to_band_edge(StateSearch& search, Candidate c, double cutoff, double trunc) {
    if (c.form.parameter_count() == 0) return c;
    auto with = [&](int which, double x) {
        StructuralForm f = c.form;
        (which == 0 ? f.a : f.b) = x;
        return f;
    };
    for (int which = 0; which < c.form.parameter_count(); ++which) {
        double inside = which == 0 ? c.form.a : c.form.b;
        if (std::isinf(inside)) continue;
        double limit = 0.0;
        switch (c.form.kind) {
            case FormKind::UpperThreshold: limit = trunc; break;
            case FormKind::LowerThreshold: limit = 0.0; break;
            case FormKind::Window: limit = which == 0 ? 0.0 : trunc; break;
            case FormKind::SplitUnion: limit = which == 0 ? c.form.b : c.form.a; break;
            case FormKind::AcceptAll: break;
        }
        if ((c.form.kind == FormKind::UpperThreshold || c.form.kind == FormKind::Window) && inside >= limit) continue;
        // the limit itself is a different (more accepting) form, so stay strictly short of it
        double outside = limit;
        for (int it = 0; it < 60 && std::abs(outside - inside) > 1e-12 * trunc; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (mid == inside || mid == outside) break;
            auto cand = search.evaluate(with(which, mid));
            if (cand.rate >= cutoff) {
                inside = mid;
                c = std::move(cand);
            } else {
                outside = mid;
            }
        }
    }
    return c;
}
}  // namespace detail

struct StateSearchResult {
    StructuralForm form;
    IntervalSet policy;
    double rate = 0.0;      ///< rate of the chosen policy
    double max_rate = 0.0;  ///< best rate seen in the search
    double fraction = 0.0;
};

/**
 * Best structural policy for `state` with the other state's policy held
 * fixed. Coarse log grid, then `refine_passes` passes on a bracket around the
 * incumbent best. Among candidates within `delta` of the best rate (and not
 * below `incumbent`'s rate, when given) returns the one accepting the most
 * trips; ties keep evaluation order.
 */
inline StateSearchResult best_state_policy(MomentCache& own, MomentCache& other_cache, WorldState state,
                                           const IntervalSet& other_policy, const std::vector<FormKind>& forms,
                                           const SearchOptions& opt,
                                           const std::optional<StructuralForm>& incumbent = std::nullopt) {
    const auto other = other_cache.aggregates(other_policy);
    detail::StateSearch search(state, own, other, opt);
    const auto grid = detail::coarse_grid(own.truncation(), opt);
    double floor = -kInf;
    if (incumbent) {
        search.push(*incumbent);
        floor = search.best().rate;
    }
    search.push(StructuralForm::accept_all());
    for (auto kind : forms) search.scan(kind, grid, grid);

    // Refine the best candidate of every form, not just the overall best.
    for (auto kind : forms) {
        std::vector<double> ra = grid, rb = grid;
        for (int pass = 0; pass < opt.refine_passes; ++pass) {
            const auto top = search.best_of(kind);
            if (!top || top->parameter_count() == 0) break;
            auto na = detail::refine_around(top->a, ra, opt.refine_points);
            auto nb = top->parameter_count() == 2 ? detail::refine_around(top->b, rb, opt.refine_points)
                                                  : std::vector<double>{kInf};
            search.scan(kind, na, nb);
            ra = std::move(na);
            rb = std::move(nb);
        }
    }
    const double cutoff = search.cutoff(floor);
    const auto pick = detail::push_to_band_edge(search, search.choose(floor), cutoff, own.truncation());
    return {pick.form, pick.policy, pick.rate, search.best().rate, pick.fraction};
}

namespace detail {

inline bool same_policy(const IntervalSet& a, const IntervalSet& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto& x = a.intervals()[k];
        const auto& y = b.intervals()[k];
        if (std::abs(x.lower - y.lower) > tol) return false;
        if (std::isinf(x.upper) != std::isinf(y.upper)) return false;
        if (!std::isinf(x.upper) && std::abs(x.upper - y.upper) > tol) return false;
    }
    return true;
}

}  // namespace detail

/**
 * Driver best response in the two-state model. Each state's policy is searched
 * over the structural forms that can be optimal for its pricing family; when
 * the non-surge policy is not pinned, the states alternate (at most
 * `max_rounds` rounds) until neither policy moves.
 */
inline BestResponseResult dynamic_best_response(const ModelPrimitives& p, bool fix_nonsurge_accept_all,
                                                const SearchOptions& opt = {}) {
    p.validate();
    MomentCache cache1(p.view(WorldState::NonSurge));
    MomentCache cache2(p.view(WorldState::Surge));
    const auto forms1 = candidate_forms(p.pricing_1, WorldState::NonSurge);
    const auto forms2 = candidate_forms(p.pricing_2, WorldState::Surge);

    BestResponseResult out;
    out.accept_all_rate =
        dynamic_rate_from_aggregates(cache1.aggregates(IntervalSet::accept_all()), cache2.aggregates(IntervalSet::accept_all()))
            .total_rate;

    std::array<StructuralForm, 2> forms{StructuralForm::accept_all(), StructuralForm::accept_all()};
    PolicyPair policies = PolicyPair::accept_all();
    double max_rate = out.accept_all_rate;
    const double tol = 1e-9 * std::max(cache1.truncation(), cache2.truncation());

    for (int round = 1; round <= opt.max_rounds; ++round) {
        bool changed = false;
        out.rounds = round;
        if (!fix_nonsurge_accept_all) {
            auto r1 = best_state_policy(cache1, cache2, WorldState::NonSurge, policies.sigma_2, forms1, opt, forms[0]);
            if (!detail::same_policy(r1.policy, policies.sigma_1, tol)) changed = true;
            policies.sigma_1 = r1.policy;
            forms[0] = r1.form;
            max_rate = std::max(max_rate, r1.max_rate);
        }
        auto r2 = best_state_policy(cache2, cache1, WorldState::Surge, policies.sigma_1, forms2, opt, forms[1]);
        if (!detail::same_policy(r2.policy, policies.sigma_2, tol)) changed = true;
        policies.sigma_2 = r2.policy;
        forms[1] = r2.form;
        max_rate = std::max(max_rate, r2.max_rate);
        if (fix_nonsurge_accept_all || !changed) break;
    }

    out.policy_pair = policies;
    out.forms = forms;
    out.breakdown = dynamic_rate_from_aggregates(cache1.aggregates(policies.sigma_1), cache2.aggregates(policies.sigma_2));
    out.rate = out.breakdown.total_rate;
    out.max_rate = std::max(max_rate, out.rate);
    out.accepted_fractions = {measure_fraction(policies.sigma_1, p.dist_1), measure_fraction(policies.sigma_2, p.dist_2)};
    // accept-all must itself be within delta of the optimum; near-full fractions alone are not enough
    out.is_accept_all = out.accepted_fractions[0] >= opt.accept_fraction &&
                        out.accepted_fractions[1] >= opt.accept_fraction &&
                        out.accept_all_rate >= out.max_rate * (1.0 - opt.delta);
    return out;
}

inline BestResponseResult dynamic_best_response(const ModelPrimitives& p, bool fix_nonsurge_accept_all, double delta) {
    SearchOptions opt;
    opt.delta = delta;
    return dynamic_best_response(p, fix_nonsurge_accept_all, opt);
}

// ---------------------------------------------------------------------------
// Derivative-sign function and the IC certificate
// ---------------------------------------------------------------------------

/**
 * Function with the sign of dR/du, u an upper endpoint of a policy interval in
 * state i, written with the aggregates of both states:
 *
 *   (q_ij(u)/u)(R_j - R_i) + (w_i(u)/u)(Q_i/T_i + Q_j/T_j) - (Q_i/T_i R_j + Q_j/T_j R_i)
 */
inline double r_from_aggregates(double u, double price_u, double q_u, const StateAggregates& own,
                                const StateAggregates& other) {
    if (!(u > 0.0)) throw DomainError("r_derivative requires u > 0");
    const double ratio_own = own.q_tilde / own.t_tilde;
    const double ratio_other = other.q_tilde / other.t_tilde;
    return q_u / u * (other.rate - own.rate) + price_u / u * (ratio_own + ratio_other) -
           (ratio_own * other.rate + ratio_other * own.rate);
}

inline double r_derivative(double u, WorldState state, const ModelPrimitives& p, const PolicyPair& policies) {
    if (!(u > 0.0)) throw DomainError("r_derivative requires u > 0");
    const auto own = aggregates(p, state, policies.get(state));
    const auto other = aggregates(p, surge_lab::other(state), policies.get(surge_lab::other(state)));
    const auto v = p.view(state);
    return r_from_aggregates(u, v.price(u), v.q(u), own, other);
}

struct CertificateOptions {
    int n_policy_samples = 50;
    int n_u_samples = 200;
    std::uint64_t seed = 1;
    bool check_nonsurge = true;
    bool check_surge = true;
};

struct CertificatePoint {
    WorldState state = WorldState::NonSurge;
    double u = 0.0;
    PolicyPair policies;
    double r = 0.0;
};

struct CertificateReport {
    double min_r = kInf;
    CertificatePoint argmin;
    std::optional<CertificatePoint> first_violation;
    std::size_t evaluations = 0;
    std::size_t policies_checked = 0;
    [[nodiscard]] bool certified() const { return !first_violation.has_value(); }
};

/// Uniformly random structural policy with parameters inside (0, trunc).
inline IntervalSet random_structural_policy(CounterRng& rng, double trunc) {
    const auto kind = static_cast<FormKind>(1 + rng.below(4));
    double x = rng.uniform(0.0, trunc), y = rng.uniform(0.0, trunc);
    if (x > y) std::swap(x, y);
    if (x == y) y = x + 1e-9 * trunc;
    switch (kind) {
        case FormKind::UpperThreshold: return StructuralForm::upper(x).to_policy();
        case FormKind::LowerThreshold: return StructuralForm::lower(x).to_policy();
        case FormKind::Window: return StructuralForm::window(x, y).to_policy();
        default: return StructuralForm::split(x, y).to_policy();
    }
}

/**
 * Evaluates r(u, i) on a log grid of u at accept-all and at sampled policy
 * pairs, reporting the minimum and the first negative value.
 *
 * Each sample is a unilateral deviation: state i plays a random structural
 * policy while the other state accepts everything.
 */
inline CertificateReport ic_certificate(const ModelPrimitives& p, const CertificateOptions& opt = {}) {
    p.validate();
    MomentCache cache1(p.view(WorldState::NonSurge));
    MomentCache cache2(p.view(WorldState::Surge));
    CounterRng rng(opt.seed, "certificate-policies");

    std::array<std::vector<double>, 2> us;
    for (auto s : {WorldState::NonSurge, WorldState::Surge}) {
        const double trunc = p.dist(s).truncation_point();
        const double lo = trunc * 1e-4;
        auto& g = us[index_of(s)];
        for (int k = 0; k < opt.n_u_samples; ++k)
            g.push_back(opt.n_u_samples == 1 ? trunc : lo * std::pow(trunc / lo, static_cast<double>(k) / (opt.n_u_samples - 1)));
    }

    CertificateReport report;
    auto check = [&](WorldState s, const PolicyPair& pp) {
        const auto a1 = cache1.aggregates(pp.sigma_1);
        const auto a2 = cache2.aggregates(pp.sigma_2);
        const auto& own = s == WorldState::NonSurge ? a1 : a2;
        const auto& oth = s == WorldState::NonSurge ? a2 : a1;
        const auto v = p.view(s);
        ++report.policies_checked;
        for (double u : us[index_of(s)]) {
            const double r = r_from_aggregates(u, v.price(u), v.q(u), own, oth);
            ++report.evaluations;
            if (r < report.min_r) {
                report.min_r = r;
                report.argmin = {s, u, pp, r};
            }
            if (r < 0.0 && !report.first_violation) report.first_violation = CertificatePoint{s, u, pp, r};
        }
    };

    const auto all = PolicyPair::accept_all();
    if (opt.check_nonsurge) check(WorldState::NonSurge, all);
    if (opt.check_surge) check(WorldState::Surge, all);
    for (int k = 0; k < opt.n_policy_samples; ++k) {
        const auto s1 = random_structural_policy(rng, cache1.truncation());
        const auto s2 = random_structural_policy(rng, cache2.truncation());
        if (opt.check_nonsurge) check(WorldState::NonSurge, {s1, IntervalSet::accept_all()});
        if (opt.check_surge) check(WorldState::Surge, {IntervalSet::accept_all(), s2});
    }
    return report;
}

}  // namespace surge_lab
