#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "surge_lab/errors.hpp"

namespace surge_lab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval of trip lengths (hours). `upper` may be infinite.
struct Interval {
    double lower = 0.0;
    double upper = kInf;

    [[nodiscard]] bool contains(double tau) const { return tau > lower && tau < upper; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/**
 * A driver acceptance policy: a finite union of disjoint open intervals.
 *
 * The stored form is canonical: intervals are sorted, pairwise disjoint and no
 * two of them share an endpoint. Merging (a,b) and (b,c) into (a,c) drops the
 * single point b, which has probability zero under any continuous trip
 * distribution. The empty set is the "accept nothing" policy.
 */
class IntervalSet {
public:
    IntervalSet() = default;

    IntervalSet(std::initializer_list<Interval> intervals)
        : IntervalSet(std::vector<Interval>(intervals)) {}

    explicit IntervalSet(std::vector<Interval> intervals) : intervals_(canonical(std::move(intervals))) {}

    static IntervalSet accept_all() { return IntervalSet({Interval{0.0, kInf}}); }
    static IntervalSet empty() { return IntervalSet(); }

    [[nodiscard]] const std::vector<Interval>& intervals() const { return intervals_; }
    [[nodiscard]] bool is_empty() const { return intervals_.empty(); }
    [[nodiscard]] std::size_t size() const { return intervals_.size(); }
    [[nodiscard]] bool is_accept_all() const {
        return intervals_.size() == 1 && intervals_.front().lower == 0.0 && std::isinf(intervals_.front().upper);
    }

    [[nodiscard]] bool contains(double tau) const {
        auto it = std::upper_bound(intervals_.begin(), intervals_.end(), tau,
                                   [](double t, const Interval& iv) { return t < iv.upper; });
        return it != intervals_.end() && it->contains(tau);
    }

    /// True if every interval of *this lies inside some interval of `other`.
    [[nodiscard]] bool subset_of(const IntervalSet& other) const {
        for (const auto& iv : intervals_) {
            bool covered = std::any_of(other.intervals_.begin(), other.intervals_.end(), [&](const Interval& o) {
                return o.lower <= iv.lower && iv.upper <= o.upper;
            });
            if (!covered) return false;
        }
        return true;
    }

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    static std::vector<Interval> canonical(std::vector<Interval> in) {
        for (const auto& iv : in) {
            if (std::isnan(iv.lower) || std::isnan(iv.upper))
                throw ValidationError("interval endpoint is NaN");
            if (iv.lower < 0.0)
                throw ValidationError("interval lower endpoint must be >= 0, got " + std::to_string(iv.lower));
            if (!(iv.lower < iv.upper))
                throw ValidationError("interval requires lower < upper, got (" + std::to_string(iv.lower) + ", " +
                                      std::to_string(iv.upper) + ")");
            if (std::isinf(iv.lower)) throw ValidationError("interval lower endpoint must be finite");
        }
        std::sort(in.begin(), in.end(), [](const Interval& a, const Interval& b) {
            return a.lower < b.lower || (a.lower == b.lower && a.upper < b.upper);
        });
        std::vector<Interval> out;
        out.reserve(in.size());
        for (const auto& iv : in) {
            if (!out.empty() && iv.lower <= out.back().upper) {
                out.back().upper = std::max(out.back().upper, iv.upper);
            } else {
                out.push_back(iv);
            }
        }
        return out;
    }

    std::vector<Interval> intervals_;
};

/// Free-function form of the canonicalizing constructor.
inline IntervalSet canonicalize(std::vector<Interval> intervals) { return IntervalSet(std::move(intervals)); }

namespace detail {

inline std::string format_endpoint(double x) {
    if (std::isinf(x)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline double parse_endpoint(std::string_view s) {
    s = trim(s);
    if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
    std::string buf(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(buf, &used);
    } catch (const std::exception&) {
        throw ValidationError("bad interval endpoint '" + buf + "'");
    }
    if (used != buf.size()) throw ValidationError("bad interval endpoint '" + buf + "'");
    return v;
}

}  // namespace detail

/// Renders a policy in the CLI grammar: `accept-all`, `empty` or `(a,b)u(c,d)`.
inline std::string to_string(const IntervalSet& set) {
    if (set.is_empty()) return "empty";
    if (set.is_accept_all()) return "accept-all";
    std::string out;
    for (const auto& iv : set.intervals()) {
        if (!out.empty()) out += "u";
        out += "(" + detail::format_endpoint(iv.lower) + "," + detail::format_endpoint(iv.upper) + ")";
    }
    return out;
}

/// Parses `accept-all | empty | (a,b)[u(c,d)]*`, with `inf` allowed as an upper endpoint.
inline IntervalSet parse_policy(std::string_view text) {
    text = detail::trim(text);
    if (text == "accept-all") return IntervalSet::accept_all();
    if (text == "empty") return IntervalSet::empty();
    std::vector<Interval> parts;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (!parts.empty()) {
            if (text[pos] != 'u') throw ValidationError("expected 'u' between intervals in policy '" + std::string(text) + "'");
            ++pos;
        }
        if (pos >= text.size() || text[pos] != '(')
            throw ValidationError("expected '(' in policy '" + std::string(text) + "'");
        auto close = text.find(')', pos);
        if (close == std::string_view::npos) throw ValidationError("missing ')' in policy '" + std::string(text) + "'");
        auto body = text.substr(pos + 1, close - pos - 1);
        auto comma = body.find(',');
        if (comma == std::string_view::npos) throw ValidationError("missing ',' in policy '" + std::string(text) + "'");
        parts.push_back({detail::parse_endpoint(body.substr(0, comma)), detail::parse_endpoint(body.substr(comma + 1))});
        pos = close + 1;
    }
    if (parts.empty()) throw ValidationError("empty policy literal");
    return IntervalSet(std::move(parts));
}

}  // namespace surge_lab
