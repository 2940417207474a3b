#pragma once

#include <actloss/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace actloss {

enum class ActivationKind { H1, H2 };

/// h(u), h'(u), h''(u) at one point.
struct ActivationValue {
    double h = 1.0;
    double dh = 0.0;
    double d2h = 0.0;
};

namespace detail {

// Interior pieces in the normalized coordinate t = (u - beta)/(gamma - beta).
// Derivatives are with respect to t.

inline ActivationValue h1_interior(double t) noexcept
{
    const double t2 = t * t, t3 = t2 * t;
    return {-6.0 * t3 * t2 + 15.0 * t2 * t2 - 10.0 * t3 + 1.0,
            -30.0 * t2 * (t - 1.0) * (t - 1.0),
            -60.0 * t * (2.0 * t - 1.0) * (t - 1.0)};
}

// h2 rises off the plateau on [0, 0.1), is linear on [0.1, 0.9] and lands on
// zero over (0.9, 1]. The outer pieces are mirror images of each other.
inline ActivationValue h2_head(double t) noexcept
{
    const double t2 = t * t, t3 = t2 * t;
    return {-30000.0 * t3 * t2 + 8000.0 * t2 * t2 - 600.0 * t3 + 1.0,
            -150000.0 * t2 * t2 + 32000.0 * t3 - 1800.0 * t2,
            -600000.0 * t3 + 96000.0 * t2 - 3600.0 * t};
}

inline ActivationValue h2_middle(double t) noexcept { return {1.0 - t, -1.0, 0.0}; }

inline ActivationValue h2_tail(double t) noexcept
{
    const double s = t - 1.0, s2 = s * s, s3 = s2 * s;
    return {-30000.0 * s3 * s2 - 8000.0 * s2 * s2 - 600.0 * s3,
            -150000.0 * s2 * s2 - 32000.0 * s3 - 1800.0 * s2,
            -600000.0 * s3 - 96000.0 * s2 - 3600.0 * s};
}

} // namespace detail

/// Smooth plateau-to-cutoff weight: h = 1 on [0, beta], h = 0 on [gamma, inf),
/// C^2 in between. `dsup`/`d2sup` bound |h'| and |h''| over [0, inf).
struct ActivationProfile {
    double beta = 10.0;
    double gamma = 20.0;
    ActivationKind kind = ActivationKind::H1;
    double dsup = 0.0;
    double d2sup = 0.0;

    double width() const noexcept { return gamma - beta; }

    ActivationValue operator()(double u) const
    {
        if (!(u >= 0.0))
            throw DomainError("activation argument must be nonnegative, got " + std::to_string(u));
        return eval_unchecked(u);
    }

    /// No domain check; u must be >= 0 (callers pass squares).
    ActivationValue eval_unchecked(double u) const noexcept
    {
        if (u <= beta)
            return {1.0, 0.0, 0.0};
        if (u >= gamma)
            return {0.0, 0.0, 0.0};
        const double w = gamma - beta;
        const double t = (u - beta) / w;
        ActivationValue v;
        if (kind == ActivationKind::H1)
            v = detail::h1_interior(t);
        else if (t < 0.1)
            v = detail::h2_head(t);
        else if (t <= 0.9)
            v = detail::h2_middle(t);
        else
            v = detail::h2_tail(t);
        v.dh /= w;
        v.d2h /= w * w;
        return v;
    }

    /// Weight only; the hot path of value() needs nothing else.
    double weight(double u) const noexcept { return eval_unchecked(u).h; }
};

inline const char* to_string(ActivationKind k) noexcept { return k == ActivationKind::H1 ? "h1" : "h2"; }

namespace detail {

// Grid maximum of |f| over t in [0, 1] followed by a golden-section polish of
// the best cell, so the result is a true upper bound to ~1e-12 relative.
template <typename F>
double grid_sup(F&& f, std::size_t points)
{
    double best = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i <= points; ++i) {
        const double v = std::abs(f(static_cast<double>(i) / static_cast<double>(points)));
        if (v > best) {
            best = v;
            best_i = i;
        }
    }
    const double h = 1.0 / static_cast<double>(points);
    double lo = std::max(0.0, static_cast<double>(best_i) * h - h);
    double hi = std::min(1.0, static_cast<double>(best_i) * h + h);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
        if (std::abs(f(a)) > std::abs(f(b)))
            hi = b;
        else
            lo = a;
    }
    return std::max(best, std::abs(f(0.5 * (lo + hi))));
}

} // namespace detail

struct SupNorms {
    double dsup;
    double d2sup;
};

/// sup|h'| and sup|h''|. Closed forms for H1 (maxima at t = 1/2 and
/// t = (1 -+ 1/sqrt 3)/2) and for H2's first derivative (t = 0.06); H2's
/// second derivative comes from a dense grid.
inline SupNorms sup_norms(ActivationKind kind, double beta, double gamma)
{
    const double w = gamma - beta;
    if (kind == ActivationKind::H1)
        return {1.875 / w, (10.0 / std::sqrt(3.0)) / (w * w)};
    auto d2 = [](double t) {
        if (t < 0.1)
            return detail::h2_head(t).d2h;
        if (t <= 0.9)
            return detail::h2_middle(t).d2h;
        return detail::h2_tail(t).d2h;
    };
    const double d2_sup = std::max(detail::grid_sup([&](double t) { return t < 0.1 ? d2(t) : 0.0; }, 1'000'000),
                                   detail::grid_sup([&](double t) { return t > 0.9 ? d2(t) : 0.0; }, 1'000'000));
    return {1.512 / w, d2_sup / (w * w)};
}

inline SupNorms sup_norms(const ActivationProfile& p) { return sup_norms(p.kind, p.beta, p.gamma); }

/// Validated constructor; requires 1 < beta < gamma < inf.
inline ActivationProfile make_profile(ActivationKind kind, double beta, double gamma)
{
    if (!(beta > 1.0) || !std::isfinite(beta))
        throw DomainError("activation needs beta > 1");
    if (!(gamma > beta) || !std::isfinite(gamma))
        throw DomainError("activation needs finite gamma > beta");
    ActivationProfile p{beta, gamma, kind, 0.0, 0.0};
    const auto s = sup_norms(kind, beta, gamma);
    p.dsup = s.dsup;
    p.d2sup = s.d2sup;
    return p;
}

struct Junction {
    double location;
    double h_jump;
    double dh_jump;
    double d2h_jump;
    ActivationValue left;
    ActivationValue right;
};

/// One-sided limits at every piece boundary, each side evaluated with its
/// own piece formula exactly at the boundary.
inline std::vector<Junction> junction_report(const ActivationProfile& p)
{
    const double w = p.width();
    auto scale = [w](ActivationValue v) {
        v.dh /= w;
        v.d2h /= w * w;
        return v;
    };
    const ActivationValue plateau{1.0, 0.0, 0.0}, zero{0.0, 0.0, 0.0};
    std::vector<std::pair<ActivationValue, ActivationValue>> sides;
    std::vector<double> at;
    if (p.kind == ActivationKind::H1) {
        at = {p.beta, p.gamma};
        sides = {{plateau, scale(detail::h1_interior(0.0))}, {scale(detail::h1_interior(1.0)), zero}};
    } else {
        at = {p.beta, p.beta + 0.1 * w, p.beta + 0.9 * w, p.gamma};
        sides = {{plateau, scale(detail::h2_head(0.0))},
                 {scale(detail::h2_head(0.1)), scale(detail::h2_middle(0.1))},
                 {scale(detail::h2_middle(0.9)), scale(detail::h2_tail(0.9))},
                 {scale(detail::h2_tail(1.0)), zero}};
    }
    std::vector<Junction> out;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const auto& [l, r] = sides[i];
        out.push_back({at[i], r.h - l.h, r.dh - l.dh, r.d2h - l.d2h, l, r});
    }
    return out;
}

/// Parses "h1:beta=10,gamma=20". gamma may be omitted, in which case
/// `default_gamma_ratio * beta` is used.
inline ActivationProfile parse_profile(std::string_view spec, double default_gamma_ratio = 2.0)
{
    const auto colon = spec.find(':');
    const std::string_view head = spec.substr(0, colon);
    ActivationKind kind;
    if (head == "h1" || head == "H1")
        kind = ActivationKind::H1;
    else if (head == "h2" || head == "H2")
        kind = ActivationKind::H2;
    else
        throw DomainError("unknown activation kind '" + std::string(head) + "' (expected h1 or h2)");

    double beta = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    std::string_view rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw DomainError("profile item '" + std::string(item) + "' is not key=value");
        const std::string key(item.substr(0, eq));
        const std::string val(item.substr(eq + 1));
        char* end = nullptr;
        const double v = std::strtod(val.c_str(), &end);
        if (val.empty() || end != val.c_str() + val.size())
            throw DomainError("profile value '" + val + "' is not a number");
        if (key == "beta")
            beta = v;
        else if (key == "gamma")
            gamma = v;
        else
            throw DomainError("unknown profile key '" + key + "'");
    }
    if (std::isnan(beta))
        throw DomainError("profile spec needs beta=...");
    if (std::isnan(gamma))
        gamma = default_gamma_ratio * beta;
    return make_profile(kind, beta, gamma);
}

inline std::string format_profile(const ActivationProfile& p)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s:beta=%.17g,gamma=%.17g", to_string(p.kind), p.beta, p.gamma);
    return buf;
}

} // namespace actloss
