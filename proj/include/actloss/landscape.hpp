#pragma once

#include <actloss/activation.hpp>
#include <actloss/ensemble.hpp>
#include <actloss/errors.hpp>
#include <actloss/jacobi.hpp>
#include <actloss/loss.hpp>
#include <actloss/parallel.hpp>
#include <actloss/rng.hpp>
#include <actloss/solver.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace actloss {

// Partition of R^n relative to the truth x, with t = ||z||^2/||x||^2,
// d = dist(z, x)/||x||, c = |z^T x|/||x||^2:
//   R1      d <= 1/5
//   R2a     1/3 - delta < t < 99/100,  d > 1/5
//   R2b     99/100 <= t <= 101/100,   d > 1/5
//   R2c     t > 101/100,              d > 1/5
//   R3      0 < t <= 1/3 - delta
// and the subregion R2aSub of R2a: 1/3 - delta < t < 1/3 + delta, c < delta.
enum class Region { R1, R2a, R2aSub, R2b, R2c, R3, Undefined };

inline constexpr double kDefaultDelta = 0.01;

inline const char* to_string(Region r) noexcept
{
    switch (r) {
    case Region::R1: return "R1";
    case Region::R2a: return "R2a";
    case Region::R2aSub: return "R2aSub";
    case Region::R2b: return "R2b";
    case Region::R2c: return "R2c";
    case Region::R3: return "R3";
    case Region::Undefined: break;
    }
    return "Undefined";
}

inline std::optional<Region> parse_region(std::string_view s)
{
    for (Region r : {Region::R1, Region::R2a, Region::R2aSub, Region::R2b, Region::R2c, Region::R3})
        if (s == to_string(r))
            return r;
    return std::nullopt;
}

struct RegionLabel {
    /// One of R1, R2a, R2b, R2c, R3, Undefined; never R2aSub.
    Region region = Region::Undefined;
    /// Inside the R2a subregion.
    bool sub = false;
    double t = 0.0;
    double d = 0.0;
    double c = 0.0;

    bool is(Region r) const noexcept
    {
        if (r == Region::R2aSub)
            return sub;
        return region == r;
    }
    /// The most specific label.
    Region finest() const noexcept { return sub ? Region::R2aSub : region; }
};

inline RegionLabel classify(const Vector& z, const Vector& x, double delta = kDefaultDelta)
{
    if (!(delta > 0.0 && delta <= 0.01))
        throw DomainError("classify: delta must lie in (0, 1/100]");
    if (z.size() != x.size())
        throw DimensionError("classify: length mismatch");
    const double xx = x.squaredNorm();
    if (!(xx > 0.0))
        throw DomainError("classify: x must be nonzero");
    RegionLabel lab;
    const double zz = z.squaredNorm();
    if (zz == 0.0)
        return lab;
    lab.t = zz / xx;
    lab.d = dist(z, x) / std::sqrt(xx);
    lab.c = std::abs(z.dot(x)) / xx;

    const double lo = 1.0 / 3.0 - delta;
    if (lab.d <= 1.0 / 5.0)
        lab.region = Region::R1;
    else if (lab.t <= lo)
        lab.region = Region::R3;
    else if (lab.t < 99.0 / 100.0)
        lab.region = Region::R2a;
    else if (lab.t <= 101.0 / 100.0)
        lab.region = Region::R2b;
    else
        lab.region = Region::R2c;
    lab.sub = lab.region == Region::R2a && lab.t < 1.0 / 3.0 + delta && lab.c < delta;
    return lab;
}

// ---------------------------------------------------------------------------
// Pointwise theorem checks
// ---------------------------------------------------------------------------

struct BoundCheck {
    std::string quantity;
    double computed = 0.0;
    double bound = 0.0;
    /// true: computed must be <= bound; false: computed must be >= bound.
    bool upper = false;
    bool satisfied = false;
    /// Signed slack, positive when satisfied.
    double margin = 0.0;
};

inline BoundCheck make_check(std::string quantity, double computed, double bound, bool upper)
{
    const double margin = upper ? bound - computed : computed - bound;
    return {std::move(quantity), computed, bound, upper, margin >= 0.0, margin};
}

struct TheoremReport {
    RegionLabel label;
    std::vector<BoundCheck> checks;
    /// false for R2a points outside the subregion: no pointwise bound applies.
    bool has_bound = false;
    bool satisfied = true;
    Vector z;
    std::uint64_t ensemble_seed = 0;
    std::size_t n = 0;
    std::size_t m = 0;
};

/// Evaluates the inequality that governs z's region:
///   R1      lambda_min(Hess f) >= ||x||^2/25
///   R2aSub  x^T Hess f x <= -3||x||^4  and  z^T Hess f z >= ||x||^4
///   R2b     z^T grad f >= (9/1000)||x||^4
///   R2c     z^T grad f >= (49/1000)||z||^4
///   R3      z^T grad f <= -5 delta ||z||^2 ||x||^2
inline TheoremReport verify_point(const ActivatedLoss& loss, const Vector& z, double delta = kDefaultDelta,
                                  std::size_t hessian_cap = kDefaultHessianCap)
{
    const auto& e = loss.ensemble();
    TheoremReport rep;
    rep.label = classify(z, e.x(), delta);
    rep.z = z;
    rep.ensemble_seed = e.seed();
    rep.n = e.n();
    rep.m = e.m();
    const double xx = e.x().squaredNorm();
    const double zz = z.squaredNorm();

    switch (rep.label.finest()) {
    case Region::Undefined:
        throw DomainError("verify_point: z = 0 is not in any region");
    case Region::R1: {
        const auto H = loss.hessian(z, hessian_cap);
        rep.checks.push_back(make_check("lambda_min", min_eigenvalue(*H.hess), xx / 25.0, false));
        break;
    }
    case Region::R2aSub: {
        const auto H = loss.hessian(z, hessian_cap);
        const Matrix& h = *H.hess;
        rep.checks.push_back(make_check("xHx", e.x().dot(h * e.x()), -3.0 * xx * xx, true));
        rep.checks.push_back(make_check("zHz", z.dot(h * z), xx * xx, false));
        break;
    }
    case Region::R2b:
        rep.checks.push_back(make_check("z.grad", loss.radial_derivative(z), 9.0 / 1000.0 * xx * xx, false));
        break;
    case Region::R2c:
        rep.checks.push_back(make_check("z.grad", loss.radial_derivative(z), 49.0 / 1000.0 * zz * zz, false));
        break;
    case Region::R3:
        rep.checks.push_back(make_check("z.grad", loss.radial_derivative(z), -5.0 * delta * zz * xx, true));
        break;
    case Region::R2a:
        break;
    }
    rep.has_bound = !rep.checks.empty();
    rep.satisfied = std::all_of(rep.checks.begin(), rep.checks.end(), [](const BoundCheck& c) { return c.satisfied; });
    return rep;
}

inline TheoremReport verify_point(const MeasurementEnsemble& e, const ActivationProfile& h, const Vector& z,
                                  double delta = kDefaultDelta)
{
    return verify_point(ActivatedLoss(e, h), z, delta);
}

// ---------------------------------------------------------------------------
// Region sampling
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxRejections = 1'000'000;

/// Upper limit of ||z|| / ||x|| when sampling R2c.
inline constexpr double kR2cRadiusClip = 2.0;

namespace detail {

inline Vector unit_direction(std::size_t n, CounterRng& rng)
{
    Vector u(static_cast<Eigen::Index>(n));
    for (;;) {
        for (Eigen::Index j = 0; j < u.size(); ++j)
            u[j] = rng.gaussian();
        const double nu = u.norm();
        if (nu > 0.0)
            return u / nu;
    }
}

// Candidate draw before the membership test: a uniform direction and a
// radius (or overlap) parameter uniform over the region's range.
inline Vector propose(Region region, const Vector& x, double delta, CounterRng& rng)
{
    const auto n = static_cast<std::size_t>(x.size());
    const double xn = x.norm();
    auto on_shell = [&](double t) { return Vector(std::sqrt(t) * xn * unit_direction(n, rng)); };
    const double lo = 1.0 / 3.0 - delta;
    switch (region) {
    case Region::R1: {
        const double rho = rng.uniform(0.0, 1.0 / 5.0);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        return Vector(sign * x + rho * xn * unit_direction(n, rng));
    }
    case Region::R2a:
        return on_shell(rng.uniform(lo, 99.0 / 100.0));
    case Region::R2aSub: {
        const double t = rng.uniform(lo, 1.0 / 3.0 + delta);
        const double overlap = rng.uniform(-delta, delta);
        const Vector xhat = x / xn;
        Vector w = unit_direction(n, rng);
        w -= w.dot(xhat) * xhat;
        const double wn = w.norm();
        if (!(wn > 0.0) || overlap * overlap >= t)
            return Vector(Vector::Zero(x.size()));
        return Vector(xn * (overlap * xhat + std::sqrt(t - overlap * overlap) * (w / wn)));
    }
    case Region::R2b:
        return on_shell(rng.uniform(99.0 / 100.0, 101.0 / 100.0));
    case Region::R2c:
        return on_shell(rng.uniform(101.0 / 100.0, kR2cRadiusClip * kR2cRadiusClip));
    case Region::R3:
        return on_shell(rng.uniform(0.0, lo));
    case Region::Undefined:
        break;
    }
    throw DomainError("cannot sample the undefined region");
}

} // namespace detail

/// Draws one z from `region` by proposal + rejection on the exact
/// membership predicate. R2c is intersected with ||z|| <= 2||x||.
inline Vector sample_point(Region region, const Vector& x, double delta, CounterRng& rng)
{
    for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
        Vector z = detail::propose(region, x, delta, rng);
        if (z.squaredNorm() == 0.0)
            continue;
        const auto lab = classify(z, x, delta);
        bool ok = lab.is(region);
        if (region == Region::R2c)
            ok = ok && z.norm() <= kR2cRadiusClip * x.norm();
        if (ok)
            return z;
    }
    throw std::runtime_error(std::string("sampler failed to hit region ") + to_string(region) + " after "
                             + std::to_string(kMaxRejections) + " attempts");
}

struct RegionSummary {
    Region region = Region::Undefined;
    std::size_t count = 0;
    std::size_t passed = 0;
    double pass_fraction = 0.0;
    /// Smallest signed slack over all checks and samples.
    double min_margin = std::numeric_limits<double>::infinity();
    /// Per-check pass counts, in the order of TheoremReport::checks.
    std::vector<std::size_t> check_passed;
    std::vector<TheoremReport> reports;
};

/// Samples `count` points from `region` (sample i uses stream i of
/// sampler_seed) and checks each with verify_point.
inline RegionSummary sample_region(const MeasurementEnsemble& e, const ActivationProfile& h, Region region,
                                   std::size_t count, double delta = kDefaultDelta, std::uint64_t sampler_seed = 0)
{
    if (region == Region::Undefined)
        throw DomainError("sample_region: Undefined is not a region");
    if (count < 1)
        throw DomainError("sample_region: count must be >= 1");
    const ActivatedLoss loss(e, h);
    RegionSummary sum;
    sum.region = region;
    sum.count = count;
    sum.reports.resize(count);
    parallel_for(count, [&](std::size_t i) {
        CounterRng rng(RngSpec{sampler_seed, i});
        const Vector z = sample_point(region, e.x(), delta, rng);
        sum.reports[i] = verify_point(loss, z, delta);
    });
    for (const auto& r : sum.reports) {
        if (sum.check_passed.size() < r.checks.size())
            sum.check_passed.resize(r.checks.size(), 0);
        for (std::size_t c = 0; c < r.checks.size(); ++c) {
            sum.check_passed[c] += r.checks[c].satisfied ? 1 : 0;
            sum.min_margin = std::min(sum.min_margin, r.checks[c].margin);
        }
        sum.passed += r.satisfied ? 1 : 0;
    }
    sum.pass_fraction = static_cast<double>(sum.passed) / static_cast<double>(count);
    return sum;
}

// ---------------------------------------------------------------------------
// Gaussian moment identity E[(a^T u)^2 (a^T v)^2] = ||u||^2 ||v||^2 + 2 (u^T v)^2
// ---------------------------------------------------------------------------

struct MomentCheck {
    double empirical;
    double analytic;
    double rel_err;
};

inline MomentCheck moment_identity_check(const Vector& u, const Vector& v, std::size_t samples, std::uint64_t seed)
{
    if (u.size() != v.size())
        throw DimensionError("moment_identity_check: length mismatch");
    if (!(u.norm() > 0.0) || !(v.norm() > 0.0))
        throw DomainError("moment_identity_check: u and v must be nonzero");
    if (samples < 1)
        throw DomainError("moment_identity_check: samples must be >= 1");
    CounterRng rng(seed);
    Vector a(u.size());
    std::vector<double> terms(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        for (Eigen::Index j = 0; j < a.size(); ++j)
            a[j] = rng.gaussian();
        const double au = a.dot(u), av = a.dot(v);
        terms[s] = au * au * av * av;
    }
    const double empirical = pairwise_sum(samples, [&](std::size_t s) { return terms[s]; }) / static_cast<double>(samples);
    const double uv = u.dot(v);
    const double analytic = u.squaredNorm() * v.squaredNorm() + 2.0 * uv * uv;
    return {empirical, analytic, std::abs(empirical - analytic) / analytic};
}

} // namespace actloss
