#pragma once

// Experiment drivers behind the command-line tool: recovery transitions,
// region-wise theorem checks, per-term derivative quantiles and
// finite-difference reports.

#include <actloss/activation.hpp>
#include <actloss/ensemble.hpp>
#include <actloss/landscape.hpp>
#include <actloss/loss.hpp>
#include <actloss/parallel.hpp>
#include <actloss/solver.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace actloss {

// ---------------------------------------------------------------------------
// Recovery transition
// ---------------------------------------------------------------------------

/// The activation cutoff paired with each stepsize: the larger the step, the
/// more stringent the activation (gamma = 1.5 beta, H2).
inline std::optional<double> paired_beta(double mu)
{
    if (std::abs(mu - 0.1) < 1e-12)
        return 20.0;
    if (std::abs(mu - 0.2) < 1e-12)
        return 10.0;
    if (std::abs(mu - 0.3) < 1e-12)
        return 5.0;
    return std::nullopt;
}

inline ActivationProfile paired_profile(double mu)
{
    const auto beta = paired_beta(mu);
    if (!beta)
        throw DomainError("no default activation for mu = " + std::to_string(mu) + "; pass a profile");
    return make_profile(ActivationKind::H2, *beta, 1.5 * *beta);
}

struct TransitionSetting {
    LossKind loss = LossKind::Activated;
    double mu = 0.2;
    ActivationProfile profile = paired_profile(0.2);
};

struct TransitionSpec {
    std::size_t n = 128;
    std::vector<double> ratios;
    std::size_t trials = 100;
    std::vector<TransitionSetting> settings;
    std::uint64_t master_seed = 0;
    std::size_t max_iters = 2500;
    double tol = 1e-3;
    double step_scale = 0.5;
};

struct TransitionRow {
    LossKind loss;
    double mu;
    double beta;
    double gamma;
    double ratio;
    std::size_t m;
    std::size_t trials;
    std::size_t successes;
    double probability;
};

/// The three (mu, beta, gamma) triples compared side by side for the activated loss.
inline std::vector<TransitionSetting> all_paired_settings()
{
    std::vector<TransitionSetting> out;
    for (double mu : {0.1, 0.2, 0.3})
        out.push_back({LossKind::Activated, mu, paired_profile(mu)});
    return out;
}

inline void validate(const TransitionSpec& spec)
{
    if (spec.n < 1)
        throw DomainError("n must be >= 1");
    if (spec.trials < 1)
        throw DomainError("trials must be >= 1");
    if (spec.ratios.empty())
        throw DomainError("at least one ratio is required");
    for (double r : spec.ratios)
        if (!(r >= 1.0 && r <= 20.0))
            throw DomainError("ratio " + std::to_string(r) + " outside [1, 20]");
    if (spec.settings.empty())
        throw DomainError("no loss settings given");
}

/// One row per (setting, ratio), settings in the given order.
inline std::vector<TransitionRow> run_transition(const TransitionSpec& spec)
{
    validate(spec);
    std::vector<TransitionRow> rows;
    for (const auto& s : spec.settings) {
        SolveConfig cfg;
        cfg.mu = s.mu;
        cfg.loss = s.loss;
        cfg.profile = s.profile;
        cfg.max_iters = spec.max_iters;
        cfg.tol = spec.tol;
        cfg.step_scale = spec.step_scale;
        for (const auto& pt : success_curve(spec.n, spec.ratios, spec.trials, cfg, spec.master_seed)) {
            const bool act = s.loss == LossKind::Activated;
            rows.push_back({s.loss, s.mu, act ? s.profile.beta : NAN, act ? s.profile.gamma : NAN, pt.ratio, pt.m,
                            pt.trials, pt.successes, pt.probability});
        }
    }
    return rows;
}

/// "4:10:0.5" (inclusive range) or "4,6,8" or "6".
inline std::vector<double> parse_ratios(const std::string& text)
{
    auto number = [](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size())
            throw DomainError("bad ratio '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (const auto c1 = text.find(':'); c1 != std::string::npos) {
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw DomainError("ratio range must be lo:hi:step");
        const double lo = number(text.substr(0, c1));
        const double hi = number(text.substr(c1 + 1, c2 - c1 - 1));
        const double step = number(text.substr(c2 + 1));
        if (!(step > 0.0) || hi < lo)
            throw DomainError("bad ratio range '" + text + "'");
        const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(lo + static_cast<double>(i) * step);
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        out.push_back(number(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-term derivative quantiles (n = 1)
// ---------------------------------------------------------------------------

/// Linear-interpolation quantile of sorted data at probability prob in [0, 1].
inline double quantile_sorted(const std::vector<double>& sorted, double prob)
{
    if (sorted.empty())
        throw DomainError("quantile of empty sample");
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Population excess kurtosis m4/m2^2 - 3 (0 for a constant sample).
inline double excess_kurtosis(const std::vector<double>& v)
{
    const auto n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double a : v)
        mean += a;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double a : v) {
        const double d = (a - mean) * (a - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    return m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
}

struct QqColumns {
    std::vector<double> vanilla_d1, activated_d1, vanilla_d2, activated_d2;
};

inline QqColumns split_columns(const std::vector<PerTermSample>& samples)
{
    QqColumns c;
    for (const auto& s : samples) {
        c.vanilla_d1.push_back(s.d1_vanilla);
        c.activated_d1.push_back(s.d1_activated);
        c.vanilla_d2.push_back(s.d2_vanilla);
        c.activated_d2.push_back(s.d2_activated);
    }
    return c;
}

struct QqTable {
    std::vector<double> probability;
    QqColumns quantiles;
    QqColumns sorted;
    /// Excess kurtosis of vanilla_d1, activated_d1, vanilla_d2, activated_d2.
    double kurtosis[4];
};

/// Sorted per-term derivatives of both losses, evaluated at `points`
/// evenly spaced probabilities i/(points-1).
inline QqTable qq_table(double x, double z, std::size_t samples, const ActivationProfile& h, std::uint64_t seed,
                        std::size_t points = 1024)
{
    if (points < 2)
        throw DomainError("qq: need at least two quantile points");
    QqTable t;
    auto cols = split_columns(per_term_samples(x, z, samples, h, seed));
    t.kurtosis[0] = excess_kurtosis(cols.vanilla_d1);
    t.kurtosis[1] = excess_kurtosis(cols.activated_d1);
    t.kurtosis[2] = excess_kurtosis(cols.vanilla_d2);
    t.kurtosis[3] = excess_kurtosis(cols.activated_d2);
    for (auto* v : {&cols.vanilla_d1, &cols.activated_d1, &cols.vanilla_d2, &cols.activated_d2})
        std::sort(v->begin(), v->end());
    for (std::size_t i = 0; i < points; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(points - 1);
        t.probability.push_back(p);
        t.quantiles.vanilla_d1.push_back(quantile_sorted(cols.vanilla_d1, p));
        t.quantiles.activated_d1.push_back(quantile_sorted(cols.activated_d1, p));
        t.quantiles.vanilla_d2.push_back(quantile_sorted(cols.vanilla_d2, p));
        t.quantiles.activated_d2.push_back(quantile_sorted(cols.activated_d2, p));
    }
    t.sorted = std::move(cols);
    return t;
}

// ---------------------------------------------------------------------------
// Finite-difference report
// ---------------------------------------------------------------------------

struct FdRegionReport {
    Region region;
    std::size_t points;
    double max_rel_grad_err;
    double max_rel_hess_err;
};

/// fd_check at `points` sampled locations per region.
inline std::vector<FdRegionReport> fd_report(const MeasurementEnsemble& e, const ActivationProfile& h,
                                             const std::vector<Region>& regions, std::size_t points, double eps,
                                             double delta, std::uint64_t sampler_seed)
{
    const ActivatedLoss loss(e, h);
    std::vector<FdRegionReport> out;
    for (std::size_t ri = 0; ri < regions.size(); ++ri) {
        std::vector<FdReport> reps(points);
        parallel_for(points, [&](std::size_t i) {
            CounterRng rng(RngSpec{derive_seed(sampler_seed, ri), i});
            reps[i] = fd_check(loss, sample_point(regions[ri], e.x(), delta, rng), eps);
        });
        FdRegionReport r{regions[ri], points, 0.0, 0.0};
        for (const auto& f : reps) {
            r.max_rel_grad_err = std::max(r.max_rel_grad_err, f.max_rel_grad_err);
            r.max_rel_hess_err = std::max(r.max_rel_hess_err, f.max_rel_hess_err);
        }
        out.push_back(r);
    }
    return out;
}

struct ScalarFdRow {
    double z;
    double d1_formula, d1_fd;
    double d2_formula, d2_fd;
    double rel_err_d1, rel_err_d2;
};

/// Scalar problem: f'(z), f''(z) by formula against the first and second
/// central differences of f, at z drawn uniformly from [0, 10].
inline std::vector<ScalarFdRow> scalar_fd_table(const MeasurementEnsemble& e, const ActivationProfile& h,
                                                std::size_t points, double eps, std::uint64_t seed)
{
    if (e.n() != 1)
        throw DimensionError("scalar_fd_table requires n = 1");
    const ActivatedLoss loss(e, h);
    CounterRng rng(seed);
    const Vector one = Vector::Ones(1);
    std::vector<ScalarFdRow> rows;
    for (std::size_t i = 0; i < points; ++i) {
        double zv = 0.0;
        while (zv == 0.0)
            zv = rng.uniform(0.0, 10.0);
        const Vector z = Vector::Constant(1, zv);
        const auto ev = loss.hessian(z);
        ScalarFdRow r{zv, ev.grad[0], central_first_difference(loss, z, one, eps), (*ev.hess)(0, 0),
                      central_second_difference(loss, z, one, eps), 0.0, 0.0};
        r.rel_err_d1 = std::abs(r.d1_fd - r.d1_formula) / std::max(std::abs(r.d1_formula), 1.0);
        r.rel_err_d2 = std::abs(r.d2_fd - r.d2_formula) / std::max(std::abs(r.d2_formula), 1.0);
        rows.push_back(r);
    }
    return rows;
}

} // namespace actloss
