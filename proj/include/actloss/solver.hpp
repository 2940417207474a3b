#pragma once

#include <actloss/activation.hpp>
#include <actloss/ensemble.hpp>
#include <actloss/errors.hpp>
#include <actloss/loss.hpp>
#include <actloss/parallel.hpp>
#include <actloss/rng.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace actloss {

enum class LossKind { Vanilla, Activated };

inline const char* to_string(LossKind k) noexcept { return k == LossKind::Vanilla ? "vanilla" : "activated"; }

/// min(||z - x||, ||z + x||)
inline double dist(const Vector& z, const Vector& x)
{
    if (z.size() != x.size())
        throw DimensionError("dist: length mismatch");
    return std::min((z - x).norm(), (z + x).norm());
}

inline constexpr double kDivergenceFactor = 1e6;

struct SolveConfig {
    /// Dimensionless stepsize; the iteration uses step_scale * mu / (||y||_1/m).
    double mu = 0.2;
    std::size_t max_iters = 2500;
    double tol = 1e-3;
    LossKind loss = LossKind::Activated;
    ActivationProfile profile = make_profile(ActivationKind::H2, 10.0, 15.0);
    std::uint64_t init_seed = 0;
    /// Multiplier on the gradient of the (1/2m)-normalized losses. The
    /// default 0.5 is the 1/(4m) normalization of Wirtinger-flow codes; with
    /// 1.0 the mu = 0.3 iteration is linearly unstable at the solution.
    double step_scale = 0.5;
    bool record_trajectory = false;
    /// Forced starting point; drawn from N(0, I_n) with init_seed otherwise.
    std::optional<Vector> z0;

    void validate() const
    {
        if (!(mu > 0.0))
            throw DomainError("mu must be positive");
        if (!(tol > 0.0))
            throw DomainError("tol must be positive");
        if (!(step_scale > 0.0))
            throw DomainError("step_scale must be positive");
    }
};

struct TrialRecord {
    SolveConfig config;
    std::uint64_t ensemble_seed = 0;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t iterations_run = 0;
    /// dist(z, x) / ||x|| at the last iterate.
    double final_rel_err = 0.0;
    bool success = false;
    bool diverged = false;
    std::vector<double> trajectory;
    Vector z_final;
};

inline Vector initial_point(std::size_t n, std::uint64_t init_seed, double min_norm)
{
    for (std::uint64_t stream = 0;; ++stream) {
        CounterRng rng(RngSpec{init_seed, stream});
        Vector z(static_cast<Eigen::Index>(n));
        for (Eigen::Index j = 0; j < z.size(); ++j)
            z[j] = rng.gaussian();
        if (z.norm() >= min_norm)
            return z;
    }
}

namespace detail {

template <typename Loss>
TrialRecord run_descent(const MeasurementEnsemble& e, const Loss& loss, const SolveConfig& cfg)
{
    TrialRecord rec;
    rec.config = cfg;
    rec.ensemble_seed = e.seed();
    rec.n = e.n();
    rec.m = e.m();

    const double xnorm = e.x_norm();
    Vector z = cfg.z0 ? *cfg.z0 : initial_point(e.n(), cfg.init_seed, 2.0 * kSingularityGuard * xnorm);
    if (static_cast<std::size_t>(z.size()) != e.n())
        throw DimensionError("z0 has wrong length");
    const double step = cfg.step_scale * cfg.mu / e.y1_over_m();

    for (std::size_t it = 0;; ++it) {
        rec.iterations_run = it;
        if (!z.allFinite() || z.norm() > kDivergenceFactor * xnorm) {
            rec.diverged = true;
            rec.final_rel_err = z.allFinite() ? dist(z, e.x()) / xnorm : INFINITY;
            break;
        }
        rec.final_rel_err = dist(z, e.x()) / xnorm;
        if (cfg.record_trajectory)
            rec.trajectory.push_back(rec.final_rel_err);
        if (rec.final_rel_err <= cfg.tol) {
            rec.success = true;
            break;
        }
        if (it >= cfg.max_iters)
            break;
        try {
            z -= step * loss.gradient(z).grad;
        } catch (const SingularityError&) {
            rec.diverged = true;
            break;
        }
    }
    rec.z_final = std::move(z);
    return rec;
}

} // namespace detail

/// Gradient descent z <- z - step_scale * mu/(||y||_1/m) * grad(z) from a
/// seeded Gaussian start. Stops on success (rel. error <= tol), divergence
/// (non-finite or ||z|| > 1e6 ||x||) or max_iters.
inline TrialRecord descend(const MeasurementEnsemble& e, const SolveConfig& cfg)
{
    cfg.validate();
    if (cfg.loss == LossKind::Vanilla)
        return detail::run_descent(e, VanillaLoss(e), cfg);
    return detail::run_descent(e, ActivatedLoss(e, cfg.profile), cfg);
}

struct CurvePoint {
    double ratio = 0.0;
    std::size_t m = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double probability = 0.0;
};

/// Seeds for trial `trial` at measurement count m. They do not depend on the
/// loss or stepsize, so different configurations see the same instances.
inline std::uint64_t trial_ensemble_seed(std::uint64_t master, std::size_t m, std::size_t trial)
{
    return derive_seed(master, m, trial, 0);
}

inline std::uint64_t trial_init_seed(std::uint64_t master, std::size_t m, std::size_t trial)
{
    return derive_seed(master, m, trial, 1);
}

inline std::size_t measurements_for(std::size_t n, double ratio)
{
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
}

/// Success probability per m/n ratio over `trials` independent instances
/// (x ~ N(0, I_n)). Counts are integers, so the result does not depend on
/// how trials are scheduled.
inline std::vector<CurvePoint> success_curve(std::size_t n, const std::vector<double>& ratios, std::size_t trials,
                                             const SolveConfig& cfg, std::uint64_t master_seed,
                                             TruthMode truth = TruthMode::StandardGaussian)
{
    if (trials < 1)
        throw DomainError("success_curve: trials must be >= 1");
    cfg.validate();
    std::vector<CurvePoint> out;
    for (double ratio : ratios) {
        const std::size_t m = measurements_for(n, ratio);
        if (m < 1)
            throw DomainError("success_curve: ratio gives m = 0");
        std::vector<char> ok(trials, 0);
        parallel_for(trials, [&](std::size_t t) {
            const auto e = generate(n, m, trial_ensemble_seed(master_seed, m, t), truth);
            SolveConfig c = cfg;
            c.init_seed = trial_init_seed(master_seed, m, t);
            c.record_trajectory = false;
            ok[t] = descend(e, c).success ? 1 : 0;
        });
        CurvePoint pt{ratio, m, trials, 0, 0.0};
        for (char s : ok)
            pt.successes += static_cast<std::size_t>(s);
        pt.probability = static_cast<double>(pt.successes) / static_cast<double>(trials);
        out.push_back(pt);
    }
    return out;
}

} // namespace actloss
