// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: actloss_acceptance [criterion numbers...]   (default: all)

#include <actloss/csv.hpp>
#include <actloss/experiments.hpp>
#include <actloss/jacobi.hpp>
#include <actloss/landscape.hpp>
#include <actloss/loss.hpp>
#include <actloss/solver.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace actloss;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string f(double v, int digits = 4) { return fmt_num(v, digits); }

const std::vector<Region> kFive{Region::R1, Region::R2a, Region::R2b, Region::R2c, Region::R3};

Vector gaussian_vector(std::size_t n, CounterRng& rng)
{
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < v.size(); ++j)
        v[j] = rng.gaussian();
    return v;
}

Outcome ac1()
{
    const auto t0 = Clock::now();
    const auto e = generate(8, 64, 0, TruthMode::StandardGaussian);
    const auto h = make_profile(ActivationKind::H1, 10, 20);
    const auto rep = fd_report(e, h, kFive, 50, 1e-5, kDefaultDelta, 1);
    double g = 0, H = 0;
    for (const auto& r : rep) {
        g = std::max(g, r.max_rel_grad_err);
        H = std::max(H, r.max_rel_hess_err);
    }
    const double secs = seconds_since(t0);
    return {g <= 1e-5 && H <= 1e-4 && secs < 30,
            "250 points: max grad err " + f(g, 3) + " (<= 1e-5), max hess err " + f(H, 3) + " (<= 1e-4), "
                + f(secs, 3) + " s (< 30)"};
}

Outcome ac2()
{
    // Profiles with low cutoffs so that h' terms are active at many points.
    const std::vector<ActivationProfile> profiles{make_profile(ActivationKind::H1, 10, 20),
                                                  make_profile(ActivationKind::H1, 2, 4),
                                                  make_profile(ActivationKind::H2, 1.5, 3)};
    double worst = 0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto e = generate(8, 64, derive_seed(2, i), TruthMode::StandardGaussian);
        const ActivatedLoss loss(e, profiles[i % profiles.size()]);
        CounterRng rng(RngSpec{3, i});
        const Vector z = rng.uniform(0.1, 2.0) * gaussian_vector(8, rng);
        const double a = z.dot(loss.gradient(z).grad);
        const double b = loss.radial_derivative(z);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
        for (const auto& t : loss.terms(z, false))
            if (t.grad_z != 0.0) {
                ++active;
                break;
            }
    }
    return {worst <= 1e-10, "1000 points (" + std::to_string(active) + " with h' terms): max rel diff "
                                + f(worst, 3) + " (<= 1e-10)"};
}

struct RegionRun {
    RegionSummary sum;
    double secs;
};

RegionRun table_setup_region(Region r, std::size_t count)
{
    const auto t0 = Clock::now();
    const auto e = generate(128, 768, 0, TruthMode::Ones);
    auto sum = sample_region(e, make_profile(ActivationKind::H1, 10, 20), r, count, 0.01, 1);
    return {std::move(sum), seconds_since(t0)};
}

Outcome ac3()
{
    const auto run = table_setup_region(Region::R1, 100);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& rep : run.sum.reports) {
        lo = std::min(lo, rep.checks[0].computed);
        hi = std::max(hi, rep.checks[0].computed);
    }
    return {run.sum.pass_fraction >= 0.95 && run.secs < 300,
            std::to_string(run.sum.passed) + "/100 with lambda_min >= 5.12 (need >= 95%), range [" + f(lo) + ", "
                + f(hi) + "], " + f(run.secs, 3) + " s (< 300)"};
}

Outcome ac4()
{
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (Region r : {Region::R2b, Region::R2c, Region::R3}) {
        const auto run = table_setup_region(r, 100);
        ok = ok && run.sum.pass_fraction >= 0.95;
        detail += std::string(to_string(r)) + " " + std::to_string(run.sum.passed) + "/100, ";
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 120, detail + "need >= 95% each, " + f(secs, 3) + " s (< 120)"};
}

Outcome ac5()
{
    const auto t0 = Clock::now();
    const auto e = generate(64, 1280, 0, TruthMode::Ones);
    const auto sum = sample_region(e, make_profile(ActivationKind::H1, 10, 20), Region::R2aSub, 50, 0.01, 1);
    const double secs = seconds_since(t0);
    const std::size_t xhx = sum.check_passed.at(0), zhz = sum.check_passed.at(1);
    return {xhx >= 45 && zhz >= 45 && secs < 180,
            "xHx <= -3|x|^4: " + std::to_string(xhx) + "/50, zHz >= |x|^4: " + std::to_string(zhz)
                + "/50 (need >= 90% each), " + f(secs, 3) + " s (< 180)"};
}

Outcome ac6()
{
    const auto t0 = Clock::now();
    SolveConfig act;
    act.loss = LossKind::Activated;
    act.mu = 0.3;
    act.profile = make_profile(ActivationKind::H2, 5, 7.5);
    SolveConfig van = act;
    van.loss = LossKind::Vanilla;
    const auto pa = success_curve(128, {6.0}, 100, act, 0).at(0);
    const auto pv = success_curve(128, {10.0}, 100, van, 0).at(0);
    const double secs = seconds_since(t0);
    return {pa.probability > 0.8 && pv.probability < 0.2 && secs < 900,
            "activated m=6n: " + f(pa.probability) + " (> 0.8), vanilla m=10n: " + f(pv.probability) + " (< 0.2), "
                + f(secs, 3) + " s (< 900)"};
}

Outcome ac7()
{
    const auto t0 = Clock::now();
    std::vector<double> ratios;
    for (int i = 0; i <= 12; ++i)
        ratios.push_back(4.0 + 0.5 * i);
    SolveConfig act;
    act.loss = LossKind::Activated;
    act.mu = 0.1;
    act.profile = make_profile(ActivationKind::H2, 20, 30);
    SolveConfig van = act;
    van.loss = LossKind::Vanilla;
    const auto ca = success_curve(128, ratios, 50, act, 0);
    const auto cv = success_curve(128, ratios, 50, van, 0);
    double worst = 0;
    std::ostringstream pts;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        worst = std::max(worst, std::abs(ca[i].probability - cv[i].probability));
        pts << (i ? " " : "") << ca[i].successes << "/" << cv[i].successes;
    }
    const double secs = seconds_since(t0);
    return {worst <= 0.15 && secs < 1800, "max |diff| " + f(worst) + " (<= 0.15); successes act/van per ratio: "
                                              + pts.str() + "; " + f(secs, 3) + " s (< 1800)"};
}

Outcome ac8()
{
    const auto t0 = Clock::now();
    const auto t = qq_table(1, 2, 100000, make_profile(ActivationKind::H1, 10, 20), 0);
    auto q999 = [](const std::vector<double>& s) { return std::abs(quantile_sorted(s, 0.999)); };
    const double qv1 = q999(t.sorted.vanilla_d1), qa1 = q999(t.sorted.activated_d1);
    const double qv2 = q999(t.sorted.vanilla_d2), qa2 = q999(t.sorted.activated_d2);
    const double secs = seconds_since(t0);
    const bool ok = t.kurtosis[1] < t.kurtosis[0] && t.kurtosis[3] < t.kurtosis[2] && qa1 < qv1 && qa2 < qv2
        && secs < 10;
    return {ok, "kurtosis d1 " + f(t.kurtosis[1]) + " < " + f(t.kurtosis[0]) + ", d2 " + f(t.kurtosis[3]) + " < "
                    + f(t.kurtosis[2]) + "; |q99.9| d1 " + f(qa1) + " < " + f(qv1) + ", d2 " + f(qa2) + " < "
                    + f(qv2) + "; " + f(secs, 3) + " s (< 10)"};
}

Outcome ac9()
{
    std::vector<std::string> failed;

    double jump = 0;
    for (auto kind : {ActivationKind::H1, ActivationKind::H2})
        for (double beta : {2.0, 5.0, 10.0, 20.0})
            for (double ratio : {1.5, 2.0})
                for (const auto& j : junction_report(make_profile(kind, beta, ratio * beta)))
                    jump = std::max({jump, std::abs(j.h_jump), std::abs(j.dh_jump), std::abs(j.d2h_jump)});
    if (jump > 1e-10)
        failed.push_back("junction");

    bool symmetric = true;
    double asym = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto e = generate(8, 64, derive_seed(9, s), TruthMode::StandardGaussian);
        const ActivatedLoss loss(e, s % 2 ? make_profile(ActivationKind::H1, 3, 6) : make_profile(ActivationKind::H2, 2, 3));
        CounterRng rng(RngSpec{10, s});
        const Vector z = gaussian_vector(8, rng);
        const auto a = loss.hessian(z), b = loss.hessian(Vector(-z));
        symmetric = symmetric && a.value == b.value && a.grad == Vector(-b.grad) && *a.hess == *b.hess;
        asym = std::max({asym, a.hess_asymmetry, b.hess_asymmetry});
    }
    if (!symmetric)
        failed.push_back("sign symmetry");
    if (asym > 1e-9)
        failed.push_back("hessian asymmetry");

    double plateau = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto e = generate(6, 48, derive_seed(11, s), TruthMode::StandardGaussian);
        double amax = 48;
        for (Eigen::Index k = 0; k < e.A().rows(); ++k)
            amax = std::max(amax, e.A().row(k).squaredNorm());
        const ActivatedLoss act(e, make_profile(ActivationKind::H1, 2 * amax, 3 * amax));
        const VanillaLoss van(e);
        CounterRng rng(RngSpec{12, s});
        const Vector z = gaussian_vector(6, rng);
        const auto a = act.hessian(z), v = van.hessian(z);
        plateau = std::max({plateau, std::abs(a.value - v.value) / v.value,
                            (a.grad - v.grad).cwiseAbs().maxCoeff() / v.grad.cwiseAbs().maxCoeff(),
                            (*a.hess - *v.hess).cwiseAbs().maxCoeff() / v.hess->cwiseAbs().maxCoeff()});
    }
    if (plateau > 1e-12)
        failed.push_back("plateau reduction");

    CounterRng mrng(13);
    const Vector u = gaussian_vector(5, mrng), v = gaussian_vector(5, mrng);
    const auto mc = moment_identity_check(u, v, 1000000, 14);
    if (mc.rel_err > 0.02)
        failed.push_back("moment identity");

    std::size_t bad = 0;
    CounterRng prng(15);
    for (int i = 0; i < 10000; ++i) {
        const auto n = 1 + prng.next_u64() % 8;
        const Vector x = gaussian_vector(n, prng);
        const Vector z = prng.uniform(0.01, 2.0) * gaussian_vector(n, prng);
        const auto lab = classify(z, x, prng.uniform_open0() * 0.01);
        int hits = 0;
        for (Region r : {Region::R1, Region::R2a, Region::R2b, Region::R2c, Region::R3, Region::Undefined})
            hits += lab.is(r);
        bad += hits != 1 || lab.region == Region::Undefined;
    }
    if (bad)
        failed.push_back("partition");

    std::string detail = "junction jump " + f(jump, 2) + ", sign symmetry " + (symmetric ? "exact" : "broken")
        + ", asymmetry " + f(asym, 2) + ", plateau " + f(plateau, 2) + ", moment rel err " + f(mc.rel_err, 2)
        + ", partition violations " + std::to_string(bad);
    if (!failed.empty()) {
        detail += "; failed:";
        for (const auto& s : failed)
            detail += " " + s;
    }
    return {failed.empty(), detail};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 analytic vs finite differences (n=8, m=64, 5 regions x 50)", ac1},
        {"AC2 radial derivative identity (1000 points)", ac2},
        {"AC3 R1 curvature bound (n=128, m=768, 100 samples)", ac3},
        {"AC4 R2b/R2c/R3 radial bounds (100 samples each)", ac4},
        {"AC5 R2aSub curvature (n=64, m=1280, 50 samples)", ac5},
        {"AC6 recovery: activated m=6n > 0.8, vanilla m=10n < 0.2", ac6},
        {"AC7 mu=0.1 activated vs vanilla curves within 0.15", ac7},
        {"AC8 per-term derivative tails (m=1e5)", ac8},
        {"AC9 property suites", ac9},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(static_cast<int>(i + 1)))
            continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures ? 1 : 0;
}
