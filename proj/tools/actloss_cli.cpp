// actloss: command-line driver for the activated quadratic loss experiments.
//
// Exit codes: 0 success, 1 a checked bound or tolerance was violated,
// 2 usage, validation or I/O error.

#include <actloss/activation.hpp>
#include <actloss/csv.hpp>
#include <actloss/ensemble.hpp>
#include <actloss/experiments.hpp>
#include <actloss/landscape.hpp>
#include <actloss/loss.hpp>
#include <actloss/solver.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace actloss;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes to a file when a path is given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_)
                throw UsageError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

const std::map<std::string, TruthMode> kTruthModes{{"gaussian", TruthMode::StandardGaussian},
                                                   {"ones", TruthMode::Ones}};
const std::map<std::string, LossKind> kLossKinds{{"vanilla", LossKind::Vanilla}, {"activated", LossKind::Activated}};

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::size_t n = 0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
    TruthMode truth = TruthMode::StandardGaussian;
    std::string out;
    bool text = false;
};

int cmd_generate(const GenerateArgs& a)
{
    if (a.n < 1 || a.m < 1)
        throw UsageError("generate: -n and -m must be positive");
    const auto e = generate(a.n, a.m, a.seed, a.truth);
    save(e, a.out, a.text ? EnsembleFormat::Text : EnsembleFormat::Binary);
    std::cout << "n=" << e.n() << " m=" << e.m() << " seed=" << e.seed() << " y1_over_m=" << fmt_num(e.y1_over_m())
              << " -> " << a.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::size_t n = 128;
    std::size_t m = 0;
    double ratio = 6.0;
    std::uint64_t seed = 0;
    std::string ensemble;
    TruthMode truth = TruthMode::StandardGaussian;
    LossKind loss = LossKind::Activated;
    double mu = 0.2;
    std::string profile;
    std::uint64_t init_seed = 1;
    std::size_t max_iters = 2500;
    double tol = 1e-3;
    double step_scale = 0.5;
    std::string out;
};

ActivationProfile profile_or_paired(const std::string& spec, double mu)
{
    return spec.empty() ? paired_profile(mu) : parse_profile(spec, 1.5);
}

int cmd_solve(const SolveArgs& a)
{
    MeasurementEnsemble e;
    if (!a.ensemble.empty()) {
        e = load(a.ensemble);
    } else {
        const std::size_t m = a.m ? a.m : measurements_for(a.n, a.ratio);
        if (a.n < 1 || m < 1)
            throw UsageError("solve: n and m must be positive");
        e = generate(a.n, m, a.seed, a.truth);
    }
    SolveConfig cfg;
    cfg.mu = a.mu;
    cfg.loss = a.loss;
    if (a.loss == LossKind::Activated)
        cfg.profile = profile_or_paired(a.profile, a.mu);
    cfg.init_seed = a.init_seed;
    cfg.max_iters = a.max_iters;
    cfg.tol = a.tol;
    cfg.step_scale = a.step_scale;
    const auto rec = descend(e, cfg);

    Output out(a.out);
    CsvWriter csv(out.stream());
    csv.row({"seed", "n", "m", "loss_kind", "mu", "beta", "gamma", "iterations", "final_rel_err", "success",
             "diverged"});
    const bool act = a.loss == LossKind::Activated;
    csv.row({std::to_string(e.seed()), std::to_string(e.n()), std::to_string(e.m()), to_string(a.loss),
             fmt_num(a.mu), act ? fmt_num(cfg.profile.beta) : "", act ? fmt_num(cfg.profile.gamma) : "",
             std::to_string(rec.iterations_run), fmt_num(rec.final_rel_err), fmt_bool(rec.success),
             fmt_bool(rec.diverged)});
    return rec.success ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

struct TransitionArgs {
    std::size_t n = 128;
    std::string ratios = "4:10:0.5";
    std::size_t trials = 100;
    std::string loss = "both";
    double mu = 0.2;
    std::string profile;
    bool all_triples = false;
    std::uint64_t seed = 0;
    std::size_t max_iters = 2500;
    double tol = 1e-3;
    double step_scale = 0.5;
    std::string out;
    std::string format = "csv";
};

int cmd_transition(const TransitionArgs& a)
{
    TransitionSpec spec;
    spec.n = a.n;
    spec.ratios = parse_ratios(a.ratios);
    spec.trials = a.trials;
    spec.master_seed = a.seed;
    spec.max_iters = a.max_iters;
    spec.tol = a.tol;
    spec.step_scale = a.step_scale;
    if (a.all_triples) {
        spec.settings = all_paired_settings();
    } else {
        if (a.loss == "vanilla" || a.loss == "both")
            spec.settings.push_back({LossKind::Vanilla, a.mu, make_profile(ActivationKind::H2, 10.0, 15.0)});
        if (a.loss == "activated" || a.loss == "both")
            spec.settings.push_back({LossKind::Activated, a.mu, profile_or_paired(a.profile, a.mu)});
    }
    validate(spec);
    const auto rows = run_transition(spec);

    Output out(a.out);
    const std::vector<std::string> header{"loss_kind", "mu",     "beta",      "gamma",      "ratio",
                                          "m",         "trials", "successes", "probability"};
    auto cells = [](const TransitionRow& r) {
        const bool act = r.loss == LossKind::Activated;
        return std::vector<std::string>{to_string(r.loss),        fmt_num(r.mu),
                                        act ? fmt_num(r.beta) : "", act ? fmt_num(r.gamma) : "",
                                        fmt_num(r.ratio),         std::to_string(r.m),
                                        std::to_string(r.trials), std::to_string(r.successes),
                                        fmt_num(r.probability)};
    };
    if (a.format == "table") {
        TextTable t;
        t.row(header);
        t.rule();
        for (const auto& r : rows)
            t.row(cells(r));
        t.print(out.stream());
    } else {
        CsvWriter csv(out.stream());
        csv.row(header);
        for (const auto& r : rows)
            csv.row(cells(r));
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct LandscapeArgs {
    std::size_t n = 128;
    std::size_t m = 0;
    double ratio = 6.0;
    std::uint64_t seed = 0;
    std::uint64_t sampler_seed = 1;
    TruthMode truth = TruthMode::Ones;
    std::vector<std::string> regions{"R1", "R2aSub", "R2b", "R2c", "R3"};
    std::size_t samples = 3;
    double delta = kDefaultDelta;
    std::string profile = "h1:beta=10,gamma=20";
    double min_pass = 0.95;
    bool per_sample = false;
    std::string out;
    std::string format = "table";
};

int cmd_landscape(const LandscapeArgs& a)
{
    std::vector<Region> regions;
    for (const auto& name : a.regions) {
        const auto r = parse_region(name);
        if (!r || *r == Region::R2a)
            throw UsageError("unknown or unchecked region '" + name + "' (use R1, R2aSub, R2b, R2c, R3)");
        regions.push_back(*r);
    }
    if (a.samples < 1)
        throw UsageError("--samples must be >= 1");
    const std::size_t m = a.m ? a.m : measurements_for(a.n, a.ratio);
    if (a.n < 1 || m < 1)
        throw UsageError("n and m must be positive");
    for (Region r : regions)
        if ((r == Region::R1 || r == Region::R2aSub) && a.n > kDefaultHessianCap)
            throw UsageError("Hessian cap exceeded: n = " + std::to_string(a.n) + " > "
                             + std::to_string(kDefaultHessianCap));
    const auto e = generate(a.n, m, a.seed, a.truth);
    const auto h = parse_profile(a.profile, 2.0);

    std::vector<RegionSummary> sums;
    for (std::size_t i = 0; i < regions.size(); ++i)
        sums.push_back(sample_region(e, h, regions[i], a.samples, a.delta, derive_seed(a.sampler_seed, i)));

    Output out(a.out);
    const std::vector<std::string> header{"region", "samples", "passed", "pass_fraction", "min_margin"};
    auto summary = [](const RegionSummary& s) {
        return std::vector<std::string>{to_string(s.region), std::to_string(s.count), std::to_string(s.passed),
                                        fmt_num(s.pass_fraction), fmt_num(s.min_margin, 6)};
    };
    if (a.format == "table") {
        // Numerical results over theoretical bounds, one column per sample.
        TextTable t;
        for (const auto& s : sums) {
            const auto& first = s.reports.front();
            for (std::size_t c = 0; c < first.checks.size(); ++c) {
                const auto& q = first.checks[c];
                std::vector<std::string> res{std::string(to_string(s.region)) + " " + q.quantity, "numerical"};
                std::vector<std::string> bnd{"", q.upper ? "bound (upper)" : "bound (lower)"};
                for (const auto& r : s.reports) {
                    res.push_back(fmt_num(r.checks[c].computed, 6));
                    bnd.push_back(fmt_num(r.checks[c].bound, 6));
                }
                t.row(res);
                t.row(bnd);
                t.rule();
            }
        }
        t.print(out.stream());
        out.stream() << '\n';
        TextTable st;
        st.row(header);
        st.rule();
        for (const auto& s : sums)
            st.row(summary(s));
        st.print(out.stream());
    } else {
        CsvWriter csv(out.stream());
        if (a.per_sample) {
            csv.row({"region", "sample", "quantity", "computed", "bound", "direction", "satisfied", "margin", "t",
                     "d", "c"});
            for (const auto& s : sums)
                for (std::size_t i = 0; i < s.reports.size(); ++i)
                    for (const auto& q : s.reports[i].checks)
                        csv.row({to_string(s.region), std::to_string(i), q.quantity, fmt_num(q.computed),
                                 fmt_num(q.bound), q.upper ? "upper" : "lower", fmt_bool(q.satisfied),
                                 fmt_num(q.margin), fmt_num(s.reports[i].label.t), fmt_num(s.reports[i].label.d),
                                 fmt_num(s.reports[i].label.c)});
        } else {
            csv.row(header);
            for (const auto& s : sums)
                csv.row(summary(s));
        }
    }
    for (const auto& s : sums)
        if (s.pass_fraction < a.min_pass)
            return kExitCheckFailed;
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct QqArgs {
    std::size_t n = 1;
    std::size_t samples = 100000;
    double x = 1.0;
    double z = 2.0;
    std::string profile = "h1:beta=10,gamma=20";
    std::uint64_t seed = 0;
    std::size_t quantiles = 1024;
    std::string out;
};

int cmd_qq(const QqArgs& a)
{
    if (a.n != 1)
        throw UsageError("qq: only n = 1 is supported");
    if (a.samples < 1)
        throw UsageError("qq: --samples must be >= 1");
    const auto h = parse_profile(a.profile, 2.0);
    const auto t = qq_table(a.x, a.z, a.samples, h, a.seed, a.quantiles);
    Output out(a.out);
    CsvWriter csv(out.stream());
    csv.row({"quantile", "vanilla_d1", "activated_d1", "vanilla_d2", "activated_d2"});
    for (std::size_t i = 0; i < t.probability.size(); ++i)
        csv.row({fmt_num(t.probability[i]), fmt_num(t.quantiles.vanilla_d1[i]), fmt_num(t.quantiles.activated_d1[i]),
                 fmt_num(t.quantiles.vanilla_d2[i]), fmt_num(t.quantiles.activated_d2[i])});
    std::cerr << "excess kurtosis: vanilla_d1=" << fmt_num(t.kurtosis[0], 6)
              << " activated_d1=" << fmt_num(t.kurtosis[1], 6) << " vanilla_d2=" << fmt_num(t.kurtosis[2], 6)
              << " activated_d2=" << fmt_num(t.kurtosis[3], 6) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct FdArgs {
    std::size_t n = 8;
    std::size_t m = 64;
    std::size_t max_n = 16;
    std::uint64_t seed = 0;
    std::uint64_t sampler_seed = 1;
    TruthMode truth = TruthMode::Ones;
    std::size_t points = 10;
    double eps = 1e-5;
    double delta = kDefaultDelta;
    std::string profile = "h1:beta=10,gamma=20";
    double grad_tol = 1e-5;
    double hess_tol = 1e-4;
    std::string out;
    std::string format = "table";
};

int cmd_fdcheck(const FdArgs& a)
{
    if (a.n < 1 || a.m < 1)
        throw UsageError("fdcheck: n and m must be positive");
    if (a.n > a.max_n)
        throw UsageError("fdcheck: n = " + std::to_string(a.n) + " exceeds --max-n " + std::to_string(a.max_n));
    if (!(a.eps > 0.0) || a.points < 1)
        throw UsageError("fdcheck: --eps must be positive and --points >= 1");
    const auto h = parse_profile(a.profile, 2.0);
    Output out(a.out);
    bool failed = false;

    if (a.n == 1) {
        const auto e = generate(1, a.m, a.seed, TruthMode::Ones);
        const auto rows = scalar_fd_table(e, h, a.points, a.eps, a.sampler_seed);
        const std::vector<std::string> header{"z", "d1_formula", "d1_fd", "d2_formula", "d2_fd", "rel_err_d1",
                                              "rel_err_d2"};
        std::vector<std::vector<std::string>> body;
        for (const auto& r : rows) {
            failed = failed || r.rel_err_d1 > a.grad_tol || r.rel_err_d2 > a.hess_tol;
            body.push_back({fmt_num(r.z, 6), fmt_num(r.d1_formula, 10), fmt_num(r.d1_fd, 10),
                            fmt_num(r.d2_formula, 10), fmt_num(r.d2_fd, 10), fmt_num(r.rel_err_d1, 3),
                            fmt_num(r.rel_err_d2, 3)});
        }
        if (a.format == "table") {
            TextTable t;
            t.row(header);
            t.rule();
            for (auto& b : body)
                t.row(b);
            t.print(out.stream());
        } else {
            CsvWriter csv(out.stream());
            csv.row(header);
            for (auto& b : body)
                csv.row(b);
        }
        return failed ? kExitCheckFailed : kExitOk;
    }

    const auto e = generate(a.n, a.m, a.seed, a.truth);
    const std::vector<Region> regions{Region::R1, Region::R2a, Region::R2b, Region::R2c, Region::R3};
    const auto reps = fd_report(e, h, regions, a.points, a.eps, a.delta, a.sampler_seed);
    const std::vector<std::string> header{"region", "points", "max_rel_grad_err", "max_rel_hess_err", "within_tol"};
    std::vector<std::vector<std::string>> body;
    for (const auto& r : reps) {
        const bool ok = r.max_rel_grad_err <= a.grad_tol && r.max_rel_hess_err <= a.hess_tol;
        failed = failed || !ok;
        body.push_back({to_string(r.region), std::to_string(r.points), fmt_num(r.max_rel_grad_err, 3),
                        fmt_num(r.max_rel_hess_err, 3), fmt_bool(ok)});
    }
    if (a.format == "table") {
        TextTable t;
        t.row(header);
        t.rule();
        for (auto& b : body)
            t.row(b);
        t.print(out.stream());
    } else {
        CsvWriter csv(out.stream());
        csv.row(header);
        for (auto& b : body)
            csv.row(b);
    }
    return failed ? kExitCheckFailed : kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Activated quadratic loss for real Gaussian quadratic systems: recovery experiments, landscape "
                 "checks and derivative validation."};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a TOML file (see --dump-config)");
    bool dump_config = false;
    app.add_flag("--dump-config", dump_config, "Print the fully resolved options as a config file and exit");

    const auto truth_check = CLI::CheckedTransformer(kTruthModes, CLI::ignore_case);
    const auto format_check = CLI::IsMember({"csv", "table"});

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a Gaussian measurement ensemble and save it");
    g->add_option("-n", gen.n, "Dimension")->required();
    g->add_option("-m", gen.m, "Number of equations")->required();
    g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
    g->add_option("--x-mode", gen.truth, "Ground truth: gaussian | ones")->transform(truth_check)->capture_default_str();
    g->add_option("-o,--output", gen.out, "Output path")->required();
    g->add_flag("--text", gen.text, "Write the plain-text variant instead of binary");

    SolveArgs sol;
    auto* s = app.add_subcommand("solve", "Run one gradient-descent recovery");
    s->add_option("-n", sol.n, "Dimension")->capture_default_str();
    s->add_option("-m", sol.m, "Number of equations (overrides --ratio)");
    s->add_option("--ratio", sol.ratio, "m/n when -m is not given")->capture_default_str();
    s->add_option("--seed", sol.seed, "Ensemble seed")->capture_default_str();
    s->add_option("--ensemble", sol.ensemble, "Load the ensemble from a file instead of generating one");
    s->add_option("--x-mode", sol.truth, "Ground truth: gaussian | ones")->transform(truth_check)->capture_default_str();
    s->add_option("--loss", sol.loss, "vanilla | activated")
        ->transform(CLI::CheckedTransformer(kLossKinds))
        ->capture_default_str();
    s->add_option("--mu", sol.mu, "Stepsize numerator")->capture_default_str();
    s->add_option("--profile", sol.profile, "Activation, e.g. h2:beta=5,gamma=7.5 (default: paired with --mu)");
    s->add_option("--init-seed", sol.init_seed, "Seed of the random start")->capture_default_str();
    s->add_option("--max-iters", sol.max_iters, "Iteration budget")->capture_default_str();
    s->add_option("--tol", sol.tol, "Relative error for success")->capture_default_str();
    s->add_option("--step-scale", sol.step_scale, "Gradient multiplier (0.5: 1/(4m) loss normalization)")
        ->capture_default_str();
    s->add_option("-o,--output", sol.out, "Output path (default stdout)");

    TransitionArgs tr;
    auto* t = app.add_subcommand("transition", "Success probability against m/n");
    t->add_option("-n", tr.n, "Dimension")->capture_default_str();
    t->add_option("--ratios,--ratio", tr.ratios, "lo:hi:step or comma list of m/n")->capture_default_str();
    t->add_option("--trials", tr.trials, "Trials per ratio")->capture_default_str();
    t->add_option("--loss", tr.loss, "vanilla | activated | both")
        ->check(CLI::IsMember({"vanilla", "activated", "both"}))
        ->capture_default_str();
    t->add_option("--mu", tr.mu, "Stepsize numerator")->capture_default_str();
    t->add_option("--profile", tr.profile, "Activation (default: H2 paired with --mu, gamma = 1.5 beta)");
    t->add_flag("--all-triples", tr.all_triples,
                "Activated loss with (mu, beta) = (0.1, 20), (0.2, 10), (0.3, 5) in one file");
    t->add_option("--seed", tr.seed, "Master seed")->capture_default_str();
    t->add_option("--max-iters", tr.max_iters, "Iteration budget per trial")->capture_default_str();
    t->add_option("--tol", tr.tol, "Relative error for success")->capture_default_str();
    t->add_option("--step-scale", tr.step_scale, "Gradient multiplier (0.5: 1/(4m) loss normalization)")
        ->capture_default_str();
    t->add_option("-o,--output", tr.out, "Output path (default stdout)");
    t->add_option("--format", tr.format, "csv | table")->check(format_check)->capture_default_str();

    LandscapeArgs ls;
    auto* l = app.add_subcommand("landscape", "Check the region-wise curvature and gradient bounds");
    l->add_option("-n", ls.n, "Dimension")->capture_default_str();
    l->add_option("-m", ls.m, "Number of equations (overrides --ratio)");
    l->add_option("--ratio", ls.ratio, "m/n when -m is not given")->capture_default_str();
    l->add_option("--seed", ls.seed, "Ensemble seed")->capture_default_str();
    l->add_option("--sampler-seed", ls.sampler_seed, "Seed for the region samplers")->capture_default_str();
    l->add_option("--x-mode", ls.truth, "Ground truth: gaussian | ones")->transform(truth_check)->capture_default_str();
    l->add_option("--regions", ls.regions, "Subset of R1,R2aSub,R2b,R2c,R3")->delimiter(',')->capture_default_str();
    l->add_option("--samples", ls.samples, "Samples per region")->capture_default_str();
    l->add_option("--delta", ls.delta, "Region parameter delta in (0, 0.01]")->capture_default_str();
    l->add_option("--profile", ls.profile, "Activation")->capture_default_str();
    l->add_option("--min-pass", ls.min_pass, "Exit 1 when a region's pass fraction is below this")
        ->capture_default_str();
    l->add_flag("--per-sample", ls.per_sample, "CSV: one row per sample and check");
    l->add_option("-o,--output", ls.out, "Output path (default stdout)");
    l->add_option("--format", ls.format, "csv | table")->check(format_check)->capture_default_str();

    QqArgs qq;
    auto* q = app.add_subcommand("qq", "Quantiles of per-term derivatives of both losses (scalar case)");
    q->add_option("-n", qq.n, "Dimension (only 1 is supported)")->capture_default_str();
    q->add_option("--samples,-m", qq.samples, "Number of Gaussian draws")->capture_default_str();
    q->add_option("--x", qq.x, "Scalar ground truth")->capture_default_str();
    q->add_option("--z", qq.z, "Scalar evaluation point")->capture_default_str();
    q->add_option("--profile", qq.profile, "Activation")->capture_default_str();
    q->add_option("--seed", qq.seed, "Seed")->capture_default_str();
    q->add_option("--quantiles", qq.quantiles, "Number of evenly spaced quantiles")->capture_default_str();
    q->add_option("-o,--output", qq.out, "Output path (default stdout)");

    FdArgs fd;
    auto* f = app.add_subcommand("fdcheck", "Compare analytic gradient/Hessian with central differences");
    f->add_option("-n", fd.n, "Dimension (1 selects the scalar table)")->capture_default_str();
    f->add_option("-m", fd.m, "Number of equations")->capture_default_str();
    f->add_option("--max-n", fd.max_n, "Largest accepted n")->capture_default_str();
    f->add_option("--seed", fd.seed, "Ensemble seed")->capture_default_str();
    f->add_option("--sampler-seed", fd.sampler_seed, "Seed for the sampled points")->capture_default_str();
    f->add_option("--x-mode", fd.truth, "Ground truth: gaussian | ones")->transform(truth_check)->capture_default_str();
    f->add_option("--points", fd.points, "Points per region")->capture_default_str();
    f->add_option("--eps", fd.eps, "Difference step")->capture_default_str();
    f->add_option("--delta", fd.delta, "Region parameter delta")->capture_default_str();
    f->add_option("--profile", fd.profile, "Activation")->capture_default_str();
    f->add_option("--grad-tol", fd.grad_tol, "Gradient relative tolerance")->capture_default_str();
    f->add_option("--hess-tol", fd.hess_tol, "Hessian relative tolerance")->capture_default_str();
    f->add_option("-o,--output", fd.out, "Output path (default stdout)");
    f->add_option("--format", fd.format, "csv | table")->check(format_check)->capture_default_str();

    for (auto* sub : {g, s, t, l, q, f})
        sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (dump_config) {
        // Only the selected subcommand, as a [section] that --config re-selects.
        for (const auto* sub : app.get_subcommands()) {
            std::cout << '[' << sub->get_name() << "]\n";
            std::istringstream lines(sub->config_to_str(true, false));
            for (std::string line; std::getline(lines, line);)
                if (line.size() < 3 || line.compare(line.size() - 3, 3, "=\"\"") != 0)
                    std::cout << line << '\n';
        }
        return kExitOk;
    }

    try {
        if (g->parsed())
            return cmd_generate(gen);
        if (s->parsed())
            return cmd_solve(sol);
        if (t->parsed())
            return cmd_transition(tr);
        if (l->parsed())
            return cmd_landscape(ls);
        if (q->parsed())
            return cmd_qq(qq);
        if (f->parsed())
            return cmd_fdcheck(fd);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
