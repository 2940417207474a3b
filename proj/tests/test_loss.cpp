#include "oracles.hpp"

#include <actloss/jacobi.hpp>
#include <actloss/landscape.hpp>
#include <actloss/loss.hpp>

#include <gtest/gtest.h>

using namespace actloss;

namespace {

const ActivationProfile kH1 = make_profile(ActivationKind::H1, 10, 20);

oracle::Problem to_problem(const MeasurementEnsemble& e, const ActivationProfile& h)
{
    oracle::Problem P;
    for (std::size_t k = 0; k < e.m(); ++k) {
        std::vector<double> row(e.n());
        for (std::size_t j = 0; j < e.n(); ++j)
            row[j] = e.A()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        P.a.push_back(row);
        P.y.push_back(e.y()[static_cast<Eigen::Index>(k)]);
    }
    P.use_h2 = h.kind == ActivationKind::H2;
    P.beta = h.beta;
    P.gamma = h.gamma;
    return P;
}

Vector random_vector(std::size_t n, CounterRng& rng, double scale = 1.0)
{
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < v.size(); ++j)
        v[j] = scale * rng.gaussian();
    return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

MeasurementEnsemble scalar_ensemble(double a, double x)
{
    RowMatrix A(1, 1);
    A(0, 0) = a;
    return make_ensemble(A, Vector::Constant(1, x));
}

} // namespace

TEST(Loss, VanillaScalarHandValues)
{
    const auto e = scalar_ensemble(1, 1);
    const auto ev = vanilla_value_grad(e, Vector::Constant(1, 2.0));
    EXPECT_DOUBLE_EQ(ev.value, 4.5);
    EXPECT_DOUBLE_EQ(ev.grad[0], 12.0);
    EXPECT_FALSE(ev.hess.has_value());
}

TEST(Loss, VanillaVanishesAtTruthAndItsNegation)
{
    const auto e = generate(10, 60, 1, TruthMode::StandardGaussian);
    for (const Vector& z : {Vector(e.x()), Vector(-e.x())}) {
        const auto ev = vanilla_value_grad(e, z);
        EXPECT_EQ(ev.value, 0.0);
        EXPECT_EQ(ev.grad.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Loss, VanillaMatchesOracle)
{
    const auto e = generate(6, 45, 12, TruthMode::StandardGaussian);
    const auto P = to_problem(e, kH1);
    CounterRng rng(2);
    for (int i = 0; i < 20; ++i) {
        const Vector z = random_vector(6, rng);
        EXPECT_LE(rel(vanilla_value_grad(e, z).value, oracle::vanilla_value(P, z)), 1e-12);
    }
    EXPECT_THROW(vanilla_value_grad(e, Vector::Ones(5)), DimensionError);
}

TEST(Loss, ActivatedMatchesOracleValueGradientHessian)
{
    for (const auto& h : {kH1, make_profile(ActivationKind::H2, 5, 7.5), make_profile(ActivationKind::H1, 2, 4)}) {
        const auto e = generate(5, 80, 7, TruthMode::StandardGaussian);
        const auto P = to_problem(e, h);
        CounterRng rng(4);
        for (int i = 0; i < 25; ++i) {
            const Vector z = random_vector(5, rng);
            const auto ev = hessian(e, h, z);
            const auto o = oracle::activated(P, z);
            EXPECT_LE(std::abs(ev.value - o.value), 1e-12 * std::max(1.0, o.value));
            EXPECT_LE((ev.grad - o.grad).cwiseAbs().maxCoeff(), 1e-11 * std::max(1.0, o.grad.cwiseAbs().maxCoeff()));
            EXPECT_LE(max_abs(*ev.hess - o.hess), 1e-10 * std::max(1.0, max_abs(o.hess)));
        }
    }
}

TEST(Loss, ActivatedOracleSeesActivationAtWork)
{
    // Sanity: at these settings some terms are cut off, so the comparison above
    // exercises the h' and h'' paths and not only the plateau.
    const auto e = generate(5, 80, 7, TruthMode::StandardGaussian);
    const ActivatedLoss loss(e, make_profile(ActivationKind::H1, 2, 4));
    CounterRng rng(4);
    const Vector z = random_vector(5, rng);
    std::size_t partial = 0;
    for (const auto& t : loss.terms(z, false))
        partial += t.grad_z != 0.0 ? 1 : 0;
    EXPECT_GT(partial, 0u);
    EXPECT_LT(loss.data_weights().minCoeff(), 1.0);
}

TEST(Loss, ActivatedValueIsZeroAtTruthAndNegation)
{
    const auto e = generate(12, 90, 3, TruthMode::StandardGaussian);
    EXPECT_EQ(value(e, kH1, e.x()), 0.0);
    EXPECT_EQ(value(e, kH1, Vector(-e.x())), 0.0);
    EXPECT_EQ(gradient(e, kH1, e.x()).grad.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(radial_derivative(e, kH1, e.x()), 0.0);
}

TEST(Loss, ValueIsNonnegative)
{
    const auto e = generate(7, 50, 5, TruthMode::StandardGaussian);
    CounterRng rng(11);
    for (int i = 0; i < 100; ++i)
        EXPECT_GE(value(e, make_profile(ActivationKind::H2, 2, 3), random_vector(7, rng, 3.0)), 0.0);
}

TEST(Loss, SingularityGuard)
{
    const auto e = generate(4, 20, 5, TruthMode::Ones);
    EXPECT_THROW(value(e, kH1, Vector::Zero(4)), SingularityError);
    EXPECT_THROW(gradient(e, kH1, Vector::Constant(4, 1e-14)), SingularityError);
    EXPECT_NO_THROW(value(e, kH1, Vector::Constant(4, 1e-10)));
    EXPECT_THROW(value(e, kH1, Vector::Ones(3)), DimensionError);
}

TEST(Loss, HessianCap)
{
    const auto e = generate(6, 30, 5, TruthMode::Ones);
    const ActivatedLoss loss(e, kH1);
    EXPECT_THROW(loss.hessian(Vector::Ones(6), 5), DomainError);
    EXPECT_NO_THROW(loss.hessian(Vector::Ones(6), 6));
}

TEST(Loss, SignSymmetryIsExact)
{
    CounterRng rng(99);
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto e = generate(6, 40, s, TruthMode::StandardGaussian);
        const Vector z = random_vector(6, rng);
        const auto h = s % 2 ? kH1 : make_profile(ActivationKind::H2, 3, 4.5);
        const auto a = hessian(e, h, z), b = hessian(e, h, Vector(-z));
        EXPECT_EQ(a.value, b.value);
        EXPECT_EQ(a.grad, Vector(-b.grad));
        EXPECT_EQ(*a.hess, *b.hess);
    }
}

TEST(Loss, RadialIdentity)
{
    CounterRng rng(5);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto e = generate(8, 64, s, TruthMode::StandardGaussian);
        const Vector z = random_vector(8, rng, 1.5);
        const ActivatedLoss loss(e, make_profile(ActivationKind::H1, 3, 6));
        EXPECT_LE(rel(z.dot(loss.gradient(z).grad), loss.radial_derivative(z)), 1e-10);
    }
}

TEST(Loss, RadialDerivativeNegativeAtSmallNorm)
{
    const auto e = generate(128, 768, 1, TruthMode::Ones);
    CounterRng rng(6);
    Vector u = random_vector(128, rng);
    const Vector z = std::sqrt(0.1 * 128) * u / u.norm();
    const double r = radial_derivative(e, kH1, z);
    EXPECT_LT(r, 0.0);
    EXPECT_LE(r, -5 * 0.01 * z.squaredNorm() * 128);
}

TEST(Loss, PlateauReducesToVanilla)
{
    const auto e = generate(6, 50, 2, TruthMode::StandardGaussian);
    CounterRng rng(1);
    // beta above every possible p^2/|z|^2 (<= |a|^2) and m y/|y|_1 (<= m).
    double amax = 0;
    for (Eigen::Index k = 0; k < e.A().rows(); ++k)
        amax = std::max(amax, e.A().row(k).squaredNorm());
    const auto big = make_profile(ActivationKind::H1, std::max(amax, 50.0) * 2, std::max(amax, 50.0) * 4);
    const VanillaLoss van(e);
    const ActivatedLoss act(e, big);
    for (int i = 0; i < 20; ++i) {
        const Vector z = random_vector(6, rng);
        const auto a = act.hessian(z), v = van.hessian(z);
        EXPECT_LE(std::abs(a.value - v.value), 1e-12 * v.value);
        EXPECT_LE((a.grad - v.grad).cwiseAbs().maxCoeff(), 1e-12 * v.grad.cwiseAbs().maxCoeff());
        EXPECT_LE(max_abs(*a.hess - *v.hess), 1e-12 * max_abs(*v.hess));
        // closed-form vanilla Hessian (1/m) sum (6p^2 - 2y) a a^T
        Matrix ref = Matrix::Zero(6, 6);
        for (Eigen::Index k = 0; k < e.A().rows(); ++k) {
            const Vector ak = e.A().row(k).transpose();
            const double p = ak.dot(z);
            ref += (6 * p * p - 2 * e.y()[k]) * ak * ak.transpose();
        }
        ref /= static_cast<double>(e.m());
        EXPECT_LE(max_abs(*v.hess - ref), 1e-12 * max_abs(ref));
    }
}

TEST(Loss, HessianAsymmetryBeforeSymmetrization)
{
    CounterRng rng(12);
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto e = generate(10, 100, s, TruthMode::StandardGaussian);
        const auto ev = hessian(e, make_profile(ActivationKind::H1, 2, 5), random_vector(10, rng));
        EXPECT_LE(ev.hess_asymmetry, 1e-9);
        EXPECT_EQ(*ev.hess, ev.hess->transpose());
    }
}

TEST(Loss, HessianAtTruthSimplifiesAndIsPsd)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto e = generate(8, 80, s, TruthMode::StandardGaussian);
        const ActivatedLoss loss(e, kH1);
        const Matrix H = *loss.hessian(e.x()).hess;
        Matrix ref = Matrix::Zero(8, 8);
        const double xx = e.x().squaredNorm();
        for (Eigen::Index k = 0; k < e.A().rows(); ++k) {
            const Vector ak = e.A().row(k).transpose();
            const double p = ak.dot(e.x());
            ref += p * p * oracle::h1(p * p / xx, 10, 20).h * oracle::h1(e.y()[k] / e.y1_over_m(), 10, 20).h * ak
                * ak.transpose();
        }
        ref *= 4.0 / static_cast<double>(e.m());
        EXPECT_LE(max_abs(H - ref), 1e-12 * max_abs(ref));
        EXPECT_GE(min_eigenvalue(H), -1e-8 * xx);
    }
}

TEST(Loss, ScalarGradientMatchesCentralDifference)
{
    const auto e = generate(1, 128, 42, TruthMode::Ones);
    const ActivatedLoss loss(e, kH1);
    const Vector z = Vector::Constant(1, 2.0);
    const double fd = central_first_difference(loss, z, Vector::Ones(1), 1e-5);
    EXPECT_LE(rel(loss.gradient(z).grad[0], fd), 1e-5);
    const double fd2 = central_second_difference(loss, z, Vector::Ones(1), 1e-5);
    EXPECT_LE(std::abs((*loss.hessian(z).hess)(0, 0) - fd2) / std::abs(fd2), 1e-4);
}

TEST(Loss, FdCheckAtTruthIsTight)
{
    const auto e = generate(8, 64, 9, TruthMode::StandardGaussian);
    const auto r = fd_check(e, kH1, e.x());
    EXPECT_LE(r.max_rel_grad_err, 1e-6);
    EXPECT_LE(r.max_rel_hess_err, 1e-6);
}

TEST(Loss, FdCheckScalarRandomPoints)
{
    const auto e = generate(1, 128, 3, TruthMode::Ones);
    CounterRng rng(77);
    for (int i = 0; i < 50; ++i) {
        const double zv = rng.uniform(0.05, 10);
        EXPECT_LE(fd_check(e, kH1, Vector::Constant(1, zv)).max_rel_grad_err, 1e-5) << zv;
    }
}

TEST(Loss, FdCheckAcrossRegions)
{
    const auto e = generate(8, 64, 1, TruthMode::StandardGaussian);
    for (Region r : {Region::R1, Region::R2a, Region::R2b, Region::R2c, Region::R3}) {
        for (std::uint64_t i = 0; i < 10; ++i) {
            CounterRng rng(RngSpec{static_cast<std::uint64_t>(r), i});
            const Vector z = sample_point(r, e.x(), 0.01, rng);
            const auto rep = fd_check(e, kH1, z);
            EXPECT_LE(rep.max_rel_grad_err, 1e-5) << to_string(r);
            EXPECT_LE(rep.max_rel_hess_err, 1e-4) << to_string(r);
        }
    }
}

TEST(Loss, PerTermSamplesAgreeWithVanillaForHugeCutoff)
{
    const auto h = make_profile(ActivationKind::H1, 1e9, 2e9);
    for (const auto& s : per_term_samples(1, 2, 1000, h, 5)) {
        EXPECT_EQ(s.d1_activated, s.d1_vanilla);
        EXPECT_EQ(s.d2_activated, s.d2_vanilla);
    }
}

TEST(Loss, PerTermSamplesCutOffLargeDraws)
{
    std::size_t cut = 0;
    for (const auto& s : per_term_samples(1, 2, 20000, kH1, 5)) {
        if (s.a * s.a >= kH1.gamma) {
            EXPECT_EQ(s.d1_activated, 0.0);
            EXPECT_EQ(s.d2_activated, 0.0);
            ++cut;
        }
    }
    EXPECT_GT(cut, 0u);
}

TEST(Loss, PerTermSamplesMatchScalarOracle)
{
    // Each sample is the derivative of one term taken as an m = 1 loss.
    const auto h = make_profile(ActivationKind::H1, 2, 4);
    const std::size_t m = 200;
    const auto samples = per_term_samples(1, 2, m, h, 9);
    double ybar = 0;
    for (const auto& s : samples)
        ybar += s.a * s.a;
    ybar /= static_cast<double>(m);
    for (const auto& s : samples) {
        oracle::Problem P;
        P.a = {{s.a}};
        P.y = {s.a * s.a};
        P.beta = 2;
        P.gamma = 4;
        // The single-term problem normalizes by its own y; fold the real
        // data weight in by hand instead.
        const double W = oracle::h1(s.a * s.a / ybar, 2, 4).h;
        const double Wself = oracle::h1(1.0, 2, 4).h;
        const auto o = oracle::activated(P, Vector::Constant(1, 2.0));
        EXPECT_NEAR(s.d1_activated, o.grad[0] * W / Wself, 1e-9 * std::max(1.0, std::abs(o.grad[0])));
        EXPECT_NEAR(s.d2_activated, o.hess(0, 0) * W / Wself,
                    1e-9 * std::max(1.0, std::abs(o.hess(0, 0))));
    }
}
