#pragma once

#include <actloss/activation.hpp>
#include <actloss/ensemble.hpp>
#include <actloss/errors.hpp>
#include <actloss/rng.hpp>
#include <actloss/summation.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace actloss {

/// Loss value plus gradient, and the Hessian when requested.
struct LossEval {
    Vector z;
    double value = 0.0;
    Vector grad;
    std::optional<Matrix> hess;
    /// max|H - H^T| / max|H| before symmetrization (0 when no Hessian).
    double hess_asymmetry = 0.0;
};

/// Reject ||z|| below this fraction of ||x||; f is not defined at z = 0.
inline constexpr double kSingularityGuard = 1e-12;
inline constexpr std::size_t kDefaultHessianCap = 1024;

/// Per-measurement contributions, written in the five matrix shapes the
/// Hessian is built from:
///   grad_k = grad_a * a_k + grad_z * z
///   hess_k = aa * a_k a_k^T + az * a_k z^T + za * z a_k^T + zz * z z^T + eye * I
/// All values are per-term, i.e. before the 1/m average.
struct TermCoefficients {
    double value = 0.0;
    double grad_a = 0.0;
    double grad_z = 0.0;
    double aa = 0.0;
    double az = 0.0;
    double za = 0.0;
    double zz = 0.0;
    double eye = 0.0;
};

/// Term k of the activated loss, with p = a_k^T z, y = (a_k^T x)^2,
/// s = ||z||^2, wx = h(m y_k / ||y||_1) and hz = h, h', h'' at p^2/s.
/// The Hessian coefficients are the Jacobians of the three gradient terms
/// (weighted residual, and the two h'-terms from d(p^2/s)/dz), kept term by
/// term so that az and za are computed along different routes.
inline TermCoefficients activated_term(double p, double y, double s, double wx, const ActivationValue& hz,
                                       bool with_hessian)
{
    TermCoefficients c;
    if (wx == 0.0 || (hz.h == 0.0 && hz.dh == 0.0 && hz.d2h == 0.0))
        return c;
    const double p2 = p * p;
    const double r = p2 - y;
    const double r2 = r * r;
    const double H = hz.h * wx, D = hz.dh * wx, E = hz.d2h * wx;
    const double s2 = s * s, s3 = s2 * s;

    c.value = 0.5 * r2 * H;
    c.grad_a = 2.0 * r * p * H + r2 * D * p / s;
    c.grad_z = -r2 * D * p2 / s2;
    if (!with_hessian)
        return c;

    const double p3 = p2 * p, p4 = p2 * p2;
    // Jacobian of the weighted residual term.
    c.aa += 2.0 * (3.0 * p2 - y) * H;
    c.aa += 4.0 / s * r * p2 * D;
    c.az += -4.0 / s2 * r * p3 * D;
    // Jacobian of r^2 h'(.) a (a^T z)/||z||^2.
    c.aa += (5.0 * p4 - 6.0 * p2 * y + y * y) * D / s;
    c.aa += 2.0 / s2 * r2 * p2 * E;
    c.az += -2.0 / s3 * r2 * p3 * E;
    c.az += -2.0 / s2 * r2 * p * D;
    // Jacobian of -r^2 h'(.) (a^T z)^2 z/||z||^4.
    c.za += -(6.0 * p4 * p - 8.0 * p3 * y + 2.0 * p * y * y) * D / s2;
    c.za += -2.0 / s3 * r2 * p3 * E;
    c.zz += 2.0 / (s2 * s2) * r2 * p4 * E;
    c.zz += 4.0 / s3 * r2 * p2 * D;
    c.eye += -r2 * D * p2 / s2;
    return c;
}

inline TermCoefficients vanilla_term(double p, double y, bool with_hessian)
{
    const double p2 = p * p;
    const double r = p2 - y;
    TermCoefficients c;
    c.value = 0.5 * r * r;
    c.grad_a = 2.0 * r * p;
    if (with_hessian)
        c.aa = 6.0 * p2 - 2.0 * y;
    return c;
}

namespace detail {

struct Accumulated {
    double value = 0.0;
    Vector grad;
    std::optional<Matrix> hess;
    double asymmetry = 0.0;
};

/// Averages the per-term coefficients over k with pairwise summation and
/// assembles value, gradient and (optionally) Hessian.
inline Accumulated assemble(const RowMatrix& A, const Vector& z, const std::vector<TermCoefficients>& terms,
                            bool with_hessian)
{
    const auto m = terms.size();
    const auto n = z.size();
    const double inv_m = 1.0 / static_cast<double>(m);
    Accumulated out;

    Vector ga(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k)
        ga[static_cast<Eigen::Index>(k)] = terms[k].grad_a;

    out.value = pairwise_sum(m, [&](std::size_t k) { return terms[k].value; }) * inv_m;
    const double gz = pairwise_sum(m, [&](std::size_t k) { return terms[k].grad_z; });
    Vector ga_sum = pairwise_blocks(m, Vector(Vector::Zero(n)), [&](std::size_t b, std::size_t e) {
        const auto len = static_cast<Eigen::Index>(e - b);
        return Vector(A.middleRows(static_cast<Eigen::Index>(b), len).transpose()
                      * ga.segment(static_cast<Eigen::Index>(b), len));
    });
    out.grad = (ga_sum + gz * z) * inv_m;

    if (!with_hessian)
        return out;

    Vector aa(static_cast<Eigen::Index>(m)), az(static_cast<Eigen::Index>(m)), za(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        aa[i] = terms[k].aa;
        az[i] = terms[k].az;
        za[i] = terms[k].za;
    }
    auto weighted_rows = [&](const Vector& w) {
        return pairwise_blocks(m, Vector(Vector::Zero(n)), [&](std::size_t b, std::size_t e) {
            const auto len = static_cast<Eigen::Index>(e - b);
            return Vector(A.middleRows(static_cast<Eigen::Index>(b), len).transpose()
                          * w.segment(static_cast<Eigen::Index>(b), len));
        });
    };
    Matrix H = pairwise_blocks(m, Matrix(Matrix::Zero(n, n)), [&](std::size_t b, std::size_t e) {
        const auto len = static_cast<Eigen::Index>(e - b);
        const auto rows = A.middleRows(static_cast<Eigen::Index>(b), len);
        RowMatrix scaled = aa.segment(static_cast<Eigen::Index>(b), len).asDiagonal() * rows;
        return Matrix(rows.transpose() * scaled);
    });
    const Vector az_sum = weighted_rows(az);
    const Vector za_sum = weighted_rows(za);
    const double zz = pairwise_sum(m, [&](std::size_t k) { return terms[k].zz; });
    const double eye = pairwise_sum(m, [&](std::size_t k) { return terms[k].eye; });
    H += az_sum * z.transpose();
    H += z * za_sum.transpose();
    H += zz * (z * z.transpose());
    H.diagonal().array() += eye;
    H *= inv_m;

    const double scale = H.cwiseAbs().maxCoeff();
    out.asymmetry = scale > 0.0 ? (H - H.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    out.hess = Matrix(0.5 * (H + H.transpose()));
    return out;
}

} // namespace detail

/// Smooth quadratic loss (1/2m) sum ((a_k^T z)^2 - y_k)^2.
class VanillaLoss {
public:
    explicit VanillaLoss(const MeasurementEnsemble& e) : ens_(&e) {}

    const MeasurementEnsemble& ensemble() const noexcept { return *ens_; }

    double value(const Vector& z) const { return evaluate(z, false).value; }
    LossEval gradient(const Vector& z) const { return evaluate(z, false); }
    LossEval hessian(const Vector& z, std::size_t cap = kDefaultHessianCap) const
    {
        if (static_cast<std::size_t>(z.size()) > cap)
            throw DomainError("hessian: n exceeds cap " + std::to_string(cap));
        return evaluate(z, true);
    }

private:
    LossEval evaluate(const Vector& z, bool with_hessian) const
    {
        check_dim(z);
        const Vector p = ens_->A() * z;
        std::vector<TermCoefficients> terms(ens_->m());
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            terms[k] = vanilla_term(p[i], ens_->y()[i], with_hessian);
        }
        auto acc = detail::assemble(ens_->A(), z, terms, with_hessian);
        return {z, acc.value, std::move(acc.grad), std::move(acc.hess), acc.asymmetry};
    }

    void check_dim(const Vector& z) const
    {
        if (static_cast<std::size_t>(z.size()) != ens_->n())
            throw DimensionError("z has length " + std::to_string(z.size()) + ", ensemble has n = "
                                 + std::to_string(ens_->n()));
    }

    const MeasurementEnsemble* ens_;
};

/// Activated loss: each quadratic residual is weighted by
/// h(|a_k^T z|^2/||z||^2) * h(m |a_k^T x|^2/||y||_1).
/// The x-side weight only uses y, so it is computed once per ensemble.
class ActivatedLoss {
public:
    ActivatedLoss(const MeasurementEnsemble& e, ActivationProfile profile) : ens_(&e), profile_(profile)
    {
        const double scale = 1.0 / e.y1_over_m();
        wx_.resize(e.y().size());
        for (Eigen::Index k = 0; k < wx_.size(); ++k)
            wx_[k] = profile_.weight(e.y()[k] * scale);
    }

    const MeasurementEnsemble& ensemble() const noexcept { return *ens_; }
    const ActivationProfile& profile() const noexcept { return profile_; }
    /// h(m y_k / ||y||_1) for every k.
    const Vector& data_weights() const noexcept { return wx_; }

    double value(const Vector& z) const { return evaluate(z, false).value; }
    LossEval gradient(const Vector& z) const { return evaluate(z, false); }

    LossEval hessian(const Vector& z, std::size_t cap = kDefaultHessianCap) const
    {
        if (static_cast<std::size_t>(z.size()) > cap)
            throw DomainError("hessian: n = " + std::to_string(z.size()) + " exceeds cap "
                              + std::to_string(cap));
        return evaluate(z, true);
    }

    /// z^T grad f(z) from its own closed form, in which the h' terms have
    /// cancelled: (1/m) sum 2 r_k p_k^2 h(p_k^2/s) h(m y_k/||y||_1).
    double radial_derivative(const Vector& z) const
    {
        const double s = guard(z);
        const Vector p = ens_->A() * z;
        return pairwise_sum(ens_->m(),
                            [&](std::size_t k) {
                                const auto i = static_cast<Eigen::Index>(k);
                                const double p2 = p[i] * p[i];
                                return 2.0 * (p2 - ens_->y()[i]) * p2 * profile_.weight(p2 / s) * wx_[i];
                            })
            / static_cast<double>(ens_->m());
    }

    /// Per-term coefficients at z (exposed for diagnostics and tests).
    std::vector<TermCoefficients> terms(const Vector& z, bool with_hessian) const
    {
        const double s = guard(z);
        const Vector p = ens_->A() * z;
        std::vector<TermCoefficients> out(ens_->m());
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(k);
            out[k] = activated_term(p[i], ens_->y()[i], s, wx_[i], profile_.eval_unchecked(p[i] * p[i] / s),
                                    with_hessian);
        }
        return out;
    }

private:
    double guard(const Vector& z) const
    {
        if (static_cast<std::size_t>(z.size()) != ens_->n())
            throw DimensionError("z has length " + std::to_string(z.size()) + ", ensemble has n = "
                                 + std::to_string(ens_->n()));
        const double s = z.squaredNorm();
        if (!(std::sqrt(s) >= kSingularityGuard * ens_->x_norm()))
            throw SingularityError("activated loss is singular at z = 0 (||z|| below guard)");
        return s;
    }

    LossEval evaluate(const Vector& z, bool with_hessian) const
    {
        const auto t = terms(z, with_hessian);
        auto acc = detail::assemble(ens_->A(), z, t, with_hessian);
        return {z, acc.value, std::move(acc.grad), std::move(acc.hess), acc.asymmetry};
    }

    const MeasurementEnsemble* ens_;
    ActivationProfile profile_;
    Vector wx_;
};

// Free-function surface.

inline LossEval vanilla_value_grad(const MeasurementEnsemble& e, const Vector& z)
{
    return VanillaLoss(e).gradient(z);
}

inline double value(const MeasurementEnsemble& e, const ActivationProfile& h, const Vector& z)
{
    return ActivatedLoss(e, h).value(z);
}

inline LossEval gradient(const MeasurementEnsemble& e, const ActivationProfile& h, const Vector& z)
{
    return ActivatedLoss(e, h).gradient(z);
}

inline LossEval hessian(const MeasurementEnsemble& e, const ActivationProfile& h, const Vector& z,
                        std::size_t cap = kDefaultHessianCap)
{
    return ActivatedLoss(e, h).hessian(z, cap);
}

inline double radial_derivative(const MeasurementEnsemble& e, const ActivationProfile& h, const Vector& z)
{
    return ActivatedLoss(e, h).radial_derivative(z);
}

// ---------------------------------------------------------------------------
// Finite-difference validation
// ---------------------------------------------------------------------------

struct FdReport {
    double max_rel_grad_err = 0.0;
    double max_rel_hess_err = 0.0;
};

/// Central differences along every coordinate: f-differences against the
/// analytic gradient, gradient-differences against the analytic Hessian.
/// Relative errors use the denominator max(|analytic|, 1).
template <typename Loss>
FdReport fd_check(const Loss& loss, const Vector& z, double eps = 1e-5)
{
    const LossEval at = loss.hessian(z);
    const Matrix& H = *at.hess;
    FdReport rep;
    Vector zp = z, zm = z;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        zp[i] = z[i] + eps;
        zm[i] = z[i] - eps;
        const LossEval gp = loss.gradient(zp);
        const LossEval gm = loss.gradient(zm);
        const double fd = (gp.value - gm.value) / (2.0 * eps);
        rep.max_rel_grad_err = std::max(rep.max_rel_grad_err,
                                        std::abs(fd - at.grad[i]) / std::max(std::abs(at.grad[i]), 1.0));
        const Vector col = (gp.grad - gm.grad) / (2.0 * eps);
        for (Eigen::Index j = 0; j < z.size(); ++j)
            rep.max_rel_hess_err = std::max(rep.max_rel_hess_err,
                                            std::abs(col[j] - H(j, i)) / std::max(std::abs(H(j, i)), 1.0));
        zp[i] = z[i];
        zm[i] = z[i];
    }
    return rep;
}

inline FdReport fd_check(const MeasurementEnsemble& e, const ActivationProfile& h, const Vector& z,
                         double eps = 1e-5)
{
    return fd_check(ActivatedLoss(e, h), z, eps);
}

/// (f(z+eps v) - f(z-eps v)) / 2 eps
template <typename Loss>
double central_first_difference(const Loss& loss, const Vector& z, const Vector& v, double eps)
{
    return (loss.value(z + eps * v) - loss.value(z - eps * v)) / (2.0 * eps);
}

/// (f(z+eps v) - 2 f(z) + f(z-eps v)) / eps^2
template <typename Loss>
double central_second_difference(const Loss& loss, const Vector& z, const Vector& v, double eps)
{
    return (loss.value(z + eps * v) - 2.0 * loss.value(z) + loss.value(z - eps * v)) / (eps * eps);
}

// ---------------------------------------------------------------------------
// Scalar per-term derivatives (n = 1)
// ---------------------------------------------------------------------------

struct PerTermSample {
    std::size_t k = 0;
    double a = 0.0;
    double d1_vanilla = 0.0;
    double d1_activated = 0.0;
    double d2_vanilla = 0.0;
    double d2_activated = 0.0;
};

/// First and second derivatives in z of every term of both losses for the
/// scalar problem y_k = (a_k x)^2 with a_k ~ N(0, 1) drawn from `seed`.
inline std::vector<PerTermSample> per_term_samples(double x, double z, std::size_t m,
                                                   const ActivationProfile& profile, std::uint64_t seed)
{
    if (m < 1)
        throw DomainError("per_term_samples: m must be positive");
    if (!(x != 0.0) || !(z != 0.0))
        throw DomainError("per_term_samples: x and z must be nonzero");
    CounterRng rng(seed);
    std::vector<double> a(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
        a[k] = rng.gaussian();
        y[k] = (a[k] * x) * (a[k] * x);
    }
    const double y1_over_m = pairwise_sum(m, [&](std::size_t k) { return y[k]; }) / static_cast<double>(m);
    const double s = z * z;
    std::vector<PerTermSample> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double p = a[k] * z;
        const double wx = profile.weight(y[k] / y1_over_m);
        const auto v = vanilla_term(p, y[k], true);
        const auto c = activated_term(p, y[k], s, wx, profile.eval_unchecked(p * p / s), true);
        out[k] = {k,
                  a[k],
                  v.grad_a * a[k],
                  c.grad_a * a[k] + c.grad_z * z,
                  v.aa * a[k] * a[k],
                  c.aa * a[k] * a[k] + (c.az + c.za) * a[k] * z + c.zz * z * z + c.eye};
    }
    return out;
}

} // namespace actloss
