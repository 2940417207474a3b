#pragma once

#include <actloss/errors.hpp>
#include <actloss/rng.hpp>
#include <actloss/summation.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace actloss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A real Gaussian quadratic system y_k = (a_k^T x)^2, k = 1..m.
/// Immutable once built; construct through generate() or make_ensemble().
class MeasurementEnsemble {
public:
    MeasurementEnsemble() = default;

    std::size_t n() const noexcept { return static_cast<std::size_t>(x_.size()); }
    std::size_t m() const noexcept { return static_cast<std::size_t>(y_.size()); }
    const RowMatrix& A() const noexcept { return A_; }
    auto row(std::size_t k) const { return A_.row(static_cast<Eigen::Index>(k)); }
    const Vector& x() const noexcept { return x_; }
    const Vector& y() const noexcept { return y_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// ||y||_1 / m
    double y1_over_m() const noexcept { return y1_over_m_; }
    double x_norm() const noexcept { return x_norm_; }

    friend bool operator==(const MeasurementEnsemble& a, const MeasurementEnsemble& b)
    {
        return a.seed_ == b.seed_ && a.A_.rows() == b.A_.rows() && a.A_.cols() == b.A_.cols()
            && a.A_ == b.A_ && a.x_ == b.x_ && a.y_ == b.y_ && a.y1_over_m_ == b.y1_over_m_;
    }

private:
    friend MeasurementEnsemble make_ensemble_unchecked(RowMatrix, Vector, Vector, std::uint64_t);

    RowMatrix A_;
    Vector x_;
    Vector y_;
    std::uint64_t seed_ = 0;
    double y1_over_m_ = 0.0;
    double x_norm_ = 0.0;
};

// Same product the losses form for A z, so residuals vanish exactly at z = +-x.
inline Vector measure(const RowMatrix& A, const Vector& x)
{
    const Vector p = A * x;
    return p.array().square().matrix();
}

inline double mean_of(const Vector& v)
{
    const auto m = static_cast<std::size_t>(v.size());
    return pairwise_sum(m, [&](std::size_t k) { return v[static_cast<Eigen::Index>(k)]; })
        / static_cast<double>(m);
}

inline MeasurementEnsemble make_ensemble_unchecked(RowMatrix A, Vector x, Vector y, std::uint64_t seed)
{
    MeasurementEnsemble e;
    e.A_ = std::move(A);
    e.x_ = std::move(x);
    e.y_ = std::move(y);
    e.seed_ = seed;
    e.y1_over_m_ = mean_of(e.y_);
    e.x_norm_ = e.x_.norm();
    return e;
}

/// Build an ensemble from explicit measurement vectors (rows of A) and truth.
inline MeasurementEnsemble make_ensemble(RowMatrix A, Vector x, std::uint64_t seed = 0)
{
    if (A.rows() < 1 || A.cols() < 1)
        throw DomainError("ensemble needs m >= 1 and n >= 1");
    if (A.cols() != x.size())
        throw DimensionError("A has " + std::to_string(A.cols()) + " columns but x has length "
                             + std::to_string(x.size()));
    if (!(x.norm() > 0.0))
        throw DomainError("ground-truth vector must be nonzero");
    Vector y = measure(A, x);
    return make_ensemble_unchecked(std::move(A), std::move(x), std::move(y), seed);
}

enum class TruthMode { StandardGaussian, Ones, Given };

/// Draw a_k ~ N(0, I_n) i.i.d. from the seeded stream, then x (unless given).
/// Rows of A are filled first, row-major, so x's draws never shift A.
inline MeasurementEnsemble generate(std::size_t n, std::size_t m, std::uint64_t seed,
                                    TruthMode mode = TruthMode::StandardGaussian,
                                    const std::optional<Vector>& given = std::nullopt,
                                    std::uint64_t stream_id = 0)
{
    if (n < 1 || m < 1)
        throw DomainError("generate: n and m must be positive");
    CounterRng rng(RngSpec{seed, stream_id});
    RowMatrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < A.rows(); ++k)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            A(k, j) = rng.gaussian();

    Vector x;
    switch (mode) {
    case TruthMode::StandardGaussian:
        x.resize(static_cast<Eigen::Index>(n));
        for (Eigen::Index j = 0; j < x.size(); ++j)
            x[j] = rng.gaussian();
        break;
    case TruthMode::Ones:
        x = Vector::Ones(static_cast<Eigen::Index>(n));
        break;
    case TruthMode::Given:
        if (!given)
            throw DomainError("generate: TruthMode::Given requires a vector");
        if (static_cast<std::size_t>(given->size()) != n)
            throw DimensionError("generate: given x has wrong length");
        x = *given;
        break;
    }
    return make_ensemble(std::move(A), std::move(x), seed);
}

struct EnergyCheck {
    double ratio;
    bool in_bounds;
};

/// (||y||_1/m) / ||x||^2, expected to concentrate in [1/2, 2].
inline EnergyCheck mean_energy_check(const MeasurementEnsemble& e)
{
    const double ratio = e.y1_over_m() / e.x().squaredNorm();
    return {ratio, ratio >= 0.5 && ratio <= 2.0};
}

// ---------------------------------------------------------------------------
// Persistence
//
// Binary layout (little-endian):
//   0  char[8]  magic "ACTLENS1"
//   8  u32      version (1)
//  12  u32      reserved (0)
//  16  u64      n
//  24  u64      m
//  32  u64      seed
//  40  f64[m*n] A, row-major
//      f64[n]   x
//      f64[m]   y
//
// Text layout: first line "actloss-ensemble 1", second line "n m seed",
// then m lines of A rows, one line of x, one line of y; values printed with
// 17 significant digits.
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 8> kEnsembleMagic{'A', 'C', 'T', 'L', 'E', 'N', 'S', '1'};
inline constexpr std::uint32_t kEnsembleVersion = 1;
inline constexpr std::size_t kEnsembleHeaderBytes = 40;

/// Relative tolerance used when revalidating stored y against A and x.
inline constexpr double kLoadTolerance = 1e-9;

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian host");

template <typename T>
void put(std::string& out, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos, const char* what)
{
    if (in.size() < pos + sizeof(T))
        throw ParseError(std::string("truncated file while reading ") + what, in.size());
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

inline std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string() + " for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void dump(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

} // namespace detail

/// Checks every stored y_k against (a_k^T x)^2 and the basic invariants.
inline void validate(const MeasurementEnsemble& e, double rel_tol = kLoadTolerance)
{
    if (!e.x().allFinite() || !e.A().allFinite() || !e.y().allFinite())
        throw ValidationError("ensemble contains non-finite values");
    if (!(e.x_norm() > 0.0))
        throw ValidationError("ground-truth vector is zero");
    const Vector fresh = measure(e.A(), e.x());
    const double floor = 1e-12 * mean_of(fresh);
    for (Eigen::Index k = 0; k < fresh.size(); ++k) {
        const double err = std::abs(e.y()[k] - fresh[k]);
        if (e.y()[k] < 0.0 || err > rel_tol * std::max(std::abs(fresh[k]), floor)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "y[" << k << "] = " << e.y()[k] << " inconsistent with (a_k^T x)^2 = " << fresh[k];
            throw ValidationError(msg.str());
        }
    }
}

inline std::string to_binary(const MeasurementEnsemble& e)
{
    std::string out;
    out.reserve(kEnsembleHeaderBytes + 8 * (e.m() * e.n() + e.n() + e.m()));
    out.append(kEnsembleMagic.data(), kEnsembleMagic.size());
    detail::put<std::uint32_t>(out, kEnsembleVersion);
    detail::put<std::uint32_t>(out, 0);
    detail::put<std::uint64_t>(out, e.n());
    detail::put<std::uint64_t>(out, e.m());
    detail::put<std::uint64_t>(out, e.seed());
    for (Eigen::Index k = 0; k < e.A().rows(); ++k)
        for (Eigen::Index j = 0; j < e.A().cols(); ++j)
            detail::put<double>(out, e.A()(k, j));
    for (Eigen::Index j = 0; j < e.x().size(); ++j)
        detail::put<double>(out, e.x()[j]);
    for (Eigen::Index k = 0; k < e.y().size(); ++k)
        detail::put<double>(out, e.y()[k]);
    return out;
}

inline MeasurementEnsemble from_binary(const std::string& bytes)
{
    std::size_t pos = 0;
    if (bytes.size() < kEnsembleMagic.size()
        || std::memcmp(bytes.data(), kEnsembleMagic.data(), kEnsembleMagic.size()) != 0)
        throw ParseError("bad magic", 0);
    pos = kEnsembleMagic.size();
    const auto version = detail::get<std::uint32_t>(bytes, pos, "version");
    if (version != kEnsembleVersion)
        throw ParseError("unsupported version " + std::to_string(version), pos - 4);
    (void)detail::get<std::uint32_t>(bytes, pos, "reserved");
    const auto n = detail::get<std::uint64_t>(bytes, pos, "n");
    const auto m = detail::get<std::uint64_t>(bytes, pos, "m");
    const auto seed = detail::get<std::uint64_t>(bytes, pos, "seed");
    if (n == 0 || m == 0)
        throw ParseError("n and m must be positive", 16);
    const std::uint64_t limit = (1ULL << 40) / 8;
    if (n > limit || m > limit || n * m > limit)
        throw ParseError("implausible dimensions", 16);
    const std::size_t expected = kEnsembleHeaderBytes + 8 * (m * n + n + m);
    if (bytes.size() < expected)
        throw ParseError("truncated file: expected " + std::to_string(expected) + " bytes, got "
                             + std::to_string(bytes.size()),
                         bytes.size());
    if (bytes.size() > expected)
        throw ParseError("trailing bytes after payload", expected);

    RowMatrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    Vector x(static_cast<Eigen::Index>(n));
    Vector y(static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k < A.rows(); ++k)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            A(k, j) = detail::get<double>(bytes, pos, "A");
    for (Eigen::Index j = 0; j < x.size(); ++j)
        x[j] = detail::get<double>(bytes, pos, "x");
    for (Eigen::Index k = 0; k < y.size(); ++k)
        y[k] = detail::get<double>(bytes, pos, "y");

    auto e = make_ensemble_unchecked(std::move(A), std::move(x), std::move(y), seed);
    validate(e);
    return e;
}

inline std::string to_text(const MeasurementEnsemble& e)
{
    std::string out = "actloss-ensemble 1\n";
    out += std::to_string(e.n()) + " " + std::to_string(e.m()) + " " + std::to_string(e.seed()) + "\n";
    char buf[32];
    auto emit_row = [&](auto&& row) {
        for (Eigen::Index j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            if (j)
                out += ' ';
            out += buf;
        }
        out += '\n';
    };
    for (Eigen::Index k = 0; k < e.A().rows(); ++k)
        emit_row(e.A().row(k));
    emit_row(e.x());
    emit_row(e.y());
    return out;
}

namespace detail {

class TextCursor {
public:
    explicit TextCursor(const std::string& s) : s_(s) {}

    void skip_space()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    std::string token(const char* what)
    {
        skip_space();
        if (pos_ >= s_.size())
            throw ParseError(std::string("unexpected end of text while reading ") + what, pos_);
        const std::size_t start = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }

    double number(const char* what)
    {
        skip_space();
        const std::size_t at = pos_;
        const std::string tok = token(what);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw ParseError(std::string("bad number '") + tok + "' for " + what, at);
        return v;
    }

    std::uint64_t integer(const char* what)
    {
        skip_space();
        const std::size_t at = pos_;
        const std::string tok = token(what);
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError(std::string("bad integer '") + tok + "' for " + what, at);
        return std::stoull(tok);
    }

    std::size_t pos() const { return pos_; }
    bool at_end()
    {
        skip_space();
        return pos_ >= s_.size();
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline MeasurementEnsemble from_text(const std::string& text)
{
    detail::TextCursor cur(text);
    if (cur.token("magic") != "actloss-ensemble")
        throw ParseError("bad text magic", 0);
    if (cur.integer("version") != 1)
        throw ParseError("unsupported text version", cur.pos());
    const auto n = cur.integer("n");
    const auto m = cur.integer("m");
    const auto seed = cur.integer("seed");
    if (n == 0 || m == 0)
        throw ParseError("n and m must be positive", cur.pos());
    RowMatrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    Vector x(static_cast<Eigen::Index>(n));
    Vector y(static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k < A.rows(); ++k)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            A(k, j) = cur.number("A");
    for (Eigen::Index j = 0; j < x.size(); ++j)
        x[j] = cur.number("x");
    for (Eigen::Index k = 0; k < y.size(); ++k)
        y[k] = cur.number("y");
    if (!cur.at_end())
        throw ParseError("trailing content after payload", cur.pos());
    auto e = make_ensemble_unchecked(std::move(A), std::move(x), std::move(y), seed);
    validate(e);
    return e;
}

enum class EnsembleFormat { Binary, Text };

inline void save(const MeasurementEnsemble& e, const std::filesystem::path& path,
                 EnsembleFormat format = EnsembleFormat::Binary)
{
    detail::dump(path, format == EnsembleFormat::Binary ? to_binary(e) : to_text(e));
}

/// Format is sniffed from the leading magic.
inline MeasurementEnsemble load(const std::filesystem::path& path)
{
    const std::string bytes = detail::slurp(path);
    if (bytes.rfind("actloss-ensemble", 0) == 0)
        return from_text(bytes);
    return from_binary(bytes);
}

} // namespace actloss
