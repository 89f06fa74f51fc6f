#pragma once
// Finite-difference derivatives, the dilatation functionals K_O, K_I, H, the
// chart bilipschitz form, and a deterministic parallel grid checker.

#include <array>
#include <exception>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qcmap/vecgeom.hpp"

namespace qcmap {

using VectorMap = std::function<Vector(const Vector&)>;

constexpr double default_fd_step = 1e-6;

/// Central differences with step h max(1, |x|).
template <class Map>
Matrix finite_diff_jacobian(Map&& f, const Vector& x, double h = default_fd_step)
{
    if (!(h > 0.0) || !all_finite(x))
        throw error(errc::invalid_input, "finite_diff_jacobian needs h > 0 and finite x");
    const int n = static_cast<int>(x.size());
    const double step = h * std::max(1.0, x.norm());
    Matrix jac;
    for (int j = 0; j < n; ++j) {
        Vector xp = x;
        Vector xm = x;
        xp(j) += step;
        xm(j) -= step;
        Vector fp, fm;
        try {
            fp = f(xp);
            fm = f(xm);
        } catch (const error& e) {
            throw error(errc::stencil, std::string("map undefined at a stencil point: ") + e.what());
        }
        if (!all_finite(fp) || !all_finite(fm))
            throw error(errc::stencil, "map is not finite at a stencil point");
        if (j == 0)
            jac.resize(fp.size(), n);
        jac.col(j) = (fp - fm) / (2.0 * step);
    }
    return jac;
}

struct DistortionReport {
    double op_norm = 0.0;
    double min_sv = 0.0;
    double jac = 0.0;
    double k_outer = 0.0;
    double k_inner = 0.0;
    double h_linear = 0.0;
};

/// Dilatations of a square derivative matrix.
inline DistortionReport distortion_from_matrix(const Matrix& d)
{
    if (d.rows() != d.cols())
        throw error(errc::invalid_input, "distortion needs a square derivative");
    const int n = static_cast<int>(d.rows());
    const Vector sv = svd_small(d);
    DistortionReport r;
    r.op_norm = sv(0);
    r.min_sv = sv(n - 1);
    r.jac = d.determinant();
    if (!(r.jac > 1e-12) || !(r.min_sv > 0.0))
        throw error(errc::degenerate_derivative, "Jacobian determinant " + std::to_string(r.jac) + " is not positive");
    r.k_outer = std::pow(r.op_norm, n) / r.jac;
    r.k_inner = r.jac / std::pow(r.min_sv, n);
    r.h_linear = r.op_norm / r.min_sv;
    return r;
}

template <class Map>
DistortionReport distortion_report(Map&& f, const Vector& x, double h = default_fd_step)
{
    return distortion_from_matrix(finite_diff_jacobian(f, x, h));
}

/// count unit directions in R^n: the 2n signed axes first, then a Fibonacci
/// sphere (n = 3) or seeded Gaussian directions (other n).
inline std::vector<Vector> sample_directions(int n, int count, std::uint64_t seed = 0)
{
    if (n < 2 || count < 2 * n)
        throw error(errc::invalid_input, "need at least 2n directions");
    std::vector<Vector> out;
    out.reserve(count);
    for (int i = 0; i < n; ++i) {
        out.push_back(basis_vector(n, i));
        out.push_back(-basis_vector(n, i));
    }
    const int fill = count - 2 * n;
    if (n == 3) {
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < fill; ++k) {
            const double z = 1.0 - (2.0 * k + 1.0) / fill;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden * k;
            Vector v(3);
            v << r * std::cos(a), r * std::sin(a), z;
            out.push_back(v);
        }
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        while (static_cast<int>(out.size()) < count) {
            Vector v(n);
            for (int i = 0; i < n; ++i)
                v(i) = normal(rng);
            if (v.norm() > 1e-8)
                out.push_back(v.normalized());
        }
    }
    return out;
}

/// max / min of |f(x + r w) - f(x)| over the direction sample.
template <class Map>
double linear_distortion_numeric(Map&& f, const Vector& x, double r, int directions = 64, std::uint64_t seed = 0)
{
    if (!(r > 0.0))
        throw error(errc::invalid_input, "radius must be positive");
    const int n = static_cast<int>(x.size());
    Vector fx;
    try {
        fx = f(x);
    } catch (const error& e) {
        throw error(errc::sampling, std::string("map undefined at the centre: ") + e.what());
    }
    double big = 0.0;
    double small = std::numeric_limits<double>::infinity();
    for (const Vector& w : sample_directions(n, directions, seed)) {
        Vector fy;
        try {
            fy = f(x + r * w);
        } catch (const error& e) {
            throw error(errc::sampling, std::string("map undefined on the sampled sphere: ") + e.what());
        }
        if (!all_finite(fy))
            throw error(errc::sampling, "map is not finite on the sampled sphere");
        const double d = (fy - fx).norm();
        big = std::max(big, d);
        small = std::min(small, d);
    }
    if (!(small > 0.0))
        throw error(errc::sampling, "map collapses a sampled direction");
    return big / small;
}

// ---------------------------------------------------------------------------
// Bilipschitz form of the 2D cube chart

/// Window [8 / (pi^2 (2 + sqrt 6)), 1 + sqrt 6 / 2] for the form's eigenvalues.
inline double bilipschitz_lower() { return 8.0 / (pi * pi * (2.0 + std::sqrt(6.0))); }
inline double bilipschitz_upper() { return 1.0 + std::sqrt(6.0) / 2.0; }

/// Matrix of the quadratic form in (eps, delta) that governs
/// |g(x, y) - g(x + eps, y + delta)|^2 on region A = {x >= |y|}.
inline Eigen::Matrix2d bilipschitz_form(double x, double y)
{
    if (!std::isfinite(x) || !std::isfinite(y))
        throw error(errc::invalid_input, "non-finite chart point");
    if (x == 0.0 && y == 0.0)
        throw error(errc::chart_singularity, "the form is singular at the origin");
    if (x < std::abs(y) - 1e-12 || x > half_pi + 1e-12)
        throw error(errc::invalid_input, "chart point outside region A");
    const double r2 = x * x + y * y;
    const double w = std::sin(x) * std::sin(x) / (r2 * r2);
    Eigen::Matrix2d b;
    b << 1.0 + y * y * w, -x * y * w, -x * y * w, x * x * w;
    return b;
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
inline std::array<double, 2> symmetric_eigenvalues(const Eigen::Matrix2d& b)
{
    const double mean = 0.5 * (b(0, 0) + b(1, 1));
    const double half_gap = 0.5 * (b(0, 0) - b(1, 1));
    const double radius = std::hypot(half_gap, b(0, 1));
    return {mean - radius, mean + radius};
}

// ---------------------------------------------------------------------------
// Grid verification

/// Worker count: QCMAP_THREADS if set and positive, else the hardware count.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("QCMAP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end, slot) over [0, total) in contiguous chunks, one per
/// worker; slot indexes the chunk so callers can reduce in a fixed order.
template <class Body>
void parallel_chunks(std::size_t total, unsigned workers, Body&& body)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
    if (workers == 1) {
        body(std::size_t{0}, total, 0u);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t per = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(total, w * per);
        const std::size_t end = std::min(total, begin + per);
        pool.emplace_back([&, begin, end, w] {
            try {
                body(begin, end, w);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

/// Axis-aligned box sampled at cell centres, optionally filtered.
struct GridRegion {
    Vector lo;
    Vector hi;
    std::vector<int> resolution;
    std::function<bool(const Vector&)> keep; // empty keeps everything

    static GridRegion cube(const Vector& lo, const Vector& hi, int per_axis)
    {
        return GridRegion{lo, hi, std::vector<int>(lo.size(), per_axis), {}};
    }

    std::size_t size() const
    {
        std::size_t total = 1;
        for (int r : resolution)
            total *= static_cast<std::size_t>(r);
        return total;
    }

    Vector point(std::size_t flat) const
    {
        Vector x(lo.size());
        for (int d = 0; d < lo.size(); ++d) {
            const auto r = static_cast<std::size_t>(resolution[d]);
            const std::size_t i = flat % r;
            flat /= r;
            x(d) = lo(d) + (hi(d) - lo(d)) * (static_cast<double>(i) + 0.5) / static_cast<double>(r);
        }
        return x;
    }
};

struct GridReport {
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    Vector worst_point;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    std::size_t failures = 0;
    std::string failure_message; // first evaluation failure, if any
};

namespace detail {

constexpr std::size_t no_index = std::numeric_limits<std::size_t>::max();

struct VerifyPartial {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t worst_index = no_index;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    std::size_t failures = 0;
    std::size_t first_failure = no_index;
    std::string message;
};

} // namespace detail

/// Evaluates margin(point(i)) for i in [0, total). A point passes when its
/// margin is >= 0 (> 0 when strict); points rejected by keep are skipped.
/// Exceptions count as failures at that point with margin -inf. The
/// reduction keeps the lowest index among equal margins, so the report does
/// not depend on the thread count.
template <class PointFn, class Keep, class Margin>
GridReport verify_indexed(std::size_t total, PointFn&& point, Keep&& keep, Margin&& margin, bool strict = false)
{
    using Partial = detail::VerifyPartial;
    constexpr std::size_t none = detail::no_index;
    const unsigned workers = worker_count();
    std::vector<Partial> parts(workers);
    parallel_chunks(total, workers, [&](std::size_t begin, std::size_t end, unsigned slot) {
        Partial& p = parts[slot];
        for (std::size_t i = begin; i < end; ++i) {
            const Vector x = point(i);
            if (!keep(x)) {
                ++p.skipped;
                continue;
            }
            ++p.evaluated;
            double m;
            try {
                m = margin(x);
                if (std::isnan(m))
                    throw error(errc::invalid_input, "margin is NaN");
            } catch (const std::exception& e) {
                m = -std::numeric_limits<double>::infinity();
                if (p.first_failure == none) {
                    p.first_failure = i;
                    p.message = e.what();
                }
            }
            if (!(strict ? m > 0.0 : m >= 0.0))
                ++p.failures;
            if (m < p.worst) {
                p.worst = m;
                p.worst_index = i;
            }
        }
    });

    GridReport out;
    std::size_t worst_index = none;
    std::size_t first_failure = none;
    for (const Partial& p : parts) {
        out.evaluated += p.evaluated;
        out.skipped += p.skipped;
        out.failures += p.failures;
        if (p.worst_index != none &&
            (p.worst < out.worst_margin || (p.worst == out.worst_margin && p.worst_index < worst_index))) {
            out.worst_margin = p.worst;
            worst_index = p.worst_index;
        }
        if (p.first_failure < first_failure) {
            first_failure = p.first_failure;
            out.failure_message = p.message;
        }
    }
    if (worst_index != none)
        out.worst_point = point(worst_index);
    out.pass = out.failures == 0 && out.evaluated > 0;
    return out;
}

/// verify_indexed over the cell centres of a region.
template <class Margin>
GridReport grid_verify(const GridRegion& region, Margin&& margin, bool strict = false)
{
    if (region.lo.size() != region.hi.size() || region.resolution.size() != static_cast<std::size_t>(region.lo.size()))
        throw error(errc::invalid_input, "grid region dimensions disagree");
    for (int r : region.resolution)
        if (r < 1)
            throw error(errc::invalid_input, "grid resolution must be positive");
    return verify_indexed(
        region.size(), [&](std::size_t i) { return region.point(i); },
        [&](const Vector& x) { return !region.keep || region.keep(x); }, margin, strict);
}

/// verify_indexed over an explicit point list.
template <class Margin>
GridReport verify_points(const std::vector<Vector>& points, Margin&& margin, bool strict = false)
{
    return verify_indexed(
        points.size(), [&](std::size_t i) { return points[i]; }, [](const Vector&) { return true; }, margin, strict);
}

} // namespace qcmap
