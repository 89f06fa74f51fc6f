#pragma once
// Radial stretch, radial stretch interpolation and spiral stretch, in image
// coordinates and as Zorich transforms, plus the spiral-transform Jacobian and
// the certified choice of the spiral rate.
//
// Axis conventions: the raw stretch R and interpolation R_I stretch along
// e_n (the chart's polar axis), the raw spiral R_s stretches along e_1 and
// rotates in the (e_1, e_2) plane. Oriented versions use a Frame whose column
// 0 is the stretch direction.

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "qcmap/zorich.hpp"

namespace qcmap {

/// K / sqrt(K^2 + (1 - K^2) cos^2), the ray factor of a K-stretch.
inline double stretch_factor(double k, double cos2)
{
    return k / std::sqrt(k * k + (1.0 - k * k) * cos2);
}

inline double log_stretch_factor(double k, double cos2)
{
    return std::log(k) - 0.5 * std::log(k * k + (1.0 - k * k) * cos2);
}

inline void require_factor(double k, const char* what)
{
    if (!std::isfinite(k) || k < 1.0)
        throw error(errc::invalid_input, std::string(what) + " must be a finite factor >= 1");
}

struct StretchSpec {
    double k;
    Frame frame;

    StretchSpec(double k_, Frame frame_) : k(k_), frame(std::move(frame_)) { require_factor(k, "K"); }
};

struct InterpSpec {
    double k;
    double l;
    double s; // log inner radius
    double t; // log outer radius
    Frame frame;

    InterpSpec(double k_, double l_, double s_, double t_, Frame frame_)
        : k(k_), l(l_), s(s_), t(t_), frame(std::move(frame_))
    {
        require_factor(k, "K");
        require_factor(l, "L");
        if (!(s < t))
            throw error(errc::invalid_input, "interpolation needs s < t");
        if (!(std::abs(std::log(k / l)) < (t - s) / 2.0))
            throw error(errc::invalid_input, "interpolation needs |ln(K/L)| < (t - s)/2");
    }

    /// Log-radius gap with slack 1 over the injectivity constraint.
    static double minimal_depth(double k, double l) { return 2.0 * std::abs(std::log(k / l)) + 1.0; }
};

struct SpiralSpec {
    double k;
    double alpha;
    Frame frame;

    SpiralSpec(double k_, double alpha_, Frame frame_) : k(k_), alpha(alpha_), frame(std::move(frame_))
    {
        require_factor(k, "K");
        if (!std::isfinite(alpha))
            throw error(errc::invalid_input, "alpha must be finite");
    }
};

namespace detail {

inline void require_nonzero(const Vector& y)
{
    if (!all_finite(y))
        throw error(errc::invalid_input, "non-finite point");
    if (y.norm() == 0.0)
        throw error(errc::undefined_at_origin, "map is not defined at the origin");
}

inline bool is_identity(const Matrix& m, double tol = 1e-12)
{
    return (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline void require_polar_axis(const Frame& f)
{
    const int n = f.dim();
    if (std::abs(std::abs(f.direction()(n - 1)) - 1.0) > 1e-12)
        throw error(errc::invalid_input, "transform form needs the stretch direction along e_n");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Radial stretch

/// R(y) = K / sqrt(K^2 + (1 - K^2) cos^2 phi) y, phi the angle to e_n.
inline Vector radial_stretch(const Vector& y, double k)
{
    require_factor(k, "K");
    detail::require_nonzero(y);
    const double c = y(y.size() - 1) / y.norm();
    return stretch_factor(k, c * c) * y;
}

/// Zorich transform of radial_stretch: x_n += ln lambda(cos^2 M).
inline FundamentalPoint radial_stretch_transform(const FundamentalPoint& x, double k)
{
    require_factor(k, "K");
    const double big = max_abs(x.chart_coords());
    const double c = std::cos(big);
    Vector out = x.coords();
    out(out.size() - 1) += log_stretch_factor(k, c * c);
    return FundamentalPoint(out, x.box());
}

/// Stretch by K along spec.frame's direction. Since the stretch is a scalar
/// multiple of y, the frame only enters through the direction.
inline Vector oriented_stretch(const Vector& y, const StretchSpec& spec)
{
    detail::require_nonzero(y);
    const double c = spec.frame.direction().dot(y) / y.norm();
    return stretch_factor(spec.k, c * c) * y;
}

// ---------------------------------------------------------------------------
// Radial stretch interpolation

namespace detail {

inline double interp_log_factor(double k, double l, double cos2, double nu)
{
    return nu * log_stretch_factor(k, cos2) + (1.0 - nu) * log_stretch_factor(l, cos2);
}

} // namespace detail

/// e^{log_scale} R_I(e^{-log_scale} y): the interpolation shell moved to log
/// radii [s + log_scale, t + log_scale]. Works in log radius so that deep
/// shells do not underflow.
inline Vector interp_stretch_rescaled(const Vector& y, const InterpSpec& spec, double log_scale)
{
    detail::require_nonzero(y);
    const double r = y.norm();
    const double lr = std::log(r) - log_scale;
    const double slack = 1e-12 * std::max(1.0, std::abs(spec.t) + std::abs(spec.s));
    if (lr < spec.s - slack || lr > spec.t + slack)
        throw error(errc::outside_shell, "point outside the interpolation shell");
    const double nu = std::clamp((lr - spec.s) / (spec.t - spec.s), 0.0, 1.0);
    const double c = spec.frame.direction().dot(y) / r;
    return std::exp(detail::interp_log_factor(spec.k, spec.l, c * c, nu)) * y;
}

/// R_I on e^s <= |y| <= e^t: K-stretch on the outer sphere, L-stretch on the
/// inner one, geometric interpolation of the two factors in between.
inline Vector interp_stretch(const Vector& y, const InterpSpec& spec)
{
    return interp_stretch_rescaled(y, spec, 0.0);
}

/// Zorich transform of interp_stretch for a spec aligned with e_n.
inline FundamentalPoint interp_stretch_transform(const FundamentalPoint& x, const InterpSpec& spec)
{
    detail::require_polar_axis(spec.frame);
    const double xn = x.height();
    if (xn < spec.s || xn > spec.t)
        throw error(errc::outside_shell, "x_n outside [s, t]");
    const double nu = (xn - spec.s) / (spec.t - spec.s);
    const double c = std::cos(max_abs(x.chart_coords()));
    Vector out = x.coords();
    out(out.size() - 1) += detail::interp_log_factor(spec.k, spec.l, c * c, nu);
    return FundamentalPoint(out, x.box());
}

// ---------------------------------------------------------------------------
// Radial stretch with spiraling

/// e^{log_scale} R_s(e^{-log_scale} y) in spec.frame: stretch along column 0
/// and rotate the (column 0, column 1) plane by alpha (ln|y| - log_scale).
inline Vector spiral_stretch_rescaled(const Vector& y, const SpiralSpec& spec, double log_scale)
{
    detail::require_nonzero(y);
    Vector w = spec.frame.to_local(y);
    const double r = w.norm();
    const double c = w(0) / r;
    const double lambda = stretch_factor(spec.k, c * c);
    const double angle = spec.alpha * (std::log(r) - log_scale);
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    const double w0 = w(0);
    const double w1 = w(1);
    w(0) = ca * w0 - sa * w1;
    w(1) = sa * w0 + ca * w1;
    return spec.frame.to_world(lambda * w);
}

inline Vector spiral_stretch(const Vector& y, const SpiralSpec& spec)
{
    return spiral_stretch_rescaled(y, spec, 0.0);
}

namespace detail {

// Spiral transform on first-box chart coordinates xbar (n-1 entries) at
// height xn.
inline Vector spiral_chart(const Vector& xbar, double xn, double alpha, double k)
{
    const int m = static_cast<int>(xbar.size());
    const double rho = xbar.norm();
    if (rho == 0.0)
        throw error(errc::chart_singularity, "spiral transform is singular on the polar axis");
    const double big = max_abs(xbar);
    const double phi = alpha * xn;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    Vector p = xbar;
    p(0) = c * xbar(0) - s * xbar(1);
    p(1) = s * xbar(0) + c * xbar(1);
    const double pb = max_abs(p);
    Vector u(m + 1);
    u.head(m) = p * (big / pb);
    const double sm = std::sin(big);
    const double q = xbar(0) * xbar(0) * sm * sm / (rho * rho);
    u(m) = xn + std::log(k) - 0.5 * std::log(k * k + (1.0 - k * k) * q);
    return u;
}

} // namespace detail

/// Zorich transform of the axis-aligned spiral stretch (identity frame).
inline FundamentalPoint spiral_stretch_transform(const FundamentalPoint& x, const SpiralSpec& spec)
{
    if (!detail::is_identity(spec.frame.matrix()))
        throw error(errc::invalid_input, "closed-form spiral transform needs the identity frame");
    Vector u = detail::spiral_chart(x.chart_coords(), x.height(), spec.alpha, spec.k);
    if (x.box() == Box::second)
        u(0) = pi - u(0);
    return canonicalize(u);
}

/// max(|x1 cos phi - x2 sin phi|, |x1 sin phi + x2 cos phi|), the larger of
/// the two rotated coordinates whose reciprocals enter m.
inline double rotated_pair_max(double x1, double x2, double phi)
{
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return std::max(std::abs(x1 * c - x2 * s), std::abs(x1 * s + x2 * c));
}

/// Which coordinate attains M (case I: 0, II: 1, III: >= 2) and which
/// rotated coordinate attains m (sub-case a: 0, b: 1, c: >= 2).
struct SpiralRegion {
    int max_index = 0;
    int min_index = 0;

    char case_number() const { return max_index == 0 ? '1' : max_index == 1 ? '2' : '3'; }
    char sub_case() const { return min_index == 0 ? 'a' : min_index == 1 ? 'b' : 'c'; }
    std::string label() const
    {
        static constexpr std::array<const char*, 3> roman{"I", "II", "III"};
        return std::string(roman[case_number() - '1']) + "-" + sub_case();
    }
};

struct SpiralJacobian {
    Matrix matrix;
    SpiralRegion region;
};

namespace detail {

constexpr int max_spiral_dim = 16;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, max_spiral_dim, 1>;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, max_spiral_dim, max_spiral_dim>;

// Index of the largest |v_i|, or -1 when another entry or zero is within
// delta of it.
template <class V>
int argmax_abs_with_gap(const V& v, double delta)
{
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best)))
            best = i;
    for (int i = 0; i < v.size(); ++i)
        if (i != best && std::abs(v(best)) - std::abs(v(i)) < delta)
            return -1;
    if (std::abs(v(best)) < delta)
        return -1;
    return best;
}

// Closed-form derivative of spiral_chart into jac (rows/cols 0..m-1 are the
// chart coordinates, row/col m the height). Returns false within delta of a
// pyramid face, an m-switching surface or the polar axis.
template <class V, class M>
bool spiral_chart_jacobian_into(const V& xbar, double xn, double alpha, double k, double delta, M& jac,
                                SpiralRegion& region)
{
    const int m = static_cast<int>(xbar.size());
    const int a = argmax_abs_with_gap(xbar, delta);
    if (a < 0)
        return false;
    const double phi = alpha * xn;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    SmallVector p = xbar;
    p(0) = c * xbar(0) - s * xbar(1);
    p(1) = s * xbar(0) + c * xbar(1);
    const int b = argmax_abs_with_gap(p, delta);
    if (b < 0)
        return false;

    const double sa = xbar(a) < 0.0 ? -1.0 : 1.0;
    const double sb = p(b) < 0.0 ? -1.0 : 1.0;
    const double big = std::abs(xbar(a));
    const double pb = std::abs(p(b));

    SmallMatrix rot = SmallMatrix::Identity(m, m);
    rot(0, 0) = c;
    rot(0, 1) = -s;
    rot(1, 0) = s;
    rot(1, 1) = c;
    SmallVector dp_dn = SmallVector::Zero(m);
    dp_dn(0) = alpha * (-s * xbar(0) - c * xbar(1));
    dp_dn(1) = alpha * (c * xbar(0) - s * xbar(1));

    jac.setZero(m + 1, m + 1);
    for (int i = 0; i < m; ++i) {
        for (int col = 0; col < m; ++col) {
            double d = big * (rot(i, col) / pb - p(i) * sb * rot(b, col) / (pb * pb));
            if (col == a)
                d += sa * p(i) / pb;
            jac(i, col) = d;
        }
        jac(i, m) = big * (dp_dn(i) / pb - p(i) * sb * dp_dn(b) / (pb * pb));
    }

    const double rho2 = xbar.squaredNorm();
    const double sm = std::sin(big);
    const double cm = std::cos(big);
    const double x0 = xbar(0);
    const double q = x0 * x0 * sm * sm / rho2;
    const double denom = k * k + (1.0 - k * k) * q;
    for (int col = 0; col < m; ++col) {
        double dq = -2.0 * x0 * x0 * sm * sm * xbar(col) / (rho2 * rho2);
        if (col == 0)
            dq += 2.0 * x0 * sm * sm / rho2;
        if (col == a)
            dq += x0 * x0 * 2.0 * sm * cm * sa / rho2;
        jac(m, col) = -0.5 * (1.0 - k * k) * dq / denom;
    }
    jac(m, m) = 1.0;
    region = SpiralRegion{a, b};
    return true;
}

inline SpiralJacobian spiral_chart_jacobian(const Vector& xbar, double xn, double alpha, double k, double delta)
{
    if (xbar.size() + 1 > max_spiral_dim)
        throw error(errc::invalid_input, "spiral Jacobian supports n <= 16");
    SpiralJacobian out;
    if (!spiral_chart_jacobian_into(xbar, xn, alpha, k, delta, out.matrix, out.region))
        throw error(errc::near_singular_region, "too close to a pyramid face, an m-switching surface or the polar axis");
    return out;
}

} // namespace detail

/// Analytic derivative of spiral_stretch_transform at x (identity frame),
/// with the (case, sub-case) that produced it. Throws near-singular-region
/// within delta of a pyramid face or an m-switching surface.
inline SpiralJacobian spiral_transform_jacobian_analytic(const FundamentalPoint& x, const SpiralSpec& spec,
                                                          double delta = 1e-6)
{
    if (!detail::is_identity(spec.frame.matrix()))
        throw error(errc::invalid_input, "closed-form spiral Jacobian needs the identity frame");
    SpiralJacobian out = detail::spiral_chart_jacobian(x.chart_coords(), x.height(), spec.alpha, spec.k, delta);
    if (x.box() == Box::second) {
        // u = R o F o R with R(x) = (pi - x_1, ...), so J = D J_F D.
        out.matrix.row(0) *= -1.0;
        out.matrix.col(0) *= -1.0;
    }
    return out;
}

/// 2^{-(n+1)/2}, the certified lower bound for the spiral-transform Jacobian.
inline double spiral_jacobian_floor(int n) { return std::pow(2.0, -(n + 1) / 2.0); }

struct JacobianGridResult {
    double min_jacobian = std::numeric_limits<double>::infinity();
    Vector worst_point; // chart coordinates followed by phi = alpha x_n
    std::size_t points = 0;
};

namespace detail {

// Visits the cell-centred grid over [-pi/2, pi/2]^(n-1) x [0, 2pi) in
// (xbar, phi) and hands (point, q, p) to the visitor, where the spiral
// Jacobian at rate alpha is q + alpha p. Points inside the 1e-3 band around
// region boundaries are skipped.
inline double small_determinant(const SmallMatrix& a)
{
    switch (a.rows()) {
    case 3:
        return a.topLeftCorner<3, 3>().determinant();
    case 4:
        return a.topLeftCorner<4, 4>().determinant();
    default:
        return a.determinant();
    }
}

template <class Visitor>
void spiral_jacobian_grid(double k, int n, int grid, Visitor&& visit)
{
    if (n > max_spiral_dim)
        throw error(errc::invalid_input, "spiral Jacobian supports n <= 16");
    const int m = n - 1;
    const int dims = n;
    std::vector<int> idx(dims, 0);
    const double cube_step = pi / grid;
    const double phi_step = 2.0 * pi / grid;
    SmallVector xbar(m);
    SmallMatrix jac;
    SpiralRegion region;
    Vector point(n);
    for (;;) {
        for (int i = 0; i < m; ++i)
            xbar(i) = -half_pi + (idx[i] + 0.5) * cube_step;
        const double phi = (idx[m] + 0.5) * phi_step;
        // alpha = 1, x_n = phi gives q + p; zeroing the alpha column of the
        // chart rows gives q alone.
        if (spiral_chart_jacobian_into(xbar, phi, 1.0, k, 1e-3, jac, region)) {
            const double full = small_determinant(jac);
            jac.col(m).head(m).setZero();
            const double q = small_determinant(jac);
            point.head(m) = xbar;
            point(m) = phi;
            visit(point, q, full - q);
        }
        int d = 0;
        while (d < dims && ++idx[d] == grid)
            idx[d++] = 0;
        if (d == dims)
            break;
    }
}

} // namespace detail

/// Minimum analytic Jacobian of the spiral transform with rate alpha over the
/// verification grid.
inline JacobianGridResult spiral_jacobian_grid_min(double k, int n, double alpha, int grid)
{
    require_factor(k, "K");
    if (n < 3 || grid < 2)
        throw error(errc::invalid_input, "need n >= 3 and grid >= 2");
    JacobianGridResult out;
    detail::spiral_jacobian_grid(k, n, grid, [&](const Vector& point, double q, double p) {
        const double j = q + alpha * p;
        ++out.points;
        if (j < out.min_jacobian) {
            out.min_jacobian = j;
            out.worst_point = point;
        }
    });
    return out;
}

struct AlphaCertificate {
    double alpha = 0.0;
    double min_jacobian = 0.0;        // on the certification grid
    double min_jacobian_refined = 0.0; // on the 2x refinement
    double bound = 0.0;
    int grid = 0;
};

namespace detail {

// Accepts any k > 0, compressions included.
inline AlphaCertificate select_alpha_any(double k, int n, int orientation, int grid)
{
    if (!std::isfinite(k) || !(k > 0.0))
        throw error(errc::invalid_input, "K must be positive");
    if (n < 3 || grid < 2)
        throw error(errc::invalid_input, "select_alpha needs n >= 3 and grid >= 2");
    const double sign = orientation < 0 ? -1.0 : 1.0;
    const double bound = spiral_jacobian_floor(n);

    auto collect = [&](int g) {
        std::vector<std::array<double, 2>> qp;
        detail::spiral_jacobian_grid(k, n, g, [&](const Vector&, double q, double p) { qp.push_back({q, p}); });
        return qp;
    };
    auto min_at = [](const std::vector<std::array<double, 2>>& qp, double alpha) {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& v : qp)
            lo = std::min(lo, v[0] + alpha * v[1]);
        return lo;
    };

    const auto coarse = collect(grid);
    std::vector<std::array<double, 2>> fine;
    double magnitude = 0.5;
    for (int step = 0; step < 60; ++step, magnitude *= 0.5) {
        const double alpha = sign * magnitude;
        const double lo = min_at(coarse, alpha);
        if (!(lo > bound))
            continue;
        if (fine.empty())
            fine = collect(2 * grid);
        const double lo_fine = min_at(fine, alpha);
        if (!(lo_fine > bound))
            continue;
        return {alpha, lo, lo_fine, bound, grid};
    }
    throw error(errc::invalid_input, "no spiral rate certified down to 2^-60");
}

} // namespace detail

/// Largest |alpha| in 1/2, 1/4, ... (sign = orientation) whose analytic
/// spiral Jacobian exceeds 2^{-(n+1)/2} on the grid and on its 2x refinement.
inline AlphaCertificate select_alpha(double k, int n, int orientation = 1, int grid = 33)
{
    require_factor(k, "K");
    return detail::select_alpha_any(k, n, orientation, grid);
}

} // namespace qcmap
