#pragma once
// Zorich map for the cube chart g : [-pi/2, pi/2]^(n-1) -> upper half sphere,
// g(x) = (x sin M / |x|, cos M), M = max |x_i|, extended by reflections in the
// cube faces. The fundamental set B is two boxes times R:
//   first box  [-pi/2, pi/2] x [-pi/2, pi/2]^(n-2)
//   second box (pi/2, 3pi/2) x (-pi/2, pi/2)^(n-2)
// Points on the equator (any |x_i| = pi/2 after folding) always live in the
// first box; the second box is the reflection x_1 -> pi - x_1 with the last
// image coordinate negated.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "qcmap/vecgeom.hpp"

namespace qcmap {

enum class Box { first, second };

/// Coordinates in R^(n-1) with max-norm <= pi/2.
class ChartPoint {
public:
    explicit ChartPoint(Vector coords) : c_(std::move(coords))
    {
        if (c_.size() < 2 || !all_finite(c_))
            throw error(errc::invalid_input, "chart point needs at least two finite coordinates");
        if (c_.cwiseAbs().maxCoeff() > half_pi + 1e-12)
            throw error(errc::invalid_input, "chart point outside the cube");
    }
    const Vector& coords() const { return c_; }

private:
    Vector c_;
};

/// Canonical representative of a point of R^n / ~ inside B.
class FundamentalPoint {
public:
    FundamentalPoint(Vector coords, Box box) : c_(std::move(coords)), box_(box)
    {
        if (c_.size() < 3 || !all_finite(c_))
            throw error(errc::invalid_input, "fundamental point needs n >= 3 finite coordinates");
        const int m = static_cast<int>(c_.size()) - 1;
        constexpr double tol = 1e-12;
        if (box_ == Box::first) {
            for (int i = 0; i < m; ++i)
                if (std::abs(c_(i)) > half_pi + tol)
                    throw error(errc::invalid_input, "coordinate outside the first box");
        } else {
            if (!(c_(0) > half_pi - tol && c_(0) < 3.0 * half_pi + tol))
                throw error(errc::invalid_input, "x_1 outside the second box");
            for (int i = 1; i < m; ++i)
                if (std::abs(c_(i)) > half_pi + tol)
                    throw error(errc::invalid_input, "coordinate outside the second box");
        }
    }

    /// Classifies coords that already lie in B.
    static FundamentalPoint in_b(const Vector& coords)
    {
        const int m = static_cast<int>(coords.size()) - 1;
        bool first = true;
        for (int i = 0; i < m; ++i)
            first = first && std::abs(coords(i)) <= half_pi;
        return FundamentalPoint(coords, first ? Box::first : Box::second);
    }

    const Vector& coords() const { return c_; }
    Box box() const { return box_; }
    int dim() const { return static_cast<int>(c_.size()); }
    double height() const { return c_(c_.size() - 1); }

    /// First n-1 coordinates expressed in the chart cube (undoes the
    /// second-box reflection).
    Vector chart_coords() const
    {
        Vector p = c_.head(c_.size() - 1);
        if (box_ == Box::second)
            p(0) = pi - p(0);
        return p;
    }

private:
    Vector c_;
    Box box_;
};

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

namespace detail {

inline Vector chart_image(const Vector& p)
{
    const int m = static_cast<int>(p.size());
    Vector y(m + 1);
    const double r = p.norm();
    if (r == 0.0) {
        y.setZero();
        y(m) = 1.0;
        return y;
    }
    const double big = max_abs(p);
    y.head(m) = p * (std::sin(big) / r);
    y(m) = std::cos(big);
    return y;
}

struct Folded {
    double value;
    bool odd;
};

// Reflection group of one coordinate: x -> pi - x and x -> -pi - x generate
// a triangle wave of period 2pi with values in [-pi/2, pi/2].
inline Folded fold(double x)
{
    constexpr double period = 2.0 * pi;
    double t = x - period * std::floor((x + half_pi) / period);
    if (t > half_pi)
        return {pi - t, true};
    return {t, false};
}

} // namespace detail

/// g(p) on the closed cube; the origin maps to the north pole.
inline Vector sphere_chart(const ChartPoint& p) { return detail::chart_image(p.coords()); }

/// Z(x) = e^{x_n} h(x_1..x_{n-1}).
inline Vector zorich_forward(const FundamentalPoint& x)
{
    const int n = x.dim();
    Vector y = detail::chart_image(x.chart_coords());
    if (x.box() == Box::second)
        y(n - 1) = -y(n - 1);
    return std::exp(x.height()) * y;
}

/// Reflection-extended Zorich map on all of R^n.
inline Vector zorich_map(const Vector& x)
{
    const int n = static_cast<int>(x.size());
    Vector p(n - 1);
    bool odd = false;
    for (int i = 0; i < n - 1; ++i) {
        const auto f = detail::fold(x(i));
        p(i) = f.value;
        odd = odd != f.odd;
    }
    Vector y = detail::chart_image(p);
    if (odd)
        y(n - 1) = -y(n - 1);
    return std::exp(x(n - 1)) * y;
}

/// Z^{-1} onto the canonical representative in B.
inline FundamentalPoint zorich_inverse(const Vector& y)
{
    const int n = static_cast<int>(y.size());
    if (n < 3 || !all_finite(y))
        throw error(errc::invalid_input, "zorich_inverse: need finite y in R^n, n >= 3");
    const double r = y.norm();
    if (r == 0.0)
        throw error(errc::outside_range, "the origin is not in the range of the Zorich map");
    const Vector w = y / r;
    const Vector wbar = w.head(n - 1);
    const double wn = w(n - 1);
    const double lateral = wbar.norm();
    Vector x(n);
    x(n - 1) = std::log(r);

    const double big_w = max_abs(wbar);
    if (wn >= 0.0) {
        const double big = std::atan2(lateral, wn);
        if (big_w == 0.0)
            x.head(n - 1).setZero();
        else
            x.head(n - 1) = wbar * (big / big_w);
        for (int i = 0; i < n - 1; ++i)
            x(i) = std::clamp(x(i), -half_pi, half_pi);
        return FundamentalPoint(x, Box::first);
    }
    const double big = std::atan2(lateral, -wn);
    if (big >= half_pi) {
        x.head(n - 1) = wbar * (half_pi / big_w);
        return FundamentalPoint(x, Box::first);
    }
    if (big_w == 0.0)
        x.head(n - 1).setZero();
    else
        x.head(n - 1) = wbar * (big / big_w);
    x(0) = pi - x(0);
    return FundamentalPoint(x, Box::second);
}

/// Moves any x in R^n to its canonical representative in B, keeping Z(x).
inline FundamentalPoint canonicalize(const Vector& x)
{
    const int n = static_cast<int>(x.size());
    if (n < 3 || !all_finite(x))
        throw error(errc::invalid_input, "canonicalize: need finite x in R^n, n >= 3");
    Vector c = x;
    bool odd = false;
    bool equator = false;
    for (int i = 0; i < n - 1; ++i) {
        const auto f = detail::fold(x(i));
        c(i) = f.value;
        odd = odd != f.odd;
        equator = equator || std::abs(f.value) >= half_pi;
    }
    if (!odd || equator)
        return FundamentalPoint(c, Box::first);
    c(0) = pi - c(0);
    return FundamentalPoint(c, Box::second);
}

/// Distance in R^n / ~: the smallest Euclidean distance from a to a
/// representative of b's class among the reflected copies adjacent to a.
inline double quotient_distance(const FundamentalPoint& a, const FundamentalPoint& b)
{
    const int n = a.dim();
    if (b.dim() != n)
        throw error(errc::invalid_input, "quotient_distance: dimension mismatch");
    const int m = n - 1;
    const Vector& ac = a.coords();

    // Class of b: every v with fold(v_i) = f_i and total parity = target
    // (any parity on the equator).
    Vector f = b.coords().head(m);
    bool target_odd = false;
    if (b.box() == Box::second) {
        f(0) = pi - f(0);
        target_odd = true;
    }
    const bool equator = max_abs(f) >= half_pi - 1e-15;

    std::vector<double> even_rep(m), odd_rep(m);
    for (int i = 0; i < m; ++i) {
        const double k_even = std::round((ac(i) - f(i)) / (2.0 * pi));
        even_rep[i] = f(i) + 2.0 * pi * k_even;
        const double base_odd = pi - f(i);
        const double k_odd = std::round((ac(i) - base_odd) / (2.0 * pi));
        odd_rep[i] = base_odd + 2.0 * pi * k_odd;
    }
    const double dn = ac(m) - b.coords()(m);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        const bool odd = (std::popcount(mask) % 2) == 1;
        if (!equator && odd != target_odd)
            continue;
        double d2 = dn * dn;
        for (int i = 0; i < m; ++i) {
            const double v = (mask >> i) & 1u ? odd_rep[i] : even_rep[i];
            d2 += (ac(i) - v) * (ac(i) - v);
        }
        best = std::min(best, d2);
    }
    return std::sqrt(best);
}

/// Zorich transform of f at x: Z^{-1}(f(Z(x))).
template <class Map>
FundamentalPoint transform_eval(Map&& f, const FundamentalPoint& x)
{
    const Vector y = f(zorich_forward(x));
    if (!all_finite(y) || y.norm() == 0.0)
        throw error(errc::transform_undefined, "f(Z(x)) is zero or not finite");
    return zorich_inverse(y);
}

/// Uniform sample of B with heights in [height_lo, height_hi].
template <class Rng>
FundamentalPoint sample_fundamental(int n, Rng& rng, double height_lo = -2.0, double height_hi = 2.0)
{
    std::uniform_real_distribution<double> unit(-half_pi, half_pi);
    std::uniform_real_distribution<double> height(height_lo, height_hi);
    std::bernoulli_distribution second(0.5);
    Vector x(n);
    for (int i = 0; i < n - 1; ++i)
        x(i) = unit(rng);
    x(n - 1) = height(rng);
    if (second(rng)) {
        x(0) += pi;
        if (x(0) <= half_pi)
            x(0) = std::nextafter(half_pi, pi);
        return canonicalize(x);
    }
    return FundamentalPoint(x, Box::first);
}

/// Max quotient distance between transform(f o g) and transform(f) o
/// transform(g) over seeded samples of B.
template <class MapF, class MapG>
double composition_residual(MapF&& f, MapG&& g, int n, int samples, std::uint64_t seed = 1)
{
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const FundamentalPoint x = sample_fundamental(n, rng);
        const auto fg = [&](const Vector& y) { return f(g(y)); };
        const FundamentalPoint direct = transform_eval(fg, x);
        const FundamentalPoint chained = transform_eval(f, transform_eval(g, x));
        worst = std::max(worst, quotient_distance(direct, chained));
    }
    return worst;
}

} // namespace qcmap
