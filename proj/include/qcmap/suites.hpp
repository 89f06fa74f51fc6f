#pragma once
// Verification suites: each runs a family of bound checks on a grid or a
// seeded sample and returns one Check per bound.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qcmap/canonical_maps.hpp"
#include "qcmap/distortion.hpp"
#include "qcmap/zorich.hpp"

namespace qcmap {

enum class Relation { le, lt, ge, gt };

inline const char* to_string(Relation r)
{
    switch (r) {
    case Relation::le: return "<=";
    case Relation::lt: return "<";
    case Relation::ge: return ">=";
    case Relation::gt: return ">";
    }
    return "?";
}

struct Check {
    std::string name;
    Relation relation = Relation::le;
    double bound = 0.0;
    double worst_value = 0.0;
    Vector worst_point;
    std::size_t evaluated = 0;
    std::size_t failures = 0;
    bool pass = false;
    std::string message;

    double margin() const
    {
        return relation == Relation::le || relation == Relation::lt ? bound - worst_value : worst_value - bound;
    }
};

struct SuiteReport {
    std::string suite;
    int n = 3;
    std::vector<Check> checks;
    std::vector<std::pair<std::string, double>> info;

    bool pass() const
    {
        if (checks.empty())
            return false;
        for (const Check& c : checks)
            if (!c.pass)
                return false;
        return true;
    }
};

struct SuiteConfig {
    int n = 3;
    double k = 2.0;
    double l = 2.0;
    std::optional<double> alpha; // empty: select_alpha
    int grid = 0;                // 0: suite default
    int samples = 0;             // 0: suite default
    double tol = 0.0;            // 0: suite default
    std::uint64_t seed = 1;
    std::optional<double> bound; // replaces the headline bound of a suite
};

/// Turns a margin-based report into a Check on value relation bound.
inline Check make_check(std::string name, Relation rel, double bound, const GridReport& r)
{
    Check c;
    c.name = std::move(name);
    c.relation = rel;
    c.bound = bound;
    const bool upper = rel == Relation::le || rel == Relation::lt;
    c.worst_value = upper ? bound - r.worst_margin : bound + r.worst_margin;
    c.worst_point = r.worst_point;
    c.evaluated = r.evaluated;
    c.failures = r.failures;
    c.pass = r.pass;
    c.message = r.failure_message;
    return c;
}

/// Evaluates value(x) relation bound over points.
template <class Value>
Check check_points(std::string name, Relation rel, double bound, const std::vector<Vector>& points, Value&& value)
{
    const bool upper = rel == Relation::le || rel == Relation::lt;
    const bool strict = rel == Relation::lt || rel == Relation::gt;
    const GridReport r =
        verify_points(points, [&](const Vector& x) { return upper ? bound - value(x) : value(x) - bound; }, strict);
    return make_check(std::move(name), rel, bound, r);
}

template <class Value>
Check check_grid(std::string name, Relation rel, double bound, const GridRegion& region, Value&& value)
{
    const bool upper = rel == Relation::le || rel == Relation::lt;
    const bool strict = rel == Relation::lt || rel == Relation::gt;
    const GridReport r =
        grid_verify(region, [&](const Vector& x) { return upper ? bound - value(x) : value(x) - bound; }, strict);
    return make_check(std::move(name), rel, bound, r);
}

namespace detail {

inline void require_suite_dim(int n)
{
    if (n < 3 || n > 8)
        throw error(errc::invalid_input, "suites support 3 <= n <= 8");
}

/// Keeps first-box chart points at least margin away from the cube faces,
/// the pyramid faces (ties of the largest |x_i|) and the polar axis.
inline bool clear_of_pyramids(const Vector& xbar, double margin)
{
    double top = 0.0;
    double second = 0.0;
    for (int i = 0; i < xbar.size(); ++i) {
        const double v = std::abs(xbar(i));
        if (v > top) {
            second = top;
            top = v;
        } else if (v > second) {
            second = v;
        }
    }
    return top <= half_pi - margin && top - second >= margin;
}

inline int argmax_abs(const Vector& v)
{
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best)))
            best = i;
    return best;
}

template <class Rng>
Vector random_point(int n, Rng& rng, double log_lo, double log_hi)
{
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> lr(log_lo, log_hi);
    Vector y(n);
    do {
        for (int i = 0; i < n; ++i)
            y(i) = normal(rng);
    } while (y.norm() < 1e-6);
    return y.normalized() * std::exp(lr(rng));
}

inline double h1_bound(double k, double l)
{
    const double s = k * k + l * l;
    return std::sqrt(1.25 + s * s + 3.0 * s);
}

inline double h2_bound(double k, double l) { return 1.0 + k * k + l * l; }

} // namespace detail

/// L = pi^2 (2 + sqrt 6) / 8, the chart's bilipschitz constant.
inline double chart_lipschitz() { return pi * pi * (2.0 + std::sqrt(6.0)) / 8.0; }

// ---------------------------------------------------------------------------

/// Round trip Z(Z^{-1}(y)) = y, the composition law for stretch o rotation,
/// and (n = 3) the linear distortion bound 8L^2 for Z.
inline SuiteReport suite_zorich(const SuiteConfig& cfg)
{
    detail::require_suite_dim(cfg.n);
    const int n = cfg.n;
    const int samples = cfg.samples > 0 ? cfg.samples : 10000;
    SuiteReport rep{"zorich", n, {}, {}};

    std::mt19937_64 rng(cfg.seed);
    std::vector<Vector> ys;
    for (int i = 0; i < samples; ++i)
        ys.push_back(detail::random_point(n, rng, -3.0, 3.0));
    rep.checks.push_back(check_points("roundtrip relative error", Relation::le, cfg.tol > 0.0 ? cfg.tol : 1e-12, ys,
                                      [](const Vector& y) { return (zorich_forward(zorich_inverse(y)) - y).norm() / y.norm(); }));

    const Matrix rot = planar_rotation(n, 0.7, 0, n - 1) * planar_rotation(n, -0.4, 1, 2);
    Vector sigma = Vector::Ones(n).normalized();
    const StretchSpec stretch(cfg.k, frame_from_direction(sigma));
    const double composition = composition_residual([&](const Vector& y) { return oriented_stretch(y, stretch); },
                                                    [&](const Vector& y) { return Vector(rot * y); }, n, samples,
                                                    cfg.seed + 1);
    Check comp;
    comp.name = "composition residual (stretch o rotation)";
    comp.bound = 1e-9;
    comp.worst_value = composition;
    comp.evaluated = static_cast<std::size_t>(samples);
    comp.pass = composition <= comp.bound;
    comp.failures = comp.pass ? 0 : 1;
    rep.checks.push_back(comp);

    if (n == 3) {
        const double margin = 1e-3;
        std::uniform_real_distribution<double> cube(-half_pi + margin, half_pi - margin);
        std::uniform_real_distribution<double> height(-2.0, 2.0);
        std::vector<Vector> xs;
        const int points = cfg.samples > 0 ? cfg.samples : 1000;
        for (int i = 0; i < points; ++i) {
            Vector x(3);
            x << cube(rng), cube(rng), height(rng);
            xs.push_back(x);
        }
        const double l = chart_lipschitz();
        rep.checks.push_back(check_points("linear distortion of Z", Relation::le, cfg.bound.value_or(8.0 * l * l), xs,
                                          [](const Vector& x) { return linear_distortion_numeric(zorich_map, x, 1e-5, 64); }));
    }
    return rep;
}

namespace detail {

/// Shared derivative checks for the transforms x -> (xbar, x_n + V(x)).
template <class Transform>
void vertical_shift_checks(SuiteReport& rep, const GridRegion& region, Transform&& transform, double dv_bound,
                           std::optional<double> dn_bound, double h1, double h2, double h_bound)
{
    const int n = rep.n;
    auto jac = [&](const Vector& x) { return finite_diff_jacobian(transform, x); };
    auto sv = [&](const Vector& x) { return svd_small(jac(x)); };
    rep.checks.push_back(check_grid("|dV/dx_a|, a = argmax |x_i|", Relation::le, dv_bound, region, [&](const Vector& x) {
        const Matrix d = jac(x);
        return std::abs(d(n - 1, argmax_abs(x.head(n - 1))));
    }));
    if (dn_bound)
        rep.checks.push_back(check_grid("|dV/dx_n|", Relation::lt, *dn_bound, region, [&](const Vector& x) {
            return std::abs(jac(x)(n - 1, n - 1) - 1.0);
        }));
    rep.checks.push_back(check_grid("||T'||", Relation::le, h1, region, [&](const Vector& x) { return sv(x)(0); }));
    rep.checks.push_back(
        check_grid("||(T')^-1||", Relation::le, h2, region, [&](const Vector& x) { return 1.0 / sv(x)(n - 1); }));
    rep.checks.push_back(check_grid("linear dilatation H", Relation::le, h_bound, region, [&](const Vector& x) {
        const Vector s = sv(x);
        return s(0) / s(n - 1);
    }));
}

inline GridRegion chart_region(int n, int per_axis, double lo_n, double hi_n, int n_res)
{
    GridRegion region;
    region.lo = Vector::Constant(n, -half_pi);
    region.hi = Vector::Constant(n, half_pi);
    region.lo(n - 1) = lo_n;
    region.hi(n - 1) = hi_n;
    region.resolution.assign(n, per_axis);
    region.resolution[n - 1] = n_res;
    region.keep = [n](const Vector& x) { return clear_of_pyramids(x.head(n - 1), 1e-3); };
    return region;
}

template <class Exact, class Raw, class Sampler>
Check conjugacy_check(std::string name, int samples, std::uint64_t seed, Sampler&& sample, Exact&& exact, Raw&& raw)
{
    std::mt19937_64 rng(seed);
    std::vector<Vector> xs;
    for (int i = 0; i < samples; ++i)
        xs.push_back(sample(rng).coords());
    return check_points(std::move(name), Relation::le, 1e-9, xs, [&](const Vector& x) {
        const FundamentalPoint p = FundamentalPoint::in_b(x);
        return (zorich_forward(exact(p)) - raw(zorich_forward(p))).norm();
    });
}

} // namespace detail

/// Radial stretch: conjugacy Z o R~ = R o Z and the derivative bounds of R~.
inline SuiteReport suite_stretch(const SuiteConfig& cfg)
{
    detail::require_suite_dim(cfg.n);
    require_factor(cfg.k, "K");
    const int n = cfg.n;
    const double k = cfg.k;
    SuiteReport rep{"stretch", n, {}, {}};
    const int samples = cfg.samples > 0 ? cfg.samples : 10000;
    rep.checks.push_back(detail::conjugacy_check(
        "conjugacy |Z(R~(x)) - R(Z(x))|", samples, cfg.seed,
        [&](auto& rng) { return sample_fundamental(n, rng); },
        [&](const FundamentalPoint& p) { return radial_stretch_transform(p, k); },
        [&](const Vector& y) { return radial_stretch(y, k); }));

    const int grid = cfg.grid > 0 ? cfg.grid : (n == 3 ? 120 : 24);
    const GridRegion region = detail::chart_region(n, grid, 0.0, 0.0, 1);
    const double h1 = detail::h1_bound(k, 1.0);
    const double h2 = detail::h2_bound(k, 1.0);
    detail::vertical_shift_checks(
        rep, region,
        [&](const Vector& x) { return radial_stretch_transform(FundamentalPoint(x, Box::first), k).coords(); },
        k * k - 1.0, std::nullopt, h1, h2, cfg.bound.value_or(h1 * h2));
    rep.info.emplace_back("K", k);
    return rep;
}

/// Interpolation shell with t = 0, s = -(2|ln(K/L)| + 1): conjugacy and the
/// derivative bounds of R~_I.
inline SuiteReport suite_interp(const SuiteConfig& cfg)
{
    detail::require_suite_dim(cfg.n);
    const int n = cfg.n;
    const double t = 0.0;
    const double s = -InterpSpec::minimal_depth(cfg.k, cfg.l);
    Matrix axis = Matrix::Identity(n, n);
    axis.col(0).swap(axis.col(n - 1));
    axis.col(1) *= -1.0;
    const InterpSpec spec(cfg.k, cfg.l, s, t, Frame(axis));
    SuiteReport rep{"interp", n, {}, {}};
    const int samples = cfg.samples > 0 ? cfg.samples : 10000;
    rep.checks.push_back(detail::conjugacy_check(
        "conjugacy |Z(R~_I(x)) - R_I(Z(x))|", samples, cfg.seed,
        [&](auto& rng) { return sample_fundamental(n, rng, s, t); },
        [&](const FundamentalPoint& p) { return interp_stretch_transform(p, spec); },
        [&](const Vector& y) { return interp_stretch(y, spec); }));

    const int grid = cfg.grid > 0 ? cfg.grid : (n == 3 ? 40 : 16);
    const GridRegion region = detail::chart_region(n, grid, s + 1e-3, t - 1e-3, grid);
    const double k = cfg.k;
    const double l = cfg.l;
    const double h1 = detail::h1_bound(k, l);
    const double h2 = detail::h2_bound(k, l);
    detail::vertical_shift_checks(
        rep, region,
        [&](const Vector& x) { return interp_stretch_transform(FundamentalPoint(x, Box::first), spec).coords(); },
        k * k + l * l - 2.0, 0.5, h1, h2, cfg.bound.value_or(h1 * h2));
    rep.info.emplace_back("K", k);
    rep.info.emplace_back("L", l);
    rep.info.emplace_back("s", s);
    rep.info.emplace_back("t", t);
    return rep;
}

/// Spiral stretch: conjugacy, the analytic Jacobian against finite
/// differences per (case, sub-case), and the certified Jacobian floor.
inline SuiteReport suite_spiral(const SuiteConfig& cfg)
{
    detail::require_suite_dim(cfg.n);
    require_factor(cfg.k, "K");
    const int n = cfg.n;
    const double k = cfg.k;
    const int grid = cfg.grid > 0 ? cfg.grid : (n == 3 ? 33 : 12);
    SuiteReport rep{"spiral", n, {}, {}};

    double alpha;
    if (cfg.alpha) {
        alpha = *cfg.alpha;
    } else {
        const AlphaCertificate cert = select_alpha(k, n, 1, grid);
        alpha = cert.alpha;
        rep.info.emplace_back("min_jacobian_refined_grid", cert.min_jacobian_refined);
    }
    rep.info.emplace_back("K", k);
    rep.info.emplace_back("alpha", alpha);
    const SpiralSpec spec(k, alpha, Frame::identity(n));

    const int samples = cfg.samples > 0 ? cfg.samples : 10000;
    rep.checks.push_back(detail::conjugacy_check(
        "conjugacy |Z(R~_s(x)) - R_s(Z(x))|", samples, cfg.seed,
        [&](auto& rng) { return sample_fundamental(n, rng); },
        [&](const FundamentalPoint& p) { return spiral_stretch_transform(p, spec); },
        [&](const Vector& y) { return spiral_stretch(y, spec); }));

    const double floor = cfg.bound.value_or(spiral_jacobian_floor(n));
    const JacobianGridResult jr = spiral_jacobian_grid_min(k, n, alpha, grid);
    Check jc;
    jc.name = "analytic Jacobian on the (xbar, alpha x_n) grid";
    jc.relation = Relation::gt;
    jc.bound = floor;
    jc.worst_value = jr.min_jacobian;
    jc.worst_point = jr.worst_point;
    jc.evaluated = jr.points;
    jc.pass = jr.points > 0 && jr.min_jacobian > floor;
    jc.failures = jc.pass ? 0 : 1;
    rep.checks.push_back(jc);
    rep.info.emplace_back("jacobian_margin", jr.min_jacobian - floor);

    // Finite differences per sub-case, in first-box chart coordinates.
    const int per_case = cfg.samples > 0 ? cfg.samples : 1000;
    const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-5;
    const int cases = n == 3 ? 2 : 3;
    std::vector<std::vector<Vector>> buckets(cases * cases);
    std::mt19937_64 rng(cfg.seed + 7);
    std::uniform_real_distribution<double> cube(-half_pi, half_pi);
    std::uniform_real_distribution<double> height(0.0, 2.0 * pi / std::abs(alpha));
    const std::size_t max_tries = static_cast<std::size_t>(per_case) * buckets.size() * 400;
    for (std::size_t tries = 0; tries < max_tries; ++tries) {
        Vector x(n);
        for (int i = 0; i < n - 1; ++i)
            x(i) = cube(rng);
        x(n - 1) = height(rng);
        if (x.head(n - 1).cwiseAbs().maxCoeff() > half_pi - 1e-3)
            continue;
        SpiralRegion region;
        try {
            region = detail::spiral_chart_jacobian(x.head(n - 1), x(n - 1), alpha, k, 1e-3).region;
        } catch (const error&) {
            continue;
        }
        auto& b = buckets[std::min(region.max_index, cases - 1) * cases + std::min(region.min_index, cases - 1)];
        if (static_cast<int>(b.size()) < per_case)
            b.push_back(x);
        bool full = true;
        for (const auto& bb : buckets)
            full = full && static_cast<int>(bb.size()) >= per_case;
        if (full)
            break;
    }
    auto chart = [&](const Vector& x) { return detail::spiral_chart(x.head(n - 1), x(n - 1), alpha, k); };
    for (int a = 0; a < cases; ++a) {
        for (int b = 0; b < cases; ++b) {
            const SpiralRegion label{a, b};
            const auto& pts = buckets[a * cases + b];
            Check c = check_points("analytic vs finite-difference Jacobian, case " + label.label(), Relation::le, tol,
                                   pts, [&](const Vector& x) {
                                       const Matrix an =
                                           detail::spiral_chart_jacobian(x.head(n - 1), x(n - 1), alpha, k, 1e-3).matrix;
                                       const Matrix fd = finite_diff_jacobian(chart, x);
                                       return (an - fd).norm() / an.norm();
                                   });
            if (static_cast<int>(pts.size()) < per_case) {
                c.pass = false;
                c.message = "only " + std::to_string(pts.size()) + " samples found in this sub-case";
            }
            rep.checks.push_back(c);
        }
    }
    return rep;
}

/// Eigenvalue window of the chart's bilipschitz form over region A,
/// parametrized as (x, y) = (x, v x) with x in (0, pi/2], v in [-1, 1].
inline SuiteReport suite_bilipschitz(const SuiteConfig& cfg)
{
    if (cfg.n != 3)
        throw error(errc::invalid_input, "the bilipschitz suite is for n = 3");
    const int grid = cfg.grid > 0 ? cfg.grid : 200;
    const double slack = 1e-9;
    GridRegion region;
    region.lo = Vector(2);
    region.hi = Vector(2);
    region.lo << 0.0, -1.0;
    region.hi << half_pi, 1.0;
    region.resolution = {grid, grid};
    auto eig = [](const Vector& p) { return symmetric_eigenvalues(bilipschitz_form(p(0), p(1) * p(0))); };
    SuiteReport rep{"bilipschitz", 3, {}, {}};
    rep.checks.push_back(check_grid("smallest eigenvalue", Relation::ge, bilipschitz_lower() - slack, region,
                                    [&](const Vector& p) { return eig(p)[0]; }));
    rep.checks.push_back(check_grid("largest eigenvalue", Relation::le, cfg.bound.value_or(bilipschitz_upper()) + slack,
                                    region, [&](const Vector& p) { return eig(p)[1]; }));
    rep.info.emplace_back("window_lower", bilipschitz_lower());
    rep.info.emplace_back("window_upper", bilipschitz_upper());
    return rep;
}

inline SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg)
{
    if (name == "zorich")
        return suite_zorich(cfg);
    if (name == "stretch")
        return suite_stretch(cfg);
    if (name == "interp")
        return suite_interp(cfg);
    if (name == "spiral")
        return suite_spiral(cfg);
    if (name == "bilipschitz")
        return suite_bilipschitz(cfg);
    throw error(errc::invalid_input, "unknown suite " + name);
}

} // namespace qcmap
