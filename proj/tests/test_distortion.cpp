#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>

#include "qcmap/distortion.hpp"
#include "qcmap/zorich.hpp"

using namespace qcmap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

Vector smooth_map(const Vector& x)
{
    return vec({std::sin(x(0)) * x(1), std::exp(0.5 * x(2)) + x(0) * x(0), x(1) * x(2) * x(2)});
}

Matrix smooth_map_derivative(const Vector& x)
{
    Matrix d(3, 3);
    d << std::cos(x(0)) * x(1), std::sin(x(0)), 0.0, 2.0 * x(0), 0.0, 0.5 * std::exp(0.5 * x(2)), 0.0, x(2) * x(2),
        2.0 * x(1) * x(2);
    return d;
}

// Chart of the 2D cube onto the upper hemisphere, region |y| <= x.
Vector chart_2d(const Vector& p)
{
    const double r = p.norm();
    return vec({p(0) * std::sin(p(0)) / r, p(1) * std::sin(p(0)) / r, std::cos(p(0))});
}

} // namespace

TEST_CASE("finite differences reproduce linear maps", "[distortion][fd]")
{
    Matrix a(3, 3);
    a << 2.0, -1.0, 0.5, 0.0, 3.0, 1.0, 4.0, 0.0, -2.0;
    const Matrix d = finite_diff_jacobian([&](const Vector& x) { return Vector(a * x); }, vec({0.3, -1.0, 2.0}));
    CHECK((d - a).norm() <= 1e-8);
}

TEST_CASE("finite-difference error decays at second order", "[distortion][fd]")
{
    const Vector x = vec({0.7, -0.4, 0.3});
    const Matrix exact = smooth_map_derivative(x);
    const double e1 = (finite_diff_jacobian(smooth_map, x, 1e-2) - exact).norm();
    const double e2 = (finite_diff_jacobian(smooth_map, x, 5e-3) - exact).norm();
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("finite differences report stencil failures", "[distortion][fd]")
{
    try {
        finite_diff_jacobian(
            [](const Vector& x) {
                if (x(0) > 0.0)
                    throw error(errc::outside_shell, "nope");
                return x;
            },
            vec({0.0, 0.0, 0.0}));
        FAIL("stencil failure not reported");
    } catch (const error& e) {
        CHECK(e.code() == errc::stencil);
    }
}

TEST_CASE("dilatations of diag(2, 1, 1)", "[distortion]")
{
    Matrix d = Matrix::Identity(3, 3);
    d(0, 0) = 2.0;
    const DistortionReport r = distortion_from_matrix(d);
    CHECK_THAT(r.op_norm, WithinRel(2.0, 1e-14));
    CHECK_THAT(r.min_sv, WithinRel(1.0, 1e-14));
    CHECK_THAT(r.jac, WithinRel(2.0, 1e-14));
    CHECK_THAT(r.k_outer, WithinRel(4.0, 1e-14));
    CHECK_THAT(r.k_inner, WithinRel(2.0, 1e-14));
    CHECK_THAT(r.h_linear, WithinRel(2.0, 1e-14));
}

TEST_CASE("rotations are conformal", "[distortion]")
{
    const Matrix rot = Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.2, -1.0, 0.4).normalized()).toRotationMatrix();
    const DistortionReport r = distortion_report([&](const Vector& x) { return Vector(rot * x); }, vec({1.0, 2.0, 3.0}));
    CHECK_THAT(r.k_outer, WithinAbs(1.0, 1e-8));
    CHECK_THAT(r.k_inner, WithinAbs(1.0, 1e-8));
    CHECK_THAT(r.h_linear, WithinAbs(1.0, 1e-8));
}

TEST_CASE("orientation-reversing or singular derivatives are degenerate", "[distortion]")
{
    Matrix flip = Matrix::Identity(3, 3);
    flip(2, 2) = -1.0;
    CHECK_THROWS_AS(distortion_from_matrix(flip), error);
    Matrix flat = Matrix::Identity(3, 3);
    flat(1, 1) = 0.0;
    try {
        distortion_from_matrix(flat);
        FAIL("singular derivative accepted");
    } catch (const error& e) {
        CHECK(e.code() == errc::degenerate_derivative);
    }
}

TEST_CASE("direction sample", "[distortion]")
{
    for (int n : {3, 4}) {
        const auto dirs = sample_directions(n, 64, 5);
        REQUIRE(dirs.size() == 64);
        for (const Vector& d : dirs)
            CHECK_THAT(d.norm(), WithinAbs(1.0, 1e-14));
        CHECK((dirs[0] - basis_vector(n, 0)).norm() == 0.0);
        CHECK((dirs[1] + basis_vector(n, 0)).norm() == 0.0);
    }
    CHECK_THROWS_AS(sample_directions(3, 5), error);
}

TEST_CASE("numeric linear distortion of a linear map", "[distortion]")
{
    Matrix d = Matrix::Identity(3, 3);
    d(0, 0) = 2.0;
    const double h = linear_distortion_numeric([&](const Vector& x) { return Vector(d * x); }, vec({0.1, 0.2, 0.3}), 1e-3);
    CHECK_THAT(h, WithinRel(2.0, 1e-9));
}

TEST_CASE("numeric linear distortion of the Zorich map stays under 8 L^2", "[distortion][zorich]")
{
    const double l = std::pow(pi, 2) * (2.0 + std::sqrt(6.0)) / 8.0;
    for (const Vector& x : {vec({0.3, 0.2, 0.0}), vec({1.5, -1.4, 1.0}), vec({-0.01, 1.2, -2.0})}) {
        const double h = linear_distortion_numeric(zorich_map, x, 1e-5);
        CHECK(h >= 1.0);
        CHECK(h <= 8.0 * l * l);
    }
}

TEST_CASE("bilipschitz form at the face midpoint", "[distortion][bilipschitz]")
{
    const Eigen::Matrix2d b = bilipschitz_form(half_pi, 0.0);
    CHECK_THAT(b(0, 0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(b(1, 1), WithinRel(4.0 / (pi * pi), 1e-14));
    CHECK_THAT(b(0, 1), WithinAbs(0.0, 1e-15));
}

TEST_CASE("bilipschitz form is the Gram matrix of the chart derivative", "[distortion][bilipschitz]")
{
    for (const Vector& p : {vec({1.0, 0.3}), vec({0.4, -0.39}), vec({1.5, 1.2}), vec({0.05, 0.0})}) {
        const Matrix j = finite_diff_jacobian(chart_2d, p, 1e-7);
        const Matrix gram = j.transpose() * j;
        const Eigen::Matrix2d b = bilipschitz_form(p(0), p(1));
        CHECK((gram - Matrix(b)).norm() <= 1e-7);
    }
}

TEST_CASE("bilipschitz form validation", "[distortion][bilipschitz]")
{
    try {
        bilipschitz_form(0.0, 0.0);
        FAIL("origin accepted");
    } catch (const error& e) {
        CHECK(e.code() == errc::chart_singularity);
    }
    CHECK_THROWS_AS(bilipschitz_form(0.2, 0.5), error);
    CHECK_THROWS_AS(bilipschitz_form(2.0, 0.0), error);
}

TEST_CASE("symmetric 2x2 eigenvalues match a general eigensolver", "[distortion][bilipschitz]")
{
    for (const Vector& p : {vec({1.0, 0.3}), vec({half_pi, half_pi}), vec({0.2, -0.1})}) {
        const Eigen::Matrix2d b = bilipschitz_form(p(0), p(1));
        const auto mine = symmetric_eigenvalues(b);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(b);
        CHECK_THAT(mine[0], WithinAbs(es.eigenvalues()(0), 1e-14));
        CHECK_THAT(mine[1], WithinAbs(es.eigenvalues()(1), 1e-14));
    }
}

TEST_CASE("bilipschitz form eigenvalues over region A", "[distortion][bilipschitz]")
{
    // Corner value in closed form: B = [[1 + 1/pi^2, -1/pi^2], [-1/pi^2, 1/pi^2]].
    const double w = 1.0 / (pi * pi);
    const double corner_min = 0.5 * (1.0 + 2.0 * w) - std::hypot(0.5, w);
    const auto corner = symmetric_eigenvalues(bilipschitz_form(half_pi, half_pi));
    CHECK_THAT(corner[0], WithinAbs(corner_min, 1e-14));

    const double corrected_lower = 2.0 / (pi * pi * (2.0 + std::sqrt(6.0)));
    double lo = 1e300;
    double hi = 0.0;
    const int grid = 200;
    for (int i = 1; i <= grid; ++i) {
        for (int j = 0; j <= grid; ++j) {
            const double x = half_pi * i / grid;
            const double y = x * (-1.0 + 2.0 * j / grid);
            const auto e = symmetric_eigenvalues(bilipschitz_form(x, y));
            lo = std::min(lo, e[0]);
            hi = std::max(hi, e[1]);
        }
    }
    CHECK_THAT(lo, WithinAbs(corner_min, 1e-12));
    CHECK(lo >= corrected_lower);
    CHECK(lo < bilipschitz_lower());
    CHECK(hi <= bilipschitz_upper());
}

TEST_CASE("grid verification counts failures and keeps the worst point", "[distortion][grid]")
{
    const GridRegion region = GridRegion::cube(vec({-1.0, -1.0}), vec({1.0, 1.0}), 11);
    REQUIRE(region.size() == 121);
    const GridReport ok = grid_verify(region, [](const Vector& x) { return 2.0 - x.squaredNorm(); });
    CHECK(ok.pass);
    CHECK(ok.evaluated == 121);
    // Cell centres: the outermost ones sit at +-10/11.
    const double edge = 10.0 / 11.0;
    CHECK_THAT(ok.worst_margin, WithinAbs(2.0 - 2.0 * edge * edge, 1e-14));
    CHECK_THAT(std::abs(ok.worst_point(0)), WithinAbs(edge, 1e-15));

    const GridReport bad = grid_verify(region, [](const Vector& x) { return 0.5 - x.squaredNorm(); });
    CHECK_FALSE(bad.pass);
    CHECK(bad.failures > 0);

    const GridReport strict = grid_verify(region, [](const Vector& x) { return std::abs(x(0)); }, true);
    CHECK_FALSE(strict.pass);
    CHECK(strict.failures == 11);
}

TEST_CASE("grid verification turns exceptions into failures", "[distortion][grid]")
{
    const GridRegion region = GridRegion::cube(vec({-1.0, -1.0}), vec({1.0, 1.0}), 5);
    const GridReport r = grid_verify(region, [](const Vector& x) {
        if (x.norm() == 0.0)
            throw error(errc::undefined_at_origin, "origin");
        return 1.0;
    });
    CHECK_FALSE(r.pass);
    CHECK(r.failures == 1);
    CHECK(r.worst_point.norm() == 0.0);
    CHECK_FALSE(r.failure_message.empty());
}

TEST_CASE("grid verification result does not depend on the worker count", "[distortion][grid]")
{
    const GridRegion region = GridRegion::cube(vec({0.0, 0.0, 0.0}), vec({1.0, 2.0, 3.0}), 17);
    auto margin = [](const Vector& x) { return std::sin(3.0 * x(0)) * std::cos(x(1) * x(2)) + 0.9; };
    setenv("QCMAP_THREADS", "1", 1);
    const GridReport one = grid_verify(region, margin);
    setenv("QCMAP_THREADS", "4", 1);
    const GridReport four = grid_verify(region, margin);
    unsetenv("QCMAP_THREADS");
    CHECK(one.worst_margin == four.worst_margin);
    CHECK((one.worst_point - four.worst_point).norm() == 0.0);
    CHECK(one.failures == four.failures);
}

TEST_CASE("parallel chunks cover the range once and rethrow", "[distortion][grid]")
{
    std::atomic<std::size_t> sum{0};
    parallel_chunks(1000, 3, [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t i = b; i < e; ++i)
            sum += i;
    });
    CHECK(sum == 999u * 1000u / 2u);
    CHECK_THROWS_AS(parallel_chunks(10, 2,
                                    [](std::size_t b, std::size_t, unsigned) {
                                        if (b > 0)
                                            throw error(errc::invalid_input, "x");
                                    }),
                    error);
}
