#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qcmap/zorich.hpp"

using namespace qcmap;
using Catch::Matchers::WithinAbs;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

} // namespace

TEST_CASE("Zorich map on the axes and diagonals of the cube", "[zorich]")
{
    for (double a : {0.1, 0.7, 1.3}) {
        for (double h : {-1.0, 0.0, 2.0}) {
            const Vector axis = zorich_map(vec({a, 0.0, h}));
            CHECK((axis - std::exp(h) * vec({std::sin(a), 0.0, std::cos(a)})).norm() <= 1e-14 * std::exp(h));
            const Vector diag = zorich_map(vec({a, -a, h}));
            const double s = std::sin(a) / std::sqrt(2.0);
            CHECK((diag - std::exp(h) * vec({s, -s, std::cos(a)})).norm() <= 1e-14 * std::exp(h));
        }
    }
}

TEST_CASE("Zorich map sends the cube centre to the pole and the faces to the equator", "[zorich]")
{
    CHECK((zorich_map(vec({0.0, 0.0, 0.0})) - vec({0.0, 0.0, 1.0})).norm() == 0.0);
    const Vector face = zorich_map(vec({half_pi, 0.4, 0.3}));
    CHECK_THAT(face(2), WithinAbs(0.0, 1e-15));
    CHECK_THAT(face.norm(), WithinAbs(std::exp(0.3), 1e-14));
}

TEST_CASE("Zorich map is periodic and flips the last coordinate under one reflection", "[zorich]")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector x = vec({u(rng), u(rng), u(rng), 0.5 * u(rng)});
        Vector shifted = x;
        shifted(1) += 2.0 * pi;
        CHECK((zorich_map(shifted) - zorich_map(x)).norm() <= 1e-12 * zorich_map(x).norm());
        Vector reflected = x;
        reflected(0) = pi - x(0);
        Vector expect = zorich_map(x);
        expect(3) = -expect(3);
        CHECK((zorich_map(reflected) - expect).norm() <= 1e-12 * expect.norm());
    }
}

TEST_CASE("Zorich round trip for n = 3, 4, 5", "[zorich]")
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> lr(-5.0, 5.0);
    for (int n : {3, 4, 5}) {
        double worst = 0.0;
        for (int trial = 0; trial < 5000; ++trial) {
            Vector y(n);
            for (int i = 0; i < n; ++i)
                y(i) = normal(rng);
            y *= std::exp(lr(rng)) / y.norm();
            worst = std::max(worst, (zorich_forward(zorich_inverse(y)) - y).norm() / y.norm());
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("Zorich inverse of special points", "[zorich]")
{
    try {
        zorich_inverse(Vector::Zero(3));
        FAIL("origin accepted");
    } catch (const error& e) {
        CHECK(e.code() == errc::outside_range);
    }
    const FundamentalPoint south = zorich_inverse(vec({0.0, 0.0, -2.0}));
    CHECK(south.box() == Box::second);
    CHECK((zorich_forward(south) - vec({0.0, 0.0, -2.0})).norm() <= 1e-15);
    const FundamentalPoint equator = zorich_inverse(vec({0.0, 3.0, 0.0}));
    CHECK(equator.box() == Box::first);
    CHECK_THAT(equator.coords()(1), WithinAbs(half_pi, 1e-15));
}

TEST_CASE("canonicalize keeps the image and lands in B", "[zorich]")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        const Vector x = vec({u(rng), u(rng), 0.2 * u(rng)});
        const FundamentalPoint c = canonicalize(x);
        CHECK((zorich_forward(c) - zorich_map(x)).norm() <= 1e-12 * zorich_map(x).norm());
    }
}

TEST_CASE("quotient distance ignores the choice of representative", "[zorich]")
{
    const FundamentalPoint a(vec({0.3, -0.2, 0.1}), Box::first);
    const FundamentalPoint mirror = canonicalize(vec({pi - 0.3, -0.2, 0.1}));
    CHECK(mirror.box() == Box::second);
    CHECK_THAT(quotient_distance(a, canonicalize(vec({0.3 + 2.0 * pi, -0.2 - 2.0 * pi, 0.1}))), WithinAbs(0.0, 1e-12));

    const FundamentalPoint b(vec({0.35, -0.1, 0.3}), Box::first);
    const double euclid = (a.coords() - b.coords()).norm();
    CHECK_THAT(quotient_distance(a, b), WithinAbs(euclid, 1e-15));
    CHECK_THAT(quotient_distance(b, a), WithinAbs(euclid, 1e-15));

    // Across the face x_1 = pi/2 the nearest copy is the reflected one.
    const FundamentalPoint near_face(vec({half_pi - 0.01, 0.0, 0.0}), Box::first);
    const FundamentalPoint other_side = canonicalize(vec({half_pi + 0.01, 0.0, 0.0}));
    CHECK_THAT(quotient_distance(near_face, other_side), WithinAbs(0.02, 1e-12));
}

TEST_CASE("composition law for a rotation and a scaled inverse rotation", "[zorich]")
{
    const Matrix rot = Eigen::AngleAxisd(0.8, Eigen::Vector3d(1.0, 2.0, -1.0).normalized()).toRotationMatrix();
    const double residual = composition_residual([&](const Vector& y) { return Vector(rot * y); },
                                                 [&](const Vector& y) { return Vector(rot.transpose() * y * 2.0); }, 3,
                                                 2000, 7);
    CHECK(residual <= 1e-9);
}

TEST_CASE("fundamental point validation", "[zorich]")
{
    CHECK_THROWS_AS(FundamentalPoint(vec({2.0, 0.0, 0.0}), Box::first), error);
    CHECK_THROWS_AS(FundamentalPoint(vec({0.0, 0.0, 0.0}), Box::second), error);
    CHECK_THROWS_AS(FundamentalPoint(vec({0.0, 0.0}), Box::first), error);
    CHECK_NOTHROW(FundamentalPoint(vec({pi, 0.0, 0.0}), Box::second));
}
