#include <doctest.h>

#include <cmath>

#include "stablecond/errors.hpp"
#include "stablecond/geometry.hpp"

using namespace stablecond;

TEST_SUITE("geometry") {
    TEST_CASE("Direction normalizes and rejects degenerate input") {
        Direction v({3, 4});
        CHECK(v[0] == doctest::Approx(0.6));
        CHECK(v[1] == doctest::Approx(0.8));
        CHECK_THROWS(Direction({0, 0}));
        CHECK_THROWS(Direction({NAN, 1}));
    }

    TEST_CASE("cap measures are normalized fractions of the sphere") {
        CHECK(surface_measure(CapSet::full_sphere(2)) == doctest::Approx(1.0));
        CHECK(surface_measure(CapSet(2, {Cap{Direction({1, 0}), M_PI / 2}})) == doctest::Approx(0.5));
        CHECK(surface_measure(CapSet(2, {Cap{Direction({1, 0}), M_PI / 4}})) == doctest::Approx(0.25));
        // hemisphere in d = 3, and two disjoint polar caps
        CHECK(surface_measure(CapSet(3, {Cap{Direction({0, 0, 1}), M_PI / 2}})) == doctest::Approx(0.5));
        double one = surface_measure(CapSet(3, {Cap{Direction({0, 0, 1}), 0.4}}));
        CHECK(one == doctest::Approx((1 - std::cos(0.4)) / 2).epsilon(1e-12));
        CapSet two(3, {Cap{Direction({0, 0, 1}), 0.4}, Cap{Direction({0, 0, -1}), 0.4}});
        CHECK(surface_measure(two) == doctest::Approx(2 * one).epsilon(1e-10));
        // overlapping caps count the overlap once
        CapSet same(3, {Cap{Direction({0, 0, 1}), 0.4}, Cap{Direction({0, 0, 1}), 0.4}});
        CHECK(surface_measure(same) == doctest::Approx(one).epsilon(1e-10));
    }

    TEST_CASE("angular distance and containment") {
        CapSet S(2, {Cap{Direction({1, 0}), M_PI / 4}});
        CHECK(angular_distance(S, Direction({0, 1})) == doctest::Approx(M_PI / 4));
        CHECK(angular_distance(S, Direction({1, 0.1})) == 0.0);
        double in[2] = {std::cos(0.1), std::sin(0.1)}, out[2] = {0, 1};
        CHECK(S.contains(in));
        CHECK_FALSE(S.contains(out));
        double x[2] = {2, 0};
        CHECK(euclidean_distance(S, x) == doctest::Approx(1.0));
    }

    TEST_CASE("planar set frame and measure") {
        PlanarSet D(Direction({0, 0, 1}), BallShape{{0, 0}, 1});
        CHECK(D.measure() == doctest::Approx(M_PI));
        double c[2] = {0.3, -0.2};
        Point p = D.from_plane(c, 0.5);
        CHECK(D.normal_coord(p) == doctest::Approx(0.5));
        auto back = D.plane_coords(p);
        CHECK(back[0] == doctest::Approx(0.3));
        CHECK(back[1] == doctest::Approx(-0.2));
        double far[3] = {3, 0, 4};
        CHECK(euclidean_distance(D, far) == doctest::Approx(std::hypot(2.0, 4.0)));
        PlanarSet B(Direction({0, 0, 1}), BoxShape{{-1, -2}, {1, 2}});
        CHECK(B.measure() == doctest::Approx(8.0));
    }

    TEST_CASE("boundary samples lie on the set") {
        Rng rng(1, 2);
        CapSet S(3, {Cap{Direction({1, 1, 0}), 0.3}});
        for (int i = 0; i < 200; ++i) {
            Point p = sample_boundary(S, rng);
            CHECK(norm(p) == doctest::Approx(1.0));
            CHECK(S.contains(p));
        }
        PlanarSet D(Direction({0, 1, 0}), BallShape{{0.5, 0}, 0.25});
        for (int i = 0; i < 200; ++i) {
            Point p = sample_boundary(D, rng);
            CHECK(std::abs(D.normal_coord(p)) < 1e-12);
            CHECK(D.plane_distance(D.plane_coords(p)) == 0.0);
        }
    }

    TEST_CASE("target membership") {
        CapSet S(2, {Cap{Direction({1, 0}), M_PI / 2}});
        Target t = ShellTarget{S, 0.1};
        double a[2] = {1.05, 0.0}, b[2] = {1.2, 0.0}, c[2] = {-1.0, 0.0};
        CHECK(in_target(a, t));
        CHECK_FALSE(in_target(b, t));
        CHECK_FALSE(in_target(c, t));
    }
}
