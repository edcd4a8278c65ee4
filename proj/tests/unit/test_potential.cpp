#include <doctest.h>

#include <cmath>

#include "stablecond/errors.hpp"
#include "stablecond/potential.hpp"
#include "stablecond/specfun.hpp"

using namespace stablecond;

TEST_SUITE("potential") {
    TEST_CASE("parameter validation") {
        CHECK_THROWS_AS((StableParams{2.0, 2}).validate(), ParameterError);
        CHECK_THROWS_AS((StableParams{0.5, 1}).validate(), ParameterError);
        CHECK_THROWS((StableParams{1.5, 2}).require_conditioning());
        CHECK_NOTHROW((StableParams{1.0, 3}).require_conditioning());
    }

    TEST_CASE("constant table identities and branch guards") {
        for (double a : {0.1, 0.5, 0.9})
            for (int d : {2, 3, 4}) CHECK(constants({a, d}).nicesum_lhs() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_THROWS_AS(constants({0.5, 2}).c_1_d(), BranchError);
        CHECK_THROWS_AS(constants({1.0, 2}).c_alpha_d(), BranchError);
        CHECK_THROWS_AS(constants({0.5, 2}).A_plane(), DomainError);
        // the Riesz potential constant
        double a = 0.5;
        int d = 2;
        double expect = std::tgamma((d - a) / 2) / (std::pow(2.0, a) * std::pow(M_PI, d / 2.0) * std::tgamma(a / 2));
        CHECK(constants({a, d}).potential_const() == doctest::Approx(expect).epsilon(1e-13));
    }

    TEST_CASE("harmonic function is additive over a partition and matches the full-sphere form") {
        StableParams p{0.5, 2};
        CapSet east(2, {Cap{Direction({1, 0}), M_PI / 2}}), west(2, {Cap{Direction({-1, 0}), M_PI / 2}});
        for (auto xy : {std::array<double, 2>{2, 0.3}, {0.2, -0.4}, {-3, 1}}) {
            double sum = harmonic_H(east, xy, p) + harmonic_H(west, xy, p);
            CHECK(sum == doctest::Approx(harmonic_H(CapSet::full_sphere(2), xy, p)).epsilon(1e-10));
            CHECK(sum == doctest::Approx(harmonic_H_sphere(std::hypot(xy[0], xy[1]), p)).epsilon(1e-10));
        }
    }

    TEST_CASE("harmonic function symmetry and decay") {
        StableParams p{0.7, 3};
        CapSet S(3, {Cap{Direction({0, 0, 1}), 0.6}});
        double a[3] = {0.5, 0.0, 2.0}, b[3] = {0.0, 0.5, 2.0};
        CHECK(harmonic_H(S, a, p) == doctest::Approx(harmonic_H(S, b, p)).epsilon(1e-10));
        double far[3] = {0, 0, 1e4};
        double m = surface_measure(S);
        CHECK(harmonic_H(S, far, p) == doctest::Approx(m * std::pow(1e4, p.alpha - p.d)).epsilon(1e-3));
    }

    TEST_CASE("fast evaluator agrees with adaptive quadrature") {
        for (auto [a, d] : {std::pair{0.5, 2}, {1.0, 2}, {0.5, 3}}) {
            StableParams p{a, d};
            std::vector<double> c(d, 0.0);
            c[0] = 1;
            CapSet S(d, {Cap{Direction(c), 1.0}});
            HarmonicEvaluator ev(S, p);
            for (double r : {0.3, 0.9, 1.1, 2.5}) {
                std::vector<double> x(d, 0.0);
                x[0] = r * std::cos(0.4);
                x[1] = r * std::sin(0.4);
                CHECK(ev(x) == doctest::Approx(harmonic_H(S, x, p)).epsilon(1e-8));
            }
        }
    }

    TEST_CASE("plane harmonic function is even in the normal coordinate") {
        StableParams p{0.5, 3};
        PlanarSet D(Direction({0, 0, 1}), BallShape{{0, 0}, 1});
        double up[3] = {0.5, 0.2, 0.7}, down[3] = {0.5, 0.2, -0.7};
        CHECK(harmonic_M(D, up, p) == doctest::Approx(harmonic_M(D, down, p)).epsilon(1e-10));
        double near[3] = {0, 0, 0.1}, farther[3] = {0, 0, 0.5};
        CHECK(harmonic_M(D, near, p) > harmonic_M(D, farther, p));
    }

    TEST_CASE("interval potential is constant") {
        for (double a : {0.3, 0.5, 0.7})
            for (double x : {-0.9, -0.2, 0.0, 0.55, 0.99})
                CHECK(interval_potential_normalized(x, a) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(interval_potential_constant(0.5) == doctest::Approx(M_PI / std::sin(M_PI / 4)));
    }

    TEST_CASE("unit-normalized shell potential approaches one") {
        StableParams p{0.5, 2};
        double dev = std::abs(U_mu1(1.0, 1e-3, p, Normalization::unit) - 1.0);
        CHECK(dev < 0.05);
    }
}
