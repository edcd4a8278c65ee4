#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "stablecond/errors.hpp"
#include "stablecond/simulate.hpp"

using namespace stablecond;

TEST_SUITE("simulate") {
    TEST_CASE("rng streams are reproducible and distinct") {
        Rng a(42, 1), b(42, 1), c(42, 2), e(43, 1);
        for (int i = 0; i < 10; ++i) {
            auto x = a.next_u64();
            CHECK(x == b.next_u64());
            CHECK(x != c.next_u64());
            CHECK(x != e.next_u64());
        }
        Rng u(1, 1);
        for (int i = 0; i < 1000; ++i) {
            double v = u.uniform();
            CHECK(v > 0.0);
            CHECK(v < 1.0);
        }
    }

    TEST_CASE("positive stable Laplace transform") {
        for (double beta : {0.25, 0.5, 0.75}) {
            Rng rng(7, static_cast<std::uint64_t>(beta * 100));
            const int n = 40000;
            double s = 0, s2 = 0;
            for (int i = 0; i < n; ++i) {
                double v = std::exp(-sample_positive_stable(beta, rng));
                s += v;
                s2 += v * v;
            }
            double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
            CHECK(std::abs(m - std::exp(-1.0)) < 5 * se);
        }
    }

    TEST_CASE("increments have the stable characteristic function") {
        StableParams p{1.0, 2};
        Rng rng(3, 3);
        const int n = 40000;
        double re = 0;
        std::vector<double> dx(2);
        for (int i = 0; i < n; ++i) {
            sample_increment(p, 1.0, rng, dx);
            re += std::cos(0.7 * dx[0]);
        }
        CHECK(re / n == doctest::Approx(std::exp(-0.7)).epsilon(0.03));
    }

    TEST_CASE("path simulation is deterministic and respects the resolution rule") {
        StableParams p{0.5, 2};
        CapSet S(2, {Cap{Direction({1, 0}), M_PI / 2}});
        Target t = ShellTarget{S, 0.1};
        double x0[2] = {2, 0};
        Rng r1(9, 5), r2(9, 5);
        auto [p1, h1] = simulate_path(x0, p, 0.0125, 20.0, 50.0, &t, r1, 9, 5);
        auto [p2, h2] = simulate_path(x0, p, 0.0125, 20.0, 50.0, &t, r2, 9, 5);
        CHECK(p1.positions == p2.positions);
        CHECK(h1.hit == h2.hit);
        CHECK(p1.point(0)[0] == 2.0);
        if (h1.hit) {
            CHECK(p1.stopped_reason == StopReason::target_hit);
            CHECK(in_target(p1.point(*h1.hit_index), t));
        }
        Rng r3(9, 5);
        CHECK_THROWS_AS(simulate_path(x0, p, 0.05, 20.0, 50.0, &t, r3), ResolutionError);
    }

    TEST_CASE("path dump round trip") {
        StableParams p{0.5, 3};
        double x0[3] = {1, 2, 3};
        Rng rng(11, 4);
        auto [path, hit] = simulate_path(x0, p, 0.01, 0.5, 50.0, nullptr, rng, 11, 4);
        std::stringstream ss;
        write_path_dump(ss, path);
        CHECK(ss.str().size() == 8 + 4 + 8 + 8 + 8 + path.positions.size() * 8);
        // header starts with alpha as little-endian f64
        double alpha;
        std::memcpy(&alpha, ss.str().data(), 8);
        if constexpr (std::endian::native == std::endian::little) CHECK(alpha == 0.5);
        PathGrid back = read_path_dump(ss);
        CHECK(back.alpha == path.alpha);
        CHECK(back.d == 3);
        CHECK(back.h == path.h);
        CHECK(back.seed == 11);
        CHECK(back.positions == path.positions);
        std::stringstream bad("short");
        CHECK_THROWS(read_path_dump(bad));
    }

    TEST_CASE("detectors and occupation on a hand-made path") {
        PathGrid g;
        g.alpha = 0.5;
        g.d = 2;
        g.h = 0.5;
        g.positions = {3, 0, 1.5, 0, 0.9, 0, 0.1, 0.05, 0, 2};
        auto ann = detect_exit_annulus(g, 1.2);
        REQUIRE(ann.hit);
        CHECK(*ann.hit_index == 2);
        auto slab = detect_slab_entry(g, Direction({0, 1}), 0.01);
        REQUIRE(slab.hit);
        CHECK(*slab.hit_index == 0);
        double c[2] = {0, 0};
        CHECK(occupation_time(g, c, 1.0) == doctest::Approx(1.0));  // two points inside
    }

    TEST_CASE("walk_first_hits reports every target") {
        StableParams p{0.5, 2};
        CapSet S = CapSet::full_sphere(2);
        Target wide = ShellTarget{S, 0.2}, narrow = ShellTarget{S, 0.1};
        std::vector<const Target*> ts{&wide, &narrow};
        double x0[2] = {2, 0};
        size_t both = 0, inconsistent = 0;
        for (std::uint64_t i = 0; i < 200; ++i) {
            Rng rng(1, i);
            auto hits = walk_first_hits(x0, p, {0.0125, 50.0, 50.0}, ts, rng);
            REQUIRE(hits.size() == 2);
            if (hits[1].hit) {
                ++both;
                if (!hits[0].hit || *hits[0].hit_index > *hits[1].hit_index) ++inconsistent;
            }
        }
        CHECK(both > 0);
        CHECK(inconsistent == 0);  // the narrow shell sits inside the wide one
    }
}
