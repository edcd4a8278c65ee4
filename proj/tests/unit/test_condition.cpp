#include <doctest.h>

#include <cmath>

#include "stablecond/condition.hpp"
#include "stablecond/parallel.hpp"

using namespace stablecond;

TEST_SUITE("condition") {
    TEST_CASE("MC estimate uses the n-1 standard error") {
        std::vector<double> v{1, 2, 3, 4};
        auto e = MCEstimate::from_samples(v, 5);
        CHECK(e.value == doctest::Approx(2.5));
        CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
        CHECK(e.n == 4);
        CHECK(e.seed == 5);
    }

    TEST_CASE("parallel_map order and pairwise_sum do not depend on the worker count") {
        auto f = [](size_t i) { return 1.0 / (1.0 + static_cast<double>(i)); };
        auto a = parallel_map(10001, 1, f), b = parallel_map(10001, 4, f);
        CHECK(a == b);
        CHECK(pairwise_sum(a) == pairwise_sum(b));
        CHECK_THROWS(parallel_map(100, 3, [](size_t i) -> int {
            if (i == 50) throw std::runtime_error("boom");
            return 0;
        }));
    }

    TEST_CASE("number format") {
        CHECK(format_number(0.1) == "0.10000000000000001");
        CHECK(format_number(NAN) == "nan");
        CHECK(format_number(2.0) == "2");
    }

    TEST_CASE("bump and ball integral") {
        Window w{{1, 1}, 0.5};
        double c[2] = {1, 1}, edge[2] = {1.5, 1};
        CHECK(bump(w, c) == doctest::Approx(1.0));
        CHECK(bump(w, edge) == 0.0);
        StableParams p{0.5, 2};
        double x[2] = {0, 0}, y[2] = {30, 0};
        double I = ball_riesz_integral(p, x, y, 0.5);
        CHECK(I == doctest::Approx(M_PI * 0.25 * std::pow(30.0, p.alpha - p.d)).epsilon(1e-3));
    }

    TEST_CASE("h-weight is one at time zero and flags points on the set") {
        StableParams p{0.5, 2};
        CapSet S(2, {Cap{Direction({1, 0}), M_PI / 2}});
        PathGrid g;
        g.alpha = 0.5;
        g.d = 2;
        g.h = 0.1;
        g.positions = {2, 0, 1, 0, 3, 1};
        CHECK(h_weight(g, S, 0, p).value == 1.0);
        CHECK(h_weight(g, S, 1, p).overflow);
        auto w = h_weight(g, S, 2, p);
        CHECK_FALSE(w.overflow);
        double a[2] = {3, 1}, b[2] = {2, 0};
        CHECK(w.value == doctest::Approx(harmonic_H(S, a, p) / harmonic_H(S, b, p)).epsilon(1e-8));
    }

    TEST_CASE("hitting report is identical for any worker count") {
        StableParams p{0.5, 2};
        TargetSet S = CapSet(2, {Cap{Direction({1, 0}), M_PI / 2}});
        HittingOptions o;
        o.eps_grid = {0.2, 0.1};
        o.n_paths = 400;
        double x[2] = {2, 0};
        RunControl one{17, 1}, four{17, 4};
        auto a = hitting_experiment(p, S, x, o, one), b = hitting_experiment(p, S, x, o, four);
        CHECK(a.to_csv() == b.to_csv());
        CHECK(a.to_json().dump() == b.to_json().dump());
        CHECK(a.estimates.size() == 2);
        CHECK(a.to_csv().rfind("eps,h,p_hat,stderr,n,hits,scaled,scaled_stderr,theory\n", 0) == 0);
        for (const auto& r : a.estimates) CHECK(r.h == doctest::Approx(r.eps / 8));
    }

    TEST_CASE("hitting at alpha = 1 scales by |log eps|") {
        StableParams p{1.0, 2};
        TargetSet S = CapSet(2, {Cap{Direction({1, 0}), M_PI / 2}});
        HittingOptions o;
        o.eps_grid = {0.2};
        o.n_paths = 200;
        double x[2] = {2, 0};
        auto r = hitting_experiment(p, S, x, o, RunControl{3, 1});
        auto& e = r.estimates.at(0);
        CHECK(e.scaled == doctest::Approx(e.p_hat.value * std::abs(std::log(0.2))));
    }

    TEST_CASE("strike ratio is one when the subset is the whole set") {
        StableParams p{0.5, 2};
        TargetSet S = CapSet::full_sphere(2);
        StrikeOptions o;
        o.eps_grid = {0.1};
        o.n_paths = 300;
        double x[2] = {2, 0};
        auto r = strike_experiment(p, S, S, x, o, RunControl{5, 1});
        CHECK(r.estimates.at(0).p_hat.value == doctest::Approx(1.0));
    }

    TEST_CASE("starting point on the set is rejected") {
        StableParams p{0.5, 2};
        TargetSet S = CapSet::full_sphere(2);
        HittingOptions o;
        double x[2] = {1, 0};
        CHECK_THROWS(hitting_experiment(p, S, x, o, RunControl{1, 1}));
    }

    TEST_CASE("martingale mean is near one") {
        StableParams p{0.5, 2};
        CapSet S(2, {Cap{Direction({1, 0}), M_PI / 2}});
        double x0[2] = {0, 2};
        auto m = martingale_check(p, S, x0, 0.25, 0.01, 0.05, 4000, RunControl{1, 1});
        CHECK(std::abs(m.mean.value - 1.0) < 5 * m.mean.se + 0.02);
    }
}
