// Acceptance checks, one per criterion. Prints a single "criterion N: PASS|FAIL|WARN" line
// per criterion after the detail lines. Exit status is non-zero when a run criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "stablecond/condition.hpp"
#include "stablecond/config.hpp"
#include "stablecond/runner.hpp"
#include "stablecond/suites.hpp"

using namespace stablecond;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, warn };

struct Outcome {
    Verdict verdict;
    std::string summary;
};

unsigned g_workers = 1;
constexpr std::uint64_t kSeed = 1;

RunControl control(std::uint64_t seed = kSeed) {
    RunControl c;
    c.seed = seed;
    c.workers = g_workers;
    return c;
}

std::string fmt(double v, int prec = 4) {
    char b[64];
    std::snprintf(b, sizeof b, "%.*g", prec, v);
    return b;
}

void print_checks(const std::vector<Check>& checks, const std::string& prefix = "") {
    for (const auto& c : checks)
        std::printf("    %s%-48s %-4s measured=%-12s threshold=%-12s%s%s\n", prefix.c_str(), c.name.c_str(),
                    c.pass ? "ok" : (c.advisory ? "info" : "FAIL"), fmt(c.measured, 6).c_str(),
                    fmt(c.threshold, 6).c_str(), c.advisory ? " (advisory)" : "",
                    c.note.empty() ? "" : ("  " + c.note).c_str());
}

bool required_pass(const std::vector<Check>& checks) {
    for (const auto& c : checks)
        if (!c.advisory && !c.pass) return false;
    return true;
}

std::string failed_names(const std::vector<Check>& checks) {
    std::string s;
    for (const auto& c : checks)
        if (!c.advisory && !c.pass) s += (s.empty() ? "" : ", ") + c.name;
    return s;
}

Outcome from_suite(const SuiteResult& r, const std::string& what) {
    print_checks(r.checks);
    if (r.passed()) return {Verdict::pass, what};
    return {Verdict::fail, what + "; failing: " + failed_names(r.checks)};
}

void print_estimates(const ExperimentReport& r) {
    std::printf("    %-8s %-9s %-12s %-11s %-8s %-12s %-11s\n", "eps", "h", "p_hat", "stderr", "hits", "scaled", "scaled_se");
    for (const auto& e : r.estimates)
        std::printf("    %-8s %-9s %-12s %-11s %-8zu %-12s %-11s%s\n", fmt(e.eps).c_str(), fmt(e.h).c_str(),
                    fmt(e.p_hat.value, 6).c_str(), fmt(e.p_hat.se, 3).c_str(), e.hits, fmt(e.scaled, 6).c_str(),
                    fmt(e.scaled_se, 3).c_str(), e.degenerate ? "  degenerate" : "");
    std::printf("    theory (%s) = %s\n", r.theory_source.c_str(), fmt(r.theory_value, 8).c_str());
    for (const auto& [k, v] : r.alternatives) std::printf("    alternative %-20s = %s\n", k.c_str(), fmt(v, 8).c_str());
}

// ---- criteria

Outcome c1() {
    return from_suite(identity_suite(kSeed), "normalizing identity, reflection, three integral reductions, Lobachevsky");
}

Outcome c2() {
    return from_suite(edge_limit_suite(), "edge residual sup-norm along eps = 1e-2, 1e-3, 1e-4");
}

Outcome c3() {
    auto unit = shell_potential_suite(Normalization::unit);
    std::printf("    unit-normalized core measure, for comparison:\n");
    print_checks(unit.checks, "unit: ");
    std::printf("    constant as stated:\n");
    return from_suite(shell_potential_suite(Normalization::uncorrected), "shell potential, alpha = 0.5, d = 2");
}

Outcome c4() {
    auto r = interval_potential_suite();
    for (double a : {0.3, 0.5, 0.7})
        std::printf("    alpha=%.1f measured constant %.15g (pi/sin(pi alpha/2) = %.15g, B(a/2,1-a/2) = %.15g)\n", a,
                    interval_potential(0.0, a), interval_potential_constant(a),
                    std::tgamma(a / 2) * std::tgamma(1 - a / 2));
    return from_suite(r, "interval potential constancy and endpoint value");
}

Outcome c5() {
    return from_suite(sampler_suite(kSeed, 100000), "characteristic function, isotropy, self-similarity at n = 1e5");
}

Outcome c6() {
    StableParams p{0.5, 2};
    double x[2] = {0, 0}, y[2] = {3, 0};
    auto levels = occupation_refinement(p, x, y, 0.5, 0.0125, 4, 20000, control());
    std::vector<double> gaps;
    for (const auto& o : levels) {
        gaps.push_back(o.estimate.value / o.theory - 1.0);
        std::printf("    h=%-7s occupation %.6g (se %.3g)  theory %.6g  gap %+.4f\n", fmt(o.h).c_str(), o.estimate.value,
                    o.estimate.se, o.theory, gaps.back());
    }
    // levels share their paths, so differences between them isolate the grid effect
    for (size_t k = 1; k < levels.size(); ++k)
        std::printf("    level difference h=%s -> h=%s: %+.5f\n", fmt(levels[k - 1].h).c_str(), fmt(levels[k].h).c_str(),
                    levels[k].estimate.value - levels[k - 1].estimate.value);
    double final_gap = std::abs(gaps.back());
    bool within = final_gap <= 0.2;
    bool shrinking = true;
    for (size_t k = 1; k < gaps.size(); ++k) shrinking = shrinking && std::abs(gaps[k]) <= std::abs(gaps[k - 1]);
    std::printf("    within 20%%: %s (|gap| = %.4f at h = %s)\n", within ? "yes" : "no", final_gap,
                fmt(levels.back().h).c_str());
    std::printf("    |gap| non-increasing as h halves: %s\n", shrinking ? "yes" : "no");
    std::string s = "n = 2e4, |x - y| = 3, r = 0.5; final gap " + fmt(gaps.back(), 3) +
                    (shrinking ? "; gap shrinks with h" : "; gap does not shrink monotonically with h");
    return {within && shrinking ? Verdict::pass : Verdict::fail, s};
}

Outcome c7() {
    StableParams p{0.5, 2};
    TargetSet S = CapSet(2, {Cap{Direction({1, 0}), M_PI / 2}});
    HittingOptions o;
    o.eps_grid = {0.2, 0.1, 0.05};
    o.n_paths = 100000;
    double x[2] = {2, 0};
    auto r = hitting_experiment(p, S, x, o, control());
    print_estimates(r);
    print_checks(r.checks);
    const auto& e = r.estimates;
    double change = std::abs(e[2].scaled / e[1].scaled - 1.0), rel = std::abs(e[2].scaled / r.theory_value - 1.0);
    return {required_pass(r.checks) ? Verdict::pass : Verdict::fail,
            "half circle, n = 1e5: last change " + fmt(100 * change, 3) + "%, final vs theory " + fmt(100 * rel, 3) + "%"};
}

ExperimentReport strike_case(StableParams p, const TargetSet& S, const TargetSet& sub, std::span<const double> x,
                             double abs_tol, size_t n) {
    StrikeOptions o;
    o.eps_grid = {0.05};
    o.n_paths = n;
    o.abs_tol = abs_tol;
    o.se_mult = 3.0;
    auto r = strike_experiment(p, S, sub, x, o, control());
    const auto& e = r.estimates.at(0);
    std::printf("    ratio %.6g (se %.3g, %zu hits) vs %.6g\n", e.p_hat.value, e.p_hat.se, e.hits, r.theory_value);
    print_checks(r.checks);
    return r;
}

Outcome c8() {
    StableParams p{0.5, 2};
    TargetSet S = CapSet::full_sphere(2);
    TargetSet quarter = CapSet(2, {Cap{Direction({1, 0}), M_PI / 4}});
    TargetSet half = CapSet(2, {Cap{Direction({1, 0}), M_PI / 2}});
    double x[2] = {2, 0}, origin[2] = {0, 0};
    std::printf("    quarter arc nearest x = (2, 0):\n");
    auto a = strike_case(p, S, quarter, x, 0.05, 100000);
    std::printf("    S' = S:\n");
    auto b = strike_case(p, S, S, x, 1e-12, 20000);
    bool exact_one = b.estimates.at(0).p_hat.value == 1.0;
    std::printf("    ratio exactly one: %s\n", exact_one ? "yes" : "no");
    std::printf("    x = origin, S' = half circle:\n");
    auto c = strike_case(p, S, half, origin, 1e-12, 20000);
    bool ok = required_pass(a.checks) && exact_one && required_pass(c.checks);
    return {ok ? Verdict::pass : Verdict::fail,
            "quarter-arc ratio " + fmt(a.estimates[0].p_hat.value, 4) + " vs " + fmt(a.theory_value, 4) +
                "; S'=S exact; origin half " + fmt(c.estimates[0].p_hat.value, 4)};
}

Outcome c9() {
    StableParams p{0.5, 2};
    CapSet S(2, {Cap{Direction({1, 0}), M_PI / 2}});
    std::vector<std::pair<Window, Window>> pairs{
        {{{2, 0}, 0.3}, {{0, 2}, 0.3}},
        {{{-1.8, 0}, 0.3}, {{0, 1.8}, 0.3}},
        {{{1.5, -1.5}, 0.4}, {{2.2, 0.5}, 0.4}},
    };
    bool ok = true;
    double worst = 0;
    for (size_t i = 0; i < pairs.size(); ++i)
        for (double t : {0.25, 0.5}) {
            auto r = duality_experiment(p, S, pairs[i].first, pairs[i].second, t, 100000, control(kSeed + i));
            double z = std::abs(r.diff()) / r.combined_se();
            worst = std::max(worst, z);
            bool pass = z <= 4.0;
            ok = ok && pass;
            std::printf("    pair %zu t=%-5s lhs %.6g (%.2g)  rhs %.6g (%.2g)  |diff|/se %.2f %s\n", i + 1,
                        fmt(t).c_str(), r.lhs.value, r.lhs.se, r.rhs.value, r.rhs.se, z, pass ? "ok" : "FAIL");
        }
    return {ok ? Verdict::pass : Verdict::fail, "3 window pairs x t in {0.25, 0.5}, n = 1e5; worst |diff|/se " + fmt(worst, 3)};
}

Outcome c10() {
    bool ok = true;
    std::string s;
    std::printf("    (a) slab potential, alpha = 0.5, d = 3\n");
    auto unit = slab_potential_suite(Normalization::unit);
    print_checks(unit.checks, "unit: ");
    auto slab = slab_potential_suite(Normalization::uncorrected);
    print_checks(slab.checks);
    ok = ok && slab.passed();
    s += std::string("slab ") + (slab.passed() ? "ok" : "FAIL");

    StableParams p{0.5, 3};
    PlanarSet D(Direction({0, 0, 1}), BallShape{{0, 0}, 1});
    double x[3] = {0, 0, 1};
    std::printf("    (b) hitting, unit disc in the plane x3 = 0, x = (0, 0, 1)\n");
    HittingOptions o;
    o.eps_grid = {0.2, 0.1, 0.05};
    o.n_paths = 20000;
    auto h = hitting_experiment(p, TargetSet(D), x, o, control());
    print_estimates(h);
    print_checks(h.checks);
    ok = ok && required_pass(h.checks);
    s += std::string("; plane hitting ") + (required_pass(h.checks) ? "ok" : "FAIL");
    for (const auto& [k, v] : h.alternatives)
        if (k == "sine_corrected")
            std::printf("    final scaled / sine-corrected theory = %.4f\n", h.estimates.back().scaled / v);

    std::printf("    (c) strike: D' = disc of radius 0.5 centred (0.5, 0) in the plane\n");
    PlanarSet sub(Direction({0, 0, 1}), BallShape{{0.5, 0}, 0.5});
    auto st = strike_case(p, TargetSet(D), TargetSet(sub), x, 0.05, 20000);
    ok = ok && required_pass(st.checks);
    s += std::string("; plane strike ") + (required_pass(st.checks) ? "ok" : "FAIL");
    return {ok ? Verdict::pass : Verdict::fail, s};
}

Outcome c11() {
    StableParams p{0.5, 2};
    ReversalOptions o;
    auto r = reversal_experiment(p, CapSet::full_sphere(2), o, control());
    for (const auto& b : r.bins)
        std::printf("    |x| in [%.3f, %.3f): reversed %+.4f (%.2g, n=%zu)  forward %+.4f (%.2g, n=%zu)  %s\n", b.r_lo,
                    b.r_hi, b.reversed.value, b.reversed.se, b.reversed.n, b.forward.value, b.forward.se, b.forward.n,
                    !b.occupied ? "empty" : (b.agree ? "agree" : "disagree"));
    std::printf("    paths that never exited: %zu\n", r.never_exited);
    std::string s = "agreeing fraction " + fmt(r.agree_fraction, 3) + " of occupied bins (need 0.8)";
    return {r.pass ? Verdict::pass : Verdict::warn, s};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome c12() {
    fs::path base = fs::temp_directory_path() / ("stablecond_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);
    auto none = [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
    const std::vector<std::string> configs{
        "experiment = hitting\nalpha = 0.5\nd = 2\nseed = 2024\nn_paths = 3000\neps_grid = [0.2, 0.1]\n",
        "experiment = strike\nalpha = 0.7\nd = 3\nseed = 5\nn_paths = 2000\neps_grid = [0.2]\n"
        "set.radii = [3.141592653589793]\n",
        "experiment = duality\nalpha = 0.5\nd = 2\nseed = 77\nn_paths = 3000\n",
        "experiment = reversal\nalpha = 0.5\nd = 2\nseed = 8\nn_paths = 2000\nset.radii = [3.141592653589793]\n",
    };
    bool ok = true;
    std::ostringstream log;
    for (const auto& text : configs) {
        RunConfig cfg = parse_config_text(text, none);
        std::string ref;
        int k = 0;
        for (int w : {1, 1, 4, 8}) {
            cfg.values["workers"] = w;
            fs::path dir = base / (cfg.str("experiment") + "_" + std::to_string(k++));
            run_experiment(cfg, dir, log);
            std::string csv = slurp(dir / "report.csv");
            if (ref.empty()) ref = csv;
            bool same = csv == ref && !csv.empty();
            ok = ok && same;
            std::printf("    %-9s workers=%d run %d: report.csv %zu bytes %s\n", cfg.str("experiment").c_str(), w, k,
                        csv.size(), same ? "identical" : "DIFFERS");
        }
        // the emitted resolved config reproduces itself
        fs::path resolved = base / (cfg.str("experiment") + "_0") / "resolved-config.json";
        bool idem = parse_config(resolved, none).resolved() == nlohmann::json::parse(slurp(resolved));
        ok = ok && idem;
        std::printf("    %-9s resolved-config parses back to itself: %s\n", cfg.str("experiment").c_str(),
                    idem ? "yes" : "NO");
    }
    fs::remove_all(base);
    return {ok ? Verdict::pass : Verdict::fail, "report.csv byte-identical across reruns and workers {1, 4, 8}"};
}

const std::vector<std::function<Outcome()>> kCriteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> which;
    g_workers = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--criterion,-c", which, "criterion number(s), 1-12; default all")->check(CLI::Range(1, 12));
    app.add_option("--workers", g_workers, "worker threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    if (which.empty())
        for (int i = 1; i <= 12; ++i) which.push_back(i);

    int failures = 0;
    std::vector<std::string> lines;
    for (int n : which) {
        std::printf("== criterion %d\n", n);
        std::fflush(stdout);
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = kCriteria[n - 1]();
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* v = o.verdict == Verdict::pass ? "PASS" : (o.verdict == Verdict::warn ? "WARN" : "FAIL");
        if (o.verdict == Verdict::fail) ++failures;
        char buf[64];
        std::snprintf(buf, sizeof buf, " [%.1fs]", secs);
        lines.push_back("criterion " + std::to_string(n) + ": " + v + " - " + o.summary + buf);
        std::printf("%s\n", lines.back().c_str());
        std::fflush(stdout);
    }
    if (which.size() > 1) {
        std::printf("== summary\n");
        for (const auto& l : lines) std::printf("%s\n", l.c_str());
    }
    return failures == 0 ? 0 : 1;
}
