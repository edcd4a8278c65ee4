#include "stablecond/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "stablecond/suites.hpp"

namespace stablecond {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDumpTag = 8;

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << body;
    if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

struct Artifacts {
    json report;
    std::string csv, plot;
    bool passed = true;
};

Artifacts suites_artifacts(const std::string& experiment, const std::vector<SuiteResult>& suites) {
    Artifacts a;
    a.report = {{"experiment", experiment}, {"suites", json::array()}};
    std::ostringstream csv, plot;
    csv << "suite,check,pass,advisory,measured,threshold\n";
    plot << "# index measured threshold\n";
    size_t idx = 0;
    for (const auto& s : suites) {
        a.report["suites"].push_back(s.to_json());
        a.passed = a.passed && s.passed();
        for (const auto& c : s.checks) {
            csv << s.name << ',' << c.name << ',' << (c.pass ? "pass" : "FAIL") << ',' << (c.advisory ? 1 : 0) << ','
                << format_number(c.measured) << ',' << format_number(c.threshold) << '\n';
            plot << idx++ << ' ' << format_number(c.measured) << ' ' << format_number(c.threshold) << '\n';
        }
    }
    a.report["passed"] = a.passed;
    a.csv = csv.str();
    a.plot = plot.str();
    return a;
}

Artifacts report_artifacts(const ExperimentReport& r) {
    return {r.to_json(), r.to_csv(), r.plot_data(), r.passed()};
}

HittingOptions hitting_options(const RunConfig& cfg) {
    HittingOptions o;
    o.eps_grid = cfg.vec("eps_grid");
    o.n_paths = static_cast<size_t>(cfg.integer("n_paths"));
    o.h_factor = cfg.num("h_factor");
    o.h = cfg.num("h");
    o.trend_tol = cfg.num("check.trend_tol");
    o.envelope_tol = cfg.num("check.envelope_tol");
    return o;
}

Window window(const RunConfig& cfg, const std::string& which) {
    return {cfg.vec("duality." + which + "_center"), cfg.num("duality." + which + "_radius")};
}

ExperimentReport duality_report(const RunConfig& cfg, StableParams p, const CapSet& S, const RunControl& ctl,
                                std::ostream& log) {
    ExperimentReport rep;
    rep.experiment = "duality";
    rep.params = p;
    rep.geometry = describe(S);
    Window f = window(cfg, "f"), g = window(cfg, "g");
    rep.extra["f_window"] = {{"center", f.center}, {"radius", f.radius}};
    rep.extra["g_window"] = {{"center", g.center}, {"radius", g.radius}};
    rep.theory_source = "lhs = rhs";
    rep.theory_value = std::nan("");
    rep.table_header = {"t", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "diff", "combined_stderr", "z_f", "z_g"};
    double sigma = cfg.num("duality.sigma");
    size_t n = static_cast<size_t>(cfg.integer("n_paths"));
    for (double t : cfg.vec("duality.t")) {
        log << "duality t=" << t << " n=" << n << '\n';
        DualityResult d = duality_experiment(p, S, f, g, t, n, ctl);
        double se = d.combined_se();
        rep.table.push_back({t, d.lhs.value, d.lhs.se, d.rhs.value, d.rhs.se, d.diff(), se, d.z_f, d.z_g});
        Check c;
        c.name = "duality_t=" + format_number(t);
        c.measured = std::abs(d.diff());
        c.threshold = sigma * se;
        c.pass = c.measured <= c.threshold;
        c.note = "|lhs - rhs| <= sigma * combined stderr";
        rep.checks.push_back(c);
    }
    return rep;
}

ExperimentReport reversal_report(const RunConfig& cfg, StableParams p, const CapSet& S, const RunControl& ctl,
                                 std::ostream& log) {
    ReversalOptions o;
    o.R_exit = cfg.num("reversal.R_exit");
    o.n_paths = static_cast<size_t>(cfg.integer("n_paths"));
    o.h = cfg.num("reversal.h");
    o.bins = static_cast<size_t>(cfg.integer("reversal.bins"));
    o.r_min = cfg.num("reversal.r_min");
    o.min_count = static_cast<size_t>(cfg.integer("reversal.min_count"));
    o.sigma = cfg.num("reversal.sigma");
    o.agree_fraction = cfg.num("reversal.agree_fraction");
    log << "reversal n=" << o.n_paths << '\n';
    ReversalResult r = reversal_experiment(p, S, o, ctl);

    ExperimentReport rep;
    rep.experiment = "reversal";
    rep.params = p;
    rep.geometry = describe(S);
    rep.theory_source = "reversed and forward statistics agree per bin";
    rep.theory_value = std::nan("");
    rep.extra["never_exited"] = r.never_exited;
    rep.extra["R_exit"] = o.R_exit;
    rep.extra["h"] = o.h;
    rep.table_header = {"r_lo", "r_hi", "reversed", "reversed_stderr", "reversed_n", "forward", "forward_stderr",
                        "forward_n", "occupied", "agree"};
    for (const auto& b : r.bins)
        rep.table.push_back({b.r_lo, b.r_hi, b.reversed.value, b.reversed.se, static_cast<double>(b.reversed.n),
                             b.forward.value, b.forward.se, static_cast<double>(b.forward.n), b.occupied ? 1.0 : 0.0,
                             b.agree ? 1.0 : 0.0});
    Check c;
    c.name = "bin_agreement";
    c.measured = r.agree_fraction;
    c.threshold = o.agree_fraction;
    c.pass = r.pass;
    c.advisory = true;  // a diagnostic: a miss is a warning
    c.note = "fraction of occupied bins agreeing within sigma * stderr";
    rep.checks.push_back(c);
    return rep;
}

void dump_paths(const RunConfig& cfg, StableParams p, const TargetSet& set, const RunControl& ctl,
                const fs::path& dir) {
    auto count = cfg.integer("dump_paths");
    if (count <= 0) return;
    double eps = cfg.vec("eps_grid").back();
    double h = step_for(hitting_options(cfg), eps);
    Target target = std::visit(
        [&](const auto& s) -> Target {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, CapSet>)
                return ShellTarget{s, eps};
            else
                return SlabTarget{s, eps};
        },
        set);
    fs::create_directories(dir);
    auto x = cfg.vec("x");
    for (std::int64_t i = 0; i < count; ++i) {
        std::uint64_t stream = (kDumpTag << 56) | static_cast<std::uint64_t>(i);
        Rng rng(ctl.seed, stream);
        auto [path, hit] = simulate_path(x, p, h, ctl.horizon(p.alpha), ctl.R_far, &target, rng, ctl.seed, stream);
        char name[32];
        std::snprintf(name, sizeof name, "path-%04lld.bin", static_cast<long long>(i));
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write path dump in '" + dir.string() + "'");
        write_path_dump(out, path);
    }
}

}  // namespace

TargetSet build_target_set(const RunConfig& cfg, const std::string& prefix) {
    int d = static_cast<int>(cfg.integer("d"));
    if (cfg.str(prefix + "type") == "caps") {
        auto centers = cfg.mat(prefix + "centers");
        auto radii = cfg.vec(prefix + "radii");
        std::vector<Cap> caps;
        for (size_t i = 0; i < centers.size(); ++i) caps.push_back({Direction(centers[i]), std::min(radii[i], M_PI)});
        return CapSet(d, std::move(caps));
    }
    Direction normal(cfg.vec(prefix + "normal"));
    if (cfg.str(prefix + "shape") == "ball")
        return PlanarSet(normal, BallShape{cfg.vec(prefix + "center"), cfg.num(prefix + "radius")});
    return PlanarSet(normal, BoxShape{cfg.vec(prefix + "lo"), cfg.vec(prefix + "hi")});
}

RunControl build_control(const RunConfig& cfg) {
    RunControl c;
    c.seed = cfg.u64("seed");
    c.workers = static_cast<unsigned>(cfg.integer("workers"));
    c.R_far = cfg.num("R_far");
    c.T = cfg.num("T");
    return c;
}

int run_experiment(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    write_file(out_dir / "resolved-config.json", cfg.resolved().dump(2) + "\n");

    const std::string exp = cfg.str("experiment");
    StableParams p{cfg.num("alpha"), static_cast<int>(cfg.integer("d"))};
    p.validate();
    RunControl ctl = build_control(cfg);
    log << "experiment " << exp << " alpha=" << p.alpha << " d=" << p.d << " seed=" << ctl.seed
        << " workers=" << ctl.workers << '\n';

    Artifacts a;
    if (exp == "specfun-suite") {
        a = suites_artifacts(exp, {identity_suite(ctl.seed), edge_limit_suite()});
    } else if (exp == "potential-suite") {
        a = suites_artifacts(exp, {shell_potential_suite(Normalization::uncorrected),
                                   shell_potential_suite(Normalization::unit),
                                   slab_potential_suite(Normalization::uncorrected),
                                   slab_potential_suite(Normalization::unit), interval_potential_suite(),
                                   constants_suite()});
    } else if (exp == "hitting") {
        TargetSet set = build_target_set(cfg, "set.");
        auto x = cfg.vec("x");
        a = report_artifacts(hitting_experiment(p, set, x, hitting_options(cfg), ctl));
        dump_paths(cfg, p, set, ctl, out_dir / "paths");
    } else if (exp == "strike") {
        TargetSet set = build_target_set(cfg, "set."), sub = build_target_set(cfg, "subset.");
        StrikeOptions o;
        static_cast<HittingOptions&>(o) = hitting_options(cfg);
        o.abs_tol = cfg.num("check.abs_tol");
        o.se_mult = cfg.num("check.se_mult");
        auto x = cfg.vec("x");
        a = report_artifacts(strike_experiment(p, set, sub, x, o, ctl));
        dump_paths(cfg, p, set, ctl, out_dir / "paths");
    } else if (exp == "duality") {
        a = report_artifacts(duality_report(cfg, p, std::get<CapSet>(build_target_set(cfg, "set.")), ctl, log));
    } else if (exp == "reversal") {
        a = report_artifacts(reversal_report(cfg, p, std::get<CapSet>(build_target_set(cfg, "set.")), ctl, log));
    } else {
        throw ConfigError("experiment", "unknown experiment '" + exp + "'");
    }

    a.report["seed"] = ctl.seed;
    a.report["seed_from_entropy"] = cfg.seed_from_entropy;
    write_file(out_dir / "report.json", a.report.dump(2) + "\n");
    write_file(out_dir / "report.csv", a.csv);
    write_file(out_dir / "plot-data.txt", a.plot);

    for (const auto& c : a.report.contains("checks") ? a.report["checks"] : json::array())
        if (!c["pass"].get<bool>())
            log << (c["advisory"].get<bool>() ? "warning: " : "FAIL: ") << c["name"].get<std::string>() << '\n';
    log << (a.passed ? "all checks passed" : "theory check failed") << '\n';
    return a.passed ? exit_ok : exit_check_failed;
}

}  // namespace stablecond
