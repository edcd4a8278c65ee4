#include "stablecond/condition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stablecond/errors.hpp"
#include "stablecond/parallel.hpp"
#include "stablecond/quadrature.hpp"

namespace stablecond {

namespace {

enum : std::uint64_t {
    kHitting = 1,
    kStrike = 2,
    kDualityLhs = 3,
    kDualityRhs = 4,
    kReversal = 5,
    kMartingale = 6,
    kOccupation = 7,
};

std::uint64_t stream_id(std::uint64_t tag, std::uint64_t k, std::uint64_t i) { return (tag << 56) | (k << 40) | i; }

std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double sphere_area(int d) { return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d); }

Point uniform_in_ball(std::span<const double> c, double r, Rng& rng) {
    int d = static_cast<int>(c.size());
    auto u = random_direction(d, rng);
    double rho = r * std::pow(rng.uniform(), 1.0 / d);
    for (int i = 0; i < d; ++i) u[i] = c[i] + rho * u[i];
    return u;
}

double scaled_factor(double alpha, double eps) { return alpha == 1.0 ? std::fabs(std::log(eps)) : std::pow(eps, alpha - 1.0); }

Target make_target(const TargetSet& s, double eps) {
    if (auto* S = std::get_if<CapSet>(&s)) return ShellTarget{*S, eps, 0.0};
    return SlabTarget{std::get<PlanarSet>(s), eps, 0.0};
}

double harmonic(const TargetSet& s, std::span<const double> x, StableParams p) {
    if (auto* S = std::get_if<CapSet>(&s)) return harmonic_H(*S, x, p);
    return harmonic_M(std::get<PlanarSet>(s), x, p);
}

void validate_grid(const std::vector<double>& g) {
    if (g.empty()) throw ParameterError("eps_grid is empty");
    for (size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0 && g[i] < 1.0)) throw ParameterError("eps_grid entries must lie in (0, 1)");
        if (i && !(g[i] < g[i - 1])) throw ParameterError("eps_grid must be strictly decreasing");
    }
}

void check_outside(const TargetSet& s, std::span<const double> x, StableParams p) {
    if (static_cast<int>(x.size()) != p.d) throw ParameterError("start point has the wrong dimension");
    double dist = std::holds_alternative<CapSet>(s) ? euclidean_distance(std::get<CapSet>(s), x)
                                                    : euclidean_distance(std::get<PlanarSet>(s), x);
    if (dist < 1e-9) throw DomainError("start point lies on the target set");
}

}  // namespace

// ---- basic types

MCEstimate MCEstimate::from_samples(std::span<const double> v, std::uint64_t seed) {
    if (v.empty()) throw ParameterError("MCEstimate needs at least one sample");
    MCEstimate e;
    e.n = v.size();
    e.seed = seed;
    e.value = pairwise_sum(v) / e.n;
    if (e.n > 1) {
        std::vector<double> sq(v.size());
        for (size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - e.value) * (v[i] - e.value);
        e.se = std::sqrt(pairwise_sum(sq) / (e.n - 1) / e.n);
    }
    return e;
}

double RunControl::horizon(double alpha) const { return T > 0.0 ? T : 10.0 * std::pow(R_far, alpha); }

bool ExperimentReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass || c.advisory; });
}

nlohmann::json ExperimentReport::to_json() const {
    using nlohmann::json;
    json j;
    j["experiment"] = experiment;
    j["params"] = {{"alpha", params.alpha}, {"d", params.d}};
    j["geometry"] = geometry;
    j["grid"] = grid;
    json est = json::array();
    for (const auto& r : estimates) {
        est.push_back({{"eps", r.eps},
                       {"h", r.h},
                       {"p_hat", num(r.p_hat.value)},
                       {"stderr", num(r.p_hat.se)},
                       {"n", r.p_hat.n},
                       {"hits", r.hits},
                       {"scaled", num(r.scaled)},
                       {"scaled_stderr", num(r.scaled_se)},
                       {"degenerate", r.degenerate}});
    }
    j["estimates"] = est;
    json alt = json::object();
    for (const auto& [k, v] : alternatives) alt[k] = num(v);
    j["theory"] = {{"value", num(theory_value)}, {"source", theory_source}, {"alternatives", alt}};
    json ch = json::array();
    for (const auto& c : checks)
        ch.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"measured", num(c.measured)},
                      {"threshold", num(c.threshold)},
                      {"advisory", c.advisory},
                      {"note", c.note}});
    j["checks"] = ch;
    j["passed"] = passed();
    if (!table_header.empty()) {
        json t = json::array();
        for (const auto& row : table) {
            json r = json::object();
            for (size_t i = 0; i < table_header.size() && i < row.size(); ++i) r[table_header[i]] = num(row[i]);
            t.push_back(r);
        }
        j["table"] = t;
    }
    j["extra"] = extra;
    return j;
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    if (!table_header.empty()) {
        for (size_t i = 0; i < table_header.size(); ++i) os << (i ? "," : "") << table_header[i];
        os << '\n';
        for (const auto& row : table) {
            for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
            os << '\n';
        }
        return os.str();
    }
    os << "eps,h,p_hat,stderr,n,hits,scaled,scaled_stderr,theory\n";
    for (const auto& r : estimates)
        os << fmt(r.eps) << ',' << fmt(r.h) << ',' << fmt(r.p_hat.value) << ',' << fmt(r.p_hat.se) << ','
           << r.p_hat.n << ',' << r.hits << ',' << fmt(r.scaled) << ',' << fmt(r.scaled_se) << ','
           << fmt(theory_value) << '\n';
    return os.str();
}

std::string format_number(double v) { return fmt(v); }

std::string ExperimentReport::plot_data() const {
    std::ostringstream os;
    if (!table_header.empty()) {
        os << '#';
        for (const auto& h : table_header) os << ' ' << h;
        os << '\n';
        for (const auto& row : table) {
            for (size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << fmt(row[i]);
            os << '\n';
        }
        return os.str();
    }
    os << "# eps scaled theory\n";
    for (const auto& r : estimates) os << fmt(r.eps) << ' ' << fmt(r.scaled) << ' ' << fmt(theory_value) << '\n';
    return os.str();
}

nlohmann::json describe(const CapSet& S) {
    nlohmann::json caps = nlohmann::json::array();
    for (const auto& c : S.caps()) caps.push_back({{"center", c.center.coords()}, {"radius", c.radius}});
    return {{"kind", "caps"}, {"d", S.dim()}, {"caps", caps}, {"measure", surface_measure(S)}};
}

nlohmann::json describe(const PlanarSet& D) {
    nlohmann::json j{{"kind", "plane"}, {"d", D.dim()}, {"normal", D.normal().coords()}, {"measure", D.measure()}};
    if (auto* b = std::get_if<BallShape>(&D.shape()))
        j["shape"] = {{"type", "ball"}, {"center", b->center}, {"radius", b->radius}};
    else {
        const auto& x = std::get<BoxShape>(D.shape());
        j["shape"] = {{"type", "box"}, {"lo", x.lo}, {"hi", x.hi}};
    }
    return j;
}

nlohmann::json describe(const TargetSet& s) {
    return std::visit([](const auto& v) { return describe(v); }, s);
}

// ---- h-transform

HWeight h_weight(const PathGrid& path, const HarmonicEvaluator& H, size_t t_index) {
    if (t_index >= path.size()) throw ParameterError("h_weight: t_index beyond the path");
    if (t_index == 0) return {1.0, false};
    auto x = path.point(t_index);
    if (H.distance(x) < 1e-9) return {0.0, true};
    return {H(x) / H(path.origin()), false};
}

HWeight h_weight(const PathGrid& path, const CapSet& S, size_t t_index, StableParams p) {
    p.require_conditioning();
    return h_weight(path, HarmonicEvaluator(S, p), t_index);
}

MartingaleResult martingale_check(StableParams p, const CapSet& S, std::span<const double> x0, double t, double h,
                                  double stop_dist, size_t n_paths, const RunControl& ctl) {
    p.require_conditioning();
    if (!(t >= 0.0) || !(h > 0.0) || !(stop_dist > 0.0)) throw ParameterError("martingale_check: bad t, h or stop_dist");
    HarmonicEvaluator H(S, p);
    double h0 = H(x0);
    auto steps = static_cast<size_t>(std::llround(t / h));
    struct Out {
        double w = 0.0;
        bool stopped = false, overflow = false;
    };
    auto res = parallel_map(n_paths, ctl.workers, [&](size_t i) {
        Rng rng(ctl.seed, stream_id(kMartingale, 0, i));
        Point x(x0.begin(), x0.end());
        std::vector<double> dx(p.d);
        Out o;
        for (size_t k = 0; k < steps; ++k) {
            if (H.distance(x) < stop_dist) {
                o.stopped = true;
                break;
            }
            sample_increment(p, h, rng, dx);
            for (int j = 0; j < p.d; ++j) x[j] += dx[j];
        }
        if (H.distance(x) < 1e-9) {
            o.overflow = true;
            return o;
        }
        o.w = H(x) / h0;
        return o;
    });
    MartingaleResult r;
    std::vector<double> w;
    for (const auto& o : res) {
        r.stopped += o.stopped;
        if (o.overflow) {
            ++r.overflows;
            continue;
        }
        w.push_back(o.w);
    }
    r.mean = MCEstimate::from_samples(w, ctl.seed);
    return r;
}

// ---- hitting

double step_for(const HittingOptions& o, double eps) { return o.h > 0.0 ? o.h : o.h_factor * eps; }

ExperimentReport hitting_experiment(StableParams p, const TargetSet& set, std::span<const double> x,
                                    const HittingOptions& o, const RunControl& ctl) {
    p.require_conditioning();
    validate_grid(o.eps_grid);
    check_outside(set, x, p);
    bool plane = std::holds_alternative<PlanarSet>(set);
    bool cauchy = p.alpha == 1.0;
    ExperimentReport rep;
    rep.experiment = "hitting";
    rep.params = p;
    rep.geometry = describe(set);
    rep.geometry["x"] = std::vector<double>(x.begin(), x.end());
    rep.grid = o.eps_grid;

    ConstantTable K(p);
    double hx = harmonic(set, x, p);
    std::string hname = plane ? "M_D(x)" : "H_S(x)";
    rep.theory_value = (plane ? K.A_plane(Normalization::uncorrected) : K.A_sphere(Normalization::uncorrected)) * hx;
    rep.theory_source = std::string(plane ? (cauchy ? "A_plane_1" : "A_plane") : (cauchy ? "A_sphere_1" : "A_sphere")) +
                        " * " + hname + (cauchy ? ", scaled by |log eps|" : ", scaled by eps^(alpha-1)");
    rep.alternatives.emplace_back(hname, hx);
    rep.alternatives.emplace_back("unit", (plane ? K.A_plane(Normalization::unit) : K.A_sphere(Normalization::unit)) * hx);
    if (plane && !cauchy) rep.alternatives.emplace_back("sine_corrected", K.A_plane_sine_corrected() * hx);

    double T = ctl.horizon(p.alpha);
    for (size_t k = 0; k < o.eps_grid.size(); ++k) {
        double eps = o.eps_grid[k];
        double h = step_for(o, eps);
        Target tg = make_target(set, eps);
        check_resolution(h, tg);
        const Target* tp = &tg;
        WalkSettings ws{h, T, ctl.R_far};
        auto hits = parallel_map(o.n_paths, ctl.workers, [&](size_t i) {
            Rng rng(ctl.seed, stream_id(kHitting, k, i));
            return walk_first_hits(x, p, ws, std::span<const Target* const>(&tp, 1), rng)[0].hit ? 1.0 : 0.0;
        });
        EstimateRow row;
        row.eps = eps;
        row.h = h;
        row.p_hat = MCEstimate::from_samples(hits, ctl.seed);
        row.hits = static_cast<size_t>(std::llround(row.p_hat.value * row.p_hat.n));
        double f = scaled_factor(p.alpha, eps);
        row.scaled = f * row.p_hat.value;
        row.scaled_se = f * row.p_hat.se;
        rep.estimates.push_back(row);
    }

    const auto& E = rep.estimates;
    size_t n = E.size();
    if (n >= 2) {
        double a = E[n - 2].scaled, b = E[n - 1].scaled;
        double rel = std::fabs(b - a) / std::fabs(a);
        rep.checks.push_back({"scaled_trend", rel < o.trend_tol, rel, o.trend_tol,
                              "relative change of the scaled estimate between the last two eps"});
    }
    double env = std::fabs(E.back().scaled / rep.theory_value - 1.0);
    rep.checks.push_back({"theory_envelope", env < o.envelope_tol, env, o.envelope_tol,
                          "relative distance of the last scaled estimate from " + rep.theory_source});
    bool sane = std::all_of(E.begin(), E.end(), [&](const EstimateRow& r) {
        return r.scaled > 0.0 && r.scaled < 10.0 * rep.theory_value;
    });
    rep.checks.push_back({"sanity_envelope", sane, 0.0, 10.0, "every scaled estimate in (0, 10 * theory)"});
    if (n >= 3) {
        bool dec = true;
        for (size_t i = 2; i < n; ++i)
            dec = dec && std::fabs(E[i].scaled - E[i - 1].scaled) < std::fabs(E[i - 1].scaled - E[i - 2].scaled);
        rep.checks.push_back({"cauchy_differences", dec, 0.0, 0.0, "successive differences shrink (noisy)", true});
    }
    for (const auto& [name, v] : rep.alternatives) {
        if (name == hname) continue;
        double dist = std::fabs(E.back().scaled / v - 1.0);
        rep.checks.push_back({"envelope_vs_" + name, dist < o.envelope_tol, dist, o.envelope_tol,
                              "same envelope against the " + name + " constant", true});
    }
    return rep;
}

ExperimentReport strike_experiment(StableParams p, const TargetSet& set, const TargetSet& sub,
                                   std::span<const double> x, const StrikeOptions& o, const RunControl& ctl) {
    p.require_conditioning();
    validate_grid(o.eps_grid);
    check_outside(set, x, p);
    if (set.index() != sub.index()) throw ParameterError("strike_experiment: set and subset must be of the same kind");
    // subset check on samples of the subset
    {
        Rng rng(ctl.seed, stream_id(kStrike, 0xff, 0));
        for (int i = 0; i < 256; ++i) {
            if (auto* S = std::get_if<CapSet>(&set)) {
                Point q = sample_boundary(std::get<CapSet>(sub), rng);
                if (angular_distance(*S, Direction(q)) > 1e-9) throw ParameterError("strike_experiment: subset not inside set");
            } else {
                const auto& D = std::get<PlanarSet>(set);
                Point q = sample_boundary(std::get<PlanarSet>(sub), rng);
                if (euclidean_distance(D, q) > 1e-9) throw ParameterError("strike_experiment: subset not inside set");
            }
        }
    }
    ExperimentReport rep;
    rep.experiment = "strike";
    rep.params = p;
    rep.geometry = {{"set", describe(set)}, {"subset", describe(sub)}, {"x", std::vector<double>(x.begin(), x.end())}};
    rep.grid = o.eps_grid;
    double num_h = harmonic(sub, x, p), den_h = harmonic(set, x, p);
    rep.theory_value = num_h / den_h;
    rep.theory_source = std::holds_alternative<CapSet>(set) ? "H_S'(x) / H_S(x)" : "M_D'(x) / M_D(x)";

    double T = ctl.horizon(p.alpha);
    for (size_t k = 0; k < o.eps_grid.size(); ++k) {
        double eps = o.eps_grid[k];
        double h = step_for(o, eps);
        Target big = make_target(set, eps), small = make_target(sub, eps);
        const Target* tps[2] = {&big, &small};
        WalkSettings ws{h, T, ctl.R_far};
        auto res = parallel_map(o.n_paths, ctl.workers, [&](size_t i) {
            Rng rng(ctl.seed, stream_id(kStrike, k, i));
            auto r = walk_first_hits(x, p, ws, std::span<const Target* const>(tps, 2), rng);
            return std::pair<double, double>(r[1].hit ? 1.0 : 0.0, r[0].hit ? 1.0 : 0.0);
        });
        std::vector<double> a(res.size()), b(res.size());
        for (size_t i = 0; i < res.size(); ++i) std::tie(a[i], b[i]) = res[i];
        double sa = pairwise_sum(a), sb = pairwise_sum(b);
        EstimateRow row;
        row.eps = eps;
        row.h = h;
        row.hits = static_cast<size_t>(sb);
        row.p_hat.n = res.size();
        row.p_hat.seed = ctl.seed;
        if (sb == 0.0) {
            row.degenerate = true;
            row.p_hat.value = row.p_hat.se = row.scaled = row.scaled_se = std::nan("");
        } else {
            double R = sa / sb;
            std::vector<double> dev(res.size());
            for (size_t i = 0; i < res.size(); ++i) dev[i] = (a[i] - R * b[i]) * (a[i] - R * b[i]);
            row.p_hat.value = R;
            row.p_hat.se = std::sqrt(pairwise_sum(dev)) / sb;
            row.scaled = R;
            row.scaled_se = row.p_hat.se;
        }
        rep.estimates.push_back(row);
    }
    const auto& last = rep.estimates.back();
    if (last.degenerate) {
        rep.checks.push_back({"ratio_vs_theory", false, std::nan(""), o.abs_tol, "no path hit the set at the last eps"});
    } else {
        double tol = std::max(o.se_mult * last.p_hat.se, o.abs_tol);
        double dev = std::fabs(last.p_hat.value - rep.theory_value);
        rep.checks.push_back({"ratio_vs_theory", dev <= tol, dev, tol, "|ratio - theory| <= max(k*SE, abs_tol) at the last eps"});
    }
    for (const auto& r : rep.estimates)
        if (r.degenerate)
            rep.checks.push_back({"degenerate_eps_" + fmt(r.eps), false, 0.0, 0.0, "no path hit the set", true});
    return rep;
}

// ---- duality

double bump(const Window& w, std::span<const double> x) {
    double q = dist(x, w.center) / w.radius;
    if (q >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - q * q));
}

double DualityResult::combined_se() const { return std::hypot(lhs.se, rhs.se); }

namespace {

// polar Gauss-Legendre nodes on a ball window; weights include the Jacobian
struct WindowNodes {
    std::vector<Point> y;
    std::vector<double> w;
};

WindowNodes window_nodes(const Window& win, int d) {
    const auto& gl = quad::gauss_legendre(16);
    auto dirs = quadrature_nodes(CapSet::full_sphere(d), d == 2 ? 48 : 384);
    double area = sphere_area(d);
    WindowNodes n;
    for (size_t i = 0; i < gl.x.size(); ++i) {
        double rho = 0.5 * win.radius * (gl.x[i] + 1.0);
        double wr = 0.5 * win.radius * gl.w[i] * std::pow(rho, d - 1) * area;
        for (const auto& nd : dirs) {
            Point y(d);
            for (int j = 0; j < d; ++j) y[j] = win.center[j] + rho * nd.dir[j];
            n.y.push_back(std::move(y));
            n.w.push_back(wr * nd.weight);
        }
    }
    return n;
}

struct WindowSampler {
    const HarmonicEvaluator& H;
    const Window& w;
    double bound;

    WindowSampler(const HarmonicEvaluator& h, const Window& win, StableParams p) : H(h), w(win) {
        double dmin = H.distance(w.center) - w.radius;
        if (!(dmin > 1e-9)) throw SamplingError("duality window intersects the 1e-9 neighborhood of S");
        bound = surface_measure(H.set()) * std::pow(dmin, p.alpha - p.d);
    }
    // x ~ H(x) dx on the window
    Point draw(Rng& rng, double& hx) const {
        for (int tries = 0; tries < 1000000; ++tries) {
            Point x = uniform_in_ball(w.center, w.radius, rng);
            hx = H(x);
            if (rng.uniform() * bound <= hx) return x;
        }
        throw SamplingError("duality window rejection sampler did not accept");
    }
};

// E[u(x + X_t)] for the tabulated u on the window, conditionally on the subordinator draw:
// given S the increment is Gaussian with variance 2 t^{2/alpha} S per coordinate
double smoothed(const WindowNodes& nodes, const std::vector<double>& u, std::span<const double> x, double var, int d) {
    double norm_c = std::pow(2.0 * M_PI * var, -0.5 * d), acc = 0.0;
    for (size_t k = 0; k < nodes.y.size(); ++k) {
        if (u[k] == 0.0) continue;
        double q = 0.0;
        for (int j = 0; j < d; ++j) q += (nodes.y[k][j] - x[j]) * (nodes.y[k][j] - x[j]);
        acc += nodes.w[k] * u[k] * std::exp(-0.5 * q / var);
    }
    return norm_c * acc;
}

}  // namespace

DualityResult duality_experiment(StableParams p, const CapSet& S, const Window& fw, const Window& gw, double t,
                                 size_t n_paths, const RunControl& ctl) {
    p.require_conditioning();
    if (!(t >= 0.0)) throw ParameterError("duality_experiment: t must be non-negative");
    if (static_cast<int>(fw.center.size()) != p.d || static_cast<int>(gw.center.size()) != p.d)
        throw ParameterError("duality_experiment: window dimension mismatch");
    HarmonicEvaluator H(S, p);
    WindowSampler sf(H, fw, p), sg(H, gw, p);
    auto nf = window_nodes(fw, p.d), ng = window_nodes(gw, p.d);
    std::vector<double> hf(nf.y.size()), hg(ng.y.size()), f_at_f(nf.y.size()), gh_at_g(ng.y.size());
    DualityResult r;
    for (size_t k = 0; k < nf.y.size(); ++k) {
        hf[k] = H(nf.y[k]);
        f_at_f[k] = bump(fw, nf.y[k]);
        r.z_f += nf.w[k] * hf[k];
    }
    for (size_t k = 0; k < ng.y.size(); ++k) {
        hg[k] = H(ng.y[k]);
        gh_at_g[k] = bump(gw, ng.y[k]) * hg[k];
        r.z_g += ng.w[k] * hg[k];
    }
    // X_t is drawn exactly (no time grid); the Gaussian stage is integrated out over the
    // window by quadrature, leaving the start point and the subordinator random
    auto variance = [&](Rng& rng) { return 2.0 * std::pow(t, 2.0 / p.alpha) * sample_positive_stable(0.5 * p.alpha, rng); };
    auto lhs = parallel_map(n_paths, ctl.workers, [&](size_t i) {
        Rng rng(ctl.seed, stream_id(kDualityLhs, 0, i));
        double hx;
        Point x = sg.draw(rng, hx);
        double ef = t > 0.0 ? smoothed(nf, f_at_f, x, variance(rng), p.d) : bump(fw, x);
        return r.z_g * bump(gw, x) * ef;
    });
    auto rhs = parallel_map(n_paths, ctl.workers, [&](size_t i) {
        Rng rng(ctl.seed, stream_id(kDualityRhs, 0, i));
        double hx;
        Point x = sf.draw(rng, hx);
        double egh = t > 0.0 ? smoothed(ng, gh_at_g, x, variance(rng), p.d) : bump(gw, x) * hx;
        return r.z_f * bump(fw, x) * egh / hx;
    });
    r.lhs = MCEstimate::from_samples(lhs, ctl.seed);
    r.rhs = MCEstimate::from_samples(rhs, ctl.seed);
    return r;
}

// ---- reversal

ReversalResult reversal_experiment(StableParams p, const CapSet& S, const ReversalOptions& o, const RunControl& ctl) {
    p.require_conditioning();
    if (!(o.R_exit > 1.0) || !(o.r_min < o.R_exit) || o.bins == 0) throw ParameterError("reversal_experiment: bad bins or R_exit");
    if (!(ctl.R_far > o.R_exit)) throw ParameterError("reversal_experiment: R_far must exceed R_exit");
    HarmonicEvaluator H(S, p);
    double T = ctl.horizon(p.alpha);
    double scale = std::pow(o.h, 1.0 / p.alpha);
    double width = (o.R_exit - o.r_min) / o.bins;
    auto bin_of = [&](double r) -> long {
        if (r < o.r_min || r >= o.R_exit) return -1;
        return std::min<long>(static_cast<long>((r - o.r_min) / width), static_cast<long>(o.bins) - 1);
    };
    auto stat = [&](double r0, double r1) { return std::clamp((r1 - r0) / scale, -1.0, 1.0); };
    const double thin = 0.1;  // fraction of reversed transitions that seed a forward draw

    struct PathOut {
        std::vector<double> s, s2, cnt;
        std::vector<std::pair<long, std::pair<double, double>>> fwd;  // bin, (w, stat)
        Point first;
        bool exited = true;
    };
    auto res = parallel_map(o.n_paths, ctl.workers, [&](size_t i) {
        Rng rng(ctl.seed, stream_id(kReversal, 0, i));
        PathOut out;
        out.s.assign(o.bins, 0.0);
        out.s2.assign(o.bins, 0.0);
        out.cnt.assign(o.bins, 0.0);
        Point a = sample_boundary(S, rng);
        auto [path, rec] = simulate_path(a, p, o.h, T, ctl.R_far, nullptr, rng);
        out.exited = path.stopped_reason == StopReason::far_field;
        size_t L = 0;
        for (size_t k = 0; k < path.size(); ++k)
            if (norm(path.point(k)) <= o.R_exit) L = k;
        out.first.assign(path.point(L).begin(), path.point(L).end());
        std::vector<double> dx(p.d);
        Point y(p.d);
        for (size_t k = L; k >= 1; --k) {
            auto z = path.point(k);
            double r0 = norm(z);
            long b = bin_of(r0);
            if (b < 0) continue;
            double s = stat(r0, norm(path.point(k - 1)));
            out.s[b] += s;
            out.s2[b] += s * s;
            out.cnt[b] += 1.0;
            if (rng.uniform() >= thin) continue;
            sample_increment(p, o.h, rng, dx);
            for (int j = 0; j < p.d; ++j) y[j] = z[j] + dx[j];
            double w = H.distance(y) < 1e-9 ? 0.0 : H(y) / H(z);
            out.fwd.push_back({b, {w, stat(r0, norm(y))}});
        }
        return out;
    });

    ReversalResult rr;
    rr.bins.resize(o.bins);
    std::vector<std::vector<double>> fw(o.bins), fs(o.bins);
    std::vector<double> S1(o.bins, 0.0), S2(o.bins, 0.0), N(o.bins, 0.0);
    for (const auto& po : res) {
        rr.never_exited += !po.exited;
        rr.first_points.push_back(po.first);
        for (size_t b = 0; b < o.bins; ++b) {
            S1[b] += po.s[b];
            S2[b] += po.s2[b];
            N[b] += po.cnt[b];
        }
        for (const auto& [b, ws] : po.fwd) {
            fw[b].push_back(ws.first);
            fs[b].push_back(ws.second);
        }
    }
    size_t occupied = 0, agree = 0;
    for (size_t b = 0; b < o.bins; ++b) {
        auto& B = rr.bins[b];
        B.r_lo = o.r_min + b * width;
        B.r_hi = B.r_lo + width;
        B.reversed.n = static_cast<size_t>(N[b]);
        B.reversed.seed = B.forward.seed = ctl.seed;
        if (N[b] > 1) {
            B.reversed.value = S1[b] / N[b];
            double var = (S2[b] - N[b] * B.reversed.value * B.reversed.value) / (N[b] - 1);
            B.reversed.se = std::sqrt(std::max(var, 0.0) / N[b]);
        }
        B.forward.n = fw[b].size();
        double sw = pairwise_sum(fw[b]);
        if (sw > 0.0) {
            std::vector<double> ws(fw[b].size());
            for (size_t i = 0; i < ws.size(); ++i) ws[i] = fw[b][i] * fs[b][i];
            double m = pairwise_sum(ws) / sw;
            for (size_t i = 0; i < ws.size(); ++i) ws[i] = fw[b][i] * fw[b][i] * (fs[b][i] - m) * (fs[b][i] - m);
            B.forward.value = m;
            B.forward.se = std::sqrt(pairwise_sum(ws)) / sw;
        }
        B.occupied = N[b] >= o.min_count && B.forward.n >= o.min_count / 10;
        if (!B.occupied) continue;
        ++occupied;
        double tol = o.sigma * std::hypot(B.reversed.se, B.forward.se);
        B.agree = std::fabs(B.reversed.value - B.forward.value) <= tol;
        agree += B.agree;
    }
    rr.agree_fraction = occupied ? static_cast<double>(agree) / occupied : 0.0;
    rr.pass = occupied > 0 && rr.agree_fraction >= o.agree_fraction;
    return rr;
}

// ---- occupation

double ball_riesz_integral(StableParams p, std::span<const double> x, std::span<const double> y, double r) {
    p.validate();
    if (!(r > 0.0)) throw ParameterError("ball_riesz_integral: r must be positive");
    double L = dist(x, y), a = p.alpha;
    int d = p.d;
    double ring = d == 2 ? 2.0 : sphere_area(d - 1);
    double psi_max = L > r ? std::asin(r / L) : M_PI;
    auto f = [&](double psi) {
        double c = std::cos(psi), s = std::sin(psi);
        double disc = r * r - L * L * s * s;
        if (disc <= 0.0) return 0.0;
        double sq = std::sqrt(disc);
        double t2 = L * c + sq, t1 = std::max(0.0, L * c - sq);
        if (t2 <= 0.0) return 0.0;
        return ring * std::pow(s, d - 2) * (std::pow(t2, a) - std::pow(t1, a)) / a;
    };
    return quad::tanh_sinh(f, 0.0, psi_max, 1e-12);
}

OccupationResult occupation_experiment(StableParams p, std::span<const double> x, std::span<const double> y,
                                       double r, double h, size_t n_paths, const RunControl& ctl) {
    p.validate();
    if (!(h > 0.0)) throw ParameterError("occupation_experiment: h must be positive");
    double T = ctl.horizon(p.alpha);
    auto res = parallel_map(n_paths, ctl.workers, [&](size_t i) {
        Rng rng(ctl.seed, stream_id(kOccupation, 0, i));
        auto [path, rec] = simulate_path(x, p, h, T, ctl.R_far, nullptr, rng);
        return occupation_time(path, y, r);
    });
    OccupationResult o;
    o.h = h;
    o.estimate = MCEstimate::from_samples(res, ctl.seed);
    o.theory = ConstantTable(p).potential_const() * ball_riesz_integral(p, x, y, r);
    return o;
}

std::vector<OccupationResult> occupation_refinement(StableParams p, std::span<const double> x,
                                                    std::span<const double> y, double r, double h_fine,
                                                    int levels, size_t n_paths, const RunControl& ctl) {
    p.validate();
    if (!(h_fine > 0.0) || levels < 1 || levels > 20) throw ParameterError("occupation_refinement: bad h or levels");
    double T = ctl.horizon(p.alpha);
    auto res = parallel_map(n_paths, ctl.workers, [&](size_t i) {
        Rng rng(ctl.seed, stream_id(kOccupation, 1, i));
        auto [path, rec] = simulate_path(x, p, h_fine, T, ctl.R_far, nullptr, rng);
        std::vector<double> occ(levels, 0.0);
        for (size_t k = 0; k < path.size(); ++k) {
            if (dist(path.point(k), y) > r) continue;
            for (int l = 0; l < levels; ++l)
                if (k % (size_t{1} << l) == 0) occ[l] += h_fine * static_cast<double>(size_t{1} << l);
        }
        return occ;
    });
    double theory = ConstantTable(p).potential_const() * ball_riesz_integral(p, x, y, r);
    std::vector<OccupationResult> out;
    for (int l = levels - 1; l >= 0; --l) {
        std::vector<double> v(n_paths);
        for (size_t i = 0; i < n_paths; ++i) v[i] = res[i][l];
        OccupationResult o;
        o.h = h_fine * static_cast<double>(size_t{1} << l);
        o.estimate = MCEstimate::from_samples(v, ctl.seed);
        o.theory = theory;
        out.push_back(o);
    }
    return out;
}

}  // namespace stablecond
