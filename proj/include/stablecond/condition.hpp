#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stablecond/geometry.hpp"
#include "stablecond/potential.hpp"
#include "stablecond/simulate.hpp"

namespace stablecond {

struct MCEstimate {
    double value = 0.0;
    double se = 0.0;  // sample standard deviation (n-1) over sqrt(n)
    size_t n = 0;
    std::uint64_t seed = 0;

    static MCEstimate from_samples(std::span<const double> v, std::uint64_t seed);
};

// Seed, parallelism and truncation shared by every experiment.
struct RunControl {
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double R_far = 50.0;
    double T = 0.0;  // 0 selects 10 R_far^alpha
    double horizon(double alpha) const;
};

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string note;
    bool advisory = false;  // reported, never fails a run
};

struct EstimateRow {
    double eps = 0.0;
    double h = 0.0;
    MCEstimate p_hat;
    double scaled = 0.0;
    double scaled_se = 0.0;
    size_t hits = 0;
    bool degenerate = false;
};

struct ExperimentReport {
    std::string experiment;
    StableParams params{};
    nlohmann::json geometry;
    std::vector<double> grid;
    std::vector<EstimateRow> estimates;
    double theory_value = 0.0;
    std::string theory_source;
    std::vector<std::pair<std::string, double>> alternatives;
    std::vector<Check> checks;
    nlohmann::json extra = nlohmann::json::object();
    // rows for experiments without an eps grid (duality pairs, reversal bins)
    std::vector<std::string> table_header;
    std::vector<std::vector<double>> table;

    bool passed() const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
    // eps, scaled, theory: whitespace separated, one line per eps (or the table rows)
    std::string plot_data() const;
};

// %.17g, "nan" for non-finite values; the number format of every CSV and plot file
std::string format_number(double v);

using TargetSet = std::variant<CapSet, PlanarSet>;

nlohmann::json describe(const CapSet& S);
nlohmann::json describe(const PlanarSet& D);
nlohmann::json describe(const TargetSet& s);

// ---- h-transform weight

struct HWeight {
    double value = 0.0;
    bool overflow = false;  // path point within 1e-9 of S; value is meaningless
};

HWeight h_weight(const PathGrid& path, const CapSet& S, size_t t_index, StableParams p);
HWeight h_weight(const PathGrid& path, const HarmonicEvaluator& H, size_t t_index);

struct MartingaleResult {
    MCEstimate mean;
    size_t stopped = 0;
    size_t overflows = 0;
};
// mean of H_S(X_{t ^ tau}) / H_S(x0), tau = first grid time with dist(X, S) < stop_dist
MartingaleResult martingale_check(StableParams p, const CapSet& S, std::span<const double> x0, double t, double h,
                                  double stop_dist, size_t n_paths, const RunControl& ctl);

// ---- hitting and strike experiments

struct HittingOptions {
    std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025};
    size_t n_paths = 10000;
    double h_factor = 0.125;  // h = h_factor * eps unless h is set
    double h = 0.0;
    double trend_tol = 0.2;
    double envelope_tol = 0.3;
};

double step_for(const HittingOptions& o, double eps);

ExperimentReport hitting_experiment(StableParams p, const TargetSet& set, std::span<const double> x,
                                    const HittingOptions& o, const RunControl& ctl);

struct StrikeOptions : HittingOptions {
    double abs_tol = 0.05;
    double se_mult = 3.0;
};

// P(hit sub_eps) / P(hit set_eps) on shared paths, against the ratio of harmonic functions
ExperimentReport strike_experiment(StableParams p, const TargetSet& set, const TargetSet& sub,
                                   std::span<const double> x, const StrikeOptions& o, const RunControl& ctl);

// ---- duality

struct Window {
    Point center;
    double radius;
};
// smooth bump on the window, 1 at the center
double bump(const Window& w, std::span<const double> x);

struct DualityResult {
    MCEstimate lhs, rhs;
    double z_f = 0.0, z_g = 0.0;  // integral of H_S over each window
    double diff() const { return lhs.value - rhs.value; }
    double combined_se() const;
};

// lhs = int E_x[f(X_t)] g(x) eta(dx), rhs = int f(x) E^S_x[g(X_t)] eta(dx), eta = H_S dx
DualityResult duality_experiment(StableParams p, const CapSet& S, const Window& f_window, const Window& g_window,
                                 double t, size_t n_paths, const RunControl& ctl);

// ---- time reversal diagnostic

struct ReversalOptions {
    double R_exit = 3.0;
    size_t n_paths = 20000;
    double h = 0.01;
    size_t bins = 6;
    double r_min = 1.25;  // bins cover r_min <= |x| < R_exit
    size_t min_count = 200;
    double sigma = 4.0;
    double agree_fraction = 0.8;
};

struct ReversalBin {
    double r_lo = 0.0, r_hi = 0.0;
    MCEstimate reversed, forward;
    bool occupied = false;
    bool agree = false;
};

struct ReversalResult {
    std::vector<ReversalBin> bins;
    size_t never_exited = 0;
    double agree_fraction = 0.0;
    bool pass = false;
    std::vector<Point> first_points;  // X at the last exit, one per path (for checks)
};

ReversalResult reversal_experiment(StableParams p, const CapSet& S, const ReversalOptions& o, const RunControl& ctl);

// ---- occupation time of a ball against the Riesz potential

// int over B(y, r) of |x - z|^{alpha - d} dz
double ball_riesz_integral(StableParams p, std::span<const double> x, std::span<const double> y, double r);

struct OccupationResult {
    MCEstimate estimate;
    double theory = 0.0;
    double h = 0.0;
};

OccupationResult occupation_experiment(StableParams p, std::span<const double> x, std::span<const double> y,
                                       double r, double h, size_t n_paths, const RunControl& ctl);

// One set of paths on the finest step, read at steps h_fine * 2^k (k = levels-1 .. 0) by
// subsampling, so the levels share their randomness. Returned coarse to fine.
std::vector<OccupationResult> occupation_refinement(StableParams p, std::span<const double> x,
                                                    std::span<const double> y, double r, double h_fine,
                                                    int levels, size_t n_paths, const RunControl& ctl);

}  // namespace stablecond
