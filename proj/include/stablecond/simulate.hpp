#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stablecond/geometry.hpp"
#include "stablecond/potential.hpp"
#include "stablecond/rng.hpp"

namespace stablecond {

// draw with E exp(-lambda S) = exp(-lambda^beta), 0 < beta < 1
double sample_positive_stable(double beta, Rng& rng);

// X_h - X_0: Gaussian with variance 2 h^{2/alpha} S per coordinate, S positive (alpha/2)-stable
void sample_increment(StableParams p, double h, Rng& rng, std::span<double> out);

enum class StopReason { horizon, far_field, target_hit };
const char* to_string(StopReason r);

struct PathGrid {
    double alpha = 0.0;
    int d = 0;
    double h = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<double> positions;  // row-major, size() * d
    StopReason stopped_reason = StopReason::horizon;

    size_t size() const { return d ? positions.size() / d : 0; }
    std::span<const double> point(size_t i) const { return {positions.data() + i * d, static_cast<size_t>(d)}; }
    std::span<const double> origin() const { return point(0); }
};

struct HitRecord {
    bool hit = false;
    std::optional<size_t> hit_index;
    std::optional<Point> hit_position;
    double elapsed = 0.0;  // time of the hit, or total simulated time
};

// Walk from x0 until the target is entered, t exceeds T, or |X| > R_far.
// Needs h <= eps/4 for a target of half-width eps.
std::pair<PathGrid, HitRecord> simulate_path(std::span<const double> x0, StableParams p, double h, double T,
                                             double R_far, const Target* target, Rng& rng,
                                             std::uint64_t seed = 0, std::uint64_t stream = 0);

void check_resolution(double h, const Target& target);

struct WalkSettings {
    double h;
    double T;
    double R_far;
};

// Like simulate_path without storing positions: walks until every target has been entered
// (or the horizon / far field stops the walk) and returns the first hit of each target.
std::vector<HitRecord> walk_first_hits(std::span<const double> x0, StableParams p, const WalkSettings& w,
                                       std::span<const Target* const> targets, Rng& rng);

// first index with 1/beta < |X| < beta
HitRecord detect_exit_annulus(const PathGrid& path, double beta);
// first index with -beta < (v, X) < beta
HitRecord detect_slab_entry(const PathGrid& path, const Direction& v, double beta);

double occupation_time(const PathGrid& path, std::span<const double> center, double r);

// little-endian: alpha f64, d u32, h f64, seed u64, n u64, then n*d f64
void write_path_dump(std::ostream& os, const PathGrid& path);
PathGrid read_path_dump(std::istream& is);

}  // namespace stablecond
