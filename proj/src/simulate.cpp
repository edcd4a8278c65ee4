#include "stablecond/simulate.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "stablecond/errors.hpp"

namespace stablecond {

double sample_positive_stable(double beta, Rng& rng) {
    if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("sample_positive_stable: beta must lie in (0, 1)");
    double u = M_PI * rng.uniform();
    double e = rng.exponential();
    double a = std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta);
    double b = std::pow(std::sin((1.0 - beta) * u) / e, (1.0 - beta) / beta);
    return a * b;
}

void sample_increment(StableParams p, double h, Rng& rng, std::span<double> out) {
    double s = sample_positive_stable(0.5 * p.alpha, rng);
    double scale = std::sqrt(2.0 * s) * std::pow(h, 1.0 / p.alpha);
    for (auto& v : out) v = scale * rng.normal();
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::horizon: return "horizon";
        case StopReason::far_field: return "far_field";
        case StopReason::target_hit: return "target_hit";
    }
    return "?";
}

void check_resolution(double h, const Target& target) {
    double eps = std::visit([](const auto& t) { return t.eps; }, target);
    if (h > eps / 4.0)
        throw ResolutionError("time step h = " + std::to_string(h) + " exceeds eps/4 = " + std::to_string(eps / 4.0));
}

std::pair<PathGrid, HitRecord> simulate_path(std::span<const double> x0, StableParams p, double h, double T,
                                             double R_far, const Target* target, Rng& rng, std::uint64_t seed,
                                             std::uint64_t stream) {
    p.validate();
    if (!(h > 0.0) || !(T > 0.0) || !(R_far > 0.0)) throw ParameterError("simulate_path: h, T, R_far must be positive");
    if (static_cast<int>(x0.size()) != p.d) throw ParameterError("simulate_path: x0 has wrong dimension");
    if (target) check_resolution(h, *target);
    PathGrid g;
    g.alpha = p.alpha;
    g.d = p.d;
    g.h = h;
    g.seed = seed;
    g.stream = stream;
    g.positions.assign(x0.begin(), x0.end());
    HitRecord rec;
    std::vector<double> x(x0.begin(), x0.end()), dx(p.d);
    auto n_max = static_cast<size_t>(std::floor(T / h));
    for (size_t i = 0;; ++i) {
        if (target && in_target(x, *target)) {
            rec.hit = true;
            rec.hit_index = i;
            rec.hit_position = x;
            rec.elapsed = i * h;
            g.stopped_reason = StopReason::target_hit;
            return {std::move(g), std::move(rec)};
        }
        if (norm(x) > R_far) {
            g.stopped_reason = StopReason::far_field;
            break;
        }
        if (i >= n_max) {
            g.stopped_reason = StopReason::horizon;
            break;
        }
        sample_increment(p, h, rng, dx);
        for (int j = 0; j < p.d; ++j) x[j] += dx[j];
        g.positions.insert(g.positions.end(), x.begin(), x.end());
    }
    rec.elapsed = (g.size() - 1) * h;
    return {std::move(g), std::move(rec)};
}

std::vector<HitRecord> walk_first_hits(std::span<const double> x0, StableParams p, const WalkSettings& w,
                                       std::span<const Target* const> targets, Rng& rng) {
    if (!(w.h > 0.0) || !(w.T > 0.0) || !(w.R_far > 0.0))
        throw ParameterError("walk_first_hits: h, T, R_far must be positive");
    if (static_cast<int>(x0.size()) != p.d) throw ParameterError("walk_first_hits: x0 has wrong dimension");
    for (const auto* t : targets) check_resolution(w.h, *t);
    std::vector<HitRecord> out(targets.size());
    std::vector<double> x(x0.begin(), x0.end()), dx(p.d);
    auto n_max = static_cast<size_t>(std::floor(w.T / w.h));
    size_t pending = targets.size();
    size_t i = 0;
    for (;; ++i) {
        for (size_t k = 0; k < targets.size(); ++k) {
            if (out[k].hit || !in_target(x, *targets[k])) continue;
            out[k].hit = true;
            out[k].hit_index = i;
            out[k].hit_position = x;
            out[k].elapsed = i * w.h;
            --pending;
        }
        if (pending == 0 || i >= n_max || norm(x) > w.R_far) break;
        sample_increment(p, w.h, rng, dx);
        for (int j = 0; j < p.d; ++j) x[j] += dx[j];
    }
    for (auto& r : out)
        if (!r.hit) r.elapsed = i * w.h;
    return out;
}

HitRecord detect_exit_annulus(const PathGrid& path, double beta) {
    if (!(beta > 1.0)) throw ParameterError("detect_exit_annulus: beta must exceed 1");
    HitRecord rec;
    for (size_t i = 0; i < path.size(); ++i) {
        double r = norm(path.point(i));
        if (r > 1.0 / beta && r < beta) {
            rec.hit = true;
            rec.hit_index = i;
            rec.hit_position = Point(path.point(i).begin(), path.point(i).end());
            rec.elapsed = i * path.h;
            return rec;
        }
    }
    rec.elapsed = path.size() ? (path.size() - 1) * path.h : 0.0;
    return rec;
}

HitRecord detect_slab_entry(const PathGrid& path, const Direction& v, double beta) {
    if (!(beta > 0.0)) throw ParameterError("detect_slab_entry: beta must be positive");
    HitRecord rec;
    for (size_t i = 0; i < path.size(); ++i) {
        double s = dot(path.point(i), v.coords());
        if (s > -beta && s < beta) {
            rec.hit = true;
            rec.hit_index = i;
            rec.hit_position = Point(path.point(i).begin(), path.point(i).end());
            rec.elapsed = i * path.h;
            return rec;
        }
    }
    rec.elapsed = path.size() ? (path.size() - 1) * path.h : 0.0;
    return rec;
}

double occupation_time(const PathGrid& path, std::span<const double> center, double r) {
    if (!(r > 0.0)) throw ParameterError("occupation_time: r must be positive");
    size_t n = 0;
    for (size_t i = 0; i < path.size(); ++i)
        if (dist(path.point(i), center) <= r) ++n;
    return n * path.h;
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw std::runtime_error("path dump truncated");
    if constexpr (std::endian::native == std::endian::big)
        for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void write_path_dump(std::ostream& os, const PathGrid& path) {
    put<double>(os, path.alpha);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(path.d));
    put<double>(os, path.h);
    put<std::uint64_t>(os, path.seed);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(path.size()));
    for (double v : path.positions) put<double>(os, v);
}

PathGrid read_path_dump(std::istream& is) {
    PathGrid g;
    g.alpha = get<double>(is);
    g.d = static_cast<int>(get<std::uint32_t>(is));
    g.h = get<double>(is);
    g.seed = get<std::uint64_t>(is);
    auto n = get<std::uint64_t>(is);
    if (g.d < 1 || n > (1ull << 34)) throw std::runtime_error("path dump header invalid");
    g.positions.resize(n * g.d);
    for (auto& v : g.positions) v = get<double>(is);
    return g;
}

}  // namespace stablecond
