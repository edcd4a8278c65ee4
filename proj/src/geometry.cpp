#include "stablecond/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "stablecond/errors.hpp"
#include "stablecond/quadrature.hpp"

namespace stablecond {

namespace {

double clamp1(double x) { return std::max(-1.0, std::min(1.0, x)); }

// Gram-Schmidt of e_i (i != skip) against a
std::vector<std::vector<double>> gram_schmidt(const std::vector<double>& a, int skip) {
    int d = static_cast<int>(a.size());
    std::vector<std::vector<double>> out;
    for (int i = 0; i < d; ++i) {
        if (i == skip) continue;
        std::vector<double> e(d, 0.0);
        e[i] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            double p = dot(e, a);
            for (int j = 0; j < d; ++j) e[j] -= p * a[j];
            for (const auto& q : out) {
                p = dot(e, q);
                for (int j = 0; j < d; ++j) e[j] -= p * q[j];
            }
        }
        double n = norm(e);
        for (auto& v : e) v /= n;
        out.push_back(std::move(e));
    }
    return out;
}

int most_aligned(const std::vector<double>& a) {
    int k = 0;
    for (int i = 1; i < static_cast<int>(a.size()); ++i)
        if (std::fabs(a[i]) > std::fabs(a[k])) k = i;
    return k;
}

struct Arc {
    double lo, hi;
};

// union of arcs [phi - r, phi + r] on the circle, as disjoint intervals inside [0, 2 pi)
std::vector<Arc> merge_arcs(std::vector<Arc> arcs) {
    const double tau = 2.0 * M_PI;
    std::vector<Arc> pieces;
    for (auto a : arcs) {
        if (a.hi - a.lo >= tau) return {{0.0, tau}};
        double lo = std::fmod(a.lo, tau);
        if (lo < 0) lo += tau;
        double hi = lo + (a.hi - a.lo);
        if (hi <= tau) {
            pieces.push_back({lo, hi});
        } else {
            pieces.push_back({lo, tau});
            pieces.push_back({0.0, hi - tau});
        }
    }
    std::sort(pieces.begin(), pieces.end(), [](const Arc& x, const Arc& y) { return x.lo < y.lo; });
    std::vector<Arc> out;
    for (const auto& p : pieces) {
        if (!out.empty() && p.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, p.hi);
        else
            out.push_back(p);
    }
    return out;
}

double single_cap_measure(int k, double r) {
    if (r >= M_PI) return 1.0;
    if (r <= 0.0) return 0.0;
    if (k == 1) return 0.5;
    return detail::sin_power_integral(k - 2, r) / detail::sin_power_integral(k - 2, M_PI);
}

// drop caps contained in another cap and caps of non-positive radius
std::vector<detail::RawCap> prune(const std::vector<detail::RawCap>& caps) {
    std::vector<detail::RawCap> live;
    for (const auto& c : caps)
        if (c.r > 0.0) live.push_back(c);
    std::vector<detail::RawCap> out;
    for (size_t i = 0; i < live.size(); ++i) {
        bool inside = false;
        for (size_t j = 0; j < live.size() && !inside; ++j) {
            if (i == j) continue;
            double g = std::acos(clamp1(dot(live[i].c, live[j].c)));
            if (g + live[i].r < live[j].r || (g + live[i].r == live[j].r && j < i)) inside = true;
        }
        if (!inside) out.push_back(live[i]);
    }
    return out;
}

// arcs of the ring at psi about axis a (basis e1, e2 of the complement) covered by the caps (d = 3)
std::vector<Arc> ring_arcs(const std::vector<double>& a, const std::vector<double>& e1,
                           const std::vector<double>& e2, double psi, const std::vector<detail::RawCap>& caps,
                           bool& full) {
    full = false;
    std::vector<Arc> arcs;
    double cp = std::cos(psi), sp = std::sin(psi);
    for (const auto& c : caps) {
        if (c.r >= M_PI) {
            full = true;
            return {};
        }
        double cg = dot(a, c.c);
        double p1 = dot(e1, c.c), p2 = dot(e2, c.c);
        double sg = std::hypot(p1, p2);
        double lhs = std::cos(c.r) - cp * cg;
        if (sp * sg < 1e-300) {
            if (lhs <= 0.0) {
                full = true;
                return {};
            }
            continue;
        }
        double t = lhs / (sp * sg);
        if (t <= -1.0) {
            full = true;
            return {};
        }
        if (t >= 1.0) continue;
        double phi = std::atan2(p2, p1), w = std::acos(t);
        arcs.push_back({phi - w, phi + w});
    }
    return merge_arcs(arcs);
}

Point sample_in_cap(const std::vector<double>& c, double r, Rng& rng) {
    int d = static_cast<int>(c.size());
    if (r >= M_PI) return random_direction(d, rng);
    if (d == 2) {
        double phi = std::atan2(c[1], c[0]) + r * (2.0 * rng.uniform() - 1.0);
        return {std::cos(phi), std::sin(phi)};
    }
    double smax = std::sin(std::min(r, M_PI / 2));
    double psi;
    for (;;) {
        psi = r * rng.uniform();
        if (rng.uniform() <= std::pow(std::sin(psi) / smax, d - 2)) break;
    }
    auto basis = detail::complement_basis(c);
    std::vector<double> u(d, 0.0);
    double un = 0.0;
    std::vector<double> g(basis.size());
    for (auto& x : g) {
        x = rng.normal();
        un += x * x;
    }
    un = std::sqrt(un);
    for (size_t i = 0; i < basis.size(); ++i)
        for (int j = 0; j < d; ++j) u[j] += g[i] / un * basis[i][j];
    Point out(d);
    for (int j = 0; j < d; ++j) out[j] = std::cos(psi) * c[j] + std::sin(psi) * u[j];
    return out;
}

}  // namespace

// ---- Direction / CapSet / PlanarSet

Direction::Direction(std::vector<double> coords) : c_(std::move(coords)) {
    if (c_.empty()) throw ParameterError("Direction: empty coordinates");
    double n = norm(c_);
    if (!std::isfinite(n) || n == 0.0) throw ParameterError("Direction: zero or non-finite vector");
    for (auto& v : c_) v /= n;
}

CapSet::CapSet(int d, std::vector<Cap> caps) : d_(d), caps_(std::move(caps)) {
    if (d < 2) throw ParameterError("CapSet: dimension must be at least 2");
    if (caps_.empty()) throw ParameterError("CapSet: needs at least one cap");
    for (const auto& c : caps_) {
        if (c.center.dim() != d) throw ParameterError("CapSet: cap center has wrong dimension");
        if (!(c.radius > 0.0 && c.radius <= M_PI))
            throw ParameterError("CapSet: cap radius must lie in (0, pi], got " + std::to_string(c.radius));
    }
}

CapSet CapSet::full_sphere(int d) {
    std::vector<double> e(d, 0.0);
    e[0] = 1.0;
    return CapSet(d, {Cap{Direction(e), M_PI}});
}

bool CapSet::is_full() const {
    for (const auto& c : caps_)
        if (c.radius >= M_PI) return true;
    return false;
}

CapSet CapSet::enlarged(double delta) const {
    std::vector<Cap> out;
    for (const auto& c : caps_) out.push_back({c.center, std::min(M_PI, c.radius + delta)});
    return CapSet(d_, std::move(out));
}

bool CapSet::contains(std::span<const double> theta) const {
    for (const auto& c : caps_)
        if (c.radius >= M_PI || dot(theta, c.center.coords()) >= std::cos(c.radius)) return true;
    return false;
}

PlanarSet::PlanarSet(Direction normal, std::variant<BallShape, BoxShape> shape)
    : normal_(std::move(normal)), shape_(std::move(shape)) {
    int d = normal_.dim();
    if (d < 2) throw ParameterError("PlanarSet: dimension must be at least 2");
    size_t k = d - 1;
    if (auto* b = std::get_if<BallShape>(&shape_)) {
        if (b->center.size() != k) throw ParameterError("PlanarSet: ball center needs d-1 frame coordinates");
        if (!(b->radius > 0.0)) throw ParameterError("PlanarSet: ball radius must be positive");
    } else {
        auto& x = std::get<BoxShape>(shape_);
        if (x.lo.size() != k || x.hi.size() != k) throw ParameterError("PlanarSet: box corners need d-1 frame coordinates");
        for (size_t i = 0; i < k; ++i)
            if (!(x.hi[i] > x.lo[i])) throw ParameterError("PlanarSet: box must have hi > lo in every coordinate");
    }
    frame_ = gram_schmidt(normal_.coords(), most_aligned(normal_.coords()));
}

double PlanarSet::measure() const {
    int k = dim() - 1;
    if (auto* b = std::get_if<BallShape>(&shape_))
        return std::pow(M_PI, 0.5 * k) / boost::math::tgamma(0.5 * k + 1.0) * std::pow(b->radius, k);
    auto& x = std::get<BoxShape>(shape_);
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= x.hi[i] - x.lo[i];
    return v;
}

std::vector<double> PlanarSet::plane_coords(std::span<const double> x) const {
    std::vector<double> out(frame_.size());
    for (size_t i = 0; i < frame_.size(); ++i) out[i] = dot(x, frame_[i]);
    return out;
}

Point PlanarSet::from_plane(std::span<const double> coords, double s) const {
    int d = dim();
    Point p(d);
    for (int j = 0; j < d; ++j) p[j] = s * normal_[j];
    for (size_t i = 0; i < frame_.size(); ++i)
        for (int j = 0; j < d; ++j) p[j] += coords[i] * frame_[i][j];
    return p;
}

double PlanarSet::plane_distance(std::span<const double> coords) const {
    if (auto* b = std::get_if<BallShape>(&shape_)) return std::max(0.0, dist(coords, b->center) - b->radius);
    auto& x = std::get<BoxShape>(shape_);
    double s = 0.0;
    for (size_t i = 0; i < coords.size(); ++i) {
        double e = std::max({x.lo[i] - coords[i], 0.0, coords[i] - x.hi[i]});
        s += e * e;
    }
    return std::sqrt(s);
}

// ---- ring machinery

namespace detail {

double sin_power_integral(int n, double rho) {
    if (n == 0) return rho;
    if (n == 1) return 1.0 - std::cos(rho);
    double s = std::sin(rho);
    return -std::pow(s, n - 1) * std::cos(rho) / n + (n - 1.0) / n * sin_power_integral(n - 2, rho);
}

double polar_weight(int k, double psi) {
    if (k == 2) return 1.0 / M_PI;
    // int_0^pi sin^n = sqrt(pi) Gamma((n+1)/2) / Gamma(n/2 + 1)
    double norm = std::sqrt(M_PI) * std::exp(std::lgamma(0.5 * (k - 1)) - std::lgamma(0.5 * k));
    return std::pow(std::sin(psi), k - 2) / norm;
}

std::vector<std::vector<double>> complement_basis(const std::vector<double>& a) {
    return gram_schmidt(a, most_aligned(a));
}

std::vector<RawCap> raw_caps(const CapSet& S) {
    std::vector<RawCap> out;
    for (const auto& c : S.caps()) out.push_back({c.center.coords(), c.radius});
    return out;
}

RingGeometry::RingGeometry(const std::vector<double>& a, const std::vector<RawCap>& caps)
    : k(static_cast<int>(a.size())) {
    auto basis = complement_basis(a);
    for (const auto& c : caps) {
        if (c.r >= M_PI) {
            full = true;
            return;
        }
        Item it;
        it.cg = dot(a, c.c);
        it.cos_r = std::cos(c.r);
        it.dir.resize(basis.size());
        for (size_t i = 0; i < basis.size(); ++i) it.dir[i] = dot(basis[i], c.c);
        it.sg = norm(it.dir);
        if (it.sg > 0.0)
            for (auto& v : it.dir) v /= it.sg;
        items.push_back(std::move(it));
    }
}

double RingGeometry::fraction(double psi) const {
    if (full) return 1.0;
    double cp = std::cos(psi), sp = std::sin(psi);
    // the common low-dimensional cases avoid building cap vectors
    bool pos = false, neg = false;
    std::vector<Arc> arcs;
    std::vector<RawCap> next;
    int live = 0;
    double last_r = 0.0;
    for (const auto& c : items) {
        double lhs = c.cos_r - cp * c.cg;
        if (sp * c.sg < 1e-300) {
            if (lhs <= 0.0) return 1.0;
            continue;
        }
        double t = lhs / (sp * c.sg);
        if (t <= -1.0) return 1.0;
        if (t >= 1.0) continue;
        double r = std::acos(t);
        ++live;
        last_r = r;
        if (k == 2) {
            (c.dir[0] > 0 ? pos : neg) = true;
        } else if (k == 3) {
            double phi = std::atan2(c.dir[1], c.dir[0]);
            arcs.push_back({phi - r, phi + r});
        } else {
            next.push_back({c.dir, r});
        }
    }
    if (live == 0) return 0.0;
    if (k == 2) return 0.5 * (pos + neg);
    if (live == 1) return single_cap_measure(k - 1, last_r);
    if (k == 3) {
        double len = 0.0;
        for (const auto& a : merge_arcs(arcs)) len += a.hi - a.lo;
        return len / (2.0 * M_PI);
    }
    return union_measure(k - 1, next);
}

double ring_fraction(const std::vector<double>& a, double psi, const std::vector<RawCap>& caps) {
    return RingGeometry(a, caps).fraction(psi);
}

std::vector<double> ring_breakpoints(const std::vector<double>& a, const std::vector<RawCap>& caps) {
    std::vector<double> out;
    const double tau = 2.0 * M_PI;
    for (const auto& c : caps) {
        double g = std::acos(clamp1(dot(a, c.c)));
        for (double v : {g + c.r, g - c.r, -g + c.r, -g - c.r}) {
            double m = std::fmod(v, tau);
            if (m < 0) m += tau;
            if (m > 0.0 && m < M_PI) out.push_back(m);
            if (tau - m > 0.0 && tau - m < M_PI) out.push_back(tau - m);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double union_measure(int k, const std::vector<RawCap>& caps_in) {
    for (const auto& c : caps_in)
        if (c.r >= M_PI) return 1.0;
    auto caps = prune(caps_in);
    if (caps.empty()) return 0.0;
    if (k == 1) {
        bool pos = false, neg = false;
        for (const auto& c : caps) (c.c[0] > 0 ? pos : neg) = true;
        return 0.5 * (pos + neg);
    }
    if (caps.size() == 1) return single_cap_measure(k, caps[0].r);
    if (k == 2) {
        std::vector<Arc> arcs;
        for (const auto& c : caps) {
            double phi = std::atan2(c.c[1], c.c[0]);
            arcs.push_back({phi - c.r, phi + c.r});
        }
        double len = 0.0;
        for (const auto& a : merge_arcs(arcs)) len += a.hi - a.lo;
        return len / (2.0 * M_PI);
    }
    const auto& axis = caps[0].c;
    auto br = ring_breakpoints(axis, caps);
    br.push_back(0.0);
    br.push_back(M_PI);
    RingGeometry ring(axis, caps);
    return quad::piecewise([&](double psi, double) { return polar_weight(k, psi) * ring.fraction(psi); }, br,
                           1e-11);
}

}  // namespace detail

// ---- public operations

double angular_distance(const CapSet& S, const Direction& theta) {
    if (theta.dim() != S.dim()) throw ParameterError("angular_distance: dimension mismatch");
    double best = M_PI;
    for (const auto& c : S.caps()) {
        double g = std::acos(clamp1(dot(theta.coords(), c.center.coords())));
        best = std::min(best, std::max(0.0, g - c.radius));
    }
    return best;
}

double surface_measure(const CapSet& S) { return detail::union_measure(S.dim(), detail::raw_caps(S)); }

size_t default_node_count(int d) { return d == 2 ? 512 : d == 3 ? 4096 : 16384; }

std::vector<QuadNode> quadrature_nodes(const CapSet& S, size_t n) {
    if (n < 8 * S.caps().size())
        throw ParameterError("quadrature_nodes: need at least 8 nodes per cap, got " + std::to_string(n));
    int d = S.dim();
    auto caps = detail::raw_caps(S);
    std::vector<QuadNode> out;
    auto gl_on = [](double lo, double hi, int m, auto&& emit) {
        const auto& r = quad::gauss_legendre(m);
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int i = 0; i < m; ++i) emit(mid + half * r.x[i], half * r.w[i]);
    };
    auto split = [](double total_len, const std::vector<Arc>& arcs, size_t count) {
        std::vector<int> m;
        for (const auto& a : arcs)
            m.push_back(std::max(8, static_cast<int>(std::lround(count * (a.hi - a.lo) / total_len))));
        return m;
    };
    if (d == 2) {
        std::vector<Arc> arcs;
        for (const auto& c : caps) {
            double phi = std::atan2(c.c[1], c.c[0]);
            arcs.push_back({phi - c.r, phi + c.r});
        }
        auto merged = merge_arcs(arcs);
        double L = 0.0;
        for (const auto& a : merged) L += a.hi - a.lo;
        auto m = split(L, merged, n);
        for (size_t i = 0; i < merged.size(); ++i)
            gl_on(merged[i].lo, merged[i].hi, m[i], [&](double phi, double w) {
                out.push_back({{std::cos(phi), std::sin(phi)}, w / (2.0 * M_PI)});
            });
    } else if (d == 3) {
        const auto& a = caps[0].c;
        auto basis = detail::complement_basis(a);
        auto br = detail::ring_breakpoints(a, caps);
        br.insert(br.begin(), 0.0);
        br.push_back(M_PI);
        std::vector<Arc> pieces;
        for (size_t i = 0; i + 1 < br.size(); ++i)
            if (br[i + 1] > br[i]) pieces.push_back({br[i], br[i + 1]});
        size_t n_psi = std::max<size_t>(8, static_cast<size_t>(std::lround(std::sqrt(static_cast<double>(n)))));
        size_t n_phi = std::max<size_t>(8, n / n_psi);
        auto m = split(M_PI, pieces, n_psi);
        for (size_t i = 0; i < pieces.size(); ++i)
            gl_on(pieces[i].lo, pieces[i].hi, m[i], [&](double psi, double wpsi) {
                bool full = false;
                auto arcs = ring_arcs(a, basis[0], basis[1], psi, caps, full);
                if (full) arcs = {{0.0, 2.0 * M_PI}};
                if (arcs.empty()) return;
                auto mm = split(2.0 * M_PI, arcs, n_phi);
                double cp = std::cos(psi), sp = std::sin(psi);
                double wp = wpsi * detail::polar_weight(3, psi);
                for (size_t j = 0; j < arcs.size(); ++j)
                    gl_on(arcs[j].lo, arcs[j].hi, mm[j], [&](double phi, double wphi) {
                        std::vector<double> t(3);
                        for (int q = 0; q < 3; ++q)
                            t[q] = cp * a[q] + sp * (std::cos(phi) * basis[0][q] + std::sin(phi) * basis[1][q]);
                        out.push_back({std::move(t), wp * wphi / (2.0 * M_PI)});
                    });
            });
    } else {
        // randomly shifted Halton directions, rejection to S
        static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
        if (d > 16) throw ParameterError("quadrature_nodes: dimension above 16 not supported");
        Rng shift_rng(0x9a17u, static_cast<std::uint64_t>(d));
        std::vector<double> shift(d);
        for (auto& s : shift) s = shift_rng.uniform();
        size_t attempts = 0, limit = 2000 * n + 100000;
        for (std::uint64_t idx = 1; out.size() < n; ++idx) {
            if (++attempts > limit) throw ParameterError("quadrature_nodes: set too small for rejection sampling");
            std::vector<double> g(d);
            for (int j = 0; j < d; ++j) {
                double h = 0.0, f = 1.0 / primes[j];
                for (std::uint64_t i = idx; i > 0; i /= primes[j], f /= primes[j]) h += f * (i % primes[j]);
                double u = std::fmod(h + shift[j], 1.0);
                u = std::min(std::max(u, 1e-16), 1.0 - 1e-16);
                g[j] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
            }
            double gn = norm(g);
            for (auto& v : g) v /= gn;
            if (S.contains(g)) out.push_back({std::move(g), 1.0});
        }
    }
    double total = 0.0;
    for (const auto& q : out) total += q.weight;
    double target = surface_measure(S);
    for (auto& q : out) q.weight *= target / total;
    return out;
}

bool in_target(std::span<const double> x, const Target& T) {
    if (auto* s = std::get_if<ShellTarget>(&T)) {
        double r = norm(x);
        if (r < 1.0 - s->eps || r > 1.0 + s->eps) return false;
        if (r == 0.0) return s->S.is_full();
        for (const auto& c : s->S.caps()) {
            double rad = c.radius + s->delta;
            if (rad >= M_PI || dot(x, c.center.coords()) >= r * std::cos(rad)) return true;
        }
        return false;
    }
    const auto& sl = std::get<SlabTarget>(T);
    if (std::fabs(sl.D.normal_coord(x)) > sl.eps) return false;
    return sl.D.plane_distance(sl.D.plane_coords(x)) <= sl.delta;
}

Point random_direction(int d, Rng& rng) {
    Point g(d);
    double n = 0.0;
    do {
        for (auto& v : g) v = rng.normal();
        n = norm(g);
    } while (n == 0.0);
    for (auto& v : g) v /= n;
    return g;
}

Point sample_boundary(const CapSet& S, Rng& rng) {
    int d = S.dim();
    if (S.is_full()) return random_direction(d, rng);
    const auto& caps = S.caps();
    std::vector<double> w;
    for (const auto& c : caps) w.push_back(single_cap_measure(d, c.radius));
    double W = std::accumulate(w.begin(), w.end(), 0.0);
    for (;;) {
        double u = rng.uniform() * W;
        size_t j = 0;
        while (j + 1 < caps.size() && u > w[j]) u -= w[j++];
        Point p = sample_in_cap(caps[j].center.coords(), caps[j].radius, rng);
        int cover = 0;
        for (const auto& c : caps)
            if (dot(p, c.center.coords()) >= std::cos(c.radius)) ++cover;
        // a point in m caps is proposed m times as often
        if (cover <= 1 || rng.uniform() * cover <= 1.0) return p;
    }
}

Point sample_boundary(const PlanarSet& D, Rng& rng) {
    int k = D.dim() - 1;
    std::vector<double> coords(k);
    if (auto* b = std::get_if<BallShape>(&D.shape())) {
        auto u = random_direction(k, rng);
        double r = b->radius * std::pow(rng.uniform(), 1.0 / k);
        for (int i = 0; i < k; ++i) coords[i] = b->center[i] + r * u[i];
    } else {
        auto& x = std::get<BoxShape>(D.shape());
        for (int i = 0; i < k; ++i) coords[i] = x.lo[i] + (x.hi[i] - x.lo[i]) * rng.uniform();
    }
    return D.from_plane(coords);
}

double euclidean_distance(const CapSet& S, std::span<const double> x) {
    double r = norm(x);
    if (r == 0.0) return 1.0;
    double best = INFINITY;
    for (const auto& c : S.caps()) {
        double g = std::acos(clamp1(dot(x, c.center.coords()) / r));
        double e = g <= c.radius ? 0.0 : g - c.radius;
        double s = std::sin(0.5 * e);
        best = std::min(best, std::sqrt((r - 1.0) * (r - 1.0) + 4.0 * r * s * s));
    }
    return best;
}

double euclidean_distance(const PlanarSet& D, std::span<const double> x) {
    double s = D.normal_coord(x);
    double p = D.plane_distance(D.plane_coords(x));
    return std::hypot(s, p);
}

}  // namespace stablecond
