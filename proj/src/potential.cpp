#include "stablecond/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stablecond/errors.hpp"
#include "stablecond/quadrature.hpp"
#include "stablecond/specfun.hpp"

namespace stablecond {

using specfun::gamma_ratio;

namespace {



constexpr double kNearSet = 1e-9;

double sphere_area(int d) { return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d); }

// int (eps^2-u^2)^{-a/2} du over (-eps, eps) divided by eps^{1-a}
double radial_mass_unit(double alpha) {
    return std::pow(2.0, 1.0 - alpha) * gamma_ratio({1.0 - 0.5 * alpha, 1.0 - 0.5 * alpha}, {2.0 - alpha});
}

// int_{R^{d-1}} (|y|^2 + 1)^{(a-d)/2} dy, by quadrature
double flat_kernel_integral(StableParams p) {
    int k = p.d - 1;
    double area = k == 1 ? 2.0 : sphere_area(k);
    double e = 0.5 * (p.alpha - p.d);
    return area * quad::half_line([&](double r) { return std::pow(r, k - 1) * std::pow(r * r + 1.0, e); }, 1e-13);
}

}  // namespace

void StableParams::validate() const {
    if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("alpha must lie in (0, 2), got " + std::to_string(alpha));
    if (d < 2) throw ParameterError("d must be at least 2, got " + std::to_string(d));
}

void StableParams::require_conditioning() const {
    validate();
    if (alpha > 1.0) throw ParameterError("conditioning needs alpha in (0, 1], got " + std::to_string(alpha));
}

// ---- constants

ConstantTable::ConstantTable(StableParams p, double R) : p_(p), R_(R) {
    p_.validate();
    if (!(R > 0.0)) throw ParameterError("constants: R must be positive");
}

ConstantTable constants(StableParams p, double R) { return ConstantTable(p, R); }

void ConstantTable::need_fractional(const char* what) const {
    if (!(p_.alpha < 1.0)) throw BranchError(std::string(what) + " needs alpha < 1; use the alpha = 1 constant");
}
void ConstantTable::need_cauchy(const char* what) const {
    if (p_.alpha != 1.0) throw BranchError(std::string(what) + " is the alpha = 1 constant");
}
void ConstantTable::need_d3(const char* what) const {
    if (p_.d < 3) throw DomainError(std::string(what) + " contains Gamma((d-2)/2) and needs d >= 3");
}

double ConstantTable::c_alpha_d() const {
    need_fractional("c_alpha_d");
    double a = p_.alpha, d = p_.d;
    return std::pow(2.0, -a) * std::pow(M_PI, -0.5 * d) * gamma_ratio({0.5 * (d + a - 2.0)}, {1.0 - a, 1.0 - 0.5 * a});
}

double ConstantTable::C_alpha_d() const {
    need_fractional("C_alpha_d");
    double a = p_.alpha, d = p_.d;
    return c_alpha_d() * std::pow(2.0, 2.0 - a) * std::pow(M_PI, 0.5 * (d - 1)) *
           gamma_ratio({1.0 - 0.5 * a, 1.0 - 0.5 * a}, {2.0 - a, 0.5 * (d - 1)});
}

double ConstantTable::A_sphere() const {
    need_fractional("A_sphere");
    double a = p_.alpha, d = p_.d;
    return std::pow(2.0, 1.0 - 2.0 * a) * std::pow(M_PI, -0.5 * d) *
           gamma_ratio({0.5 * (d + a - 2.0), 1.0 - 0.5 * a}, {1.0 - a, 2.0 - a});
}

double ConstantTable::k_alpha_d() const {
    need_fractional("k_alpha_d");
    need_d3("k_alpha_d");
    double a = p_.alpha, d = p_.d;
    return std::pow(M_PI, -0.5 * (d - 2)) * gamma_ratio({0.5 * (d - 2), 0.5 * (d - a)}, {0.5 * (1 - a), 0.5 * (d - 1)});
}

double ConstantTable::A_plane() const { return k_alpha_d() * radial_mass_unit(p_.alpha); }

double ConstantTable::c_1_d() const {
    need_cauchy("c_1_d");
    return std::tgamma(0.5 * (p_.d - 1)) / std::pow(M_PI, 0.5 * (p_.d + 1));
}

double ConstantTable::k_1_d_R() const {
    need_cauchy("k_1_d_R");
    need_d3("k_1_d_R");
    return std::tgamma(0.5 * (p_.d - 2)) / (2.0 * std::pow(M_PI, 0.5 * p_.d));
}

double ConstantTable::A_sphere_1() const {
    need_cauchy("A_sphere_1");
    return std::tgamma(0.5 * (p_.d - 1)) / std::pow(M_PI, 0.5 * (p_.d - 1));
}

double ConstantTable::A_plane_1() const {
    need_cauchy("A_plane_1");
    need_d3("A_plane_1");
    return std::tgamma(0.5 * (p_.d - 2)) / std::pow(M_PI, 0.5 * (p_.d - 2));
}

double ConstantTable::potential_const() const {
    double a = p_.alpha, d = p_.d;
    if (!(a < d)) throw DomainError("potential_const needs alpha < d");
    return std::pow(2.0, -a) * std::pow(M_PI, -0.5 * d) * gamma_ratio({0.5 * (d - a)}, {0.5 * a});
}

double ConstantTable::delta_rule(double eps) const {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("delta_rule: eps must lie in (0, 1)");
    double a = p_.alpha, d = p_.d;
    if (a < 1.0) return std::pow(eps, (1.0 - a) / (2.0 * (d - a)));
    need_cauchy("delta_rule");
    return std::pow(std::fabs(std::log(eps)), -1.0 / (2.0 * (d - 1)));
}

double ConstantTable::c_unit() const {
    double a = p_.alpha, d = p_.d;
    if (a == 1.0) return std::tgamma(0.5 * (d - 1)) / (2.0 * std::pow(M_PI, 0.5 * (d + 1)));
    need_fractional("c_unit");
    return std::pow(2.0, -a) * std::pow(M_PI, -0.5 * d) * gamma_ratio({0.5 * (d - a)}, {1.0 - a, 0.5 * a});
}

double ConstantTable::k_unit() const {
    double a = p_.alpha, d = p_.d;
    if (a == 1.0) return std::tgamma(0.5 * (d - 1)) / (2.0 * std::pow(M_PI, 0.5 * (d + 1)));
    need_fractional("k_unit");
    // 1 / (flat kernel integral * pi / sin(pi a / 2))
    return std::sin(0.5 * M_PI * a) * std::pow(M_PI, -0.5 * (d + 1)) * gamma_ratio({0.5 * (d - a)}, {0.5 * (1 - a)});
}

double ConstantTable::A_sphere_unit() const {
    double m = p_.alpha == 1.0 ? M_PI : radial_mass_unit(p_.alpha);
    return c_unit() * m * sphere_area(p_.d);
}

double ConstantTable::A_plane_unit() const {
    double m = p_.alpha == 1.0 ? M_PI : radial_mass_unit(p_.alpha);
    return k_unit() * m;
}

double ConstantTable::A_plane_sine_corrected() const {
    return A_plane() / interval_potential_constant(p_.alpha);
}

double ConstantTable::c(Normalization n) const {
    if (n == Normalization::unit) return c_unit();
    return p_.alpha == 1.0 ? c_1_d() : c_alpha_d();
}
double ConstantTable::k(Normalization n) const {
    if (n == Normalization::unit) return k_unit();
    return p_.alpha == 1.0 ? k_1_d_R() : k_alpha_d();
}
double ConstantTable::A_sphere(Normalization n) const {
    if (n == Normalization::unit) return A_sphere_unit();
    return p_.alpha == 1.0 ? A_sphere_1() : A_sphere();
}
double ConstantTable::A_plane(Normalization n) const {
    if (n == Normalization::unit) return A_plane_unit();
    return p_.alpha == 1.0 ? A_plane_1() : A_plane();
}

double ConstantTable::nicesum_lhs() const {
    double a = p_.alpha, d = p_.d;
    return std::pow(2.0, a) * c_alpha_d() * std::pow(M_PI, 0.5 * d) *
           gamma_ratio({1.0 - a, 1.0 - 0.5 * a}, {0.5 * (d + a - 2.0)});
}

double ConstantTable::kad_lhs() const {
    double a = p_.alpha, d = p_.d;
    return k_alpha_d() * std::pow(M_PI, 0.5 * (d - 2)) *
           gamma_ratio({0.5 * (1 - a), 0.5 * (d - 1)}, {0.5 * (d - 2), 0.5 * (d - a)});
}

double ConstantTable::c1_lhs() const {
    double d = p_.d;
    return 2.0 * c_1_d() * std::pow(M_PI, 0.5 * d) / (std::tgamma(0.5 * (d - 1)) * std::sqrt(M_PI)) * M_PI / 2.0;
}

// ---- harmonic functions

double harmonic_H_sphere(double radius, StableParams p) {
    p.validate();
    double a = p.alpha;
    int d = p.d;
    if (std::fabs(radius - 1.0) < kNearSet) throw SingularityError("harmonic_H: point on the sphere");
    double big = std::max(radius, 1.0), small = std::min(radius, 1.0 / radius);
    return std::pow(big, a - d) * specfun::gauss_2f1(0.5 * (d - a), 1.0 - 0.5 * a, 0.5 * d, small * small);
}

double harmonic_H(const CapSet& S, std::span<const double> x, StableParams p, double tol) {
    p.validate();
    if (static_cast<int>(x.size()) != S.dim() || S.dim() != p.d) throw ParameterError("harmonic_H: dimension mismatch");
    if (euclidean_distance(S, x) < kNearSet) throw SingularityError("harmonic_H: point within 1e-9 of S");
    double r = norm(x);
    if (r == 0.0) return surface_measure(S);
    std::vector<double> axis(x.begin(), x.end());
    for (auto& v : axis) v /= r;
    auto caps = detail::raw_caps(S);
    auto br = detail::ring_breakpoints(axis, caps);
    br.push_back(0.0);
    br.push_back(M_PI);
    // resolve the kernel peak at psi = 0 when |x| is near 1
    double gap = std::fabs(r - 1.0);
    for (double s = gap; s < M_PI; s *= 4.0) br.push_back(s);
    double e = 0.5 * (p.alpha - p.d);
    int d = p.d;
    detail::RingGeometry ring(axis, caps);
    return quad::piecewise(
        [&](double psi, double) {
            double f = ring.fraction(psi);
            if (f == 0.0) return 0.0;
            double h = std::sin(0.5 * psi);
            double q = (r - 1.0) * (r - 1.0) + 4.0 * r * h * h;
            return detail::polar_weight(d, psi) * std::pow(q, e) * f;
        },
        br, tol);
}

HarmonicEvaluator::HarmonicEvaluator(CapSet S, StableParams p)
    : S_(std::move(S)), p_(p), caps_(detail::raw_caps(S_)), measure_(surface_measure(S_)) {
    p_.validate();
    if (S_.dim() != p_.d) throw ParameterError("HarmonicEvaluator: dimension mismatch");
}

double HarmonicEvaluator::operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != p_.d) throw ParameterError("harmonic_H: dimension mismatch");
    if (euclidean_distance(S_, x) < kNearSet) throw SingularityError("harmonic_H: point within 1e-9 of S");
    double r = norm(x);
    if (S_.is_full()) return harmonic_H_sphere(r, p_);
    if (r == 0.0) return measure_;
    std::vector<double> axis(x.begin(), x.end());
    for (auto& v : axis) v /= r;
    auto br = detail::ring_breakpoints(axis, caps_);
    br.push_back(0.0);
    br.push_back(M_PI);
    double gap = std::fabs(r - 1.0);
    for (double s = gap; s < M_PI; s *= 4.0) br.push_back(s);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    detail::RingGeometry ring(axis, caps_);
    const auto& gl = quad::gauss_legendre(12);
    const auto& gl20 = quad::gauss_legendre(20);
    double e = 0.5 * (p_.alpha - p_.d);
    auto f = [&](double psi) {
        double fr = ring.fraction(psi);
        if (fr == 0.0) return 0.0;
        double h = std::sin(0.5 * psi);
        double q = (r - 1.0) * (r - 1.0) + 4.0 * r * h * h;
        return detail::polar_weight(p_.d, psi) * std::pow(q, e) * fr;
    };
    // panels graded geometrically toward both ends of every piece
    static const std::vector<double> cuts = [] {
        std::vector<double> c{0.0};
        for (int j = 7; j >= 1; --j) c.push_back(0.5 * std::pow(0.25, j));
        c.push_back(0.5);
        for (int j = 1; j <= 7; ++j) c.push_back(1.0 - 0.5 * std::pow(0.25, j));
        c.push_back(1.0);
        return c;
    }();
    double total = 0.0;
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        double a = br[i], len = br[i + 1] - br[i];
        if (len <= 0.0) continue;
        double probe = f(a + 0.5 * len);
        if (probe == 0.0 && f(a + 0.25 * len) == 0.0 && f(a + 0.75 * len) == 0.0) continue;
        if (p_.d == 2) {
            // the ring fraction is piecewise constant here; only the kernel peak needs resolving
            double m = a + 0.5 * len, w = 0.5 * len;
            for (size_t k = 0; k < gl20.x.size(); ++k) total += w * gl20.w[k] * f(m + w * gl20.x[k]);
            continue;
        }
        for (size_t j = 0; j + 1 < cuts.size(); ++j) {
            double lo = a + len * cuts[j], hi = a + len * cuts[j + 1];
            double m = 0.5 * (lo + hi), w = 0.5 * (hi - lo);
            for (size_t k = 0; k < gl.x.size(); ++k) total += w * gl.w[k] * f(m + w * gl.x[k]);
        }
    }
    return total;
}

namespace {

// [t1, t2] of the ray c + t w (t >= 0) inside the shape, frame coordinates; false if missed
bool ray_hit(const PlanarSet& D, std::span<const double> c, std::span<const double> w, double& t1, double& t2) {
    size_t k = c.size();
    if (auto* b = std::get_if<BallShape>(&D.shape())) {
        double bb = 0.0, cc = -b->radius * b->radius;
        for (size_t i = 0; i < k; ++i) {
            double q = c[i] - b->center[i];
            bb += w[i] * q;
            cc += q * q;
        }
        double disc = bb * bb - cc;
        if (disc <= 0.0) return false;
        double sq = std::sqrt(disc);
        t1 = std::max(0.0, -bb - sq);
        t2 = -bb + sq;
        return t2 > t1;
    }
    const auto& x = std::get<BoxShape>(D.shape());
    t1 = 0.0;
    t2 = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < k; ++i) {
        if (w[i] == 0.0) {
            if (c[i] < x.lo[i] || c[i] > x.hi[i]) return false;
            continue;
        }
        double a = (x.lo[i] - c[i]) / w[i], bq = (x.hi[i] - c[i]) / w[i];
        if (a > bq) std::swap(a, bq);
        t1 = std::max(t1, a);
        t2 = std::min(t2, bq);
    }
    return t2 > t1;
}

}  // namespace

double harmonic_M(const PlanarSet& D, std::span<const double> x, StableParams p) {
    p.validate();
    int d = p.d;
    if (static_cast<int>(x.size()) != d || D.dim() != d) throw ParameterError("harmonic_M: dimension mismatch");
    if (euclidean_distance(D, x) < kNearSet) throw SingularityError("harmonic_M: point within 1e-9 of D");
    double s = std::fabs(D.normal_coord(x));
    if (s < 1e-150) s = 0.0;
    auto c = D.plane_coords(x);
    int k = d - 1;
    double a = p.alpha;
    // radial integral int_0^rho r^{k-1} (r^2+s^2)^{(a-d)/2} dr
    auto G = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        if (s == 0.0) return std::pow(rho, a - 1.0) / (a - 1.0);
        return 0.5 * std::pow(s, a - d) * specfun::power_integral(0.5 * k, 0.5 * (d - a), 1.0 / (s * s), rho * rho);
    };
    auto along = [&](std::span<const double> w) {
        double t1, t2;
        if (!ray_hit(D, c, w, t1, t2)) return 0.0;
        if (s == 0.0 && t1 == 0.0) throw SingularityError("harmonic_M: point inside D");
        return G(t2) - G(t1);
    };
    if (k == 1) {
        double w1[] = {1.0}, w2[] = {-1.0};
        return along(w1) + along(w2);
    }
    if (k == 2) {
        std::vector<double> br{0.0, 2.0 * M_PI};
        auto add = [&](double phi) {
            phi = std::fmod(phi, 2.0 * M_PI);
            if (phi < 0) phi += 2.0 * M_PI;
            br.push_back(phi);
        };
        if (auto* b = std::get_if<BallShape>(&D.shape())) {
            double dx = b->center[0] - c[0], dy = b->center[1] - c[1];
            double L = std::hypot(dx, dy);
            if (L > b->radius) {
                double phi = std::atan2(dy, dx), half = std::asin(b->radius / L);
                add(phi - half);
                add(phi + half);
                add(phi);
            }
        } else {
            const auto& bx = std::get<BoxShape>(D.shape());
            for (double u : {bx.lo[0], bx.hi[0]})
                for (double v : {bx.lo[1], bx.hi[1]}) add(std::atan2(v - c[1], u - c[0]));
        }
        return quad::piecewise(
            [&](double phi, double) {
                double w[] = {std::cos(phi), std::sin(phi)};
                return along(w);
            },
            br, 1e-12);
    }
    // k >= 3: node rule on the full direction sphere, doubled until stable
    double area = 2.0 * std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k);
    auto S = CapSet::full_sphere(k);
    double prev = NAN;
    for (size_t n = default_node_count(k); n <= (1u << 22); n *= 2) {
        double sum = 0.0;
        for (const auto& q : quadrature_nodes(S, n)) sum += q.weight * along(q.dir);
        sum *= area;
        if (std::fabs(sum - prev) <= 1e-7 * std::fabs(sum)) return sum;
        prev = sum;
    }
    return prev;
}

// ---- interval potential and core measures

double interval_potential_constant(double alpha) { return M_PI / std::sin(0.5 * M_PI * alpha); }

double interval_potential(double x, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("interval_potential: alpha must lie in (0, 1)");
    if (!(std::fabs(x) <= 1.0)) throw DomainError("interval_potential: |x| must be at most 1");
    double h = -0.5 * alpha, g = alpha - 1.0;
    double left = 0.0, right = 0.0;
    if (x > -1.0)
        left = quad::tanh_sinh(
            [&](double y, double yc) {
                double da = yc <= 0.0 ? -yc : y + 1.0;  // 1 + y
                double db = yc >= 0.0 ? yc : x - y;     // x - y
                return std::pow(db, g) * std::pow((1.0 - x) + db, h) * std::pow(da, h);
            },
            -1.0, x, 1e-14);
    if (x < 1.0)
        right = quad::tanh_sinh(
            [&](double y, double yc) {
                double da = yc <= 0.0 ? -yc : y - x;    // y - x
                double db = yc >= 0.0 ? yc : 1.0 - y;   // 1 - y
                return std::pow(da, g) * std::pow(db, h) * std::pow((1.0 + x) + da, h);
            },
            x, 1.0, 1e-14);
    return left + right;
}

double interval_potential_normalized(double x, double alpha) {
    return interval_potential(x, alpha) / interval_potential_constant(alpha);
}

namespace {
double core_prefactor(double eps, StableParams p, Normalization n) {
    ConstantTable t(p);
    double c = t.c(n);
    if (p.alpha == 1.0) c /= std::fabs(std::log(eps));
    return c;
}
}  // namespace

double mu_density(double r, double eps, StableParams p, Normalization n) {
    p.require_conditioning();
    if (!(eps > 0.0)) throw DomainError("mu_density: eps must be positive");
    if (!(r > 1.0 - eps && r < 1.0 + eps)) throw DomainError("mu_density: r outside the open shell");
    double h = -0.5 * p.alpha;
    return core_prefactor(eps, p, n) * std::pow(r - (1.0 - eps), h) * std::pow(1.0 + eps - r, h);
}

double mu_radial_mass(double eps, double alpha) {
    if (!(eps > 0.0)) throw DomainError("mu_radial_mass: eps must be positive");
    if (alpha == 1.0) return M_PI;
    return std::pow(eps, 1.0 - alpha) * radial_mass_unit(alpha);
}

double mu_total_mass(double eps, StableParams p, Normalization n) {
    p.require_conditioning();
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("mu_total_mass: eps must lie in (0, 1)");
    return core_prefactor(eps, p, n) * mu_radial_mass(eps, p.alpha);
}

double U_mu1(double radius, double eps, StableParams p, Normalization n) {
    p.require_conditioning();
    if (!(eps > 0.0 && eps < 0.3)) throw DomainError("U_mu1: eps must lie in (0, 0.3)");
    if (!(radius >= 1.0 - eps && radius <= 1.0 + eps)) throw DomainError("U_mu1: point outside the shell");
    double a = p.alpha;
    int d = p.d;
    double fa = 0.5 * (d - a), fb = 1.0 - 0.5 * a, fc = 0.5 * d, h = -0.5 * a;
    double lo = (1.0 - eps) / radius, hi = (1.0 + eps) / radius;
    double lo_gap = 1.0 - lo, hi_gap = hi - 1.0;  // both >= 0
    double inner = 0.0, outer = 0.0;
    if (lo_gap > 0.0)
        inner = quad::tanh_sinh(
            [&](double r, double rc) {
                double t = rc >= 0.0 ? rc : 1.0 - r;        // 1 - r
                double dl = rc <= 0.0 ? -rc : lo_gap - t;   // r - lo
                double w = t * (2.0 - t);
                if (w <= 0.0 || dl <= 0.0) return 0.0;
                double F = specfun::gauss_2f1_complement(fa, fb, fc, w);
                return F * std::pow(r, d - 1) * std::pow(dl, h) * std::pow(hi_gap + t, h);
            },
            lo, 1.0, 1e-13);
    if (hi_gap > 0.0)
        outer = quad::tanh_sinh(
            [&](double r, double rc) {
                double t = rc <= 0.0 ? -rc : r - 1.0;       // r - 1
                double dh = rc >= 0.0 ? rc : hi_gap - t;    // hi - r
                if (t <= 0.0 || dh <= 0.0) return 0.0;
                double w = t * (r + 1.0) / (r * r);         // 1 - r^{-2}
                double F = specfun::gauss_2f1_complement(fa, fb, fc, w);
                return F * std::pow(r, a - 1.0) * std::pow(lo_gap + t, h) * std::pow(dh, h);
            },
            1.0, hi, 1e-13);
    double pref = 2.0 * core_prefactor(eps, p, n) * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
    return pref * (inner + outer);
}

double U_mu1(std::span<const double> x, double eps, StableParams p, Normalization n) {
    return U_mu1(norm(x), eps, p, n);
}

double U_rho1(double s, double eps, StableParams p, Normalization n, double R) {
    p.require_conditioning();
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("U_rho1: eps must lie in (0, 1)");
    if (!(std::fabs(s) <= eps)) throw DomainError("U_rho1: point outside the slab");
    ConstantTable t(p);
    double k = t.k(n);
    int d = p.d;
    if (p.alpha < 1.0) return k * flat_kernel_integral(p) * interval_potential(s / eps, p.alpha);
    // alpha = 1: truncated in-plane integral, log singular at u = s
    if (!(R > eps)) throw DomainError("U_rho1: R must exceed eps");
    double area = d - 1 == 1 ? 2.0 : 2.0 * std::pow(M_PI, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1));
    double m = 0.5 * (d - 1);
    auto J0 = [&](double tt) { return 0.5 * std::pow(tt, 1.0 - d) * specfun::power_integral(m, m, 1.0 / (tt * tt), R * R); };
    // below t0 the integral is log(1/t) plus a constant to double precision
    const double t0 = 1e-7 * R, J_t0 = J0(t0);
    auto J = [&](double tt) { return tt >= t0 ? J0(tt) : J_t0 + std::log(t0 / tt); };
    auto piece = [&](double lo, double hi, bool s_at_lo) {
        return quad::tanh_sinh(
            [&](double u, double uc) {
                double to_lo = uc <= 0.0 ? -uc : u - lo;
                double to_hi = uc >= 0.0 ? uc : hi - u;
                double tt = s_at_lo ? to_lo : to_hi;
                double e_lo = s_at_lo ? (lo + eps) + to_lo : to_lo;   // u + eps
                double e_hi = s_at_lo ? to_hi : (eps - hi) + to_hi;   // eps - u
                if (tt <= 0.0 || e_lo <= 0.0 || e_hi <= 0.0) return 0.0;
                return std::pow(e_lo * e_hi, -0.5) * J(tt);
            },
            lo, hi, 1e-12);
    };
    double v = piece(-eps, s, false) + piece(s, eps, true);
    return k / std::fabs(std::log(eps)) * area * v;
}

double U_mu2_bound(double eps, double delta, StableParams p, SetKind kind, double set_measure, Normalization n) {
    p.require_conditioning();
    if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0)) throw DomainError("U_mu2_bound: need 0 < eps < 1, delta > 0");
    double a = p.alpha, d = p.d;
    ConstantTable t(p);
    double scale = a == 1.0 ? 1.0 / std::fabs(std::log(eps)) : 1.0;
    double mass = mu_radial_mass(eps, a);
    if (kind == SetKind::sphere) {
        double c = t.c(n) * scale;
        return c * 2.0 * std::pow(M_PI, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1)) * mass / std::pow(delta, d - a);
    }
    if (!(set_measure > 0.0)) throw DomainError("U_mu2_bound: plane bound needs the enlarged set measure");
    return t.k(n) * scale * set_measure * mass / std::pow(delta, d - a);
}

}  // namespace stablecond
