#include "stablecond/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "stablecond/errors.hpp"

namespace stablecond::specfun {

namespace {

constexpr double kTol = 1e-17;
constexpr int kMaxTerms = 10000;
constexpr double kIntTol = 1e-12;

bool is_nonpos_int(double x) { return x <= 0.0 && x == std::nearbyint(x); }

bool near_int(double x, double tol = kIntTol) {
    return std::fabs(x - std::nearbyint(x)) <= tol * std::max(1.0, std::fabs(x));
}

// log|Gamma(x)| with sign, x not a pole
double log_abs_gamma(double x, int& sign) {
    int s = 1;
    double v = boost::math::lgamma(x, &s);
    sign = s;
    return v;
}

// psi for any non-pole argument
double psi_any(double x) { return boost::math::digamma(x); }

double series(double a, double b, double c, double z) {
    double sum = 1.0, term = 1.0;
    for (int n = 0; n < kMaxTerms; ++n) {
        double ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        term *= ratio;
        sum += term;
        if (term == 0.0) return sum;
        if (std::fabs(term) <= kTol * std::fabs(sum) && std::fabs(ratio) < 1.0) return sum;
    }
    throw ConvergenceError("2F1 power series did not converge");
}

// terminating sum when a or b is a non-positive integer
double polynomial(double a, double b, double c, double z) {
    double deg = is_nonpos_int(a) ? -a : -b;
    if (is_nonpos_int(a) && is_nonpos_int(b)) deg = std::min(-a, -b);
    double sum = 1.0, term = 1.0;
    for (int n = 0; n < static_cast<int>(deg); ++n) {
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
    }
    return sum;
}

double dispatch(double a, double b, double c, double z, double w, int depth);

// c - a - b = m, a non-negative integer; 1-z = w
double log_case(double a, double b, int m, double w) {
    double c = a + b + m;
    double lw = std::log(w);
    double head = 0.0;
    if (m > 0) {
        double t = 1.0, s = 0.0;
        for (int n = 0; n < m; ++n) {
            s += t;
            if (n + 1 < m) t *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w;
        }
        head = gamma_ratio({static_cast<double>(m), c}, {a + m, b + m}) * s;
    }
    double pref = gamma_ratio({c}, {a, b});
    if (pref == 0.0) return head;
    double t = 1.0 / std::tgamma(m + 1.0);
    double pa = psi_any(a + m), pb = psi_any(b + m);
    double p1 = -euler_gamma, pm = psi_any(m + 1.0);
    double sum = 0.0;
    for (int n = 0; n < kMaxTerms; ++n) {
        double term = t * (lw - p1 - pm + pa + pb);
        sum += term;
        if (n > 0 && std::fabs(term) <= kTol * std::fabs(sum)) {
            double sign = (m % 2 == 0) ? 1.0 : -1.0;
            return head - pref * sign * std::pow(w, m) * sum;
        }
        t *= (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * w;
        p1 += 1.0 / (n + 1.0);
        pm += 1.0 / (n + m + 1.0);
        pa += 1.0 / (a + m + n);
        pb += 1.0 / (b + m + n);
    }
    throw ConvergenceError("2F1 logarithmic-case series did not converge");
}

// z = 1 - w close to one
double near_one(double a, double b, double c, double w, int depth) {
    double m = c - a - b;
    if (near_int(m)) {
        int mi = static_cast<int>(std::nearbyint(m));
        if (mi >= 0) return log_case(a, b, mi, w);
        // Euler transformation flips the sign of c-a-b
        return std::pow(w, mi) * log_case(c - a, c - b, -mi, w);
    }
    if (near_int(m, 1e-6) && w >= 0.1) return series(a, b, c, 1.0 - w);
    double t1 = gamma_ratio({c, -m}, {a, b});
    double t2 = gamma_ratio({c, m}, {c - a, c - b});
    double v = 0.0;
    if (t1 != 0.0) v += t1 * std::pow(w, m) * dispatch(c - a, c - b, 1.0 + m, w, 1.0 - w, depth + 1);
    if (t2 != 0.0) v += t2 * dispatch(a, b, 1.0 - m, w, 1.0 - w, depth + 1);
    return v;
}

double dispatch(double a, double b, double c, double z, double w, int depth) {
    if (depth > 6) throw ConvergenceError("2F1 dispatch recursion too deep");
    if (!std::isfinite(z) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
        throw ConvergenceError("2F1 with non-finite argument");
    if (is_nonpos_int(c) && !(is_nonpos_int(a) && a > c) && !(is_nonpos_int(b) && b > c))
        throw ParameterError("2F1: c = " + std::to_string(c) + " is a non-positive integer");
    if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;
    if (z > 1.0) throw ConvergenceError("2F1: no real branch for z > 1");
    if (is_nonpos_int(a) || is_nonpos_int(b)) return polynomial(a, b, c, z);
    if (w == 0.0) {
        if (c - a - b <= 0.0) throw DomainError("2F1 diverges at z = 1 when c - a - b <= 0");
        return gamma_ratio({c, c - a - b}, {c - a, c - b});
    }
    if (std::fabs(z) <= 0.5) return series(a, b, c, z);
    if (z > 0.5) return near_one(a, b, c, w, depth);
    if (z >= -1.0) {
        // Pfaff: z/(z-1) in [1/3, 1/2)
        double zz = z / (z - 1.0);
        return std::pow(w, -a) * dispatch(a, c - b, c, zz, 1.0 / w, depth + 1);
    }
    if (!near_int(b - a)) {
        double zi = 1.0 / z;
        double t1 = gamma_ratio({c, b - a}, {b, c - a});
        double t2 = gamma_ratio({c, a - b}, {a, c - b});
        double v = 0.0;
        if (t1 != 0.0) v += t1 * std::pow(-z, -a) * dispatch(a, a - c + 1.0, a - b + 1.0, zi, 1.0 - zi, depth + 1);
        if (t2 != 0.0) v += t2 * std::pow(-z, -b) * dispatch(b, b - c + 1.0, b - a + 1.0, zi, 1.0 - zi, depth + 1);
        return v;
    }
    // b - a integer: Pfaff lands in (1/2, 1) where the log branch takes over
    double zz = z / (z - 1.0);
    return std::pow(w, -a) * dispatch(a, c - b, c, zz, 1.0 / w, depth + 1);
}

const std::array<double, 48>& zeta_even() {
    static const std::array<double, 48> table = [] {
        std::array<double, 48> t{};
        for (int n = 1; n <= 48; ++n) t[n - 1] = boost::math::zeta(2.0 * n);
        return t;
    }();
    return table;
}

}  // namespace

double ln_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("ln_gamma: x must be positive");
    return boost::math::lgamma(x);
}

double digamma(double x) {
    if (!(x > 0.0)) throw DomainError("digamma: x must be positive");
    return boost::math::digamma(x);
}

double gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den) {
    double lg = 0.0;
    int sign = 1;
    for (double x : den) {
        if (is_nonpos_int(x)) return 0.0;
        int s;
        lg -= log_abs_gamma(x, s);
        sign *= s;
    }
    for (double x : num) {
        if (is_nonpos_int(x)) throw ParameterError("gamma_ratio: pole in numerator at " + std::to_string(x));
        int s;
        lg += log_abs_gamma(x, s);
        sign *= s;
    }
    return sign * std::exp(lg);
}

double beta(double a, double b) { return gamma_ratio({a, b}, {a + b}); }

double gauss_2f1(const HypergeomArgs& p) { return dispatch(p.a, p.b, p.c, p.z, 1.0 - p.z, 0); }

double gauss_2f1(double a, double b, double c, double z) { return dispatch(a, b, c, z, 1.0 - z, 0); }

double gauss_2f1_complement(double a, double b, double c, double w) {
    return dispatch(a, b, c, 1.0 - w, w, 0);
}

double clausen2(double theta) {
    double t = std::remainder(theta, 2.0 * pi);  // (-pi, pi]
    if (t == 0.0) return 0.0;
    double s = t < 0 ? -1.0 : 1.0;
    t = std::fabs(t);
    const auto& z = zeta_even();
    double q = (t / (2.0 * pi)) * (t / (2.0 * pi));
    double p = q, sum = 0.0;
    for (int n = 1; n <= 48; ++n) {
        double term = z[n - 1] * p / (n * (2.0 * n + 1.0));
        sum += term;
        if (term < 1e-18 * std::fabs(sum)) break;
        p *= q;
    }
    return s * (t - t * std::log(t) + t * sum);
}

double lobachevsky(double x) {
    if (!(std::fabs(x) <= pi / 2 + 1e-15)) throw DomainError("lobachevsky: |x| must be at most pi/2");
    return x * std::log(2.0) + 0.5 * clausen2(2.0 * x + pi);
}

double log_interval_integral(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log_interval_integral: a and b must be positive");
    double W = std::atan(std::sqrt(a / b));
    return 2.0 * W * std::log(a + b) + 2.0 * lobachevsky(pi / 2 - 2.0 * W) - pi * std::log(2.0);
}

double log_interval_integral_uncorrected(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log_interval_integral: a and b must be positive");
    double W = std::atan(std::sqrt(a / b));
    return W * std::log(a + b) - lobachevsky(pi / 2 - 2.0 * W) - 0.5 * pi * std::log(2.0);
}

double angular_power_integral(int d, double nu, double a, double r) {
    if (!(std::fabs(a) > 0.0 && std::fabs(a) < r) || !(nu > 0.0) || d < 2)
        throw DomainError("angular_power_integral: need 0 < |a| < r, nu > 0, d >= 2");
    return std::pow(r, -2.0 * nu) * beta(0.5 * (d - 1), 0.5) *
           gauss_2f1(nu, nu - 0.5 * d + 1.0, 0.5 * d, a * a / (r * r));
}

double beta_power_integral(double nu, double mu, double lambda, double u, double b) {
    if (!(mu > 0.0) || !(nu > 0.0) || !(u > 0.0) || !(b > 0.0))
        throw DomainError("beta_power_integral: need mu, nu, u, beta > 0");
    return std::pow(b, lambda) * std::pow(u, mu + nu - 1.0) * beta(mu, nu) *
           gauss_2f1(-lambda, nu, mu + nu, -u / b);
}

double power_integral(double mu, double nu, double b, double u) {
    if (!(mu > 0.0) || !(nu > 0.0) || !(u > 0.0) || !(1.0 + b * u > 0.0))
        throw DomainError("power_integral: need mu, nu, u > 0 and 1 + beta u > 0");
    return std::pow(u, mu) / mu * gauss_2f1(nu, mu, 1.0 + mu, -b * u);
}

double power_integral_uncorrected(double mu, double nu, double b, double u) {
    if (!(mu > 0.0) || !(nu > 0.0) || !(u > 0.0) || !(1.0 + b * u > 0.0))
        throw DomainError("power_integral: need mu, nu, u > 0 and 1 + beta u > 0");
    return std::pow(u, mu) / mu * gauss_2f1(nu, nu - mu, 1.0 + mu, -b * u);
}

EdgeExpansion edge_expansion(double alpha, int d) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw BranchError("edge_expansion: needs alpha in (0,1)");
    double hd = 0.5 * d;
    return {gamma_ratio({hd, 1.0 - alpha}, {0.5 * (d - alpha), 1.0 - 0.5 * alpha}),
            gamma_ratio({hd, alpha - 1.0}, {0.5 * alpha, 0.5 * (d + alpha - 2.0)})};
}

EdgeExpansion edge_expansion_log(int d, LogEdgeConstant which) {
    double a = 0.5 * (d - 1);
    double K = gamma_ratio({0.5 * d}, {a, 0.5});
    double B = which == LogEdgeConstant::exact ? K * (-2.0 * euler_gamma - digamma(a) - digamma(0.5))
                                               : 2.0 * K * (-euler_gamma - digamma(a) - digamma(0.5));
    return {K, B};
}

double edge_residual(double alpha, int d, double t, LogEdgeConstant which) {
    double w = t * (2.0 - t);  // 1 - r^2
    if (alpha == 1.0) {
        auto e = edge_expansion_log(d, which);
        return gauss_2f1_complement(0.5 * (d - 1), 0.5, 0.5 * d, w) + e.A * std::log(w) - e.B;
    }
    auto e = edge_expansion(alpha, d);
    return gauss_2f1_complement(0.5 * (d - alpha), 1.0 - 0.5 * alpha, 0.5 * d, w) -
           e.A * std::pow(w, alpha - 1.0) - e.B;
}

double reflection_sum(double alpha, double z) {
    if (!(z < 0.0)) throw DomainError("reflection_sum: z must be negative");
    double a = 0.5 * alpha;
    return std::pow(-z, -a) * gauss_2f1(a, alpha, 1.0 + a, 1.0 / z) +
           std::pow(-z, a) * gauss_2f1(a, alpha, 1.0 + a, z);
}

double reflection_sum_value(double alpha) { return gamma_ratio({0.5 * alpha, 1.0 + 0.5 * alpha}, {alpha}); }

}  // namespace stablecond::specfun
