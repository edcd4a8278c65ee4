#include "stablecond/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "stablecond/errors.hpp"

namespace stablecond::quad {

namespace {

Rule make_gl(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.x[i] = -x;
        r.w[i] = w;
        r.x[n - 1 - i] = x;
        r.w[n - 1 - i] = w;
    }
    if (n == 1) {
        r.x[0] = 0.0;
        r.w[0] = 2.0;
    }
    return r;
}

boost::math::quadrature::tanh_sinh<double>& ts() {
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    return integrator;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    if (n < 1) throw ParameterError("gauss_legendre: n must be positive");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(make_gl(n));
    return *slot;
}

double tanh_sinh(const EndpointFn& f, double a, double b, double tol, double* err) {
    if (!(b > a)) return 0.0;
    double e = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    double v = ts().integrate(f, a, b, tol, &e, &l1, &levels);
    if (err) *err = e;
    return v;
}

double tanh_sinh(const std::function<double(double)>& f, double a, double b, double tol, double* err) {
    return tanh_sinh([&](double x, double) { return f(x); }, a, b, tol, err);
}

double piecewise(const EndpointFn& f, std::vector<double> breaks, double tol) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double s = 0.0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] - breaks[i] <= 0.0) continue;
        s += tanh_sinh(f, breaks[i], breaks[i + 1], tol);
    }
    return s;
}

double gauss_kronrod(const std::function<double(double)>& f, double a, double b, double tol, double* err) {
    double e = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &e);
    if (err) *err = e;
    return v;
}

double half_line(const std::function<double(double)>& f, double tol) {
    thread_local boost::math::quadrature::exp_sinh<double> es;
    // split so both halves see a well-scaled integrand
    double head = tanh_sinh(f, 0.0, 1.0, tol);
    double tail = es.integrate([&](double t) { return f(1.0 + t); }, tol);
    return head + tail;
}

}  // namespace stablecond::quad
