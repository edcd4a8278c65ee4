#pragma once
#include <functional>
#include <vector>

namespace stablecond::quad {

struct Rule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// n-point Gauss-Legendre, cached per n
const Rule& gauss_legendre(int n);

// f(x, xc) with xc the signed distance to the nearer endpoint (a - x or b - x),
// so integrands singular at an endpoint can be evaluated without cancellation
using EndpointFn = std::function<double(double, double)>;

double tanh_sinh(const EndpointFn& f, double a, double b, double tol = 1e-12, double* err = nullptr);
double tanh_sinh(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                 double* err = nullptr);

// tanh-sinh over each [p_i, p_{i+1}] of the sorted, deduplicated breakpoints
double piecewise(const EndpointFn& f, std::vector<double> breaks, double tol = 1e-12);

double gauss_kronrod(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                     double* err = nullptr);

// int_0^inf
double half_line(const std::function<double(double)>& f, double tol = 1e-12);

}  // namespace stablecond::quad
