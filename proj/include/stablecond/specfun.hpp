#pragma once
#include <initializer_list>

namespace stablecond::specfun {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double catalan = 0.91596559417721901505;

double ln_gamma(double x);
double digamma(double x);

// prod Gamma(num) / prod Gamma(den), accumulated in log space.
// A pole in the denominator gives 0; a pole in the numerator throws.
double gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den);

double beta(double a, double b);

struct HypergeomArgs {
    double a, b, c, z;
};

double gauss_2f1(const HypergeomArgs& args);
double gauss_2f1(double a, double b, double c, double z);
// same function at z = 1 - w, for callers that know 1-z more accurately than z
double gauss_2f1_complement(double a, double b, double c, double w);

double clausen2(double theta);
double lobachevsky(double x);

// int_0^a log(u) / sqrt((b+u)(a-u)) du
double log_interval_integral(double a, double b);
// W log(a+b) - L(pi/2 - 2W) - (pi/2) log 2, the commonly quoted (incorrect) reduction;
// kept so reports can show both
double log_interval_integral_uncorrected(double a, double b);

// int_0^pi sin^{d-2}(phi) (a^2 + 2ar cos phi + r^2)^{-nu} dphi, 0 < |a| < r
double angular_power_integral(int d, double nu, double a, double r);
// int_0^u x^{nu-1} (u-x)^{mu-1} (x+beta)^lambda dx
double beta_power_integral(double nu, double mu, double lambda, double u, double beta);
// int_0^u x^{mu-1} (1+beta x)^{-nu} dx, any beta u > -1
double power_integral(double mu, double nu, double beta, double u);
// same with 2F1(nu, nu-mu; 1+mu; -beta u) in place of 2F1(nu, mu; 1+mu; -beta u)
double power_integral_uncorrected(double mu, double nu, double beta, double u);

// 2F1((d-a)/2, 1-a/2; d/2; r^2) ~ A (1-r^2)^{a-1} + B as r -> 1, alpha < 1
struct EdgeExpansion {
    double A;
    double B;
};
EdgeExpansion edge_expansion(double alpha, int d);
// alpha = 1: 2F1((d-1)/2, 1/2; d/2; r^2) ~ -A log(1-r^2) + B
enum class LogEdgeConstant { exact, doubled };
EdgeExpansion edge_expansion_log(int d, LogEdgeConstant which = LogEdgeConstant::exact);
// F(r^2) minus its edge expansion, t = 1 - r
double edge_residual(double alpha, int d, double t, LogEdgeConstant which = LogEdgeConstant::exact);

// (-z)^{-a/2} F(a/2, a; 1+a/2; 1/z) + (-z)^{a/2} F(a/2, a; 1+a/2; z), z < 0
double reflection_sum(double alpha, double z);
double reflection_sum_value(double alpha);

}  // namespace stablecond::specfun
