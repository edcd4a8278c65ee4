#pragma once
#include <span>

#include "stablecond/geometry.hpp"

namespace stablecond {

struct StableParams {
    double alpha;
    int d;
    void validate() const;  // alpha in (0,2), d >= 2
    void require_conditioning() const;  // additionally alpha <= 1
};

// Which prefactor the core measures carry. `uncorrected` is the closed form quoted for
// c_{alpha,d} (resp. c_{1,d}, k_{alpha,d}, k_{1,d,R}); `unit` is the value for which the
// local potential of the core measure tends to exactly one (see README, "Constants").
enum class Normalization { uncorrected, unit };

class ConstantTable {
public:
    ConstantTable(StableParams p, double R = 1.0);

    const StableParams& params() const { return p_; }
    double R() const { return R_; }

    // alpha in (0,1)
    double c_alpha_d() const;
    double C_alpha_d() const;
    double A_sphere() const;
    double k_alpha_d() const;  // d >= 3
    double A_plane() const;    // d >= 3
    // alpha = 1
    double c_1_d() const;
    double k_1_d_R() const;    // d >= 3
    double A_sphere_1() const;
    double A_plane_1() const;  // d >= 3

    double potential_const() const;
    double delta_rule(double eps) const;

    // both branches; unit-normalized counterparts
    double c_unit() const;
    double k_unit() const;
    double A_sphere_unit() const;
    double A_plane_unit() const;
    // A_plane divided by pi / sin(pi alpha / 2), the measured interval-potential constant
    double A_plane_sine_corrected() const;

    double c(Normalization n) const;
    double k(Normalization n) const;
    double A_sphere(Normalization n) const;
    double A_plane(Normalization n) const;

    // the defining identities, each should equal 1
    double nicesum_lhs() const;
    double kad_lhs() const;
    double c1_lhs() const;

private:
    void need_fractional(const char* what) const;
    void need_cauchy(const char* what) const;
    void need_d3(const char* what) const;
    StableParams p_;
    double R_;
};

ConstantTable constants(StableParams p, double R = 1.0);

double harmonic_H(const CapSet& S, std::span<const double> x, StableParams p, double tol = 1e-12);
// harmonic_H on fixed graded Gauss-Legendre panels, for Monte Carlo loops. Agrees to ~1e-11
// for disjoint caps; overlapping caps in d >= 3 add kinks not among the breakpoints (~1e-5).
class HarmonicEvaluator {
public:
    HarmonicEvaluator(CapSet S, StableParams p);
    double operator()(std::span<const double> x) const;
    const CapSet& set() const { return S_; }
    double distance(std::span<const double> x) const { return euclidean_distance(S_, x); }

private:
    CapSet S_;
    StableParams p_;
    std::vector<detail::RawCap> caps_;
    double measure_;
};

double harmonic_M(const PlanarSet& D, std::span<const double> x, StableParams p);
// closed form for the full sphere: max(|x|,1)^{a-d} 2F1((d-a)/2, (2-a)/2; d/2; min(|x|,1/|x|)^2)
double harmonic_H_sphere(double radius, StableParams p);

// int_{-1}^1 |x-y|^{a-1} (1-y)^{-a/2} (1+y)^{-a/2} dy
double interval_potential(double x, double alpha);
// pi / sin(pi alpha / 2): the value of the integral at every x
double interval_potential_constant(double alpha);
double interval_potential_normalized(double x, double alpha);

double mu_density(double r, double eps, StableParams p, Normalization n = Normalization::uncorrected);
// int (r-(1-e))^{-a/2} (1+e-r)^{-a/2} dr, no prefactor
double mu_radial_mass(double eps, double alpha);
double mu_total_mass(double eps, StableParams p, Normalization n = Normalization::uncorrected);

double U_mu1(double radius, double eps, StableParams p, Normalization n = Normalization::uncorrected);
double U_mu1(std::span<const double> x, double eps, StableParams p, Normalization n = Normalization::uncorrected);

// slab analogue: potential at normal coordinate s of the core measure on the slab |(v,y)| <= eps;
// alpha = 1 truncates the slab at in-plane radius R
double U_rho1(double s, double eps, StableParams p, Normalization n = Normalization::uncorrected, double R = 10.0);

enum class SetKind { sphere, plane };
// explicit bound on the far part of the potential; set_measure is l_{d-1}(D^delta) for planes
double U_mu2_bound(double eps, double delta, StableParams p, SetKind kind = SetKind::sphere,
                   double set_measure = 0.0, Normalization n = Normalization::uncorrected);

}  // namespace stablecond
