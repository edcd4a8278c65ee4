#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stablecond/condition.hpp"

namespace stablecond {

// A named table of deterministic checks (special-function identities, potential limits,
// sampler validity). Advisory checks are reported but do not fail the suite.
struct SuiteResult {
    std::string name;
    std::vector<Check> checks;
    nlohmann::json data = nlohmann::json::object();
    bool passed() const;
    nlohmann::json to_json() const;
};

struct KSResult {
    double D = 0.0;
    double p = 1.0;
};
// asymptotic Kolmogorov tail with the usual small-sample correction
double kolmogorov_q(double lambda);
KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// one-sample against a CDF
template <class Cdf>
KSResult ks_one_sample(std::vector<double> a, Cdf cdf);

// closed-form identities and transformation formulas against quadrature oracles
SuiteResult identity_suite(std::uint64_t seed);
// sup over r in [1-eps, 1] of the edge-expansion residual, eps = 1e-2, 1e-3, 1e-4
SuiteResult edge_limit_suite();
// max over 21 shell points of |U mu^(1) - 1| along eps = 1e-1 .. 1e-4 (alpha = 0.5, d = 2)
SuiteResult shell_potential_suite(Normalization n);
// slab analogue (alpha = 0.5, d = 3)
SuiteResult slab_potential_suite(Normalization n);
// constancy of the interval potential and its endpoint Beta value
SuiteResult interval_potential_suite();
// constant-table identities and closed forms of H_S / M_D
SuiteResult constants_suite();
// characteristic function, isotropy and self-similarity of the increments
SuiteResult sampler_suite(std::uint64_t seed, size_t n);

// ---- template definition

template <class Cdf>
KSResult ks_one_sample(std::vector<double> a, Cdf cdf) {
    std::sort(a.begin(), a.end());
    double n = static_cast<double>(a.size()), D = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double F = cdf(a[i]);
        D = std::max({D, F - i / n, (i + 1) / n - F});
    }
    double sn = std::sqrt(n);
    return {D, kolmogorov_q((sn + 0.12 + 0.11 / sn) * D)};
}

}  // namespace stablecond
