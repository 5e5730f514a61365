#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cvqrng/eavesdropper.hpp"
#include "cvqrng/entropy.hpp"
#include "cvqrng/phase_space.hpp"

namespace cvqrng {

// Variance of Alice's raw homodyne outcome (thermal signal share plus
// detection vacuum noise).
inline double marginal_variance(const SplitScenario& sc) {
    return sc.n_alice() + 0.5 * sc.electronic_noise_factor;
}

inline DiscreteDistribution marginal_distribution(const SplitScenario& sc) {
    return binned_gaussian(0.0, marginal_variance(sc), sc.binning);
}

inline double theory_h_min_unconditional(const SplitScenario& sc) {
    return min_entropy(marginal_distribution(sc));
}

inline double theory_guesswork_unconditional(const SplitScenario& sc) {
    return expected_guesswork(marginal_distribution(sc));
}

namespace detail {

inline double max_bin_probability(double mean, double variance, const BinningScheme& scheme,
                                  std::vector<double>& scratch) {
    scratch.resize(static_cast<std::size_t>(scheme.bin_count));
    binned_gaussian_into(mean, variance, scheme, scratch);
    return *std::max_element(scratch.begin(), scratch.end());
}

}  // namespace detail

// Analytic conditional min-entropy -log2 E[max of Eve's binned prediction].
// Eve's projected conditional mean wanders over shots as a zero-mean normal
// of variance gain^2 * Var(projected Eve outcome) = n_alice * n_eve /
// (n_eve + f); the expectation over that wander is taken by Simpson
// quadrature.
inline double theory_h_min_conditional(const SplitScenario& sc) {
    const auto law = ConditionalLaw::for_scenario(sc);
    const double eve_var = sc.n_eve() + sc.electronic_noise_factor;
    const double mean_var = law.gain * law.gain * eve_var;
    std::vector<double> scratch;
    if (mean_var < 1e-14)
        return -std::log2(detail::max_bin_probability(0.0, law.var_c, sc.binning, scratch));

    const double sigma = std::sqrt(mean_var);
    const double half_range = 8.0 * sigma;
    const int intervals = 2048;  // Simpson pairs; step stays well below a bin width
    const double step = 2.0 * half_range / intervals;
    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * 3.14159265358979323846));

    double integral = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double mu = -half_range + i * step;
        const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double density = inv_norm * std::exp(-0.5 * mu * mu / mean_var);
        integral += weight * density * detail::max_bin_probability(mu, law.var_c, sc.binning, scratch);
    }
    integral *= step / 3.0;
    return -std::log2(integral);
}

}  // namespace cvqrng
