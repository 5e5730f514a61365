#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cvqrng/entropy.hpp"
#include "cvqrng/phase_space.hpp"

namespace cvqrng {

// Gaussian conditioning of Alice's outcome on Eve's heterodyne pair,
// precomputed once per scenario. Conditioning the joint Gaussian statistics
// and deconvolving the extra heterodyne vacuum unit leaves Alice's raw
// outcome normal with mean gain * (projected Eve outcome) and variance
// var_c = n_alice * f / (n_eve + f) + 0.5 * f, where f is the electronic
// noise factor (f = 1 gives n_alice + 0.5 - n_alice * n_eve / (n_eve + 1)).
struct ConditionalLaw {
    double gain = 0.0;
    double var_c = kVacuumVariance;
    double cos_phase = 1.0;
    double sin_phase = 0.0;

    static ConditionalLaw for_scenario(const SplitScenario& sc) {
        sc.validate();
        const double f = sc.electronic_noise_factor;
        const double denom = sc.n_eve() + f;  // Eve's heterodyne variance per quadrature
        if (!(denom > 0.0)) throw std::invalid_argument("ConditionalLaw: degenerate Eve noise");
        ConditionalLaw law;
        law.gain = -sc.reflectivity() * sc.transmissivity() * sc.n_total / denom;
        law.var_c = sc.n_alice() * f / denom + 0.5 * f;
        law.cos_phase = std::cos(sc.alice_phase);
        law.sin_phase = std::sin(sc.alice_phase);
        return law;
    }

    double mean_x(double eve_x) const noexcept { return gain * eve_x; }
    double mean_p(double eve_p) const noexcept { return gain * eve_p; }
    double projected_mean(double eve_x, double eve_p) const noexcept {
        return gain * (eve_x * cos_phase + eve_p * sin_phase);
    }
};

// Eve's per-shot prediction for Alice's binned outcome.
struct ConditionalPrediction {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_c = kVacuumVariance;
    double projected_mean = 0.0;
    std::vector<double> pmf;
};

inline ConditionalPrediction condition(const SplitScenario& sc, double eve_x, double eve_p) {
    const auto law = ConditionalLaw::for_scenario(sc);
    ConditionalPrediction pred;
    pred.mean_x = law.mean_x(eve_x);
    pred.mean_p = law.mean_p(eve_p);
    pred.var_c = law.var_c;
    pred.projected_mean = law.projected_mean(eve_x, eve_p);
    pred.pmf.resize(static_cast<std::size_t>(sc.binning.bin_count));
    binned_gaussian_into(pred.projected_mean, pred.var_c, sc.binning, pred.pmf);
    return pred;
}

struct GuessRecord {
    std::uint64_t shot_index = 0;
    int actual_bin = 0;
    int rank = 0;  // position of actual_bin in Eve's guess order, 1-based
    bool first_guess_correct = false;
};

// Rank of actual_bin in the descending-probability guess order: one plus the
// number of strictly more probable bins plus the equally probable bins of
// smaller index.
inline int guess_rank(std::span<const double> pmf, int actual_bin) {
    if (actual_bin < 0 || static_cast<std::size_t>(actual_bin) >= pmf.size())
        throw std::out_of_range("guess_rank: bin index out of range");
    const double p_actual = pmf[static_cast<std::size_t>(actual_bin)];
    int rank = 1;
    for (int i = 0; i < static_cast<int>(pmf.size()); ++i) {
        const double p = pmf[static_cast<std::size_t>(i)];
        if (p > p_actual || (p == p_actual && i < actual_bin)) ++rank;
    }
    return rank;
}

inline double conditional_expected_guesswork(std::span<const GuessRecord> records) {
    if (records.empty())
        throw std::invalid_argument("conditional_expected_guesswork: empty record stream");
    std::uint64_t sum = 0;
    for (const auto& rec : records) sum += static_cast<std::uint64_t>(rec.rank);
    return static_cast<double>(sum) / static_cast<double>(records.size());
}

// Sequential reference attack: generate each shot, condition on Eve's
// heterodyne outcome and rank Alice's actual bin. The sink receives
// (ShotRecord, GuessRecord) per shot; aggregation is left to the caller.
template <typename Sink>
void attack_stream(const SplitScenario& sc, Sink&& sink) {
    sc.validate();
    const auto law = ConditionalLaw::for_scenario(sc);
    std::vector<double> pmf(static_cast<std::size_t>(sc.binning.bin_count));
    std::pair<double, double> displacement{0.0, 0.0};
    for (std::uint64_t i = 0; i < sc.shots; ++i) {
        displacement = next_displacement(sc, i, displacement);
        const ShotRecord rec = measure_shot(sc, i, displacement);
        binned_gaussian_into(law.projected_mean(rec.eve_x, rec.eve_p), law.var_c, sc.binning, pmf);
        const int rank = guess_rank(pmf, rec.alice_bin);
        sink(rec, GuessRecord{i, rec.alice_bin, rank, rank == 1});
    }
}

}  // namespace cvqrng
