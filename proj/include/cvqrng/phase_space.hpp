#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include "cvqrng/binning.hpp"
#include "cvqrng/rng.hpp"

namespace cvqrng {

// Quadrature convention, fixed project-wide: the vacuum state has zero mean
// and Wigner variance 0.5 per quadrature, a thermal state of mean photon
// number n has Wigner variance n + 0.5.
inline constexpr double kVacuumVariance = 0.5;

struct GaussianModeState {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = kVacuumVariance;
    double var_p = kVacuumVariance;

    static GaussianModeState vacuum() noexcept { return {}; }

    static GaussianModeState thermal(double n) {
        if (!(n >= 0.0)) throw std::invalid_argument("GaussianModeState: photon number must be >= 0");
        return {0.0, 0.0, n + kVacuumVariance, n + kVacuumVariance};
    }

    void validate() const {
        if (!(var_x >= kVacuumVariance) || !(var_p >= kVacuumVariance))
            throw std::invalid_argument("GaussianModeState: quadrature variance below vacuum");
        if (!std::isfinite(mean_x) || !std::isfinite(mean_p))
            throw std::invalid_argument("GaussianModeState: mean must be finite");
    }
};

// One experiment configuration: a thermal source of n_total photons split on
// a lossless beam splitter between Alice (homodyne at alice_phase) and Eve
// (heterodyne). t_sq is Eve's power transmission, so n_eve = t_sq * n_total.
struct SplitScenario {
    double n_total = 0.0;
    double t_sq = 0.0;
    double alice_phase = 0.0;
    double electronic_noise_factor = 1.0;
    double coherence_ratio = std::numeric_limits<double>::infinity();
    std::uint64_t shots = 200000;
    std::uint64_t seed = 1;
    BinningScheme binning{};

    double n_alice() const noexcept { return (1.0 - t_sq) * n_total; }
    double n_eve() const noexcept { return t_sq * n_total; }
    double reflectivity() const noexcept { return std::sqrt(1.0 - t_sq); }
    double transmissivity() const noexcept { return std::sqrt(t_sq); }

    // Scenario-level sentinel: a ratio of 0 or infinity means independent
    // shots (no correlation model), anything else drives the OU update.
    bool independent_shots() const noexcept {
        return coherence_ratio == 0.0 || std::isinf(coherence_ratio);
    }

    static SplitScenario from_photon_numbers(double n_alice, double n_eve) {
        if (!(n_alice >= 0.0) || !(n_eve >= 0.0))
            throw std::invalid_argument("SplitScenario: photon numbers must be >= 0");
        SplitScenario sc;
        sc.n_total = n_alice + n_eve;
        sc.t_sq = sc.n_total > 0.0 ? n_eve / sc.n_total : 0.0;
        return sc;
    }

    void validate() const {
        if (!(n_total >= 0.0) || !std::isfinite(n_total))
            throw std::invalid_argument("SplitScenario: n_total must be finite and >= 0");
        if (!(t_sq >= 0.0) || !(t_sq <= 1.0))
            throw std::invalid_argument("SplitScenario: t_sq must lie in [0, 1]");
        if (!std::isfinite(alice_phase))
            throw std::invalid_argument("SplitScenario: alice_phase must be finite");
        if (!(electronic_noise_factor >= 1.0))
            throw std::invalid_argument("SplitScenario: electronic_noise_factor must be >= 1");
        if (!(coherence_ratio >= 0.0))
            throw std::invalid_argument("SplitScenario: coherence_ratio must be >= 0");
        if (shots == 0)
            throw std::invalid_argument("SplitScenario: shots must be positive");
        binning.validate();
    }
};

struct ShotRecord {
    double signal_x = 0.0;  // hidden per-shot coherent displacement, pre-split
    double signal_p = 0.0;
    double alice_raw = 0.0;  // homodyne outcome at alice_phase
    int alice_bin = 0;
    double eve_x = 0.0;  // heterodyne outcome pair
    double eve_p = 0.0;
};

// Per-shot coherent displacement of the thermal field: independent zero-mean
// normals of variance n per quadrature. Detection adds the vacuum half-unit
// later, so the sampled ensemble has Wigner variance n + 0.5.
inline std::pair<double, double> sample_thermal_displacement(double n, CounterRng& rng) {
    if (!(n >= 0.0)) throw std::invalid_argument("sample_thermal_displacement: n must be >= 0");
    const auto [zx, zp] = rng.next_normal_pair();
    const double amp = std::sqrt(n);
    return {amp * zx, amp * zp};
}

// Ornstein-Uhlenbeck update with rho = exp(-coherence_ratio). The stationary
// distribution matches sample_thermal_displacement; ratio 0 freezes the
// field, ratio -> infinity reduces exactly to independent draws.
inline std::pair<double, double> sample_thermal_displacement_correlated(
    double n, double coherence_ratio, std::pair<double, double> prev, CounterRng& rng) {
    if (!(n >= 0.0)) throw std::invalid_argument("sample_thermal_displacement_correlated: n must be >= 0");
    if (!(coherence_ratio >= 0.0))
        throw std::invalid_argument("sample_thermal_displacement_correlated: coherence_ratio must be >= 0");
    const double rho = std::exp(-coherence_ratio);
    const double kick = std::sqrt(n * (1.0 - rho * rho));
    const auto [zx, zp] = rng.next_normal_pair();
    return {prev.first * rho + kick * zx, prev.second * rho + kick * zp};
}

// Beam-splitter mixing with the convention X_E = -t * X_th + r * X_vac.
// Alice's homodyne sees r times the displacement projected on her LO phase
// plus detection vacuum noise of variance 0.5 * electronic_noise_factor.
// Eve's heterodyne sees -t times the displacement plus one unit of vacuum
// noise per quadrature (her mode's half plus the heterodyne half, each
// scaled by the electronic noise factor).
inline ShotRecord run_shot(const SplitScenario& sc, std::pair<double, double> displacement,
                           CounterRng& rng) {
    const double r = sc.reflectivity();
    const double t = sc.transmissivity();
    const double f = sc.electronic_noise_factor;
    const double alice_sigma = std::sqrt(0.5 * f);
    const double eve_sigma = std::sqrt(f);

    ShotRecord rec;
    rec.signal_x = displacement.first;
    rec.signal_p = displacement.second;

    const double projected = rec.signal_x * std::cos(sc.alice_phase) +
                             rec.signal_p * std::sin(sc.alice_phase);
    const auto alice_noise = rng.next_normal_pair();  // second component unused, fixed draw layout
    rec.alice_raw = r * projected + alice_sigma * alice_noise.first;
    rec.alice_bin = quantize(rec.alice_raw, sc.binning);

    const auto eve_noise = rng.next_normal_pair();
    rec.eve_x = -t * rec.signal_x + eve_sigma * eve_noise.first;
    rec.eve_p = -t * rec.signal_p + eve_sigma * eve_noise.second;
    return rec;
}

// Generates the displacement for shot `index` given the previous shot's
// displacement. Shot 0 draws from the stationary distribution, later shots
// apply the OU recursion (which degenerates to independent sampling when the
// scenario disables correlations).
inline std::pair<double, double> next_displacement(const SplitScenario& sc, std::uint64_t index,
                                                   std::pair<double, double> prev) {
    CounterRng rng(sc.seed, stream_id(StreamKind::shot_signal, index));
    if (index == 0 || sc.independent_shots())
        return sample_thermal_displacement(sc.n_total, rng);
    return sample_thermal_displacement_correlated(sc.n_total, sc.coherence_ratio, prev, rng);
}

// Measurement half of a shot, reproducible from the scenario seed alone.
inline ShotRecord measure_shot(const SplitScenario& sc, std::uint64_t index,
                               std::pair<double, double> displacement) {
    CounterRng rng(sc.seed, stream_id(StreamKind::shot_measure, index));
    return run_shot(sc, displacement, rng);
}

}  // namespace cvqrng
