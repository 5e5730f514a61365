#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqrng/binning.hpp"

namespace cvqrng {

inline double normal_cdf(double z) noexcept {
    return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

// Probability vector over bin indices.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw std::invalid_argument("DiscreteDistribution: empty");
        double sum = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0)) throw std::invalid_argument("DiscreteDistribution: negative entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("DiscreteDistribution: probabilities sum to " + std::to_string(sum));
    }

    const std::vector<double>& probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const noexcept { return probs_[i]; }

private:
    std::vector<double> probs_;
};

// Exact bin-integral probabilities of N(mean, variance) under the scheme,
// written into `out`. The two extreme bins absorb the tails so the vector
// matches the saturating quantizer. Tail bins keep relative accuracy by
// working with erfc of the standardized |edge| rather than CDF differences,
// which also makes mirror bins of a centered Gaussian bit-identical.
inline void binned_gaussian_into(double mean, double variance, const BinningScheme& scheme,
                                 std::span<double> out) {
    if (!(variance > 0.0)) throw std::invalid_argument("binned_gaussian: variance must be positive");
    scheme.validate();
    const int n = scheme.bin_count;
    if (out.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("binned_gaussian: output span size mismatch");

    const double inv_scale = 1.0 / std::sqrt(2.0 * variance);
    double s_prev = (scheme.edge(1) - mean) * inv_scale;
    double c_prev = std::erfc(std::abs(s_prev));
    out[0] = s_prev <= 0.0 ? 0.5 * c_prev : 1.0 - 0.5 * c_prev;
    for (int k = 1; k < n - 1; ++k) {
        const double s = (scheme.edge(k + 1) - mean) * inv_scale;
        const double c = std::erfc(std::abs(s));
        double p;
        if (s_prev >= 0.0)
            p = 0.5 * (c_prev - c);
        else if (s <= 0.0)
            p = 0.5 * (c - c_prev);
        else
            p = 1.0 - 0.5 * (c + c_prev);
        out[k] = p > 0.0 ? p : 0.0;
        s_prev = s;
        c_prev = c;
    }
    out[n - 1] = s_prev >= 0.0 ? 0.5 * c_prev : 1.0 - 0.5 * c_prev;
}

inline DiscreteDistribution binned_gaussian(double mean, double variance,
                                            const BinningScheme& scheme) {
    std::vector<double> probs(static_cast<std::size_t>(scheme.bin_count));
    binned_gaussian_into(mean, variance, scheme, probs);
    return DiscreteDistribution(std::move(probs));
}

inline double min_entropy(const DiscreteDistribution& d) {
    const double p_max = *std::max_element(d.probs().begin(), d.probs().end());
    return -std::log2(p_max);
}

// Guess order of a distribution: bin indices sorted by decreasing
// probability, equal probabilities broken by smaller index first.
inline std::vector<int> guess_order(std::span<const double> probs) {
    std::vector<int> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (probs[a] != probs[b]) return probs[a] > probs[b];
        return a < b;
    });
    return order;
}

// Mean number of sequential guesses an optimal-order attacker needs:
// sum over bins of rank * probability under the descending-probability
// ordering with index tie-break.
inline double expected_guesswork(const DiscreteDistribution& d) {
    const auto order = guess_order(d.probs());
    double sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        sum += static_cast<double>(rank + 1) * d[static_cast<std::size_t>(order[rank])];
    return sum;
}

// Asymptotic guesswork moment exponent: (1 + alpha) * log2 sum p^(1/(1+alpha)).
inline double renyi_guesswork_exponent(const DiscreteDistribution& d, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("renyi_guesswork_exponent: alpha must be > 0");
    const double exponent = 1.0 / (1.0 + alpha);
    double sum = 0.0;
    for (double p : d.probs())
        if (p > 0.0) sum += std::pow(p, exponent);
    return (1.0 + alpha) * std::log2(sum);
}

// Mean guesses against an iid uniform source of beta random bits.
inline double iid_guesswork(double beta_bits) {
    if (!(beta_bits >= 0.0)) throw std::invalid_argument("iid_guesswork: beta must be >= 0");
    return std::exp2(beta_bits - 1.0) + 0.5;
}

// Frequentist conditional min-entropy from the first-guess hit count, with a
// Wilson-score 95% interval on the hit rate. Zero hits cannot be log-scored,
// so the estimate reports the resolution bound -log2(1/shots) and is flagged
// censored.
struct MinEntropyEstimate {
    double bits = 0.0;
    double bits_lo = 0.0;  // from the upper end of the hit-rate interval
    double bits_hi = 0.0;
    bool censored = false;
};

inline MinEntropyEstimate conditional_min_entropy_empirical(std::uint64_t hits,
                                                            std::uint64_t shots) {
    if (shots == 0) throw std::invalid_argument("conditional_min_entropy_empirical: no shots");
    if (hits > shots) throw std::invalid_argument("conditional_min_entropy_empirical: hits > shots");
    constexpr double z = 1.959963984540054;  // 95% two-sided
    const double n = static_cast<double>(shots);
    const double p_hat = static_cast<double>(hits) / n;
    const double z2n = z * z / n;
    const double denom = 1.0 + z2n;
    const double center = (p_hat + 0.5 * z2n) / denom;
    const double half = z * std::sqrt(p_hat * (1.0 - p_hat) / n + 0.25 * z2n / n) / denom;
    const double p_lo = std::max(center - half, 0.0);
    const double p_hi = std::min(center + half, 1.0);

    MinEntropyEstimate est;
    est.bits_lo = -std::log2(p_hi);
    est.bits_hi = p_lo > 0.0 ? -std::log2(p_lo) : std::numeric_limits<double>::infinity();
    if (hits == 0) {
        est.censored = true;
        est.bits = std::log2(n);  // lower bound at the sampling resolution
    } else {
        est.bits = -std::log2(p_hat);
    }
    return est;
}

// Mergeable tallies of one attack run. Partial summaries combine
// associatively, so parallel blocks can be reduced in a fixed order.
struct AttackSummary {
    std::uint64_t shots = 0;
    std::uint64_t first_guess_hits = 0;  // Eve's conditional first guess was right
    std::uint64_t first_guess_hits_unconditional = 0;
    std::uint64_t rank_sum = 0;
    std::uint64_t rank_sum_unconditional = 0;
    std::vector<std::uint64_t> rank_histogram;  // conditional ranks, index = rank - 1
    std::vector<std::uint64_t> bin_histogram;   // Alice's binned outcomes
    double alice_raw_sum = 0.0;
    double alice_raw_sq_sum = 0.0;
    double residual_sum = 0.0;  // alice_raw minus Eve's projected mean
    double residual_sq_sum = 0.0;

    explicit AttackSummary(std::size_t bin_count = 0)
        : rank_histogram(bin_count, 0), bin_histogram(bin_count, 0) {}

    void merge(const AttackSummary& other) {
        if (rank_histogram.size() != other.rank_histogram.size())
            throw std::invalid_argument("AttackSummary::merge: histogram size mismatch");
        shots += other.shots;
        first_guess_hits += other.first_guess_hits;
        first_guess_hits_unconditional += other.first_guess_hits_unconditional;
        rank_sum += other.rank_sum;
        rank_sum_unconditional += other.rank_sum_unconditional;
        for (std::size_t i = 0; i < rank_histogram.size(); ++i) {
            rank_histogram[i] += other.rank_histogram[i];
            bin_histogram[i] += other.bin_histogram[i];
        }
        alice_raw_sum += other.alice_raw_sum;
        alice_raw_sq_sum += other.alice_raw_sq_sum;
        residual_sum += other.residual_sum;
        residual_sq_sum += other.residual_sq_sum;
    }

    double mean_rank() const { return static_cast<double>(rank_sum) / static_cast<double>(shots); }
    double guesswork_conditional() const { return mean_rank(); }
    double guesswork_unconditional() const {
        return static_cast<double>(rank_sum_unconditional) / static_cast<double>(shots);
    }
    double hit_rate_conditional() const {
        return static_cast<double>(first_guess_hits) / static_cast<double>(shots);
    }
    double hit_rate_unconditional() const {
        return static_cast<double>(first_guess_hits_unconditional) / static_cast<double>(shots);
    }
    double h_min_conditional() const {
        return conditional_min_entropy_empirical(first_guess_hits, shots).bits;
    }
    double h_min_unconditional() const {
        return conditional_min_entropy_empirical(first_guess_hits_unconditional, shots).bits;
    }
    double alice_raw_variance() const {
        const double n = static_cast<double>(shots);
        const double mean = alice_raw_sum / n;
        return alice_raw_sq_sum / n - mean * mean;
    }
    double residual_variance() const {
        const double n = static_cast<double>(shots);
        const double mean = residual_sum / n;
        return residual_sq_sum / n - mean * mean;
    }
};

}  // namespace cvqrng
