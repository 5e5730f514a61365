#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "cvqrng/eavesdropper.hpp"
#include "cvqrng/entropy.hpp"
#include "cvqrng/extraction.hpp"
#include "cvqrng/phase_space.hpp"
#include "cvqrng/theory.hpp"

namespace cvqrng {

struct AttackOptions {
    int workers = 1;
    bool keep_records = false;  // retain per-shot records and guess records
    bool pair_attack = false;   // joint and merged guessing over consecutive shots
    std::optional<HashMatrix> extractor;  // hash bins into an extracted byte stream
};

struct PairAttackTally {
    std::uint64_t pairs = 0;
    std::uint64_t g_ind_sum = 0;
    std::uint64_t g_merged_sum = 0;

    void merge(const PairAttackTally& other) {
        pairs += other.pairs;
        g_ind_sum += other.g_ind_sum;
        g_merged_sum += other.g_merged_sum;
    }

    MergedGuessSummary summary() const {
        if (pairs == 0) return {};
        return {static_cast<double>(g_ind_sum) / static_cast<double>(pairs),
                static_cast<double>(g_merged_sum) / static_cast<double>(pairs)};
    }
};

struct AttackRunResult {
    AttackSummary summary{0};
    PairAttackTally pair_tally;
    std::vector<ShotRecord> records;       // filled when keep_records
    std::vector<GuessRecord> guesses;      // filled when keep_records
    std::vector<std::uint8_t> extracted;   // merged extracted bytes when extractor set
};

namespace detail {

struct RunPlan {
    ConditionalLaw law;
    std::vector<double> marginal_pmf;
    std::vector<int> marginal_rank_of_bin;  // rank table of the unconditional optimal order
    bool conditioning_is_static = false;    // gain == 0: Eve's pmf equals the marginal every shot
};

inline RunPlan make_run_plan(const SplitScenario& sc) {
    RunPlan plan;
    plan.law = ConditionalLaw::for_scenario(sc);
    const auto marginal = marginal_distribution(sc);
    plan.marginal_pmf = marginal.probs();
    plan.marginal_rank_of_bin.resize(plan.marginal_pmf.size());
    const auto order = guess_order(plan.marginal_pmf);
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        plan.marginal_rank_of_bin[static_cast<std::size_t>(order[rank])] =
            static_cast<int>(rank + 1);
    plan.conditioning_is_static = plan.law.gain == 0.0;
    return plan;
}

}  // namespace detail

// Runs the full eavesdropping attack over the scenario's shots. Shots are
// processed in fixed-size blocks whose results depend only on (seed, shot
// index); block partials merge in block order, so the output is bit
// identical for any worker count.
inline AttackRunResult run_attack(const SplitScenario& sc, const AttackOptions& opt = {}) {
    sc.validate();
    if (opt.workers < 1) throw std::invalid_argument("run_attack: workers must be >= 1");
    if (opt.extractor) {
        opt.extractor->validate();
        if (opt.extractor->rows != 4 || opt.extractor->cols != 8)
            throw std::invalid_argument("run_attack: extractor must be a 4x8 matrix");
        if (sc.binning.bin_count != 256)
            throw std::invalid_argument("run_attack: extraction requires 8-bit binning");
    }
    if (opt.pair_attack && !opt.extractor)
        throw std::invalid_argument("run_attack: pair_attack requires an extractor");

    constexpr std::uint64_t kBlockShots = 8192;  // even, so pairs never straddle blocks
    const std::uint64_t shots = sc.shots;
    const std::uint64_t blocks = (shots + kBlockShots - 1) / kBlockShots;
    const std::size_t bins = static_cast<std::size_t>(sc.binning.bin_count);

    const auto plan = detail::make_run_plan(sc);

    // Correlated shots need the sequential OU prepass; independent shots
    // recreate their displacement from the per-shot stream on the fly.
    std::vector<std::pair<double, double>> displacements;
    if (!sc.independent_shots()) {
        displacements.resize(shots);
        std::pair<double, double> prev{0.0, 0.0};
        for (std::uint64_t i = 0; i < shots; ++i) {
            prev = next_displacement(sc, i, prev);
            displacements[i] = prev;
        }
    }

    AttackRunResult result;
    if (opt.keep_records) {
        result.records.resize(shots);
        result.guesses.resize(shots);
    }
    const bool want_pairs = opt.pair_attack || opt.extractor.has_value();
    if (opt.extractor) result.extracted.resize(shots / 2);

    struct BlockPartial {
        AttackSummary summary{0};
        PairAttackTally pair_tally;
    };
    std::vector<BlockPartial> partials(blocks);

    std::atomic<std::uint64_t> next_block{0};
    const auto worker_fn = [&]() {
        std::vector<double> pmf_even(bins);
        std::vector<double> pmf_odd(bins);
        if (plan.conditioning_is_static && want_pairs) {
            pmf_even = plan.marginal_pmf;
            pmf_odd = plan.marginal_pmf;
        }
        int even_bin = 0;
        std::uint64_t block;
        while ((block = next_block.fetch_add(1)) < blocks) {
            const std::uint64_t begin = block * kBlockShots;
            const std::uint64_t end = std::min(begin + kBlockShots, shots);
            BlockPartial partial;
            partial.summary = AttackSummary(bins);
            std::pair<double, double> prev{0.0, 0.0};
            for (std::uint64_t i = begin; i < end; ++i) {
                std::pair<double, double> disp;
                if (displacements.empty()) {
                    prev = next_displacement(sc, i, prev);
                    disp = prev;
                } else {
                    disp = displacements[i];
                }
                const ShotRecord rec = measure_shot(sc, i, disp);

                auto& pmf = (i % 2 == 0) ? pmf_even : pmf_odd;
                int rank;
                if (plan.conditioning_is_static) {
                    rank = plan.marginal_rank_of_bin[static_cast<std::size_t>(rec.alice_bin)];
                } else {
                    binned_gaussian_into(plan.law.projected_mean(rec.eve_x, rec.eve_p),
                                         plan.law.var_c, sc.binning, pmf);
                    rank = guess_rank(pmf, rec.alice_bin);
                }
                const int uncond_rank =
                    plan.marginal_rank_of_bin[static_cast<std::size_t>(rec.alice_bin)];
                const double residual =
                    rec.alice_raw - plan.law.projected_mean(rec.eve_x, rec.eve_p);

                auto& s = partial.summary;
                ++s.shots;
                s.first_guess_hits += rank == 1;
                s.first_guess_hits_unconditional += uncond_rank == 1;
                s.rank_sum += static_cast<std::uint64_t>(rank);
                s.rank_sum_unconditional += static_cast<std::uint64_t>(uncond_rank);
                ++s.rank_histogram[static_cast<std::size_t>(rank - 1)];
                ++s.bin_histogram[static_cast<std::size_t>(rec.alice_bin)];
                s.alice_raw_sum += rec.alice_raw;
                s.alice_raw_sq_sum += rec.alice_raw * rec.alice_raw;
                s.residual_sum += residual;
                s.residual_sq_sum += residual * residual;

                if (opt.keep_records) {
                    result.records[i] = rec;
                    result.guesses[i] = GuessRecord{i, rec.alice_bin, rank, rank == 1};
                }

                if (want_pairs) {
                    if (i % 2 == 0) {
                        even_bin = rec.alice_bin;
                    } else {
                        if (opt.pair_attack) {
                            ++partial.pair_tally.pairs;
                            partial.pair_tally.g_ind_sum +=
                                pair_guess_rank(pmf_even, pmf_odd, even_bin, rec.alice_bin);
                        }
                        if (opt.extractor) {
                            const std::uint8_t merged = merge_pair(
                                hash_sample(static_cast<std::uint8_t>(even_bin), *opt.extractor),
                                hash_sample(static_cast<std::uint8_t>(rec.alice_bin), *opt.extractor));
                            result.extracted[i / 2] = merged;
                            if (opt.pair_attack)
                                partial.pair_tally.g_merged_sum += static_cast<std::uint64_t>(merged) + 1;
                        }
                    }
                }
            }
            partials[block] = std::move(partial);
        }
    };

    if (opt.workers == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(opt.workers));
        for (int w = 0; w < opt.workers; ++w) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }

    result.summary = AttackSummary(bins);
    for (const auto& partial : partials) {
        result.summary.merge(partial.summary);
        result.pair_tally.merge(partial.pair_tally);
    }
    return result;
}

}  // namespace cvqrng
