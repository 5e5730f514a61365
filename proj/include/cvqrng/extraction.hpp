#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvqrng/rng.hpp"

namespace cvqrng {

// Uniformly random GF(2) matrix drawn from a seeded stream. Row r holds the
// input-bit mask whose parity forms output bit r; row 0 and column 0
// correspond to the most significant bits of output and input words. The
// matrix is persisted with a run via its (rows, cols, seed) triple.
struct HashMatrix {
    int rows = 4;
    int cols = 8;
    std::vector<std::uint64_t> row_masks;  // value-space masks: bit j selects input bit j
    std::uint64_t seed = 0;

    static HashMatrix random(int rows, int cols, std::uint64_t seed) {
        if (rows <= 0 || cols <= 0 || rows > 64 || cols > 64)
            throw std::invalid_argument("HashMatrix: dimensions must be in 1..64");
        HashMatrix m;
        m.rows = rows;
        m.cols = cols;
        m.seed = seed;
        m.row_masks.resize(static_cast<std::size_t>(rows));
        CounterRng rng(seed, stream_id(StreamKind::aux, 0));
        const std::uint64_t col_mask =
            cols == 64 ? ~0ULL : ((1ULL << cols) - 1);
        for (auto& mask : m.row_masks) mask = rng.next_u64() & col_mask;
        return m;
    }

    // Bit at (row r, column c) with c = 0 addressing the input MSB.
    bool bit(int r, int c) const {
        return (row_masks[static_cast<std::size_t>(r)] >> (cols - 1 - c)) & 1ULL;
    }

    void validate() const {
        if (rows <= 0 || cols <= 0 || rows > 64 || cols > 64)
            throw std::invalid_argument("HashMatrix: dimensions must be in 1..64");
        if (row_masks.size() != static_cast<std::size_t>(rows))
            throw std::invalid_argument("HashMatrix: row mask count mismatch");
    }

    bool full_rank() const {
        std::vector<std::uint64_t> rows_copy = row_masks;
        int rank = 0;
        for (int c = cols - 1; c >= 0 && rank < rows; --c) {
            const std::uint64_t pivot_bit = 1ULL << c;
            auto it = std::find_if(rows_copy.begin() + rank, rows_copy.end(),
                                   [&](std::uint64_t r) { return r & pivot_bit; });
            if (it == rows_copy.end()) continue;
            std::swap(*it, rows_copy[static_cast<std::size_t>(rank)]);
            for (auto& r : rows_copy)
                if (&r != &rows_copy[static_cast<std::size_t>(rank)] && (r & pivot_bit))
                    r ^= rows_copy[static_cast<std::size_t>(rank)];
            ++rank;
        }
        return rank == rows;
    }
};

// GF(2) matrix-vector product: output bit r is the parity of the input bits
// selected by row r.
inline std::uint64_t hash_word(std::uint64_t input, const HashMatrix& m) {
    m.validate();
    if (m.cols < 64 && (input >> m.cols) != 0)
        throw std::invalid_argument("hash_word: input wider than matrix columns");
    std::uint64_t out = 0;
    for (int r = 0; r < m.rows; ++r) {
        const int parity = std::popcount(input & m.row_masks[static_cast<std::size_t>(r)]) & 1;
        out |= static_cast<std::uint64_t>(parity) << (m.rows - 1 - r);
    }
    return out;
}

// Compresses one 8-bit biased sample into 4 extracted bits.
inline std::uint8_t hash_sample(std::uint8_t bin, const HashMatrix& m) {
    if (m.rows != 4 || m.cols != 8)
        throw std::invalid_argument("hash_sample: matrix must be 4x8");
    return static_cast<std::uint8_t>(hash_word(bin, m));
}

// Merges two consecutive extracted nibbles into one byte, first sample in
// the high nibble.
inline std::uint8_t merge_pair(std::uint8_t h1, std::uint8_t h2) {
    if (h1 > 0xF || h2 > 0xF) throw std::invalid_argument("merge_pair: inputs must be 4-bit");
    return static_cast<std::uint8_t>((h1 << 4) | h2);
}

// Rank of the observed bin pair among all bin pairs ordered by decreasing
// product probability p[i] * q[j], ties broken by smaller flattened index
// i * N + j. Counting uses binary searches over q sorted descending, so a
// call costs O(N log N) instead of sorting all N^2 pairs.
inline std::uint64_t pair_guess_rank(std::span<const double> p, std::span<const double> q,
                                     int bin_i, int bin_j) {
    const int n = static_cast<int>(p.size());
    if (static_cast<int>(q.size()) != n)
        throw std::invalid_argument("pair_guess_rank: distribution size mismatch");
    if (bin_i < 0 || bin_i >= n || bin_j < 0 || bin_j >= n)
        throw std::out_of_range("pair_guess_rank: bin index out of range");

    std::vector<int> q_order(static_cast<std::size_t>(n));
    std::iota(q_order.begin(), q_order.end(), 0);
    std::sort(q_order.begin(), q_order.end(), [&](int a, int b) {
        if (q[static_cast<std::size_t>(a)] != q[static_cast<std::size_t>(b)])
            return q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(b)];
        return a < b;
    });

    const double target = p[static_cast<std::size_t>(bin_i)] * q[static_cast<std::size_t>(bin_j)];
    const std::uint64_t flat_actual =
        static_cast<std::uint64_t>(bin_i) * static_cast<std::uint64_t>(n) +
        static_cast<std::uint64_t>(bin_j);

    std::uint64_t ahead = 0;
    for (int i = 0; i < n; ++i) {
        const double pi = p[static_cast<std::size_t>(i)];
        // products pi * q_sorted[k] are non-increasing in k
        auto gt_end = std::partition_point(q_order.begin(), q_order.end(), [&](int idx) {
            return pi * q[static_cast<std::size_t>(idx)] > target;
        });
        ahead += static_cast<std::uint64_t>(gt_end - q_order.begin());
        auto eq_end = std::partition_point(gt_end, q_order.end(), [&](int idx) {
            return pi * q[static_cast<std::size_t>(idx)] == target;
        });
        for (auto it = gt_end; it != eq_end; ++it) {
            const std::uint64_t flat =
                static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                static_cast<std::uint64_t>(*it);
            if (flat < flat_actual) ++ahead;
        }
    }
    return ahead + 1;
}

struct PairAttackOutcome {
    std::uint64_t g_ind_rank = 0;   // joint guess over both biased samples
    std::uint32_t g_merged_rank = 0;  // ascending brute force on the merged byte
};

// Joint attack on one consecutive pair: Eve ranks the true (bin1, bin2)
// among all combinations by product probability, and the merged true random
// byte is guessed in ascending order, so its rank is the value plus one.
inline PairAttackOutcome attack_merged(std::span<const double> pmf1, std::span<const double> pmf2,
                                       int bin1, int bin2, const HashMatrix& m) {
    PairAttackOutcome out;
    out.g_ind_rank = pair_guess_rank(pmf1, pmf2, bin1, bin2);
    const std::uint8_t merged = merge_pair(hash_sample(static_cast<std::uint8_t>(bin1), m),
                                           hash_sample(static_cast<std::uint8_t>(bin2), m));
    out.g_merged_rank = static_cast<std::uint32_t>(merged) + 1;
    return out;
}

struct MergedGuessSummary {
    double g_ind = 1.0;
    double g_merged = 1.0;
};

}  // namespace cvqrng
