#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvqrng/io.hpp"
#include "cvqrng/simulation.hpp"
#include "cvqrng/stat_tests.hpp"
#include "cvqrng/theory.hpp"

namespace cvqrng {

// Photon-number splits (n_eve, n_alice) used for the splitting-ratio sweep.
inline constexpr std::array<std::pair<double, double>, 15> kSplitSweepPhotonNumbers = {{
    {1.04, 14.60},
    {2.01, 12.78},
    {2.73, 11.98},
    {4.06, 9.64},
    {4.64, 8.40},
    {4.59, 7.49},
    {5.02, 6.24},
    {5.58, 5.12},
    {6.34, 3.87},
    {6.89, 2.97},
    {7.09, 2.28},
    {7.53, 1.54},
    {7.70, 0.82},
    {7.90, 0.57},
    {8.05, 0.22},
}};

// Default 4x8 extractor seed, found by a deterministic search over seeds.
// Its matrix has full rank, every row has odd popcount (so each output bit
// is exactly unbiased for any symmetric centered bin distribution), and all
// nonzero row combinations stay numerically unbiased on the thermal
// marginals simulated here. Any seed works for the extraction contract;
// this default just avoids the known weak matrices of the toy 8-to-4-bit
// scheme.
inline constexpr std::uint64_t kDefaultExtractorSeed = 23959;

inline constexpr std::uint64_t kDeskScaleShots = 200000;
inline constexpr std::uint64_t kPaperScaleShots = 2000000;

struct SweepConfig {
    std::uint64_t shots = kDeskScaleShots;
    std::uint64_t seed = 1;
    int workers = 1;
    double electronic_noise_factor = 1.0;
    double coherence_ratio = 0.0;  // 0 or infinity: independent shots
    double alice_phase = 0.0;
    BinningScheme binning{};
    std::uint64_t extractor_seed = kDefaultExtractorSeed;
};

namespace detail {

inline SplitScenario scenario_for(const SweepConfig& cfg, double n_alice, double n_eve,
                                  std::uint64_t scenario_index) {
    SplitScenario sc = SplitScenario::from_photon_numbers(n_alice, n_eve);
    sc.alice_phase = cfg.alice_phase;
    sc.electronic_noise_factor = cfg.electronic_noise_factor;
    sc.coherence_ratio = cfg.coherence_ratio == 0.0 ? std::numeric_limits<double>::infinity()
                                                    : cfg.coherence_ratio;
    sc.shots = cfg.shots;
    // one derived seed per scenario so shot streams never repeat across rows
    sc.seed = derive_stream_base(cfg.seed, stream_id(StreamKind::aux, scenario_index + 1));
    sc.binning = cfg.binning;
    return sc;
}

inline MetricsRow metrics_row_for(const SplitScenario& sc, const AttackRunResult& run,
                                  bool with_pairs) {
    MetricsRow row;
    row.n_eve = sc.n_eve();
    row.n_alice = sc.n_alice();
    row.ratio = row.n_alice > 0.0 ? row.n_eve / row.n_alice
                                  : std::numeric_limits<double>::quiet_NaN();
    row.h_min_unconditional = run.summary.h_min_unconditional();
    row.h_min_conditional = run.summary.h_min_conditional();
    row.h_min_theory_unconditional = theory_h_min_unconditional(sc);
    row.h_min_theory_conditional = theory_h_min_conditional(sc);
    row.guesswork_unconditional = run.summary.guesswork_unconditional();
    row.guesswork_conditional = run.summary.guesswork_conditional();
    row.iid_worstcase_unconditional = iid_guesswork(row.h_min_unconditional);
    row.iid_worstcase_conditional = iid_guesswork(row.h_min_conditional);
    if (with_pairs) {
        const auto merged = run.pair_tally.summary();
        row.g_ind = merged.g_ind;
        row.g_merged = merged.g_merged;
    } else {
        row.g_ind = std::numeric_limits<double>::quiet_NaN();
        row.g_merged = std::numeric_limits<double>::quiet_NaN();
    }
    return row;
}

}  // namespace detail

// Runs one scenario end to end and reduces it to a metrics row.
inline MetricsRow run_scenario_metrics(const SplitScenario& sc, int workers,
                                       std::uint64_t extractor_seed, bool with_pairs) {
    AttackOptions opt;
    opt.workers = workers;
    if (with_pairs && sc.binning.bin_count == 256) {
        opt.pair_attack = true;
        opt.extractor = HashMatrix::random(4, 8, extractor_seed);
    }
    const auto run = run_attack(sc, opt);
    return detail::metrics_row_for(sc, run, opt.pair_attack);
}

// Splitting-ratio sweep over all photon-number pairs of the table.
inline std::vector<MetricsRow> sweep_table2(const SweepConfig& cfg) {
    std::vector<MetricsRow> rows;
    rows.reserve(kSplitSweepPhotonNumbers.size());
    for (std::size_t i = 0; i < kSplitSweepPhotonNumbers.size(); ++i) {
        const auto [n_eve, n_alice] = kSplitSweepPhotonNumbers[i];
        const auto sc = detail::scenario_for(cfg, n_alice, n_eve, i);
        rows.push_back(run_scenario_metrics(sc, cfg.workers, cfg.extractor_seed, true));
    }
    return rows;
}

// Conditional min-entropy curve at fixed n_alice over a log grid of n_eve.
inline std::vector<MetricsRow> sweep_fig3(const SweepConfig& cfg, int points = 10,
                                          double n_alice = 5.0, double n_eve_min = 0.01,
                                          double n_eve_max = 500.0) {
    if (points < 2) throw std::invalid_argument("sweep_fig3: need at least two grid points");
    std::vector<MetricsRow> rows;
    rows.reserve(static_cast<std::size_t>(points));
    const double log_min = std::log(n_eve_min);
    const double log_max = std::log(n_eve_max);
    for (int i = 0; i < points; ++i) {
        const double frac = static_cast<double>(i) / (points - 1);
        const double n_eve = std::exp(log_min + frac * (log_max - log_min));
        const auto sc = detail::scenario_for(cfg, n_alice, n_eve, 1000 + static_cast<std::uint64_t>(i));
        rows.push_back(run_scenario_metrics(sc, cfg.workers, cfg.extractor_seed, false));
    }
    return rows;
}

struct ExtractTestResult {
    MetricsRow metrics;
    std::vector<std::uint8_t> extracted;
    std::vector<TestReport> reports;
};

inline std::vector<std::uint8_t> injected_stream(const std::string& pattern, std::size_t bytes) {
    if (pattern == "zero") return std::vector<std::uint8_t>(bytes, 0x00);
    if (pattern == "alternating") return std::vector<std::uint8_t>(bytes, 0xAA);
    throw std::invalid_argument("injected_stream: unknown pattern '" + pattern + "'");
}

// Extraction pipeline: run the attack, hash each 8-bit sample to 4 bits,
// merge consecutive nibbles into bytes and run the statistical battery on
// the resulting stream. A non-empty inject pattern replaces the extracted
// stream with the synthetic one (battery sanity checks).
inline ExtractTestResult extract_and_test(const SplitScenario& sc, int workers,
                                          std::uint64_t extractor_seed,
                                          const std::string& inject = {}) {
    AttackOptions opt;
    opt.workers = workers;
    opt.pair_attack = true;
    opt.extractor = HashMatrix::random(4, 8, extractor_seed);
    const auto run = run_attack(sc, opt);

    ExtractTestResult result;
    result.metrics = detail::metrics_row_for(sc, run, true);
    result.extracted = inject.empty() ? run.extracted : injected_stream(inject, run.extracted.size());
    result.reports = run_battery(BitView(result.extracted));
    return result;
}

// ---------------------------------------------------------------------------
// Manifest-driven execution: every CLI command renders its outputs through
// this function so a saved manifest can be re-executed bit-exactly.

struct RenderedRun {
    std::map<std::string, std::string> files;  // name -> content
};

inline RenderedRun run_from_manifest(const RunManifest& m, int workers_override = 0) {
    const int workers = workers_override > 0 ? workers_override : m.workers;
    SweepConfig cfg;
    cfg.shots = m.shots;
    cfg.seed = m.seed;
    cfg.workers = workers;
    cfg.electronic_noise_factor = m.electronic_noise_factor;
    cfg.coherence_ratio = m.coherence_ratio;
    cfg.alice_phase = m.alice_phase;
    cfg.binning = m.binning;
    cfg.extractor_seed = m.extractor_seed;

    RenderedRun out;
    if (m.command == "sweep-table2") {
        out.files["metrics.csv"] = render_metrics_csv(sweep_table2(cfg));
    } else if (m.command == "fig3") {
        out.files["fig3.csv"] = render_metrics_csv(sweep_fig3(cfg, m.fig3_points));
    } else if (m.command == "single") {
        auto sc = detail::scenario_for(cfg, m.n_alice, m.n_eve, 0);
        AttackOptions opt;
        opt.workers = workers;
        opt.keep_records = m.dump_shots;
        if (sc.binning.bin_count == 256) {
            opt.pair_attack = true;
            opt.extractor = HashMatrix::random(4, 8, cfg.extractor_seed);
        }
        const auto run = run_attack(sc, opt);
        const MetricsRow row = detail::metrics_row_for(sc, run, opt.pair_attack);
        out.files["metrics.csv"] = render_metrics_csv(std::span<const MetricsRow>(&row, 1));
        if (m.dump_shots) out.files["shots.bin"] = render_shot_dump(run.records, run.guesses);
    } else if (m.command == "extract-test") {
        auto sc = detail::scenario_for(cfg, m.n_alice, m.n_eve, 0);
        const auto res = extract_and_test(sc, workers, cfg.extractor_seed, m.inject);
        out.files["metrics.csv"] =
            render_metrics_csv(std::span<const MetricsRow>(&res.metrics, 1));
        out.files["extracted.bin"] =
            std::string(reinterpret_cast<const char*>(res.extracted.data()), res.extracted.size());
        out.files["stat_tests.csv"] = render_stat_reports_csv(res.reports);
    } else {
        throw std::invalid_argument("run_from_manifest: unknown command '" + m.command + "'");
    }
    return out;
}

inline void attach_output_inventory(RunManifest& m, const RenderedRun& run) {
    m.outputs.clear();
    for (const auto& [name, content] : run.files)
        m.outputs.push_back({name, content.size(), to_hex(fnv1a64(content))});
}

struct ReplayReport {
    bool ok = true;
    std::vector<std::string> recompute_mismatch;  // regenerated content diverges from manifest
    std::vector<std::string> disk_mismatch;       // on-disk file diverges from manifest
    std::vector<std::string> missing;             // listed output not present on disk
};

// Re-executes the manifest's command and verifies both the regenerated
// content and the on-disk files against the recorded digests.
inline ReplayReport replay_manifest(const RunManifest& m, const std::filesystem::path& dir,
                                    int workers_override = 0) {
    ReplayReport report;
    const RenderedRun rerun = run_from_manifest(m, workers_override);
    for (const auto& f : m.outputs) {
        const auto it = rerun.files.find(f.name);
        if (it == rerun.files.end() || to_hex(fnv1a64(it->second)) != f.digest)
            report.recompute_mismatch.push_back(f.name);
        const auto path = dir / f.name;
        if (!std::filesystem::exists(path)) {
            report.missing.push_back(f.name);
        } else if (to_hex(fnv1a64(read_file(path))) != f.digest) {
            report.disk_mismatch.push_back(f.name);
        }
    }
    report.ok = report.recompute_mismatch.empty() && report.disk_mismatch.empty() &&
                report.missing.empty();
    return report;
}

}  // namespace cvqrng
