// Command-line front end: scenario configuration, sweep orchestration,
// extraction plus statistical testing, and manifest replay.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvqrng/experiments.hpp"
#include "cvqrng/io.hpp"
#include "cvqrng/version.hpp"

namespace fs = std::filesystem;
using namespace cvqrng;

namespace {

struct CommonOptions {
    std::uint64_t seed = 1;
    std::uint64_t shots = kDeskScaleShots;
    bool shots_given = false;
    bool paper_scale = false;
    std::string out_dir = "out";
    double electronic_noise = 1.0;
    double coherence_ratio = 0.0;
    double alice_phase = 0.0;
    int workers = 1;
    std::uint64_t extractor_seed = kDefaultExtractorSeed;
    std::string config_path;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--seed", opt.seed, "Master seed; all randomness derives from it");
    cmd->add_option("--shots", opt.shots, "Shots per scenario (desk-scale default 200000)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--paper-scale", opt.paper_scale, "Use 2,000,000 shots per scenario");
    cmd->add_option("--out-dir", opt.out_dir, "Output directory");
    cmd->add_option("--electronic-noise", opt.electronic_noise,
                    "Detection vacuum-noise broadening factor (>= 1)")
        ->check(CLI::Range(1.0, 10.0));
    cmd->add_option("--coherence-ratio", opt.coherence_ratio,
                    "Pulse spacing over coherence time; 0 means independent shots")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--phase", opt.alice_phase, "Alice's homodyne LO phase in radians");
    cmd->add_option("--workers", opt.workers, "Worker threads")->check(CLI::Range(1, 256));
    cmd->add_option("--extractor-seed", opt.extractor_seed, "Seed of the 4x8 GF(2) hash matrix");
    cmd->add_option("--config", opt.config_path, "JSON config file; explicit flags win");
}

// JSON config: flat object with the same keys as the flags.
void apply_config_file(const CLI::App* cmd, CommonOptions& opt) {
    if (opt.config_path.empty()) return;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(opt.config_path));
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--config", std::string("cannot parse: ") + e.what());
    }
    const auto set_if_absent = [&](const char* flag, auto& target, const char* key) {
        if (cmd->count(flag) == 0 && j.contains(key)) {
            try {
                target = j.at(key).get<std::decay_t<decltype(target)>>();
            } catch (const std::exception&) {
                throw CLI::ValidationError("--config", std::string("bad value for key '") + key + "'");
            }
        }
    };
    set_if_absent("--seed", opt.seed, "seed");
    set_if_absent("--shots", opt.shots, "shots");
    set_if_absent("--out-dir", opt.out_dir, "out_dir");
    set_if_absent("--electronic-noise", opt.electronic_noise, "electronic_noise");
    set_if_absent("--coherence-ratio", opt.coherence_ratio, "coherence_ratio");
    set_if_absent("--phase", opt.alice_phase, "alice_phase");
    set_if_absent("--workers", opt.workers, "workers");
    set_if_absent("--extractor-seed", opt.extractor_seed, "extractor_seed");
    for (const auto& [key, value] : j.items()) {
        static const char* known[] = {"seed",        "shots",   "out_dir", "electronic_noise",
                                      "coherence_ratio", "alice_phase", "workers", "extractor_seed"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw CLI::ValidationError("--config", "unknown key '" + key + "'");
    }
}

RunManifest base_manifest(const CLI::App* cmd, const CommonOptions& opt, const std::string& command) {
    RunManifest m;
    m.command = command;
    m.seed = opt.seed;
    m.shots = cmd->count("--shots") ? opt.shots : (opt.paper_scale ? kPaperScaleShots : opt.shots);
    m.workers = opt.workers;
    m.electronic_noise_factor = opt.electronic_noise;
    m.coherence_ratio = opt.coherence_ratio;
    m.alice_phase = opt.alice_phase;
    m.extractor_seed = opt.extractor_seed;
    m.created_utc = utc_timestamp_now();
    return m;
}

int execute_and_persist(RunManifest manifest, const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const RenderedRun run = run_from_manifest(manifest);
    attach_output_inventory(manifest, run);
    for (const auto& [name, content] : run.files) write_file(dir / name, content);
    save_manifest(manifest, dir / "manifest.json");
    for (const auto& f : manifest.outputs)
        std::cout << f.name << "  " << f.bytes << " bytes  fnv1a64:" << f.digest << "\n";
    std::cout << "manifest.json written to " << (dir / "manifest.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kToolName) +
                 " — simulated heterodyne eavesdropping on a thermal-light homodyne QRNG"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOptions opt;

    auto* single = app.add_subcommand("single", "Run one scenario and write its metrics row");
    double n_alice = 5.0;
    double n_eve = 5.0;
    bool dump_shots = false;
    single->add_option("--n-alice", n_alice, "Alice's mean photon number")->check(CLI::NonNegativeNumber);
    single->add_option("--n-eve", n_eve, "Eve's mean photon number")->check(CLI::NonNegativeNumber);
    single->add_flag("--dump-shots", dump_shots, "Also dump raw shot records (shots.bin)");
    add_common_flags(single, opt);

    auto* sweep = app.add_subcommand("sweep-table2", "Sweep all tabulated photon-number splits");
    add_common_flags(sweep, opt);

    auto* fig3 = app.add_subcommand("fig3", "Conditional min-entropy curve at fixed n_alice = 5");
    int fig3_points = 10;
    fig3->add_option("--points", fig3_points, "Grid points over n_eve")->check(CLI::Range(2, 200));
    add_common_flags(fig3, opt);

    auto* extract = app.add_subcommand("extract-test",
                                       "Extract random bits via two-universal hashing and run the "
                                       "statistical battery");
    double ex_n_alice = 5.12;
    double ex_n_eve = 5.58;
    std::string inject;
    extract->add_option("--n-alice", ex_n_alice, "Alice's mean photon number")
        ->check(CLI::NonNegativeNumber);
    extract->add_option("--n-eve", ex_n_eve, "Eve's mean photon number")
        ->check(CLI::NonNegativeNumber);
    extract->add_option("--inject", inject, "Replace the extracted stream: zero | alternating")
        ->check(CLI::IsMember({"zero", "alternating"}));
    add_common_flags(extract, opt);

    auto* replay = app.add_subcommand("replay", "Re-run a manifest and verify bit-exact outputs");
    std::string manifest_path;
    int replay_workers = 0;
    replay->add_option("manifest", manifest_path, "Path to manifest.json")->required();
    replay->add_option("--workers", replay_workers, "Worker threads override")
        ->check(CLI::Range(1, 256));

    CLI11_PARSE(app, argc, argv);

    try {
        if (replay->parsed()) {
            const auto manifest = load_manifest(manifest_path);
            const auto dir = fs::path(manifest_path).parent_path();
            const auto report = replay_manifest(manifest, dir, replay_workers);
            for (const auto& f : report.recompute_mismatch)
                std::cout << "RECOMPUTE MISMATCH  " << f << "\n";
            for (const auto& f : report.disk_mismatch) std::cout << "DISK MISMATCH  " << f << "\n";
            for (const auto& f : report.missing) std::cout << "MISSING  " << f << "\n";
            std::cout << (report.ok ? "replay OK: outputs are bit-identical"
                                    : "replay FAILED")
                      << "\n";
            return report.ok ? 0 : 1;
        }

        const CLI::App* cmd = app.get_subcommands().front();
        apply_config_file(cmd, opt);

        if (single->parsed()) {
            RunManifest m = base_manifest(single, opt, "single");
            m.n_alice = n_alice;
            m.n_eve = n_eve;
            m.dump_shots = dump_shots;
            return execute_and_persist(std::move(m), opt.out_dir);
        }
        if (sweep->parsed()) {
            RunManifest m = base_manifest(sweep, opt, "sweep-table2");
            return execute_and_persist(std::move(m), opt.out_dir);
        }
        if (fig3->parsed()) {
            RunManifest m = base_manifest(fig3, opt, "fig3");
            m.fig3_points = fig3_points;
            return execute_and_persist(std::move(m), opt.out_dir);
        }
        if (extract->parsed()) {
            RunManifest m = base_manifest(extract, opt, "extract-test");
            m.n_alice = ex_n_alice;
            m.n_eve = ex_n_eve;
            m.inject = inject;
            return execute_and_persist(std::move(m), opt.out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand executed\n";
    return 1;
}
