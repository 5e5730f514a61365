#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvqrng/binning.hpp"
#include "cvqrng/eavesdropper.hpp"
#include "cvqrng/phase_space.hpp"
#include "cvqrng/stat_tests.hpp"
#include "cvqrng/version.hpp"

namespace cvqrng {

// Per-scenario results persisted as one CSV line; theory columns come from
// the analytic oracle, the rest from the simulated attack.
struct MetricsRow {
    double n_eve = 0.0;
    double n_alice = 0.0;
    double ratio = 0.0;
    double h_min_unconditional = 0.0;
    double h_min_conditional = 0.0;
    double h_min_theory_unconditional = 0.0;
    double h_min_theory_conditional = 0.0;
    double guesswork_unconditional = 0.0;
    double guesswork_conditional = 0.0;
    double iid_worstcase_unconditional = 0.0;
    double iid_worstcase_conditional = 0.0;
    double g_ind = 0.0;
    double g_merged = 0.0;
};

inline constexpr const char* kMetricsCsvHeader =
    "n_eve,n_alice,ratio,h_min_unconditional,h_min_conditional,"
    "h_min_theory_unconditional,h_min_theory_conditional,"
    "guesswork_unconditional,guesswork_conditional,"
    "iid_worstcase_unconditional,iid_worstcase_conditional,g_ind,g_merged";

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) noexcept {
    return fnv1a64(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

inline std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

}  // namespace detail

inline std::string render_metrics_csv(std::span<const MetricsRow> rows) {
    std::string out = kMetricsCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        const double cols[] = {r.n_eve,
                               r.n_alice,
                               r.ratio,
                               r.h_min_unconditional,
                               r.h_min_conditional,
                               r.h_min_theory_unconditional,
                               r.h_min_theory_conditional,
                               r.guesswork_unconditional,
                               r.guesswork_conditional,
                               r.iid_worstcase_unconditional,
                               r.iid_worstcase_conditional,
                               r.g_ind,
                               r.g_merged};
        bool first = true;
        for (const double c : cols) {
            if (!first) out += ',';
            out += detail::format_double(c);
            first = false;
        }
        out += '\n';
    }
    return out;
}

inline std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsCsvHeader)
        throw std::runtime_error("metrics csv: bad header");
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string field;
        double cols[13];
        for (double& c : cols) {
            if (!std::getline(fields, field, ','))
                throw std::runtime_error("metrics csv: short row");
            c = std::strtod(field.c_str(), nullptr);
        }
        rows.push_back(MetricsRow{cols[0], cols[1], cols[2], cols[3], cols[4], cols[5], cols[6],
                                  cols[7], cols[8], cols[9], cols[10], cols[11], cols[12]});
    }
    return rows;
}

inline std::string render_stat_reports_csv(std::span<const TestReport> reports) {
    std::string out = "test_name,p_value,passed,skipped,bits_consumed,note\n";
    for (const auto& rep : reports) {
        out += rep.test_name;
        out += ',';
        out += detail::format_double(rep.p_value);
        out += ',';
        out += rep.passed ? "true" : "false";
        out += ',';
        out += rep.skipped ? "true" : "false";
        out += ',';
        out += std::to_string(rep.bits_consumed);
        out += ',';
        out += rep.note;
        out += '\n';
    }
    return out;
}

// Raw shot dump: packed little-endian records of
// (shot_index u64, alice_raw f64, eve_x f64, eve_p f64, alice_bin u8, rank u16).
inline std::string render_shot_dump(std::span<const ShotRecord> records,
                                    std::span<const GuessRecord> guesses) {
    if (records.size() != guesses.size())
        throw std::invalid_argument("render_shot_dump: record/guess length mismatch");
    static_assert(std::endian::native == std::endian::little,
                  "shot dump writer assumes a little-endian host");
    std::string out;
    out.reserve(records.size() * 35);
    const auto append = [&out](const void* p, std::size_t n) {
        out.append(reinterpret_cast<const char*>(p), n);
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::uint64_t index = guesses[i].shot_index;
        const std::uint16_t rank = static_cast<std::uint16_t>(guesses[i].rank);
        const std::uint8_t bin = static_cast<std::uint8_t>(records[i].alice_bin);
        append(&index, 8);
        append(&records[i].alice_raw, 8);
        append(&records[i].eve_x, 8);
        append(&records[i].eve_p, 8);
        append(&bin, 1);
        append(&rank, 2);
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Provenance of one CLI run: enough to re-execute the command bit-exactly
// plus a digest inventory of everything it wrote.
struct RunManifest {
    std::string tool = kToolName;
    std::string version = kToolVersion;
    std::string command;  // single | sweep-table2 | fig3 | extract-test
    std::uint64_t seed = 1;
    std::uint64_t shots = 200000;
    int workers = 1;
    double electronic_noise_factor = 1.0;
    double coherence_ratio = 0.0;  // 0 means independent shots
    double alice_phase = 0.0;
    BinningScheme binning{};
    std::uint64_t extractor_seed = 0;
    double n_alice = 0.0;  // single / extract-test scenarios
    double n_eve = 0.0;
    int fig3_points = 10;
    bool dump_shots = false;
    std::string inject;  // extract-test: "", "zero" or "alternating"
    std::string created_utc;

    struct OutputFile {
        std::string name;
        std::uint64_t bytes = 0;
        std::string digest;  // fnv1a64, hex
    };
    std::vector<OutputFile> outputs;
};

inline std::string utc_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["command"] = m.command;
    j["seed"] = m.seed;
    j["shots"] = m.shots;
    j["workers"] = m.workers;
    j["electronic_noise_factor"] = m.electronic_noise_factor;
    j["coherence_ratio"] = std::isfinite(m.coherence_ratio) ? m.coherence_ratio : 0.0;
    j["alice_phase"] = m.alice_phase;
    j["binning"] = {{"bin_width", m.binning.bin_width},
                    {"bin_count", m.binning.bin_count},
                    {"center", m.binning.center}};
    j["extractor_seed"] = m.extractor_seed;
    j["n_alice"] = m.n_alice;
    j["n_eve"] = m.n_eve;
    j["fig3_points"] = m.fig3_points;
    j["dump_shots"] = m.dump_shots;
    j["inject"] = m.inject;
    j["created_utc"] = m.created_utc;
    j["outputs"] = nlohmann::json::array();
    for (const auto& f : m.outputs)
        j["outputs"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"digest", f.digest}});
    return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.shots = j.at("shots").get<std::uint64_t>();
    m.workers = j.at("workers").get<int>();
    m.electronic_noise_factor = j.at("electronic_noise_factor").get<double>();
    m.coherence_ratio = j.at("coherence_ratio").is_number()
                            ? j.at("coherence_ratio").get<double>()
                            : 0.0;
    m.alice_phase = j.at("alice_phase").get<double>();
    m.binning.bin_width = j.at("binning").at("bin_width").get<double>();
    m.binning.bin_count = j.at("binning").at("bin_count").get<int>();
    m.binning.center = j.at("binning").at("center").get<double>();
    m.extractor_seed = j.at("extractor_seed").get<std::uint64_t>();
    m.n_alice = j.at("n_alice").get<double>();
    m.n_eve = j.at("n_eve").get<double>();
    m.fig3_points = j.at("fig3_points").get<int>();
    m.dump_shots = j.at("dump_shots").get<bool>();
    m.inject = j.at("inject").get<std::string>();
    m.created_utc = j.at("created_utc").get<std::string>();
    for (const auto& f : j.at("outputs")) {
        m.outputs.push_back({f.at("name").get<std::string>(),
                             f.at("bytes").get<std::uint64_t>(),
                             f.at("digest").get<std::string>()});
    }
    return m;
}

inline void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
    write_file(path, manifest_to_json(m).dump(2) + "\n");
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
    return manifest_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace cvqrng
