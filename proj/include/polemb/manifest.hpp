#pragma once

// Run manifest: every CLI stage records what it ran, what it read, what it
// wrote, and how long each phase took. File entries carry FNV-1a digests so
// a manifest can later prove the artifacts on disk are the ones it produced.
// Paths are stored relative to the manifest's own directory, which keeps an
// artifact directory relocatable.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace polemb {

inline constexpr const char* kToolVersion = "0.1.0";

struct ManifestEntry {
    std::string path;  // as given by the caller; relativized at write time
    std::uint64_t bytes = 0;
    std::string digest;  // fnv1a64 hex
};

namespace detail {

inline ManifestEntry digest_entry(const std::string& path) {
    std::string data = read_file(path);
    ManifestEntry e;
    e.path = path;
    e.bytes = data.size();
    e.digest = to_hex16(fnv1a64(data));
    return e;
}

// Lexically relative to base when possible, absolute otherwise.
inline std::string relativize(const std::string& path, const std::filesystem::path& base) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::path abs = fs::absolute(fs::path(path), ec);
    if (ec) return path;
    fs::path rel = abs.lexically_relative(fs::absolute(base));
    if (rel.empty()) return abs.generic_string();
    return rel.generic_string();
}

}  // namespace detail

struct RunManifest {
    std::string command;             // subcommand name
    std::vector<std::string> args;   // full argv as invoked
    std::uint64_t seed = 0;
    bool deterministic = false;
    int threads = 1;
    std::vector<std::string> config;  // resolved key = value lines
    std::vector<ManifestEntry> inputs;
    std::vector<ManifestEntry> outputs;
    std::vector<std::pair<std::string, double>> timings_ms;  // stage order preserved
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    void add_input(const std::string& path) { inputs.push_back(detail::digest_entry(path)); }
    void add_output(const std::string& path) { outputs.push_back(detail::digest_entry(path)); }
    void add_timing(const std::string& stage, double ms) { timings_ms.emplace_back(stage, ms); }

    nlohmann::ordered_json to_json(const std::filesystem::path& base_dir) const {
        nlohmann::ordered_json j;
        j["tool"] = "polemb";
        j["version"] = kToolVersion;
        j["command"] = command;
        j["args"] = args;
        j["seed"] = seed;
        j["deterministic"] = deterministic;
        j["threads"] = threads;
        j["config"] = config;
        auto files = [&](const std::vector<ManifestEntry>& es) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& e : es) {
                nlohmann::ordered_json f;
                f["path"] = detail::relativize(e.path, base_dir);
                f["bytes"] = e.bytes;
                f["fnv1a64"] = e.digest;
                arr.push_back(std::move(f));
            }
            return arr;
        };
        j["inputs"] = files(inputs);
        j["outputs"] = files(outputs);
        nlohmann::ordered_json t;
        for (const auto& [stage, ms] : timings_ms) t[stage] = ms;
        j["timings_ms"] = t;
        if (!extra.empty()) j["extra"] = extra;
        return j;
    }

    void write(const std::string& path) const {
        std::filesystem::path base = std::filesystem::path(path).parent_path();
        if (base.empty()) base = ".";
        write_file(path, to_json(base).dump(2) + "\n");
    }
};

inline RunManifest read_manifest(const std::string& path) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(read_file(path));
    RunManifest m;
    m.command = j.value("command", "");
    if (j.contains("args")) m.args = j["args"].get<std::vector<std::string>>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.deterministic = j.value("deterministic", false);
    m.threads = j.value("threads", 1);
    if (j.contains("config")) m.config = j["config"].get<std::vector<std::string>>();
    auto files = [](const nlohmann::ordered_json& arr) {
        std::vector<ManifestEntry> out;
        for (const auto& f : arr) {
            ManifestEntry e;
            e.path = f.value("path", "");
            e.bytes = f.value("bytes", std::uint64_t{0});
            e.digest = f.value("fnv1a64", "");
            out.push_back(std::move(e));
        }
        return out;
    };
    if (j.contains("inputs")) m.inputs = files(j["inputs"]);
    if (j.contains("outputs")) m.outputs = files(j["outputs"]);
    if (j.contains("timings_ms"))
        for (auto it = j["timings_ms"].begin(); it != j["timings_ms"].end(); ++it)
            m.timings_ms.emplace_back(it.key(), it.value().get<double>());
    if (j.contains("extra")) m.extra = j["extra"];
    return m;
}

// Re-digests the manifest's outputs (paths resolved against the manifest's
// directory). Returns one message per missing or altered artifact.
inline std::vector<std::string> verify_manifest_file(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    RunManifest m = read_manifest(manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<std::string> problems;
    for (const auto& e : m.outputs) {
        fs::path p(e.path);
        if (p.is_relative()) p = base / p;
        std::error_code ec;
        if (!fs::exists(p, ec)) {
            problems.push_back("missing output: " + e.path);
            continue;
        }
        std::string data = read_file(p.string());
        if (data.size() != e.bytes)
            problems.push_back("size mismatch for " + e.path + ": manifest " + std::to_string(e.bytes) +
                               ", on disk " + std::to_string(data.size()));
        else if (to_hex16(fnv1a64(data)) != e.digest)
            problems.push_back("digest mismatch for " + e.path);
    }
    return problems;
}

}  // namespace polemb
