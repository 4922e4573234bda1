#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "wobias/errors.hpp"

#include <json.hpp>

namespace wobias::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64 over the file bytes; enough to pin which inputs a run consumed.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 15];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return hex;
}

// One record per invocation, written beside the primary output. A run is
// reproducible bit-exactly from `argv` plus the digested inputs.
struct RunMeta {
    std::string subcommand;
    std::vector<std::string> argv;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    void write(const std::string& primary_output) const {
        nlohmann::ordered_json j;
        j["tool"] = "wobias";
        j["version"] = kToolVersion;
        j["subcommand"] = subcommand;
        j["argv"] = argv;
        nlohmann::ordered_json ins = nlohmann::ordered_json::object();
        for (const auto& path : inputs) ins[path] = file_digest(path);
        j["inputs"] = std::move(ins);
        j["outputs"] = outputs;
        if (!extra.empty()) j["run"] = extra;
        std::ofstream out(primary_output + ".meta.json");
        if (!out) throw DataError("cannot write " + primary_output + ".meta.json");
        out << j.dump(2) << '\n';
    }
};

}  // namespace wobias::cli
