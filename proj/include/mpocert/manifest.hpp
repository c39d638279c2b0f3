#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace mpocert {

inline constexpr const char* version_string = "0.1.0";

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Provenance block embedded in every output document. Wall-clock timings
/// are only recorded on request so that repeated runs stay byte-identical.
class RunManifest {
public:
    explicit RunManifest(std::string command, bool record_timings = false)
        : command_(std::move(command)), timings_(record_timings), start_(std::chrono::steady_clock::now()) {}

    void add_input(const std::string& path, std::string_view contents) {
        inputs_.push_back({{"path", path}, {"fnv1a64", fnv1a64(contents)}, {"bytes", contents.size()}});
    }
    nlohmann::json& parameters() { return parameters_; }

    nlohmann::json to_json() const {
        nlohmann::json j = {{"schema", "mpocert.manifest/1"},
                            {"command", command_},
                            {"inputs", inputs_},
                            {"parameters", parameters_.is_null() ? nlohmann::json::object() : parameters_},
                            {"version", version_string}};
        if (timings_) {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
            j["timings"] = {{"wall_seconds", secs}};
        }
        return j;
    }

private:
    std::string command_;
    bool timings_;
    std::chrono::steady_clock::time_point start_;
    nlohmann::json inputs_ = nlohmann::json::array();
    nlohmann::json parameters_ = nlohmann::json::object();
};

}  // namespace mpocert
