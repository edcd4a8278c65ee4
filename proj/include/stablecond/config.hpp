#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stablecond/errors.hpp"

namespace stablecond {

// Flat dotted keys ("set.radii") mapped to JSON values. Every key has a default except
// experiment, alpha and d; the resolved form lists all of them.
class RunConfig {
public:
    nlohmann::json values = nlohmann::json::object();
    std::map<std::string, int> lines;  // where each key was set; 0 default or flag, -1 environment
    bool seed_from_entropy = false;

    const nlohmann::json& at(const std::string& key) const;
    double num(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::vector<double> vec(const std::string& key) const;
    std::vector<std::vector<double>> mat(const std::string& key) const;

    nlohmann::json resolved() const { return values; }
};

const std::vector<std::string>& experiment_names();
// every recognized key, in a stable order
const std::vector<std::string>& config_keys();

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();
// STABLECOND_ + upper-cased key with '.' replaced by '_'
std::string env_name(const std::string& key);

// key = value lines with [section] headers and # comments, or a JSON object (as written
// to resolved-config.json). Applies environment overrides, fills defaults, validates.
RunConfig parse_config_text(const std::string& text, const EnvLookup& env);
RunConfig parse_config(const std::string& path, const EnvLookup& env = process_env());

// re-run defaulting and validation after programmatic edits (command-line overrides)
void finalize_config(RunConfig& cfg);

}  // namespace stablecond
