#pragma once
#include <stdexcept>
#include <string>

namespace stablecond {

// argument outside the mathematical domain (x <= 0 for ln_gamma, |x| > pi/2 for L, ...)
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// evaluation point too close to the set for the kernel
struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// alpha=1 constant asked for with alpha != 1 or the other way round
struct BranchError : std::logic_error {
    using std::logic_error::logic_error;
};

// time step too coarse for the target half-width
struct ResolutionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& key, const std::string& msg, int line = 0)
        : std::runtime_error(format(key, msg, line)), key_(key), line_(line) {}
    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& key, const std::string& msg, int line) {
        std::string s;
        if (line > 0) s += "line " + std::to_string(line) + ": ";
        if (!key.empty()) s += "'" + key + "': ";
        return s + msg;
    }
    std::string key_;
    int line_;
};

}  // namespace stablecond
