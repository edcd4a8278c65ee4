#include "stablecond/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stablecond/rng.hpp"

namespace stablecond {

using nlohmann::json;

namespace {

enum class Kind { string, number, integer, u64, vector, matrix };

struct KeySpec {
    std::string name;
    Kind kind;
    // default as a function of d; null json means "no default"
    std::function<json(int d)> def;
};

json unit(int d, int i, double scale = 1.0) {
    json v = json::array();
    for (int k = 0; k < d; ++k) v.push_back(k == i ? scale : 0.0);
    return v;
}
json filled(int n, double v) {
    json a = json::array();
    for (int k = 0; k < n; ++k) a.push_back(v);
    return a;
}
std::function<json(int)> constant(json v) {
    return [v](int) { return v; };
}

// caps and plane description share the same keys under "set." and "subset."
void add_set_keys(std::vector<KeySpec>& ks, const std::string& pre, double cap_radius, double ball_radius) {
    ks.push_back({pre + "type", Kind::string, constant("caps")});
    ks.push_back({pre + "centers", Kind::matrix, [](int d) { return json::array({unit(d, 0)}); }});
    ks.push_back({pre + "radii", Kind::vector, constant(json::array({cap_radius}))});
    ks.push_back({pre + "normal", Kind::vector, [](int d) { return unit(d, d - 1); }});
    ks.push_back({pre + "shape", Kind::string, constant("ball")});
    ks.push_back({pre + "center", Kind::vector, [](int d) { return filled(d - 1, 0.0); }});
    ks.push_back({pre + "radius", Kind::number, constant(ball_radius)});
    ks.push_back({pre + "lo", Kind::vector, [](int d) { return filled(d - 1, -1.0); }});
    ks.push_back({pre + "hi", Kind::vector, [](int d) { return filled(d - 1, 1.0); }});
}

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> ks = [] {
        std::vector<KeySpec> k;
        k.push_back({"experiment", Kind::string, nullptr});
        k.push_back({"alpha", Kind::number, nullptr});
        k.push_back({"d", Kind::integer, nullptr});
        k.push_back({"seed", Kind::u64, nullptr});  // entropy when absent
        k.push_back({"workers", Kind::integer, constant(1)});
        k.push_back({"out", Kind::string, constant("out")});
        k.push_back({"n_paths", Kind::integer, constant(10000)});
        k.push_back({"eps_grid", Kind::vector, constant(json::array({0.2, 0.1, 0.05, 0.025}))});
        k.push_back({"h", Kind::number, constant(0.0)});
        k.push_back({"h_factor", Kind::number, constant(0.125)});
        k.push_back({"R_far", Kind::number, constant(50.0)});
        k.push_back({"T", Kind::number, constant(0.0)});
        k.push_back({"x", Kind::vector, [](int d) { return unit(d, 0, 2.0); }});
        k.push_back({"dump_paths", Kind::integer, constant(0)});
        add_set_keys(k, "set.", std::numbers::pi / 2, 1.0);
        add_set_keys(k, "subset.", std::numbers::pi / 4, 0.5);
        k.push_back({"check.trend_tol", Kind::number, constant(0.2)});
        k.push_back({"check.envelope_tol", Kind::number, constant(0.3)});
        k.push_back({"check.abs_tol", Kind::number, constant(0.05)});
        k.push_back({"check.se_mult", Kind::number, constant(3.0)});
        k.push_back({"duality.f_center", Kind::vector, [](int d) { return unit(d, 0, 2.0); }});
        k.push_back({"duality.f_radius", Kind::number, constant(0.3)});
        k.push_back({"duality.g_center", Kind::vector, [](int d) { return unit(d, 1, 2.0); }});
        k.push_back({"duality.g_radius", Kind::number, constant(0.3)});
        k.push_back({"duality.t", Kind::vector, constant(json::array({0.25, 0.5}))});
        k.push_back({"duality.sigma", Kind::number, constant(4.0)});
        k.push_back({"reversal.R_exit", Kind::number, constant(3.0)});
        k.push_back({"reversal.h", Kind::number, constant(0.01)});
        k.push_back({"reversal.bins", Kind::integer, constant(6)});
        k.push_back({"reversal.r_min", Kind::number, constant(1.25)});
        k.push_back({"reversal.min_count", Kind::integer, constant(200)});
        k.push_back({"reversal.sigma", Kind::number, constant(4.0)});
        k.push_back({"reversal.agree_fraction", Kind::number, constant(0.8)});
        return k;
    }();
    return ks;
}

const KeySpec* find_spec(const std::string& key) {
    for (const auto& s : schema())
        if (s.name == key) return &s;
    return nullptr;
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// JSON literal, or a bare word taken as a string
json parse_value(const std::string& raw, const std::string& key, int line) {
    std::string v = trim(raw);
    if (v.empty()) throw ConfigError(key, "missing value", line);
    try {
        return json::parse(v);
    } catch (const json::parse_error&) {
    }
    for (char c : v)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' || c == '/'))
            throw ConfigError(key, "cannot parse value '" + v + "'", line);
    return v;
}

std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

void flatten(const json& j, const std::string& prefix, json& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string k = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            flatten(*it, k, out);
        else
            out[k] = *it;
    }
}

int line_of(const std::string& text, size_t pos) {
    int line = 1;
    for (size_t i = 0; i < pos && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

RunConfig parse_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", e.what(), line_of(text, e.byte));
    }
    if (!j.is_object()) throw ConfigError("<file>", "top level must be an object", 1);
    RunConfig cfg;
    flatten(j, "", cfg.values);
    for (auto it = cfg.values.begin(); it != cfg.values.end(); ++it) {
        size_t pos = text.find("\"" + it.key() + "\"");
        if (pos == std::string::npos) pos = text.find("\"" + it.key().substr(it.key().rfind('.') + 1) + "\"");
        cfg.lines[it.key()] = pos == std::string::npos ? 0 : line_of(text, pos);
    }
    return cfg;
}

RunConfig parse_kv_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("<section>", "unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ConfigError("<section>", "empty section name", line);
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(s, "expected 'key = value'", line);
        std::string key = trim(s.substr(0, eq));
        if (key.empty()) throw ConfigError("<key>", "empty key", line);
        if (!section.empty()) key = section + "." + key;
        if (cfg.values.contains(key)) throw ConfigError(key, "set twice (first on line " + std::to_string(cfg.lines[key]) + ")", line);
        cfg.values[key] = parse_value(s.substr(eq + 1), key, line);
        cfg.lines[key] = line;
    }
    return cfg;
}

json coerce(const json& v, const KeySpec& spec, int line) {
    const std::string& key = spec.name;
    auto as_number = [&](const json& e) {
        if (!e.is_number()) throw ConfigError(key, "expected a number, got " + e.dump(), line);
        double x = e.get<double>();
        if (!std::isfinite(x)) throw ConfigError(key, "value must be finite", line);
        return x;
    };
    switch (spec.kind) {
        case Kind::string:
            if (!v.is_string()) throw ConfigError(key, "expected a string, got " + v.dump(), line);
            return v;
        case Kind::number:
            return as_number(v);
        case Kind::integer: {
            double x = as_number(v);
            if (x != std::floor(x) || std::abs(x) > 9.0e15) throw ConfigError(key, "expected an integer", line);
            return static_cast<std::int64_t>(x);
        }
        case Kind::u64:
            if (v.is_number_unsigned()) return v.get<std::uint64_t>();
            if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
            throw ConfigError(key, "expected a non-negative 64-bit integer", line);
        case Kind::vector: {
            if (!v.is_array()) throw ConfigError(key, "expected an array of numbers", line);
            json out = json::array();
            for (const auto& e : v) out.push_back(as_number(e));
            return out;
        }
        case Kind::matrix: {
            if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty array of arrays", line);
            json out = json::array();
            for (const auto& row : v) {
                if (!row.is_array()) throw ConfigError(key, "expected a non-empty array of arrays", line);
                json r = json::array();
                for (const auto& e : row) r.push_back(as_number(e));
                out.push_back(r);
            }
            return out;
        }
    }
    return v;
}

void validate_set(const RunConfig& cfg, const std::string& pre, int d) {
    auto line = [&](const std::string& k) {
        auto it = cfg.lines.find(pre + k);
        return it == cfg.lines.end() ? 0 : it->second;
    };
    std::string type = cfg.str(pre + "type");
    if (type == "caps") {
        auto c = cfg.mat(pre + "centers");
        auto r = cfg.vec(pre + "radii");
        if (c.size() != r.size())
            throw ConfigError(pre + "radii", "needs one radius per center (" + std::to_string(c.size()) + ")", line("radii"));
        for (const auto& row : c) {
            if (static_cast<int>(row.size()) != d) throw ConfigError(pre + "centers", "each center needs d coordinates", line("centers"));
            double n = 0;
            for (double x : row) n += x * x;
            if (n == 0.0) throw ConfigError(pre + "centers", "zero center vector", line("centers"));
        }
        for (double x : r)
            if (!(x > 0.0 && x <= std::numbers::pi + 1e-12))
                throw ConfigError(pre + "radii", "cap radii must lie in (0, pi]", line("radii"));
    } else if (type == "plane") {
        if (d < 3) throw ConfigError(pre + "type", "planar sets need d >= 3", line("type"));
        auto n = cfg.vec(pre + "normal");
        if (static_cast<int>(n.size()) != d) throw ConfigError(pre + "normal", "needs d coordinates", line("normal"));
        std::string shape = cfg.str(pre + "shape");
        if (shape == "ball") {
            if (static_cast<int>(cfg.vec(pre + "center").size()) != d - 1)
                throw ConfigError(pre + "center", "needs d-1 plane coordinates", line("center"));
            if (!(cfg.num(pre + "radius") > 0)) throw ConfigError(pre + "radius", "must be positive", line("radius"));
        } else if (shape == "box") {
            auto lo = cfg.vec(pre + "lo"), hi = cfg.vec(pre + "hi");
            if (static_cast<int>(lo.size()) != d - 1) throw ConfigError(pre + "lo", "needs d-1 plane coordinates", line("lo"));
            if (static_cast<int>(hi.size()) != d - 1) throw ConfigError(pre + "hi", "needs d-1 plane coordinates", line("hi"));
            for (int i = 0; i < d - 1; ++i)
                if (!(lo[i] < hi[i])) throw ConfigError(pre + "hi", "box needs lo < hi in every coordinate", line("hi"));
        } else {
            throw ConfigError(pre + "shape", "expected 'ball' or 'box', got '" + shape + "'", line("shape"));
        }
    } else {
        throw ConfigError(pre + "type", "expected 'caps' or 'plane', got '" + type + "'", line("type"));
    }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> n{"specfun-suite", "hitting", "strike", "duality", "reversal", "potential-suite"};
    return n;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> v;
        for (const auto& s : schema()) v.push_back(s.name);
        return v;
    }();
    return k;
}

std::string env_name(const std::string& key) {
    std::string s = "STABLECOND_";
    for (char c : key) s += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
}

const json& RunConfig::at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError(key, "not set");
    return *it;
}
double RunConfig::num(const std::string& key) const { return at(key).get<double>(); }
std::int64_t RunConfig::integer(const std::string& key) const { return at(key).get<std::int64_t>(); }
std::uint64_t RunConfig::u64(const std::string& key) const { return at(key).get<std::uint64_t>(); }
std::string RunConfig::str(const std::string& key) const { return at(key).get<std::string>(); }
std::vector<double> RunConfig::vec(const std::string& key) const { return at(key).get<std::vector<double>>(); }
std::vector<std::vector<double>> RunConfig::mat(const std::string& key) const {
    return at(key).get<std::vector<std::vector<double>>>();
}

void finalize_config(RunConfig& cfg) {
    auto line = [&](const std::string& k) {
        auto it = cfg.lines.find(k);
        return it == cfg.lines.end() ? 0 : it->second;
    };
    for (auto it = cfg.values.begin(); it != cfg.values.end(); ++it)
        if (!find_spec(it.key())) throw ConfigError(it.key(), "unknown key", line(it.key()));

    for (const char* req : {"experiment", "alpha", "d"})
        if (!cfg.values.contains(req)) throw ConfigError(req, "required key missing");

    json typed = json::object();
    for (const auto& spec : schema())
        if (cfg.values.contains(spec.name)) typed[spec.name] = coerce(cfg.values[spec.name], spec, line(spec.name));
    cfg.values = typed;

    std::string exp = cfg.str("experiment");
    bool known = false;
    for (const auto& n : experiment_names()) known = known || n == exp;
    if (!known) {
        std::string list;
        for (const auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("experiment", "unknown experiment '" + exp + "'; valid names: " + list, line("experiment"));
    }
    double alpha = cfg.num("alpha");
    if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("alpha", "must lie in (0, 2)", line("alpha"));
    std::int64_t d = cfg.integer("d");
    if (d < 2 || d > 16) throw ConfigError("d", "must lie in [2, 16]", line("d"));
    bool conditioned = exp == "hitting" || exp == "strike" || exp == "duality" || exp == "reversal";
    if (conditioned && alpha > 1.0)
        throw ConfigError("alpha", "experiment '" + exp + "' needs alpha <= 1 (transient conditioning)", line("alpha"));

    for (const auto& spec : schema())
        if (!cfg.values.contains(spec.name) && spec.def) cfg.values[spec.name] = spec.def(static_cast<int>(d));

    if (!cfg.values.contains("seed")) {
        cfg.values["seed"] = entropy_seed();
        cfg.seed_from_entropy = true;
    }

    if (cfg.integer("workers") < 1) throw ConfigError("workers", "must be >= 1", line("workers"));
    if (cfg.integer("n_paths") < 2) throw ConfigError("n_paths", "must be >= 2", line("n_paths"));
    if (cfg.integer("dump_paths") < 0) throw ConfigError("dump_paths", "must be >= 0", line("dump_paths"));
    if (cfg.str("out").empty()) throw ConfigError("out", "must not be empty", line("out"));

    auto eps = cfg.vec("eps_grid");
    if (eps.empty()) throw ConfigError("eps_grid", "must not be empty", line("eps_grid"));
    for (size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0 && eps[i] < 1.0)) throw ConfigError("eps_grid", "entries must lie in (0, 1)", line("eps_grid"));
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw ConfigError("eps_grid", "must be strictly decreasing", line("eps_grid"));
    }
    if (cfg.num("h") < 0.0) throw ConfigError("h", "must be >= 0 (0 selects h_factor * eps)", line("h"));
    if (!(cfg.num("h_factor") > 0.0)) throw ConfigError("h_factor", "must be positive", line("h_factor"));
    if (!(cfg.num("R_far") > 0.0)) throw ConfigError("R_far", "must be positive", line("R_far"));
    if (cfg.num("T") < 0.0) throw ConfigError("T", "must be >= 0", line("T"));
    if (cfg.num("T") == 0.0) cfg.values["T"] = 10.0 * std::pow(cfg.num("R_far"), alpha);
    if (static_cast<std::int64_t>(cfg.vec("x").size()) != d) throw ConfigError("x", "needs d coordinates", line("x"));

    validate_set(cfg, "set.", static_cast<int>(d));
    validate_set(cfg, "subset.", static_cast<int>(d));
    if (exp == "strike" && cfg.str("set.type") != cfg.str("subset.type"))
        throw ConfigError("subset.type", "must match set.type", line("subset.type"));
    if ((exp == "duality" || exp == "reversal") && cfg.str("set.type") != "caps")
        throw ConfigError("set.type", "experiment '" + exp + "' supports caps only", line("set.type"));

    for (const char* k : {"check.trend_tol", "check.envelope_tol", "check.abs_tol", "check.se_mult", "duality.f_radius",
                          "duality.g_radius", "duality.sigma", "reversal.R_exit", "reversal.h", "reversal.r_min",
                          "reversal.sigma", "reversal.agree_fraction"})
        if (!(cfg.num(k) > 0.0)) throw ConfigError(k, "must be positive", line(k));
    for (const char* k : {"duality.f_center", "duality.g_center"})
        if (static_cast<std::int64_t>(cfg.vec(k).size()) != d) throw ConfigError(k, "needs d coordinates", line(k));
    auto ts = cfg.vec("duality.t");
    if (ts.empty()) throw ConfigError("duality.t", "must not be empty", line("duality.t"));
    for (double t : ts)
        if (!(t > 0.0)) throw ConfigError("duality.t", "times must be positive", line("duality.t"));
    if (cfg.integer("reversal.bins") < 1) throw ConfigError("reversal.bins", "must be >= 1", line("reversal.bins"));
    if (cfg.integer("reversal.min_count") < 2) throw ConfigError("reversal.min_count", "must be >= 2", line("reversal.min_count"));
    if (!(cfg.num("reversal.r_min") < cfg.num("reversal.R_exit")))
        throw ConfigError("reversal.r_min", "must be below reversal.R_exit", line("reversal.r_min"));
}

RunConfig parse_config_text(const std::string& text, const EnvLookup& env) {
    size_t first = text.find_first_not_of(" \t\r\n");
    RunConfig cfg = (first != std::string::npos && text[first] == '{') ? parse_json_text(text) : parse_kv_text(text);
    for (const auto& key : config_keys()) {
        auto v = env ? env(env_name(key)) : std::nullopt;
        if (!v) continue;
        try {
            cfg.values[key] = parse_value(*v, key, 0);
        } catch (const ConfigError& e) {
            throw ConfigError("", std::string("from ") + env_name(key) + ": " + e.what());
        }
        cfg.lines[key] = -1;
    }
    try {
        finalize_config(cfg);
    } catch (const ConfigError& e) {
        if (e.line() != -1) throw;
        std::string msg = e.what(), prefix = "'" + e.key() + "': ";
        if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
        throw ConfigError(e.key(), "from " + env_name(e.key()) + ": " + msg);
    }
    return cfg;
}

RunConfig parse_config(const std::string& path, const EnvLookup& env) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), env);
}

}  // namespace stablecond
