#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "stablecond/config.hpp"
#include "stablecond/runner.hpp"

using namespace stablecond;

namespace {
EnvLookup no_env() {
    return [](const std::string&) { return std::nullopt; };
}
EnvLookup env_of(std::map<std::string, std::string> m) {
    return [m](const std::string& k) -> std::optional<std::string> {
        auto it = m.find(k);
        if (it == m.end()) return std::nullopt;
        return it->second;
    };
}
int error_line(const std::string& text) {
    try {
        parse_config_text(text, no_env());
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}
}  // namespace

TEST_SUITE("config") {
    TEST_CASE("minimal config gets every default") {
        auto c = parse_config_text("experiment = hitting\nalpha = 0.5\nd = 2\n", no_env());
        for (const auto& k : config_keys()) CHECK_MESSAGE(c.values.contains(k), k);
        CHECK(c.seed_from_entropy);
        CHECK(c.vec("x") == std::vector<double>{2, 0});
        CHECK(c.vec("eps_grid") == std::vector<double>{0.2, 0.1, 0.05, 0.025});
        CHECK(c.num("T") == doctest::Approx(10 * std::sqrt(50.0)));
        CHECK(c.integer("workers") == 1);
    }

    TEST_CASE("resolved config parses back to itself") {
        auto c = parse_config_text("experiment = strike\nalpha = 0.5\nd = 3\nseed = 18446744073709551615\n", no_env());
        auto again = parse_config_text(c.resolved().dump(2), no_env());
        CHECK(again.resolved() == c.resolved());
        CHECK(again.u64("seed") == 18446744073709551615ull);
        auto entropy = parse_config_text("experiment = hitting\nalpha = 0.5\nd = 2\n", no_env());
        auto entropy_again = parse_config_text(entropy.resolved().dump(), no_env());
        CHECK(entropy_again.u64("seed") == entropy.u64("seed"));
        CHECK_FALSE(entropy_again.seed_from_entropy);
    }

    TEST_CASE("sections, comments and bare strings") {
        auto c = parse_config_text(
            "# header\nexperiment = \"hitting\"  # trailing\nalpha = 1\nd = 3\n\n[set]\ntype = plane\nshape = box\n"
            "lo = [-1, -0.5]\nhi = [1, 0.5]\n",
            no_env());
        CHECK(c.str("set.type") == "plane");
        CHECK(c.vec("set.lo") == std::vector<double>{-1, -0.5});
        CHECK(c.num("alpha") == 1.0);
        auto S = build_target_set(c, "set.");
        CHECK(std::get<PlanarSet>(S).measure() == doctest::Approx(2.0));
    }

    TEST_CASE("errors carry the line number") {
        CHECK(error_line("experiment = hitting\nalpha = 0.5\nd = 2\neps_grid = [0.1, 0.2]\n") == 4);
        CHECK(error_line("experiment = hitting\nalpha = 0.5\nd = 2\n\nnope = 1\n") == 5);
        CHECK(error_line("experiment = hitting\nalpha = 0.5\nd = 2\nx = [1,\n") == 4);
        CHECK(error_line("experiment = hitting\nalpha = 0.5\nalpha = 0.6\nd = 2\n") == 3);
        CHECK(error_line("experiment = hitting\nalpha = 0.5\njunk\n") == 3);
        CHECK(error_line("experiment = hitting\nalpha = 2.5\nd = 2\n") == 2);
        CHECK(error_line("experiment = hitting\nalpha = 0.5\nd = 2\n[set]\nradii = [0.5, 0.5]\n") == 5);
        CHECK(error_line("{\n  \"experiment\": \"hitting\",\n  \"alpha\": 0.5,\n  \"d\": 2,\n  \"n_paths\": -4\n}\n") == 5);
    }

    TEST_CASE("unknown experiment lists the valid names") {
        try {
            parse_config_text("experiment = nope\nalpha = 0.5\nd = 2\n", no_env());
            FAIL("expected an error");
        } catch (const ConfigError& e) {
            std::string m = e.what();
            CHECK(e.key() == "experiment");
            for (const auto& n : experiment_names()) CHECK(m.find(n) != std::string::npos);
        }
    }

    TEST_CASE("missing required keys name the key") {
        try {
            parse_config_text("experiment = hitting\nd = 2\n", no_env());
            FAIL("expected an error");
        } catch (const ConfigError& e) {
            CHECK(e.key() == "alpha");
        }
    }

    TEST_CASE("environment overrides every key") {
        CHECK(env_name("set.radii") == "STABLECOND_SET_RADII");
        CHECK(env_name("R_far") == "STABLECOND_R_FAR");
        auto c = parse_config_text("experiment = hitting\nalpha = 0.5\nd = 2\nn_paths = 5\n",
                                   env_of({{"STABLECOND_N_PATHS", "77"},
                                           {"STABLECOND_SEED", "12"},
                                           {"STABLECOND_SET_RADII", "[1.0]"},
                                           {"STABLECOND_EXPERIMENT", "strike"}}));
        CHECK(c.integer("n_paths") == 77);
        CHECK(c.u64("seed") == 12);
        CHECK_FALSE(c.seed_from_entropy);
        CHECK(c.vec("set.radii") == std::vector<double>{1.0});
        CHECK(c.str("experiment") == "strike");
        CHECK_THROWS_AS(parse_config_text("experiment = hitting\nalpha = 0.5\nd = 2\n", env_of({{"STABLECOND_D", "two words"}})),
                        ConfigError);
    }

    TEST_CASE("experiment-specific validation") {
        CHECK_THROWS_AS(parse_config_text("experiment = hitting\nalpha = 1.5\nd = 2\n", no_env()), ConfigError);
        CHECK_NOTHROW(parse_config_text("experiment = specfun-suite\nalpha = 1.5\nd = 2\n", no_env()));
        CHECK_THROWS_AS(parse_config_text("experiment = hitting\nalpha = 0.5\nd = 2\nset.type = plane\n", no_env()),
                        ConfigError);
        CHECK_THROWS_AS(parse_config_text("experiment = duality\nalpha = 0.5\nd = 3\nset.type = plane\n", no_env()),
                        ConfigError);
    }

    TEST_CASE("run writes every artifact and CSV is reproducible") {
        namespace fs = std::filesystem;
        fs::path base = fs::temp_directory_path() / "stablecond_config_test";
        fs::remove_all(base);
        auto c = parse_config_text(
            "experiment = hitting\nalpha = 0.5\nd = 2\nseed = 99\nn_paths = 200\neps_grid = [0.2]\ndump_paths = 1\n",
            no_env());
        std::ostringstream log;
        int code = run_experiment(c, base / "a", log);
        CHECK((code == exit_ok || code == exit_check_failed));
        c.values["workers"] = 4;
        run_experiment(c, base / "b", log);
        for (const char* f : {"resolved-config.json", "report.json", "report.csv", "plot-data.txt", "paths/path-0000.bin"})
            CHECK_MESSAGE(fs::exists(base / "a" / f), f);
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        CHECK(slurp(base / "a" / "report.csv") == slurp(base / "b" / "report.csv"));
        auto reparsed = parse_config(base / "a" / "resolved-config.json", no_env());
        CHECK(reparsed.u64("seed") == 99);
        fs::remove_all(base);
    }
}
