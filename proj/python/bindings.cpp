#include <fstream>
#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stablecond/config.hpp"
#include "stablecond/errors.hpp"
#include "stablecond/potential.hpp"
#include "stablecond/runner.hpp"
#include "stablecond/simulate.hpp"
#include "stablecond/specfun.hpp"

namespace py = pybind11;
using namespace stablecond;

namespace {

CapSet make_caps(int d, const std::vector<std::vector<double>>& centers, const std::vector<double>& radii) {
    if (centers.size() != radii.size()) throw ParameterError("centers and radii differ in length");
    std::vector<Cap> caps;
    for (size_t i = 0; i < centers.size(); ++i) caps.push_back({Direction(centers[i]), radii[i]});
    return CapSet(d, std::move(caps));
}

py::object to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "isotropic stable processes: special functions, harmonic functions, experiment runner";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("ln_gamma", &specfun::ln_gamma, py::arg("x"));
    m.def("digamma", &specfun::digamma, py::arg("x"));
    m.def("beta", &specfun::beta, py::arg("a"), py::arg("b"));
    m.def("hyp2f1", py::overload_cast<double, double, double, double>(&specfun::gauss_2f1), py::arg("a"), py::arg("b"),
          py::arg("c"), py::arg("z"));
    m.def("clausen2", &specfun::clausen2, py::arg("theta"));
    m.def("lobachevsky", &specfun::lobachevsky, py::arg("x"));

    m.def(
        "constants",
        [](double alpha, int d) {
            ConstantTable t({alpha, d});
            py::dict out;
            out["potential_const"] = t.potential_const();
            auto put = [&](const char* k, auto f) {
                try {
                    out[k] = f();
                } catch (const std::exception&) {
                }  // not defined for this (alpha, d)
            };
            put("c", [&] { return t.c_alpha_d(); });
            put("A_sphere", [&] { return t.A_sphere(); });
            put("k", [&] { return t.k_alpha_d(); });
            put("A_plane", [&] { return t.A_plane(); });
            put("c_1", [&] { return t.c_1_d(); });
            put("A_sphere_1", [&] { return t.A_sphere_1(); });
            put("A_plane_1", [&] { return t.A_plane_1(); });
            put("c_unit", [&] { return t.c_unit(); });
            put("A_sphere_unit", [&] { return t.A_sphere_unit(); });
            put("A_plane_unit", [&] { return t.A_plane_unit(); });
            return out;
        },
        py::arg("alpha"), py::arg("d"), "constant table; keys missing where a constant is undefined");

    m.def(
        "harmonic_H",
        [](std::vector<std::vector<double>> centers, std::vector<double> radii, std::vector<double> x, double alpha) {
            int d = static_cast<int>(x.size());
            return harmonic_H(make_caps(d, centers, radii), x, {alpha, d});
        },
        py::arg("centers"), py::arg("radii"), py::arg("x"), py::arg("alpha"),
        "integral of |x - y|^(alpha - d) over the union of caps, normalized surface measure");
    m.def(
        "harmonic_M",
        [](std::vector<double> normal, std::vector<double> center, double radius, std::vector<double> x, double alpha) {
            PlanarSet D(Direction(normal), BallShape{center, radius});
            return harmonic_M(D, x, {alpha, static_cast<int>(x.size())});
        },
        py::arg("normal"), py::arg("center"), py::arg("radius"), py::arg("x"), py::arg("alpha"),
        "same for a ball in the hyperplane normal to `normal`");
    m.def("interval_potential", &interval_potential, py::arg("x"), py::arg("alpha"));

    m.def(
        "sample_increments",
        [](double alpha, int d, double h, size_t n, std::uint64_t seed) {
            StableParams p{alpha, d};
            p.validate();
            py::array_t<double> out({n, static_cast<size_t>(d)});
            auto buf = out.mutable_unchecked<2>();
            Rng rng(seed, 0);
            std::vector<double> dx(d);
            for (size_t i = 0; i < n; ++i) {
                sample_increment(p, h, rng, dx);
                for (int k = 0; k < d; ++k) buf(i, k) = dx[k];
            }
            return out;
        },
        py::arg("alpha"), py::arg("d"), py::arg("h"), py::arg("n"), py::arg("seed"));

    m.def(
        "read_path_dump",
        [](const std::filesystem::path& path) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw ParameterError("cannot open " + path.string());
            PathGrid g = read_path_dump(in);
            py::array_t<double> pos({g.size(), static_cast<size_t>(g.d)});
            std::copy(g.positions.begin(), g.positions.end(), pos.mutable_data());
            py::dict out;
            out["alpha"] = g.alpha;
            out["d"] = g.d;
            out["h"] = g.h;
            out["seed"] = g.seed;
            out["positions"] = pos;
            return out;
        },
        py::arg("path"));

    m.def(
        "parse_config",
        [](const std::filesystem::path& path) { return to_py(parse_config(path.string()).resolved()); },
        py::arg("path"), "resolved configuration (defaults filled, environment applied) as a dict");
    m.def(
        "run",
        [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<unsigned> workers,
           std::optional<std::uint64_t> seed) {
            RunConfig cfg = parse_config(config.string());
            if (workers) cfg.values["workers"] = *workers;
            if (seed) cfg.values["seed"] = *seed;
            finalize_config(cfg);
            std::ostringstream log;
            int code;
            {
                py::gil_scoped_release release;
                code = run_experiment(cfg, out, log);
            }
            return code;
        },
        py::arg("config"), py::arg("out"), py::arg("workers") = py::none(), py::arg("seed") = py::none(),
        "run a config; returns 0 (checks passed) or 2 (a theory check failed)");
}
