// Python bindings for the main simulator operations: scenario handling,
// channel evaluation, config-pair optimization, code books, sensing banks and
// communication episodes. Shapes are passed as their lower-case names and RIS
// configurations as 25-bit integers.

#include <memory>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "risim/artifacts.hpp"
#include "risim/bessel.hpp"
#include "risim/cli.hpp"
#include "risim/errors.hpp"
#include "risim/inference.hpp"
#include "risim/optimizer.hpp"
#include "risim/physics.hpp"
#include "risim/pipeline.hpp"
#include "risim/scenario.hpp"
#include "risim/version.hpp"

namespace py = pybind11;
using namespace risim;

namespace {

Vec2 to_vec2(std::pair<double, double> p) { return {p.first, p.second}; }

PerturberState make_state(double p, const std::string& shape) {
    return {p, shape_from_name(shape)};
}

RISConfig make_config(std::uint32_t bits) {
    if ((bits & ~RISConfig::kMask) != 0)
        throw std::invalid_argument("config uses more than 25 bits");
    return {bits};
}

py::dict pair_to_dict(const ConfigPair& pair) {
    py::dict d;
    d["c0"] = pair.c0.bits;
    d["c1"] = pair.c1.bits;
    d["r0"] = pair.r0;
    d["r1"] = pair.r1;
    d["tau"] = pair.tau;
    return d;
}

ConfigPair pair_from_dict(const py::dict& d) {
    ConfigPair pair;
    pair.c0 = make_config(d["c0"].cast<std::uint32_t>());
    pair.c1 = make_config(d["c1"].cast<std::uint32_t>());
    pair.r0 = d["r0"].cast<double>();
    pair.r1 = d["r1"].cast<double>();
    pair.tau = d["tau"].cast<double>();
    return pair;
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "self_adaptive") return Strategy::SelfAdaptive;
    if (name == "perfect_context") return Strategy::PerfectContext;
    if (name == "context_ignorant") return Strategy::ContextIgnorant;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(risim, m) {
    m.doc() = "Coupled-dipole RIS simulator with context-adaptive BASK signalling";
    m.attr("__version__") = kVersion;

    py::register_exception<ValidationError>(m, "ScenarioValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "SimulationNumericalError", PyExc_RuntimeError);

    // --- special functions and kernels
    m.def("bessel_j0", &bessel_j0, py::arg("x"));
    m.def("bessel_y0", &bessel_y0, py::arg("x"));
    m.def("hankel0_second_kind", &hankel0_second_kind, py::arg("x"));
    m.def(
        "lorentzian_polarizability",
        [](double f, double f0, double chi, double gamma) {
            return lorentzian_polarizability(f, {f0, chi, gamma});
        },
        py::arg("f"), py::arg("f0") = 1.0, py::arg("chi") = 0.1, py::arg("gamma") = 1.0);
    m.def(
        "greens_2d",
        [](double k, std::pair<double, double> r1, std::pair<double, double> r2) {
            return greens_2d(k, to_vec2(r1), to_vec2(r2));
        },
        py::arg("k"), py::arg("r1"), py::arg("r2"));

    // --- scenarios
    py::class_<ScenarioSpec>(m, "Scenario")
        .def_static("default", &default_scenario_spec)
        .def_static("open_space", &open_scenario_spec)
        .def_static("load", &load_scenario, py::arg("path"))
        .def_static("from_json", &scenario_from_json_text, py::arg("text"))
        .def("to_json", &scenario_to_json_text)
        .def("save", &save_scenario, py::arg("path"))
        .def("validate", &validate_scenario, py::arg("strict") = true)
        .def("hash", &scenario_hash)
        .def("trajectory_length",
             [](const ScenarioSpec& spec) { return Trajectory{spec.trajectory}.length(); })
        .def("trajectory_point",
             [](const ScenarioSpec& spec, double p) {
                 Vec2 v = Trajectory{spec.trajectory}.point(p);
                 return std::make_pair(v.x, v.y);
             })
        .def("__repr__", [](const ScenarioSpec& spec) {
            return "<risim.Scenario hash=" + std::to_string(scenario_hash(spec)) + ">";
        });

    m.def(
        "object_footprint",
        [](const std::string& shape, std::pair<double, double> center) {
            std::vector<std::pair<double, double>> out;
            for (Vec2 v : object_footprint(shape_from_name(shape), to_vec2(center)))
                out.emplace_back(v.x, v.y);
            return out;
        },
        py::arg("shape"), py::arg("center"));

    // --- channels
    m.def(
        "channel_matrix",
        [](const ScenarioSpec& spec, std::uint32_t config, double p, const std::string& shape) {
            return channel_matrix(spec, make_config(config), make_state(p, shape)).h;
        },
        py::arg("scenario"), py::arg("config"), py::arg("p"), py::arg("shape"),
        "Rows: UE then the aux receivers; single TX column.");

    py::class_<ChannelWorkspace>(m, "ChannelWorkspace")
        .def(py::init([](const ScenarioSpec& spec, double p, const std::string& shape) {
                 return std::make_unique<ChannelWorkspace>(
                     compile_scenario(spec, make_state(p, shape)));
             }),
             py::arg("scenario"), py::arg("p") = 0.5, py::arg("shape") = "cross")
        .def(
            "evaluate",
            [](const ChannelWorkspace& ws, std::uint32_t config) {
                ChannelSample s = ws.evaluate(make_config(config));
                return std::make_pair(s.ue, s.aux);
            },
            py::arg("config"))
        .def(
            "evaluate_full",
            [](const ChannelWorkspace& ws, std::uint32_t config) {
                ChannelSample s = ws.evaluate_full(make_config(config));
                return std::make_pair(s.ue, s.aux);
            },
            py::arg("config"))
        .def(
            "rssi",
            [](const ChannelWorkspace& ws, std::uint32_t config) {
                return ws.evaluate(make_config(config)).rssi();
            },
            py::arg("config"));

    py::class_<MovingObjectChannel>(m, "MovingObjectChannel")
        .def(py::init<const ScenarioSpec&>(), py::arg("scenario"))
        .def(
            "evaluate",
            [](const MovingObjectChannel& ch, double p, const std::string& shape,
               std::uint32_t config) {
                ChannelSample s = ch.evaluate(make_state(p, shape), make_config(config));
                return std::make_pair(s.ue, s.aux);
            },
            py::arg("p"), py::arg("shape"), py::arg("config"));

    m.def(
        "nonlinearity_index",
        [](const ScenarioSpec& spec, int n_samples, std::uint64_t seed, double p,
           const std::string& shape) {
            return nonlinearity_index(compile_scenario(spec, make_state(p, shape)), n_samples,
                                      seed);
        },
        py::arg("scenario"), py::arg("n_samples") = 300, py::arg("seed") = 1, py::arg("p") = 0.5,
        py::arg("shape") = "cross");

    m.def("reference_power", &reference_power, py::arg("scenario"), py::arg("n_states") = 16,
          py::arg("n_configs_per_state") = 32, py::arg("seed") = 1);

    // --- optimization and code books
    m.def(
        "optimize_pair",
        [](const ScenarioSpec& spec, double p, const std::string& shape, std::uint64_t seed,
           int pool) {
            ChannelWorkspace ws(compile_scenario(spec, make_state(p, shape)));
            return pair_to_dict(optimize_pair(ws, seed, pool));
        },
        py::arg("scenario"), py::arg("p"), py::arg("shape"), py::arg("seed") = 1,
        py::arg("pool") = 100);

    py::class_<CodeBook>(m, "CodeBook")
        .def_readonly("resolution", &CodeBook::resolution)
        .def_readonly("bins", &CodeBook::bins)
        .def_readonly("trajectory_length", &CodeBook::trajectory_length)
        .def("__len__", [](const CodeBook& b) { return b.entries.size(); })
        .def(
            "lookup",
            [](const CodeBook& b, double p, const std::string& shape) {
                const CodeBookEntry& e = b.lookup(p, shape_from_name(shape));
                py::dict d = pair_to_dict(e.pair);
                d["bin"] = e.bin;
                d["shape"] = shape_name(e.shape);
                d["p_center"] = e.p_center;
                return d;
            },
            py::arg("p"), py::arg("shape"));

    m.def("build_codebook", &build_codebook, py::arg("scenario"), py::arg("resolution"),
          py::arg("seed") = 1, py::arg("pool") = 100);
    m.def(
        "load_codebook", [](const std::string& path) { return load_codebook(path, nullptr); },
        py::arg("path"));

    // --- sensing bank and episodes
    py::class_<InferenceBank>(m, "InferenceBank")
        .def_readonly("p_ref", &InferenceBank::p_ref)
        .def_property_readonly("series_length",
                               [](const InferenceBank& b) { return b.mode_a_series.size(); })
        .def_property_readonly("n_mode_b_configs",
                               [](const InferenceBank& b) { return b.mode_b.size(); });
    m.def(
        "load_bank", [](const std::string& path) { return load_bank(path, nullptr); },
        py::arg("path"));

    m.def(
        "run_episode",
        [](const ScenarioSpec& spec, const CodeBook& book, const InferenceBank& bank,
           const py::dict& ignorant_pair, int n_symbols, double snr_db,
           const std::string& strategy, std::uint64_t seed, double walk_step,
           double shape_change_prob) {
            MovingObjectChannel channel(spec);
            EpisodeSpec es;
            es.n_symbols = n_symbols;
            es.snr_db = snr_db;
            es.strategy = strategy_from_name(strategy);
            es.seed = seed;
            es.walk_step = walk_step;
            es.shape_change_prob = shape_change_prob;
            EpisodeMetrics metrics =
                run_episode(channel, book, bank, pair_from_dict(ignorant_pair), es);
            py::dict d;
            d["n_bits"] = metrics.n_bits;
            d["n_bit_errors"] = metrics.n_bit_errors;
            d["ber"] = metrics.ber;
            d["shape_accuracy"] = metrics.shape_accuracy;
            d["position_error"] = metrics.position_error;
            d["level0_mean"] = metrics.level0_mean;
            d["level1_mean"] = metrics.level1_mean;
            return d;
        },
        py::arg("scenario"), py::arg("codebook"), py::arg("bank"), py::arg("ignorant_pair"),
        py::arg("n_symbols") = 200, py::arg("snr_db") = 20.0,
        py::arg("strategy") = "self_adaptive", py::arg("seed") = 1, py::arg("walk_step") = 0.01,
        py::arg("shape_change_prob") = 0.01);

    // --- command line, for end-to-end smoke tests
    m.def(
        "run_cli", [](const std::vector<std::string>& args) { return run_cli(args); },
        py::arg("args"), "Invoke the command line interface in-process; returns the exit code.");
}
