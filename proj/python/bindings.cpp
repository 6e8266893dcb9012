#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qasched/cli.hpp"
#include "qasched/embed.hpp"
#include "qasched/errors.hpp"
#include "qasched/harness.hpp"
#include "qasched/metrics.hpp"
#include "qasched/schedule.hpp"
#include "qasched/tsp_qubo.hpp"

namespace py = pybind11;
using namespace qasched;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Annealing-schedule optimization for TSP QUBOs";

    py::register_exception<UnsupportedSize>(m, "UnsupportedSize", PyExc_ValueError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
    py::register_exception<ResourceLimit>(m, "ResourceLimit", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("generate_instance", [](int n, std::uint64_t seed) { return instance_to_json(generate_instance(n, seed)); },
          py::arg("n"), py::arg("seed"), "Instance as a JSON string.");

    m.def(
        "build_qubo",
        [](const std::string& instance_json, std::optional<double> penalty) {
            const TspInstance inst = instance_from_json(instance_json);
            const Qubo q = penalty ? build_qubo(inst, *penalty) : build_qubo(inst);
            return py::make_tuple(Eigen::MatrixXd(q.coeffs), q.offset, q.penalty);
        },
        py::arg("instance_json"), py::arg("penalty") = py::none(),
        "(upper-triangular coefficients, offset, penalty).");

    m.def(
        "qubo_energy",
        [](const std::string& instance_json, const std::vector<std::uint8_t>& x) {
            return qubo_energy(build_qubo(instance_from_json(instance_json)), x);
        },
        py::arg("instance_json"), py::arg("x"));

    m.def(
        "exact_solve",
        [](const std::string& instance_json) {
            const auto sol = exact_solve(instance_from_json(instance_json));
            return py::make_tuple(sol.tour, sol.length);
        },
        py::arg("instance_json"));

    m.def(
        "render_grid",
        [](double T, const std::vector<double>& thetas, int points, double resolution, bool monotone) {
            const auto grid = render_grid(DesignVector{T, thetas}, GridOptions{points, resolution, monotone});
            std::vector<std::pair<double, double>> out;
            for (const auto& p : grid.points) out.emplace_back(p.t, p.s);
            return out;
        },
        py::arg("T"), py::arg("thetas"), py::arg("points") = 12, py::arg("resolution") = 1e-4,
        py::arg("monotone") = false);

    m.def("gap_percent", &gap_percent, py::arg("e_method"), py::arg("e_ref"));
    m.def("tts", &tts, py::arg("t_f"), py::arg("p"), py::arg("q") = 0.99);
    m.def("embed_stats_csv", &embed_stats_csv, py::arg("n_values"));
    m.def("default_config", [] { return config_to_json(ExperimentConfig{}); });
    m.def("desk_config", [] { return config_to_json(desk_profile({})); });

    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::string& output_dir) {
            ExperimentConfig cfg = config_from_json(config_json);
            cfg.output_dir = output_dir;
            cfg.write_files = !output_dir.empty();
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg);
            }
            std::vector<std::string> reports;
            for (const auto& r : res.reports) reports.push_back(report_to_json(r));
            return py::make_tuple(reports, aggregate_csv(res.summary), res.files);
        },
        py::arg("config_json"), py::arg("output_dir") = "",
        "Files are written only when output_dir is given. Returns (report JSON strings, summary CSV, written files).");

    m.def(
        "cli_main",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli_main(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "(exit code, stdout, stderr).");
}
