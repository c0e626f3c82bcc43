#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "parastep/cli.hpp"
#include "parastep/config.hpp"
#include "parastep/harness.hpp"
#include "parastep/mesh_io.hpp"
#include "parastep/nonlinearity.hpp"

namespace py = pybind11;
using namespace parastep;

namespace {

ProblemConfig config_from(const std::string& path, const std::vector<double>& h_list) {
    ProblemConfig cfg = path.empty() ? ProblemConfig{} : load_problem_config(path);
    if (!h_list.empty()) cfg.h_list = h_list;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_parastep, m) {
    m.doc() = "Monotone schemes and diagnostics for u_t = F(D^2 u).";

    py::register_exception<Error>(m, "ParastepError", PyExc_RuntimeError);

    m.def("pucci_plus", &pucci_plus, py::arg("X"), py::arg("lam"), py::arg("Lam"));
    m.def("pucci_minus", &pucci_minus, py::arg("X"), py::arg("lam"), py::arg("Lam"));

    m.def(
        "exact_solution",
        [](const std::string& id, std::vector<double> x, double t, double lam, double Lam) {
            return exact_solution(id, ParabolicPoint{std::move(x), t}, lam, Lam);
        },
        py::arg("id"), py::arg("x"), py::arg("t"), py::arg("lam") = 1.0, py::arg("Lam") = 2.0);
    m.def("exact_solution_ids", &exact_solution_ids);

    m.def(
        "fit_rate",
        [](const std::vector<double>& h, const std::vector<double>& e) { return fit_rate(h, e); }, py::arg("h"),
        py::arg("errors"));

    m.def(
        "_converge_json",
        [](const std::string& config, const std::vector<double>& h_list, std::uint64_t seed, int threads) {
            ConvergenceReport r;
            {
                py::gil_scoped_release release;
                r = run_convergence_study(config_from(config, h_list), seed, threads);
            }
            std::ostringstream csv;
            write_convergence_csv(csv, r);
            nlohmann::json j = to_json(r);
            j["csv"] = csv.str();
            return j.dump();
        },
        py::arg("config") = "", py::arg("h_list") = std::vector<double>{}, py::arg("seed") = 202,
        py::arg("threads") = 1);

    m.def(
        "_solve",
        [](const std::string& config, double h) {
            const ProblemConfig cfg = config_from(config, {});
            const Problem p = make_problem(cfg, h > 0 ? h : cfg.h_list.back());
            auto [u, rep] = solve(p.scheme, p.spec, p.boundary, cfg.solver);
            std::vector<py::ssize_t> shape{p.spec.time_levels()};
            for (std::size_t i = 0; i < p.spec.dim(); ++i) shape.push_back(p.spec.cells(i) + 1);
            py::array_t<double> values(shape);
            std::copy(u.values().begin(), u.values().end(), values.mutable_data());
            py::dict info;
            info["h"] = p.spec.h();
            info["tau"] = p.spec.tau();
            info["converged"] = rep.converged;
            info["iterations"] = rep.total_iterations();
            info["max_residual"] = rep.max_residual;
            info["lower"] = p.spec.domain().lower;
            info["upper"] = p.spec.domain().upper;
            return py::make_tuple(values, info);
        },
        py::arg("config") = "", py::arg("h") = 0.0);

    m.def(
        "cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "parastep");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
