#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msibim/config.hpp"
#include "msibim/dynamics.hpp"

namespace py = pybind11;
using namespace msibim;

namespace {

Grid grid_from_array(const py::array_t<double>& arr, py::tuple origin, double h) {
    int dim = static_cast<int>(arr.ndim());
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("field must be a 2D or 3D array");
    std::array<int, 3> ext = {1, 1, 1};
    for (int a = 0; a < dim; ++a) ext[a] = static_cast<int>(arr.shape(a));
    Vec3 o{origin[0].cast<double>(), origin[1].cast<double>(),
           dim == 3 ? origin[2].cast<double>() : 0.0};
    return Grid(dim, ext, o, h);
}

ScalarField field_from_array(const py::array_t<double>& arr, py::tuple origin,
                             double h) {
    Grid g = grid_from_array(arr, origin, h);
    ScalarField f(g);
    auto buf = arr.unchecked();
    std::size_t idx = 0;
    if (arr.ndim() == 2) {
        for (py::ssize_t i = 0; i < arr.shape(0); ++i)
            for (py::ssize_t j = 0; j < arr.shape(1); ++j) f.values[idx++] = buf(i, j);
    } else {
        auto b3 = arr.unchecked<3>();
        for (py::ssize_t i = 0; i < arr.shape(0); ++i)
            for (py::ssize_t j = 0; j < arr.shape(1); ++j)
                for (py::ssize_t k = 0; k < arr.shape(2); ++k)
                    f.values[idx++] = b3(i, j, k);
    }
    return f;
}

py::array_t<double> array_from_field(const ScalarField& f) {
    const Grid& g = f.grid;
    std::vector<py::ssize_t> shape;
    shape.push_back(g.n[0]);
    shape.push_back(g.n[1]);
    if (g.dim == 3) shape.push_back(g.n[2]);
    py::array_t<double> out(shape);
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Implicit boundary integral simulation of Mullins-Sekerka dynamics";

    py::register_exception<SimError>(m, "SimulationError");

    m.def(
        "redistance",
        [](py::array_t<double> phi, py::tuple origin, double h) {
            return array_from_field(redistance(field_from_array(phi, origin, h)));
        },
        py::arg("phi"), py::arg("origin"), py::arg("h"),
        "Signed distance to the zero level set of phi (sign layout preserved).");

    m.def(
        "narrow_band",
        [](py::array_t<double> d, py::tuple origin, double h, double eps) {
            NarrowBand band = build_band(field_from_array(d, origin, h), eps);
            py::array_t<std::int64_t> out(std::vector<py::ssize_t>{
                static_cast<py::ssize_t>(band.size())});
            auto buf = out.mutable_unchecked<1>();
            for (std::size_t p = 0; p < band.size(); ++p)
                buf(p) = static_cast<std::int64_t>(band.indices[p]);
            return out;
        },
        py::arg("d"), py::arg("origin"), py::arg("h"), py::arg("eps"),
        "Flat indices of the grid points with |d| < eps.");

    m.def(
        "surface_quadrature",
        [](py::array_t<double> d, py::tuple origin, double h, double eps) {
            ScalarField f = field_from_array(d, origin, h);
            DistanceBundle b = build_bundle(f, eps);
            py::array_t<std::int64_t> idx(
                std::vector<py::ssize_t>{static_cast<py::ssize_t>(b.size())});
            py::array_t<double> w(
                std::vector<py::ssize_t>{static_cast<py::ssize_t>(b.size())});
            auto bi = idx.mutable_unchecked<1>();
            auto bw = w.mutable_unchecked<1>();
            for (std::size_t p = 0; p < b.size(); ++p) {
                bi(p) = static_cast<std::int64_t>(b.grid_index(p));
                bw(p) = b.weight[p];
            }
            return py::make_tuple(idx, w);
        },
        py::arg("d"), py::arg("origin"), py::arg("h"), py::arg("eps"),
        "Band indices and tube quadrature weights: sum(w * f[idx]) integrates "
        "f over the interface.");

    m.def(
        "label_components",
        [](py::array_t<double> d, py::tuple origin, double h) {
            TopologyReport rep = label_components(field_from_array(d, origin, h));
            std::vector<py::ssize_t> shape;
            shape.push_back(d.shape(0));
            shape.push_back(d.shape(1));
            if (d.ndim() == 3) shape.push_back(d.shape(2));
            py::array_t<std::int32_t> out(shape);
            auto* data = out.mutable_data();
            for (std::size_t i = 0; i < rep.labels.size(); ++i)
                data[i] = rep.labels[i];
            return out;
        },
        py::arg("d"), py::arg("origin"), py::arg("h"),
        "Signed component labels (0 = unbounded, >0 solid, <0 bounded liquid).");

    m.def(
        "measure",
        [](py::array_t<double> d, py::tuple origin, double h, double eps) {
            ScalarField f = field_from_array(d, origin, h);
            DistanceBundle b = build_bundle(f, eps);
            py::dict out;
            out["volume"] = measure_volume(f);
            out["area"] = measure_area(b);
            return out;
        },
        py::arg("d"), py::arg("origin"), py::arg("h"), py::arg("eps"),
        "Solid volume (smoothed Heaviside) and interface measure (tube "
        "quadrature).");

    py::class_<StepReport>(m, "StepReport")
        .def_readonly("dt", &StepReport::dt)
        .def_readonly("t", &StepReport::t)
        .def_readonly("components", &StepReport::components)
        .def_readonly("pieces", &StepReport::pieces)
        .def_readonly("v_min", &StepReport::v_min)
        .def_readonly("v_max", &StepReport::v_max)
        .def_readonly("max_residual", &StepReport::max_residual);

    py::class_<SimState>(m, "SimState")
        .def_property_readonly("t", [](const SimState& s) { return s.t; })
        .def_property_readonly("step_index",
                               [](const SimState& s) { return s.step_index; })
        .def_property_readonly(
            "d", [](const SimState& s) { return array_from_field(s.d); });

    m.def(
        "make_state",
        [](py::array_t<double> d, py::tuple origin, double h) {
            SimState s;
            s.d = redistance(field_from_array(d, origin, h));
            return s;
        },
        py::arg("phi"), py::arg("origin"), py::arg("h"),
        "Simulation state from an initial level function (redistanced).");

    m.def(
        "step",
        [](SimState& state, double eps_over_h, double v_clamp, double u_inf,
           double max_dt) {
            DynamicsConfig cfg;
            cfg.eps_over_h = eps_over_h;
            cfg.v_clamp = v_clamp;
            cfg.u_inf = u_inf;
            cfg.max_dt = max_dt;
            return step(state, cfg);
        },
        py::arg("state"), py::arg("eps_over_h") = 6.0, py::arg("v_clamp") = 10.0,
        py::arg("u_inf") = 0.0, py::arg("max_dt") = 1e9,
        "Advance one coupled Laplace/advection/redistance cycle.");

    m.def("preset_names", &preset_names, "Named experiment presets.");
    m.def(
        "run_preset",
        [](const std::string& name, const std::string& out_dir, double h,
           double final_time, int max_steps) {
            RunConfig cfg = preset_config(name);
            cfg.out_dir = out_dir;
            if (h > 0) cfg.h = h;
            if (final_time > 0) cfg.final_time = final_time;
            if (max_steps > 0) cfg.max_steps = max_steps;
            RunResult res = run(cfg);
            py::dict out;
            out["exit_code"] = res.exit_code;
            out["vanished"] = res.vanished;
            out["steps"] = res.state.step_index;
            out["t"] = res.state.t;
            out["series"] = res.series_path;
            if (!res.error.empty()) out["error"] = res.error;
            return out;
        },
        py::arg("name"), py::arg("out_dir"), py::arg("h") = 0.0,
        py::arg("final_time") = 0.0, py::arg("max_steps") = 0,
        "Run a named experiment preset; writes the diagnostics series and "
        "snapshots under out_dir.");
}
