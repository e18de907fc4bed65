// Python bindings. Fields cross the boundary as numpy arrays in the grid's
// shape (row-major, axis 0 first); vector fields gain a leading component axis.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <numbers>

#include "rqlab/config.hpp"
#include "rqlab/experiment.hpp"
#include "rqlab/kg.hpp"
#include "rqlab/limits.hpp"
#include "rqlab/madelung.hpp"

namespace py = pybind11;
namespace sp = rqlab::spectral;
namespace kg = rqlab::kg;
namespace md = rqlab::madelung;
using rqlab::ComplexField;
using rqlab::GridPtr;
using rqlab::Params;
using rqlab::RealField;
using rqlab::VectorField;

namespace {

// pybind11 holders cannot be shared_ptr<const T>; GridPtr converts implicitly.
using Grid = std::shared_ptr<sp::SpectralGrid>;

std::vector<py::ssize_t> shape_of(const GridPtr& g) { return {g->shape().begin(), g->shape().end()}; }

template <class T>
py::array_t<T> to_numpy(const sp::Field<T>& f) {
  py::array_t<T> out(shape_of(f.grid()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_numpy(const VectorField& v) {
  auto shape = shape_of(v.grid());
  shape.insert(shape.begin(), v.dim());
  py::array_t<double> out(shape);
  for (int a = 0; a < v.dim(); ++a)
    std::copy(v[a].values().begin(), v[a].values().end(), out.mutable_data() + a * v.grid()->size());
  return out;
}

template <class T>
sp::Field<T> from_numpy(const GridPtr& g, const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (static_cast<std::size_t>(a.size()) != g->size())
    throw rqlab::PreconditionError("array has " + std::to_string(a.size()) + " samples, grid has " +
                                   std::to_string(g->size()));
  sp::Field<T> f(g);
  std::copy(a.data(), a.data() + a.size(), f.values().begin());
  return f;
}

kg::Branch parse_branch(const std::string& b) {
  if (b == "plus") return kg::Branch::plus;
  if (b == "minus") return kg::Branch::minus;
  throw rqlab::ValidationError("branch must be 'plus' or 'minus', got '" + b + "'");
}

py::dict hydro_dict(const md::HydroState& h) {
  py::dict d;
  d["n"] = to_numpy(h.n);
  d["n_t"] = to_numpy(h.n_t);
  d["S_periodic"] = to_numpy(h.S_periodic);
  d["winding"] = h.winding;
  d["grad_S"] = to_numpy(h.grad_S);
  d["S_t"] = to_numpy(h.S_t);
  d["V"] = to_numpy(h.V);
  d["time"] = h.time;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rqlab, m) {
  m.doc() = "Spectral Klein-Gordon-Poisson and quantum hydrodynamics solvers";
  m.attr("__version__") = RQLAB_VERSION;

  static const py::handle error = py::exception<rqlab::Error>(m, "RqlabError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const rqlab::Error& e) {
      py::object inst = error(e.what());
      inst.attr("kind") = e.kind();
      inst.attr("exit_code") = rqlab::cli::exit_code_for(e);
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<Params>(m, "Params")
      .def(py::init([](double epsilon, double upsilon, double b0, double nbar) {
             Params p;
             p.epsilon = epsilon;
             p.upsilon = upsilon;
             p.b0 = b0;
             p.nbar = nbar;
             return p;
           }),
           py::arg("epsilon") = 1.0, py::arg("upsilon") = 1.0, py::arg("b0") = 1.0, py::arg("nbar") = 1.0)
      .def_readwrite("epsilon", &Params::epsilon)
      .def_readwrite("upsilon", &Params::upsilon)
      .def_readwrite("b0", &Params::b0)
      .def_readwrite("nbar", &Params::nbar)
      .def_readwrite("n_floor", &Params::n_floor)
      .def_readwrite("compat_tol", &Params::compat_tol)
      .def_readwrite("delta", &Params::delta)
      .def("validate", &Params::validate)
      .def("__repr__", [](const Params& p) {
        return "Params(epsilon=" + rqlab::format_number(p.epsilon) + ", upsilon=" + rqlab::format_number(p.upsilon) +
               ", b0=" + rqlab::format_number(p.b0) + ", nbar=" + rqlab::format_number(p.nbar) + ")";
      });

  py::class_<sp::SpectralGrid, Grid>(m, "Grid")
      .def(py::init([](std::vector<std::size_t> points, std::optional<std::vector<double>> extent) {
             auto L = extent.value_or(std::vector<double>(points.size(), 2 * std::numbers::pi));
             return std::make_shared<sp::SpectralGrid>(std::move(points), std::move(L));
           }),
           py::arg("points"), py::arg("extent") = py::none())
      .def_property_readonly("dim", &sp::SpectralGrid::dim)
      .def_property_readonly("shape", &sp::SpectralGrid::shape)
      .def_property_readonly("extent", &sp::SpectralGrid::extents)
      .def("coordinates", [](const Grid& g, int axis) {
        if (axis < 0 || axis >= g->dim()) throw rqlab::DomainError("axis out of range");
        return to_numpy(RealField::sample(g, [axis](const sp::Point& x) { return x[axis]; }));
      });

  m.def("gradient", [](const Grid& g, py::array_t<double> f) { return to_numpy(sp::gradient(from_numpy<double>(g, f))); });
  m.def("laplacian", [](const Grid& g, py::array_t<double> f) { return to_numpy(sp::laplacian(from_numpy<double>(g, f))); });
  m.def("dealias", [](const Grid& g, py::array_t<double> f) { return to_numpy(sp::dealias(from_numpy<double>(g, f))); });
  m.def(
      "solve_poisson",
      [](const Grid& g, py::array_t<double> rhs, double compat_tol) {
        return to_numpy(sp::solve_poisson(from_numpy<double>(g, rhs), compat_tol).field);
      },
      py::arg("grid"), py::arg("rhs"), py::arg("compat_tol") = 1e-10);
  m.def(
      "sobolev_norm", [](const Grid& g, py::array_t<double> f, int k) { return sp::sobolev_norm(from_numpy<double>(g, f), k); },
      py::arg("grid"), py::arg("f"), py::arg("k"));

  m.def(
      "dispersion_omega",
      [](double kmag, const Params& p, const std::string& branch) { return kg::dispersion_omega(kmag, p, parse_branch(branch)); },
      py::arg("kmag"), py::arg("params"), py::arg("branch") = "plus");
  m.def(
      "plane_wave",
      [](const Grid& g, std::array<int, 3> mode, double amplitude, const Params& p) {
        const auto s = kg::plane_wave(g, mode, amplitude, p);
        return py::make_tuple(to_numpy(s.phi), to_numpy(s.phi_t));
      },
      py::arg("grid"), py::arg("mode"), py::arg("amplitude"), py::arg("params"));
  m.def("stability_bound", [](const Grid& g, const Params& p) { return kg::stability_bound(*g, p); });
  m.def(
      "charge",
      [](const Grid& g, py::array_t<std::complex<double>> phi, py::array_t<std::complex<double>> phi_t,
         const Params& p) {
        return kg::charge({from_numpy<std::complex<double>>(g, phi), from_numpy<std::complex<double>>(g, phi_t), 0.0}, p);
      },
      py::arg("grid"), py::arg("phi"), py::arg("phi_t"), py::arg("params"));
  m.def(
      "kg_solve",
      [](const Grid& g, py::array_t<std::complex<double>> phi0, py::array_t<std::complex<double>> phi1,
         const Params& p, double T, std::optional<double> dt) {
        const kg::KGState init{from_numpy<std::complex<double>>(g, phi0), from_numpy<std::complex<double>>(g, phi1), 0.0};
        kg::KGRun run;
        {
          py::gil_scoped_release release;
          run = kg::kg_solve(init, p, T, dt.value_or(kg::auto_dt(*g, p, T)));
        }
        const auto& tr = run.trajectory;
        auto shape = shape_of(g);
        shape.insert(shape.begin(), static_cast<py::ssize_t>(tr.size()));
        py::array_t<std::complex<double>> phi(shape), phi_t(shape);
        std::vector<double> times;
        for (std::size_t j = 0; j < tr.size(); ++j) {
          std::copy(tr[j].phi.values().begin(), tr[j].phi.values().end(), phi.mutable_data() + j * g->size());
          std::copy(tr[j].phi_t.values().begin(), tr[j].phi_t.values().end(), phi_t.mutable_data() + j * g->size());
          times.push_back(tr.time(j));
        }
        py::dict d;
        d["t"] = times;
        d["phi"] = phi;
        d["phi_t"] = phi_t;
        d["charge"] = run.charge;
        return d;
      },
      py::arg("grid"), py::arg("phi0"), py::arg("phi1"), py::arg("params"), py::arg("T"), py::arg("dt") = py::none());

  m.def(
      "kg_to_hydro",
      [](const Grid& g, py::array_t<std::complex<double>> phi, py::array_t<std::complex<double>> phi_t,
         const Params& p) {
        return hydro_dict(
            md::kg_to_hydro({from_numpy<std::complex<double>>(g, phi), from_numpy<std::complex<double>>(g, phi_t), 0.0}, p));
      },
      py::arg("grid"), py::arg("phi"), py::arg("phi_t"), py::arg("params"));
  m.def(
      "kg_from_hydro",
      [](const Grid& g, py::array_t<double> n0, py::array_t<double> n1, py::array_t<double> S0,
         std::array<int, 3> winding, py::array_t<double> S1, const Params& p) {
        const auto d = md::initial_data_kg_from_hydro(from_numpy<double>(g, n0), from_numpy<double>(g, n1),
                                                      from_numpy<double>(g, S0), winding, from_numpy<double>(g, S1), p);
        return py::make_tuple(to_numpy(d.phi0), to_numpy(d.phi1));
      },
      py::arg("grid"), py::arg("n0"), py::arg("n1"), py::arg("S0"), py::arg("winding"), py::arg("S1"), py::arg("params"));

  m.def(
      "fit_order",
      [](const std::vector<double>& params, const std::vector<double>& discrepancies) {
        return rqlab::limits::fit_order(params, discrepancies).order;
      },
      py::arg("params"), py::arg("discrepancies"));

  m.def("sha256_hex", &rqlab::cli::sha256_hex);
  m.def("validate_config_text", [](const std::string& text) {
    rqlab::cli::validate(rqlab::cli::parse_config(text));
  });
  m.def(
      "run_config",
      [](const std::filesystem::path& path, const std::filesystem::path& outdir) {
        const std::string text = rqlab::cli::read_config_text(path);
        const auto c = rqlab::cli::parse_config(text);
        rqlab::cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = rqlab::cli::run_experiment(c, outdir, text);
        }
        return r.summary.dump();
      },
      py::arg("config"), py::arg("outdir"));
  m.def("report_json", [](const std::filesystem::path& dir) { return rqlab::cli::report_directory(dir).dump(); });
}
