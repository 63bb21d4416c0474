#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wlfield/ccr.hpp"
#include "wlfield/cli.hpp"
#include "wlfield/hadamard.hpp"
#include "wlfield/one_particle.hpp"
#include "wlfield/parallel.hpp"
#include "wlfield/wavefront.hpp"

namespace py = pybind11;
using namespace wlf;
using nlohmann::json;

namespace {

// Python objects cross as JSON text through the stdlib json module.
json to_cpp(const py::object& o) {
  const auto text = py::module_::import("json").attr("dumps")(o).cast<std::string>();
  return json::parse(text);
}

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

WorldlinePtr share(const Worldline& w) { return std::make_shared<const Worldline>(w); }

std::array<double, 4> arr(const FourVector& v) { return v.c; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributions on timelike worldlines and the free scalar field";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  m.def("set_thread_count", &set_thread_count, py::arg("n"));

  py::class_<Worldline, std::shared_ptr<Worldline>>(m, "Worldline")
      .def_static(
          "inertial",
          [](double eta, std::array<double, 3> n, std::array<double, 4> x0) {
            return Worldline::inertial(eta, n, FourVector{x0[0], x0[1], x0[2], x0[3]});
          },
          py::arg("rapidity") = 0.0, py::arg("direction") = std::array<double, 3>{1.0, 0.0, 0.0},
          py::arg("offset") = std::array<double, 4>{0.0, 0.0, 0.0, 0.0})
      .def_static("rindler", [](double a) { return Worldline::rindler(a); }, py::arg("acceleration"))
      .def_static("circular", [](double r, double om) { return Worldline::circular(r, om); }, py::arg("radius"),
                  py::arg("omega"))
      .def_static("from_json", [](const py::object& o) { return Worldline::from_json(to_cpp(o)); })
      .def("to_json", [](const Worldline& w) { return to_py(w.to_json()); })
      .def_property_readonly("id", &Worldline::id)
      .def("event", [](const Worldline& w, double s) { return arr(w.evaluate(s).event); })
      .def("four_velocity", [](const Worldline& w, double s) { return arr(w.four_velocity(s)); })
      .def("__repr__", [](const Worldline& w) { return "<Worldline " + w.id() + ">"; });

  py::class_<CoefficientFunction>(m, "Coefficient")
      .def_static("gaussian", &CoefficientFunction::gaussian, py::arg("center"), py::arg("sigma"),
                  py::arg("amplitude") = cplx(1.0), py::arg("omega") = 0.0)
      .def_static("smooth_bump", &CoefficientFunction::smooth_bump, py::arg("center"), py::arg("half_width"),
                  py::arg("amplitude") = cplx(1.0), py::arg("omega") = 0.0)
      .def_static("from_json", [](const py::object& o) { return CoefficientFunction::from_json(to_cpp(o)); })
      .def("to_json", [](const CoefficientFunction& c) { return to_py(c.to_json()); })
      .def("__call__", &CoefficientFunction::operator())
      .def("transform", &CoefficientFunction::transform, py::arg("rho"))
      .def_property_readonly("support", &CoefficientFunction::support);

  py::class_<JetDistribution>(m, "JetDistribution")
      .def(py::init([](const Worldline& w, int order, const std::map<std::array<int, 3>, CoefficientFunction>& terms,
                       const std::string& frame) {
             JetDistribution::Terms t;
             for (const auto& [a, c] : terms) t.emplace(MultiIndex(a[0], a[1], a[2]), c);
             return JetDistribution(share(w), order, std::move(t), transport_rule_from_string(frame));
           }),
           py::arg("worldline"), py::arg("order"), py::arg("terms"), py::arg("frame") = "fermi-walker")
      .def_static("from_json", [](const py::object& o) { return JetDistribution::from_json(to_cpp(o)); })
      .def("to_json", [](const JetDistribution& T) { return to_py(T.to_json()); })
      .def_property_readonly("order", &JetDistribution::order)
      .def_property_readonly("support", &JetDistribution::support)
      .def("is_real", &JetDistribution::is_real)
      .def(
          "pushforward",
          [](const JetDistribution& T, double t, const std::string& rule) {
            return pushforward(T, t, transport_rule_from_string(rule));
          },
          py::arg("t"), py::arg("rule") = "fermi-walker");

  py::class_<ModeGrid, std::shared_ptr<ModeGrid>>(m, "ModeGrid")
      .def_property_readonly("options", [](const ModeGrid& g) { return to_py(g.options().to_json()); })
      .def_property_readonly("r_max", &ModeGrid::r_max)
      .def_property_readonly("l_max", &ModeGrid::l_max)
      .def_property_readonly("n_radial", &ModeGrid::n_radial);

  m.def(
      "make_grid",
      [](const std::vector<JetDistribution>& dists, const py::object& options) {
        std::vector<const JetDistribution*> ptrs;
        for (const auto& d : dists) ptrs.push_back(&d);
        const GridOptions opt = options.is_none() ? GridOptions{} : GridOptions::from_json(to_cpp(options));
        return std::const_pointer_cast<ModeGrid>(make_grid(opt, ptrs));
      },
      py::arg("distributions"), py::arg("options") = py::none());

  py::class_<OneParticleVector>(m, "OneParticleVector")
      .def("norm2", &OneParticleVector::norm2)
      .def("angular_spectrum", [](const OneParticleVector& u) { return angular_spectrum(u); })
      .def("__add__", [](const OneParticleVector& a, const OneParticleVector& b) { return a + b; })
      .def("__rmul__", [](const OneParticleVector& a, cplx s) { return s * a; });

  m.def("k_map", py::overload_cast<const JetDistribution&, const ModeGridPtr&>(&k_map), py::arg("T"),
        py::arg("grid"));
  m.def("inner_product", &inner_product);
  m.def("two_point", &two_point, py::arg("T"), py::arg("S"), py::arg("grid"));
  m.def("commutator", &commutator, py::arg("T"), py::arg("S"), py::arg("grid"));
  m.def("commutator_light_cone", &commutator_light_cone, py::arg("T"), py::arg("S"));
  m.def("detector_norm", &detector_norm, py::arg("T"), py::arg("grid"));

  py::class_<PulledBackKernel>(m, "PulledBackKernel")
      .def(py::init([](const Worldline& w, double mass, const py::object& backend) {
             if (backend.is_none()) return PulledBackKernel::for_worldline(share(w), mass);
             return PulledBackKernel(share(w), kernel_backend_from_string(backend.cast<std::string>()), mass);
           }),
           py::arg("worldline"), py::arg("mass") = 0.0, py::arg("backend") = py::none())
      .def_property_readonly("backend", [](const PulledBackKernel& K) { return to_string(K.backend); })
      .def_readonly("mass", &PulledBackKernel::mass)
      .def_readwrite("eps_schedule", &PulledBackKernel::eps_schedule)
      .def("value", &kernel_value, py::arg("s1"), py::arg("s2"), py::arg("eps"))
      .def("limit", &kernel_limit, py::arg("s1"), py::arg("s2"));

  m.def("detector_response", &detector_response, py::arg("kernel"), py::arg("window"), py::arg("omega"));
  m.def("detector_spectrum", &detector_spectrum, py::arg("kernel"), py::arg("window"), py::arg("omegas"));
  m.def(
      "kms_fit",
      [](const PulledBackKernel& K, const CoefficientFunction& w, const std::vector<double>& om, double noise) {
        return to_py(kms_fit(K, w, om, noise).to_json());
      },
      py::arg("kernel"), py::arg("window"), py::arg("omegas"), py::arg("noise_rel") = 1e-11);
  m.def(
      "hadamard_recursion", [](double mass, int n) { return to_py(hadamard_recursion(mass, n).to_json()); },
      py::arg("mass"), py::arg("order"));
  m.def(
      "short_distance_check",
      [](const PulledBackKernel& K, const std::vector<double>& dtau) {
        return to_py(short_distance_check(K, dtau).to_json());
      },
      py::arg("kernel"), py::arg("dtau"));

  m.def(
      "wavefront_scan",
      [](const JetDistribution& T, const std::vector<Covector>& dirs) {
        py::list out;
        for (const auto& s : wavefront_scan(T, dirs)) {
          py::dict d;
          d["direction"] = s.n;
          d["slope"] = s.slope;
          d["singular"] = s.singular;
          d["noise"] = s.noise;
          out.append(d);
        }
        return out;
      },
      py::arg("T"), py::arg("directions"));

  py::class_<GeneratorFamily>(m, "GeneratorFamily")
      .def_readonly("gram", &GeneratorFamily::gram)
      .def_readonly("covariance", &GeneratorFamily::covariance)
      .def_readonly("symplectic", &GeneratorFamily::symplectic)
      .def_readonly("min_eigenvalue", &GeneratorFamily::min_eigenvalue)
      .def("__len__", &GeneratorFamily::size);

  m.def(
      "shift_lattice",
      [](const JetDistribution& T, double step, int n, const std::string& rule, const py::object& options) {
        const GridOptions opt = options.is_none() ? GridOptions{} : GridOptions::from_json(to_cpp(options));
        return shift_lattice(T, step, n, transport_rule_from_string(rule), opt);
      },
      py::arg("template"), py::arg("step"), py::arg("sites"), py::arg("rule") = "fermi-walker",
      py::arg("grid") = py::none());

  py::class_<GaussianCPMap>(m, "GaussianCPMap")
      .def_readonly("shift", &GaussianCPMap::shift)
      .def_readonly("domain", &GaussianCPMap::domain)
      .def_readonly("dropped", &GaussianCPMap::dropped)
      .def_readonly("L", &GaussianCPMap::L)
      .def_readonly("s_L", &GaussianCPMap::s_L)
      .def_readonly("s_domain", &GaussianCPMap::s_domain)
      .def_readonly("Q_rho", &GaussianCPMap::Q_rho)
      .def_readonly("mu", &GaussianCPMap::mu)
      .def_readonly("flow_defect", &GaussianCPMap::flow_defect)
      .def("to_json", [](const GaussianCPMap& g) { return to_py(g.to_json()); });

  m.def(
      "translation_map", [](const GeneratorFamily& fam, int shift) { return translation_map_build(fam, shift); },
      py::arg("family"), py::arg("shift"));
  m.def(
      "gns_gram_check",
      [](const Eigen::MatrixXd& Q, const Eigen::MatrixXd& S, const std::vector<Eigen::VectorXd>& words) {
        std::vector<WeylWord> w;
        for (const auto& c : words) w.push_back(WeylWord::generator(c));
        return gns_gram_check(QuasifreeState{Q}, S, w);
      },
      py::arg("Q"), py::arg("S"), py::arg("words"));

  m.def(
      "resolve_config",
      [](const std::string& command, const py::object& cfg) { return to_py(cli::resolve_config(command, to_cpp(cfg))); },
      py::arg("command"), py::arg("config"));
  m.def(
      "run_command",
      [](const py::object& resolved) {
        const auto r = cli::run_command(to_cpp(resolved));
        py::dict out;
        for (const auto& a : r.artifacts) out[py::str(a.name)] = a.content;
        return py::make_tuple(r.status, out);
      },
      py::arg("resolved"));
}
