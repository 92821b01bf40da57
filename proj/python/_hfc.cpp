#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hfc/contour_calculus.hpp"
#include "hfc/corpus.hpp"
#include "hfc/io.hpp"
#include "hfc/suites.hpp"

namespace py = pybind11;
using namespace hfc;

namespace {

CommutingTuple make_tuple(const std::vector<Matrix>& ops, const std::string& space_json) {
  if (ops.empty()) throw InvalidArgument("at least one operator is required");
  const SpaceModel space = space_json.empty() ? SpaceModel::euclidean(static_cast<int>(ops.front().rows()))
                                              : io::space_from_json(io::json::parse(space_json));
  return CommutingTuple(ops, space);
}

}  // namespace

PYBIND11_MODULE(_hfc, m) {
  m.attr("__version__") = kVersion;

  static py::exception<Error> base(m, "HfcError", PyExc_ValueError);
  static py::exception<SchemaError> schema(m, "SchemaError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SchemaError& e) {
      py::set_error(schema, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    } catch (const io::json::exception& e) {
      py::set_error(schema, e.what());
    }
  });

  m.def("verbs", &verbs);

  m.def(
      "run_suite",
      [](const std::string& verb, const std::string& problem, std::optional<std::uint64_t> seed, int jobs,
         const std::string& profile) {
        RunOptions o;
        o.seed = seed;
        o.jobs = jobs;
        o.profile = quad_profile(profile);
        const io::json p = io::json::parse(problem);
        py::gil_scoped_release release;
        return render(run_suite(verb, p, o), Format::json);
      },
      py::arg("verb"), py::arg("problem"), py::arg("seed") = py::none(), py::arg("jobs") = 1,
      py::arg("profile") = "default");

  m.def(
      "fc",
      [](const std::vector<Matrix>& ops, const std::string& function, const std::string& space,
         const std::string& method) {
        const CommutingTuple t = make_tuple(ops, space);
        const H01Form f = io::h01_from_json(io::json::parse(function), t.d());
        if (method == "oracle") return spectral_oracle_fc(f, t);
        if (method != "contour") throw InvalidArgument("method must be \"contour\" or \"oracle\"");
        return contour_fc(f, t).value;
      },
      py::arg("operators"), py::arg("function"), py::arg("space") = "", py::arg("method") = "contour");

  m.def(
      "random_tuple",
      [](int d, int n, std::uint64_t seed, bool normal) {
        return random_tuple({.d = d, .n = n, .normal = normal}, seed).operators();
      },
      py::arg("d"), py::arg("n"), py::arg("seed"), py::arg("normal") = true);
}
