// Python bindings: scalar posit and binary16 arithmetic, the verification
// suites and the results table.

#include <cstdint>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "posittrain/experiment.hpp"
#include "posittrain/half.hpp"
#include "posittrain/posit.hpp"
#include "posittrain/verify.hpp"

namespace py = pybind11;
using namespace posittrain;

namespace {

PositBits same_config(const PositBits& a, const PositBits& b) {
    if (a.cfg != b.cfg) throw py::value_error("posit configurations differ");
    return b;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Emulated posit and IEEE arithmetic";
    m.attr("__version__") = kArtifactVersion;

    py::class_<PositBits>(m, "Posit")
        .def(py::init([](std::uint32_t bits, int n, int es) { return PositBits::make(bits, PositConfig(n, es)); }),
             py::arg("bits"), py::arg("n") = 16, py::arg("es") = 1)
        .def_static(
            "from_float", [](double x, int n, int es) { return from_f64(x, PositConfig(n, es)); }, py::arg("x"),
            py::arg("n") = 16, py::arg("es") = 1)
        .def_property_readonly("bits", [](const PositBits& p) { return p.bits; })
        .def_property_readonly("n", [](const PositBits& p) { return p.cfg.n(); })
        .def_property_readonly("es", [](const PositBits& p) { return p.cfg.es(); })
        .def("is_nar", &PositBits::is_nar)
        .def("is_zero", &PositBits::is_zero)
        .def("__float__", [](const PositBits& p) { return to_f64(p); })
        .def("__add__", [](const PositBits& a, const PositBits& b) { return add(a, same_config(a, b)); })
        .def("__sub__", [](const PositBits& a, const PositBits& b) { return sub(a, same_config(a, b)); })
        .def("__mul__", [](const PositBits& a, const PositBits& b) { return mul(a, same_config(a, b)); })
        .def("__truediv__", [](const PositBits& a, const PositBits& b) { return div(a, same_config(a, b)); })
        .def("__neg__", [](const PositBits& a) { return neg(a); })
        .def("__eq__", [](const PositBits& a, const PositBits& b) { return a.cfg == b.cfg && a.bits == b.bits; })
        .def("__hash__", [](const PositBits& p) { return (std::uint64_t{p.bits} << 8) | (p.cfg.n() << 3) | p.cfg.es(); })
        .def("__repr__", [](const PositBits& p) { return "Posit(" + to_string(p) + ", " + to_string(p.cfg) + ")"; });

    py::class_<Half>(m, "Half")
        .def(py::init([](std::uint16_t bits) { return Half::from_bits(bits); }), py::arg("bits"))
        .def_static("from_float", &h_from_f64, py::arg("x"))
        .def_property_readonly("bits", [](const Half& h) { return h.bits; })
        .def("is_nan", &Half::is_nan)
        .def("is_inf", &Half::is_inf)
        .def("__float__", &h_to_f64)
        .def("__add__", &h_add)
        .def("__sub__", &h_sub)
        .def("__mul__", &h_mul)
        .def("__truediv__", &h_div)
        .def("__neg__", &h_neg)
        .def("__eq__", [](const Half& a, const Half& b) { return a.bits == b.bits; })
        .def("__hash__", [](const Half& h) { return h.bits; })
        .def("__repr__", [](const Half& h) { return "Half(" + to_string(h) + ")"; });

    m.def("suite_names", &verify::suite_names);
    m.def(
        "run_suite",
        [](const std::string& name) {
            verify::SuiteReport r;
            {
                py::gil_scoped_release release;
                r = verify::run_suite(name);
            }
            return nlohmann::json(r).dump();
        },
        py::arg("name"), "Run a verification suite; returns the report as a JSON string.");
    m.def(
        "render_table",
        [](const std::string& dir, bool csv) {
            const auto rows = collect_table(dir);
            return csv ? render_csv(rows) : render_table(rows);
        },
        py::arg("dir"), py::arg("csv") = false);

    py::register_exception<ResultFileError>(m, "ResultFileError", PyExc_ValueError);
}
