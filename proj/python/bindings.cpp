// Copyright 2026 The pqsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pqsteer/acceptance.hpp"
#include "pqsteer/json_io.hpp"
#include "pqsteer/ptp.hpp"

namespace py = pybind11;
using namespace pqsteer;

namespace {

// Results cross the boundary as plain dicts.
py::dict bound_dict(const BoundResult& b) {
  py::dict d;
  d["value"] = b.value;
  d["status"] = sdp::to_string(b.status);
  d["primal_feas"] = b.residuals.primal_feas;
  d["dual_feas"] = b.residuals.dual_feas;
  d["gap"] = b.residuals.gap;
  d["iterations"] = b.iterations;
  d["block_sides"] = b.block_sides;
  d["seconds"] = b.seconds;
  return d;
}

py::dict validation_dict(const ValidationReport& v) {
  py::dict checks;
  for (const auto& c : v.checks) checks[py::str(c.name)] = c.residual;
  py::dict d;
  d["passed"] = v.passed;
  d["tol"] = v.tol;
  d["residuals"] = checks;
  return d;
}

py::dict feasibility_dict(const FeasibilityReport& f) {
  py::dict d;
  d["feasible"] = f.feasible;
  d["margin"] = f.margin;
  d["status"] = sdp::to_string(f.status);
  return d;
}

sdp::SolveOptions opts_for(double tol) {
  sdp::SolveOptions o;
  if (tol > 0) o.feas_tol = o.gap_tol = tol;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of pqsteer";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::enum_<ScenarioKind>(m, "ScenarioKind")
      .value("Traditional", ScenarioKind::Traditional)
      .value("BobWithInput", ScenarioKind::BobWithInput);

  py::class_<ScenarioShape>(m, "ScenarioShape")
      .def(py::init([](int n_a, int m_a, int m_b, int d) {
             ScenarioShape s{n_a, m_a, m_b, d, m_b == 1 ? ScenarioKind::Traditional : ScenarioKind::BobWithInput};
             s.check();
             return s;
           }),
           py::arg("n_a"), py::arg("m_a"), py::arg("m_b"), py::arg("d"))
      .def_readonly("n_a", &ScenarioShape::n_a)
      .def_readonly("m_a", &ScenarioShape::m_a)
      .def_readonly("m_b", &ScenarioShape::m_b)
      .def_readonly("d", &ScenarioShape::d)
      .def_readonly("kind", &ScenarioShape::kind);

  py::class_<BwiAssemblage>(m, "Assemblage")
      .def(py::init<ScenarioShape>())
      .def_property_readonly("shape", &BwiAssemblage::shape)
      .def("member", py::overload_cast<int, int, int>(&BwiAssemblage::at, py::const_),
           py::arg("a"), py::arg("x"), py::arg("y") = 0)
      .def("set_member",
           [](BwiAssemblage& s, int a, int x, int y, const CMatrix& v) {
             if (v.rows() != s.shape().d || v.cols() != s.shape().d) throw DimensionError("member has wrong size");
             s.at(a, x, y) = v;
           })
      .def("to_json", [](const BwiAssemblage& s) { return to_json(s).dump(); })
      .def_static("from_json", [](const std::string& t) { return bwi_from_json(parse_json_text(t)); });

  py::class_<SteeringFunctional>(m, "Functional")
      .def(py::init<ScenarioShape>())
      .def_property_readonly("shape", &SteeringFunctional::shape)
      .def("coefficient", py::overload_cast<int, int, int>(&SteeringFunctional::at, py::const_),
           py::arg("a"), py::arg("x"), py::arg("y") = 0)
      .def("set_coefficient",
           [](SteeringFunctional& f, int a, int x, int y, const CMatrix& v) {
             if (v.rows() != f.shape().d || v.cols() != f.shape().d) throw DimensionError("coefficient has wrong size");
             f.at(a, x, y) = v;
           })
      .def("to_json", [](const SteeringFunctional& f) { return to_json(f).dump(); })
      .def_static("from_json", [](const std::string& t) { return functional_from_json(parse_json_text(t)); });

  m.def("pr_box", &pr_box_assemblage);
  m.def("pauli_transpose", &pauli_transpose_assemblage);
  m.def("canonical_functional", &canonical_functional);
  m.def("random_quantum", &random_quantum_bwi, py::arg("shape"), py::arg("seed"));
  m.def("random_ns_traditional",
        [](int n_a, int m_a, int d, std::uint64_t seed) {
          return random_ns_traditional(n_a, m_a, random_density_matrix(d, seed), seed + 1);
        },
        py::arg("n_a"), py::arg("m_a"), py::arg("d"), py::arg("seed"));

  m.def("validate", [](const BwiAssemblage& s, double tol) { return validation_dict(validate_ns_bwi(s, tol)); },
        py::arg("assemblage"), py::arg("tol") = kValidationTol);
  m.def("evaluate", py::overload_cast<const SteeringFunctional&, const BwiAssemblage&>(&evaluate));

  m.def("lhs_bound", [](const SteeringFunctional& f, double tol) { return bound_dict(lhs_bound(f, opts_for(tol)).result); },
        py::arg("functional"), py::arg("tol") = 0.0);
  m.def("ns_bound", [](const SteeringFunctional& f, double tol) { return bound_dict(ns_bound(f, opts_for(tol)).result); },
        py::arg("functional"), py::arg("tol") = 0.0);
  m.def("qtilde_bound",
        [](const SteeringFunctional& f, double tol) { return bound_dict(qtilde_bound(f, opts_for(tol)).result); },
        py::arg("functional"), py::arg("tol") = 0.0);
  m.def("qtilde_instrumental_bound",
        [](const SteeringFunctional& f, double tol) {
          return bound_dict(qtilde_instrumental_bound(post_select(f), opts_for(tol)).result);
        },
        py::arg("functional"), py::arg("tol") = 0.0);

  m.def("lhs_membership", [](const BwiAssemblage& s) { return feasibility_dict(lhs_membership(s).report); });
  m.def("qtilde_membership", [](const BwiAssemblage& s) { return feasibility_dict(qtilde_membership(s).report); });

  m.def("pure_state_lemma_check",
        [](const BwiAssemblage& s, int y_ref) {
          const CertificateReport c = pure_state_lemma_check(s, y_ref);
          py::list maps;
          for (const auto& lm : c.maps) {
            py::dict d;
            d["y"] = lm.y;
            d["transfer"] = lm.transfer;
            d["fit_residual"] = lm.fit_residual;
            d["choi_min_eigenvalue"] = lm.choi_min_eigenvalue;
            d["completely_positive"] = lm.completely_positive;
            maps.append(d);
          }
          py::dict d;
          d["status"] = to_string(c.status);
          d["detail"] = c.detail;
          d["maps"] = maps;
          return d;
        },
        py::arg("assemblage"), py::arg("y_ref") = 0);

  m.def("ghjw_traditional",
        [](const BwiAssemblage& s) {
          const TraditionalRealization r = ghjw_traditional(s);
          py::dict d;
          d["realization"] = to_json(r).dump();
          d["round_trip"] = max_deviation(reconstruct_traditional(r), s);
          d["completeness"] = r.completeness_residual();
          return d;
        });

  m.def("run_acceptance",
        [](std::vector<int> only, std::uint64_t seed) {
          AcceptanceOptions o;
          o.seed = seed;
          o.only = std::move(only);
          std::vector<CriterionResult> res;
          {
            py::gil_scoped_release release;
            res = run_acceptance(o);
          }
          py::list rows;
          for (const auto& r : res) {
            py::dict d;
            d["id"] = r.id;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["value"] = r.value;
            d["detail"] = r.detail;
            d["seconds"] = r.seconds;
            rows.append(d);
          }
          return rows;
        },
        py::arg("only") = std::vector<int>{}, py::arg("seed") = AcceptanceOptions{}.seed);
}
