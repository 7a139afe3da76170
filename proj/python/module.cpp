#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "certapprox/approximate.hpp"
#include "certapprox/cli.hpp"
#include "certapprox/errors.hpp"
#include "certapprox/glue.hpp"
#include "certapprox/limit.hpp"

namespace py = pybind11;
using namespace certapprox;

namespace {

NormTag make_norm(const std::string& kind, std::pair<double, double> domain) {
  return {parse_norm_kind(kind), {domain.first, domain.second}};
}

py::dict report_dict(const VerificationReport& r) {
  py::dict d;
  d["digest"] = r.digest;
  d["recomputed_error"] = r.recomputed_error;
  d["recomputed_method"] = std::string(sup_norm_method_name(r.recomputed_method));
  d["bound_honored"] = r.bound_honored;
  d["structural_ok"] = r.structural_ok;
  d["verdict"] = r.verdict();
  d["notes"] = r.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(certapprox, m) {
  m.doc() = "Certified finite-rank function approximation";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ToleranceViolated>(m, "ToleranceViolated", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<EvidenceContradiction>(m, "EvidenceContradiction", base);

  m.attr("expression_grammar") = std::string(kExpressionGrammar);

  py::class_<BasisFamily>(m, "BasisFamily")
      .def_static("chebyshev", &BasisFamily::chebyshev)
      .def_static("fourier_sine", &BasisFamily::fourier_sine)
      .def_static("monomial",
                  [](std::pair<double, double> d) { return BasisFamily::monomial({d.first, d.second}); },
                  py::arg("domain") = std::pair<double, double>{0.0, 1.0})
      .def_static("tent", &BasisFamily::tent)
      .def_static("cubic_bspline",
                  [](std::pair<double, double> d, int count) {
                    return BasisFamily::cubic_bspline({d.first, d.second}, count);
                  },
                  py::arg("domain"), py::arg("count"))
      .def_property_readonly("name", [](const BasisFamily& b) { return std::string(b.name()); })
      .def("indices", &BasisFamily::indices, py::arg("n") = 0)
      .def("eval", &BasisFamily::eval)
      .def("eval_deriv", &BasisFamily::eval_deriv);

  py::class_<TargetFunction>(m, "Target")
      .def_static("builtin", [](const std::string& name) { return TargetFunction::builtin(name); })
      .def_static("expression",
                  [](const std::string& text, std::pair<double, double> d) {
                    return TargetFunction::expression(text, {d.first, d.second});
                  },
                  py::arg("text"), py::arg("domain") = std::pair<double, double>{0.0, 1.0})
      .def_static("parse", [](const std::string& spec) { return parse_target_spec(spec); })
      .def_property_readonly("descriptor", &TargetFunction::descriptor)
      .def("__call__", &TargetFunction::value)
      .def("derivative", &TargetFunction::derivative);

  py::class_<ApproximationCertificate>(m, "Certificate")
      .def_readonly("target", &ApproximationCertificate::target_descriptor)
      .def_readonly("tolerance", &ApproximationCertificate::tolerance)
      .def_readonly("reported_error", &ApproximationCertificate::reported_error)
      .def_readonly("digest", &ApproximationCertificate::digest)
      .def_readonly("genealogy", &ApproximationCertificate::genealogy)
      .def_property_readonly("method",
                             [](const ApproximationCertificate& c) { return std::string(method_name(c.construction.method)); })
      .def_property_readonly("terms",
                             [](const ApproximationCertificate& c) {
                               std::vector<std::pair<int, double>> out;
                               for (const auto& t : c.terms) out.emplace_back(t.index, t.coefficient);
                               return out;
                             })
      .def("serialize", [](const ApproximationCertificate& c) { return serialize(c); })
      .def("evaluate", [](const ApproximationCertificate& c, double x) { return Approximant::of(c).value(x); });

  m.def("deserialize", [](const std::string& bytes) { return deserialize(bytes); });

  auto settings = [](double eps, int max_terms, int points) {
    ExtractionSettings s;
    s.tolerance = eps;
    s.max_terms = max_terms;
    s.points = points;
    return s;
  };
  m.def("approximate_orthonormal",
        [settings](const TargetFunction& f, const BasisFamily& fam, double eps, int max_terms, int points) {
          return approximate_orthonormal(f, fam, settings(eps, max_terms, points));
        },
        py::arg("f"), py::arg("family"), py::arg("eps"), py::arg("max_terms") = 4096, py::arg("points") = 16);
  m.def("approximate_gram",
        [settings](const TargetFunction& f, const BasisFamily& fam, const std::vector<int>& indices,
                   const std::string& norm, std::pair<double, double> domain, double eps) {
          return approximate_gram(f, elements_of(fam, indices), make_norm(norm, domain), settings(eps, 4096, 16));
        },
        py::arg("f"), py::arg("family"), py::arg("indices"), py::arg("norm"), py::arg("domain"), py::arg("eps"));
  m.def("approximate_raw_probe",
        [settings](const TargetFunction& f, const BasisFamily& fam, const std::vector<int>& indices,
                   const std::string& norm, std::pair<double, double> domain, double eps) {
          return approximate_raw_probe(f, elements_of(fam, indices), make_norm(norm, domain),
                                       settings(eps, 4096, 16));
        },
        py::arg("f"), py::arg("family"), py::arg("indices"), py::arg("norm"), py::arg("domain"), py::arg("eps"));
  m.def("approximate_greedy",
        [settings](const TargetFunction& f, const BasisFamily& fam, const std::vector<int>& indices,
                   const std::string& norm, std::pair<double, double> domain, double eps, int max_terms) {
          return approximate_greedy(f, elements_of(fam, indices), make_norm(norm, domain),
                                    settings(eps, max_terms, 16));
        },
        py::arg("f"), py::arg("family"), py::arg("indices"), py::arg("norm"), py::arg("domain"), py::arg("eps"),
        py::arg("max_terms") = 4096);
  m.def("approximate_chebyshev", &approximate_chebyshev, py::arg("f"), py::arg("degree"), py::arg("eps"));
  m.def("verify", [](const ApproximationCertificate& c, const TargetFunction& f) { return report_dict(verify(c, f)); });

  m.def("glue",
        [](const TargetFunction& f, int patches, double eps, double overlap) {
          GlueSettings s;
          s.patches = patches;
          s.tolerance = eps;
          s.overlap_fraction = overlap;
          const auto cert = glue_pipeline(f, s);
          const auto v = verify_glued(cert, f);
          py::dict d;
          d["json"] = serialize(cert);
          d["digest"] = cert.digest;
          d["reported_error"] = cert.reported_error;
          d["bound_estimate"] = cert.bound_estimate;
          d["verdict"] = v.verdict();
          return d;
        },
        py::arg("f"), py::arg("patches"), py::arg("eps"), py::arg("overlap") = kDefaultOverlapFraction);

  m.def("tent_series",
        [](double eps, int ladder) {
          const auto cert = tent_series(eps, ladder);
          py::dict d;
          d["json"] = serialize(cert);
          d["index"] = cert.index;
          d["digest"] = cert.digest;
          d["combined_bound"] = cert.combined_bound;
          d["genealogy"] = cert.genealogy;
          d["verdict"] = verify_limit(cert).verdict();
          return d;
        },
        py::arg("eps"), py::arg("ladder") = kDefaultLadder);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out;
          std::ostringstream err;
          const int code = cli::run(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        "Runs one CLI command; returns (exit_code, stdout, stderr).");
}
