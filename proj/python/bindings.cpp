#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "heisosc/closed_forms.hpp"
#include "heisosc/degeneracy.hpp"
#include "heisosc/errors.hpp"
#include "heisosc/fields.hpp"
#include "heisosc/oscillatory.hpp"

namespace py = pybind11;
using namespace heisosc;

namespace {

using Coords = std::vector<double>;

GroupPoint point(const Coords& c) { return GroupPoint::from_coords(c); }
Coords coords(const GroupPoint& p) { return Coords(p.coords().begin(), p.coords().end()); }

GroupContext context(int n, double a, const std::string& variant) { return GroupContext(n, a, variant_from_string(variant)); }

FormulaRevision revision(const std::string& s) {
  if (s == "corrected") return FormulaRevision::Corrected;
  if (s == "printed") return FormulaRevision::Printed;
  throw DomainError("revision must be corrected or printed");
}

py::dict cert_dict(const CertReport& r) {
  py::dict d;
  d["verdict"] = to_string(r.verdict);
  d["sample_count"] = r.sample_count;
  d["min_abs_normalized_det"] = r.min_abs_normalized_det;
  d["argmin"] = coords(r.argmin);
  d["sign_change"] = r.sign_change;
  py::list near;
  for (const auto& z : r.near_zero) near.append(py::make_tuple(coords(z.point), z.normalized_det));
  d["near_zero"] = near;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heisenberg-type group phases: mixed Hessians, degeneracy certification, oscillatory operator norms";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<NyquistError>(m, "NyquistError", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());

  m.def("c_beta", &c_beta, py::arg("beta"));
  m.def("discriminant", &discriminant, py::arg("a"), py::arg("beta"));
  m.def("paraboloid_slopes", &paraboloid_slopes, py::arg("a"), py::arg("beta"));
  m.def("critical_slope", &critical_slope, py::arg("beta"));

  m.def(
      "multiply",
      [](const Coords& p, const Coords& q, double a, const std::string& variant) {
        return coords(multiply(context(static_cast<int>(p.size() / 2), a, variant), point(p), point(q)));
      },
      py::arg("p"), py::arg("q"), py::arg("a") = 1.0, py::arg("variant") = "full");
  m.def(
      "inverse",
      [](const Coords& p, double a, const std::string& variant) {
        return coords(inverse(context(static_cast<int>(p.size() / 2), a, variant), point(p)));
      },
      py::arg("p"), py::arg("a") = 1.0, py::arg("variant") = "full");
  m.def("dilate", [](const Coords& p, double delta) { return coords(dilate(point(p), delta)); }, py::arg("p"),
        py::arg("delta"));
  m.def(
      "norm",
      [](const Coords& p, const std::string& kind, double b) {
        return evaluate(QuasiNormSpec(norm_kind_from_string(kind), b), point(p));
      },
      py::arg("p"), py::arg("kind") = "koranyi", py::arg("b") = 1.0);

  m.def(
      "mixed_hessian_det",
      [](const Coords& p, double a, double beta, const std::string& kind, const std::string& variant, double b) {
        const auto ctx = context(static_cast<int>(p.size() / 2), a, variant);
        return mixed_hessian_det(ctx, PhaseSpec(QuasiNormSpec(norm_kind_from_string(kind), b), beta), point(p));
      },
      py::arg("p"), py::arg("a") = 1.0, py::arg("beta") = 1.0, py::arg("kind") = "koranyi",
      py::arg("variant") = "full", py::arg("b") = 1.0);
  m.def(
      "closed_det",
      [](const std::string& name, const Coords& p, double a, double beta, const std::string& rev) {
        const auto c = case_from_string(name);
        const GroupContext ctx(static_cast<int>(p.size() / 2), a, case_info(c).variant);
        return closed_det(c, ctx, beta, point(p), revision(rev));
      },
      py::arg("case"), py::arg("p"), py::arg("a") = 1.0, py::arg("beta") = 1.0, py::arg("revision") = "corrected");
  m.def("case_names", [] {
    std::vector<std::string> names;
    for (const auto& info : all_cases()) names.push_back(to_string(info.id));
    return names;
  });
  m.def(
      "hessian_check",
      [](std::vector<std::string> names, int samples, std::uint64_t seed, const std::string& rev) {
        std::vector<ClosedFormCase> cases;
        if (names.empty())
          for (const auto& info : all_cases()) cases.push_back(info.id);
        for (const auto& s : names) cases.push_back(case_from_string(s));
        HessianCheckOptions opts;
        opts.samples = samples;
        opts.seed = seed;
        opts.revision = revision(rev);
        py::list rows;
        for (const auto& r : hessian_check(cases, opts)) {
          py::dict d;
          d["case"] = to_string(r.id);
          d["n"] = r.n;
          d["a"] = r.a;
          d["beta"] = r.beta;
          d["max_rel_error"] = r.max_rel_error;
          rows.append(d);
        }
        return rows;
      },
      py::arg("cases") = std::vector<std::string>{}, py::arg("samples") = 200, py::arg("seed") = 0,
      py::arg("revision") = "corrected");

  m.def(
      "certify",
      [](const std::string& kind, int n, double a, double b, double beta, int samples, std::uint64_t seed,
         double tol, const std::string& variant) {
        SamplerSpec s;
        s.seed = seed;
        s.count = samples;
        CertOptions o;
        o.tol = tol;
        py::gil_scoped_release release;
        const auto r = certify(context(n, a, variant), QuasiNormSpec(norm_kind_from_string(kind), b), beta, s, o);
        py::gil_scoped_acquire acquire;
        return cert_dict(r);
      },
      py::arg("norm") = "koranyi", py::arg("n") = 1, py::arg("a") = 1.0, py::arg("b") = 1.0, py::arg("beta") = 1.0,
      py::arg("samples") = 256, py::arg("seed") = 0, py::arg("tol") = 1e-7, py::arg("variant") = "full");
  m.def(
      "zero_scan",
      [](const std::string& kind, int n, double a, double beta, int resolution, double tol,
         const std::string& variant) {
        std::vector<std::pair<Coords, double>> out;
        for (const auto& z : zero_scan(context(n, a, variant), QuasiNormSpec(norm_kind_from_string(kind)), beta,
                                       resolution, tol))
          out.emplace_back(coords(z.point), z.normalized_det);
        return out;
      },
      py::arg("norm") = "koranyi", py::arg("n") = 1, py::arg("a") = 1.0, py::arg("beta") = 1.0,
      py::arg("resolution") = 48, py::arg("tol") = 1e-7, py::arg("variant") = "full");
  m.def(
      "theorem_region",
      [](const std::string& kind, double a, double b, double beta) {
        const auto r = theorem_region(norm_kind_from_string(kind), a, b, beta);
        return py::make_tuple(r.inside, r.description);
      },
      py::arg("norm"), py::arg("a"), py::arg("b") = 1.0, py::arg("beta") = 1.0);

  m.def("theta_partition", &theta_partition, py::arg("r"));
  m.def(
      "euclidean_decay",
      [](const std::vector<double>& lambdas, int grid, std::uint64_t seed) {
        PowerOptions o;
        o.seed = seed;
        const auto s = generic_decay(euclidean_product_setup(), lambdas, grid, o);
        py::dict d;
        std::vector<double> norms;
        for (const auto& p : s.points) norms.push_back(p.norm);
        d["norms"] = norms;
        d["slope"] = s.slope;
        d["grid_converged"] = s.grid_converged;
        return d;
      },
      py::arg("lambdas"), py::arg("grid") = 128, py::arg("seed") = 0);
  m.def(
      "max_feasible_j",
      [](double alpha, double beta, int grid, double in_half) {
        return max_feasible_j(GroupContext(1, 1.0), alpha, beta, QuasiNormSpec(NormKind::Rho1), grid, in_half);
      },
      py::arg("alpha") = 1.5, py::arg("beta") = 1.0, py::arg("grid") = 12, py::arg("in_half") = 0.5);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line front end in-process; returns (exit code, stdout, stderr).");
  m.attr("git_describe") = cli::git_describe();
}
