#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "heisosc/closed_forms.hpp"
#include "heisosc/degeneracy.hpp"
#include "heisosc/errors.hpp"
#include "heisosc/oscillatory.hpp"

#ifndef HEISOSC_GIT_DESCRIBE
#define HEISOSC_GIT_DESCRIBE "unknown"
#endif

namespace heisosc::cli {

using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kSubcommands{"certify", "hessian-check", "scan-degeneracy", "opnorm-decay"};

/// Infeasible experiment; carries the partial document.
struct Infeasible : std::runtime_error {
  Infeasible(const std::string& what, ordered_json res) : std::runtime_error(what), results(std::move(res)) {}
  ordered_json results;
};

ordered_json point_json(const GroupPoint& p) { return ordered_json(std::vector<double>(p.coords().begin(), p.coords().end())); }

std::string join(const std::vector<double>& v, char sep = ';') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_number(v[i]);
  }
  return s;
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::Certified: return kOk;
    case Verdict::DegeneracyFound: return kDegeneracyFound;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

NormKind parse_norm(const std::string& s) {
  try {
    return norm_kind_from_string(s);
  } catch (const Error&) {
    throw UsageError("unknown norm '" + s + "'");
  }
}

Variant parse_variant(const std::string& s) {
  try {
    return variant_from_string(s);
  } catch (const Error&) {
    throw UsageError("unknown variant '" + s + "'");
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw UsageError(msg);
}

bool critical(const RunConfig& c) { return std::abs(c.alpha - (c.n + 0.5) * c.beta) <= 1e-12; }

// ------------------------------------------------------------ certify

RunResult cmd_certify(const RunConfig& c) {
  const NormKind kind = parse_norm(c.norm);
  const GroupContext ctx(c.n, c.a, parse_variant(c.variant));
  SamplerSpec sampler;
  sampler.seed = c.seed;
  sampler.count = c.samples;
  CertOptions opts;
  opts.tol = c.tol;
  const CertReport rep = certify(ctx, QuasiNormSpec(kind, c.b), c.beta, sampler, opts);
  const RegionCheck region = theorem_region(kind, c.a, c.b, c.beta);

  RunResult r;
  r.exit_code = verdict_exit(rep.verdict);
  ordered_json near = ordered_json::array();
  for (const auto& z : rep.near_zero) near.push_back({{"point", point_json(z.point)}, {"normalized_det", z.normalized_det}});
  r.results = {
      {"verdict", to_string(rep.verdict)},
      {"sample_count", rep.sample_count},
      {"min_abs_normalized_det", rep.min_abs_normalized_det},
      {"argmin", point_json(rep.argmin)},
      {"sign_change", rep.sign_change},
      {"near_zero", near},
      {"theorem_region", {{"inside", region.inside}, {"description", region.description}}},
  };
  r.tolerances = {{"det", opts.tol}, {"near_miss_factor", opts.near_miss_factor}};
  r.csv_header = {"verdict", "min_abs_normalized_det", "sign_change", "near_zero_count", "region_inside", "region"};
  r.csv_rows.push_back({to_string(rep.verdict), format_number(rep.min_abs_normalized_det),
                        rep.sign_change ? "true" : "false", std::to_string(rep.near_zero.size()),
                        region.inside ? "true" : "false", region.description});
  return r;
}

// ------------------------------------------------------------ hessian-check

std::string revision_name(FormulaRevision rev) { return rev == FormulaRevision::Printed ? "printed" : "corrected"; }

RunResult cmd_hessian_check(const RunConfig& c) {
  std::vector<ClosedFormCase> cases;
  if (c.cases.empty()) {
    for (const auto& info : all_cases()) cases.push_back(info.id);
  } else {
    for (const auto& name : c.cases) cases.push_back(case_from_string(name));
  }
  HessianCheckOptions opts;
  opts.a_grid = c.a_grid;
  opts.beta_grid = c.beta_grid;
  opts.samples = c.samples;
  opts.seed = c.seed;
  opts.beta_shift = c.beta_shift;
  const auto rows = hessian_check(cases, opts);

  std::vector<ClosedFormCase> printed_cases;
  for (auto id : cases)
    if (case_info(id).has_printed_variant) printed_cases.push_back(id);
  opts.revision = FormulaRevision::Printed;
  opts.beta_shift = 0.0;
  const auto printed = hessian_check(printed_cases, opts);

  RunResult r;
  r.csv_header = {"case", "revision", "n", "a", "beta", "samples", "max_rel_error"};
  double worst = 0.0;
  ordered_json table = ordered_json::array();
  for (const auto& row : rows) {
    worst = std::max(worst, row.max_rel_error);
    table.push_back({{"case", to_string(row.id)},
                     {"n", row.n},
                     {"a", row.a},
                     {"beta", row.beta},
                     {"samples", row.samples},
                     {"max_rel_error", row.max_rel_error},
                     {"worst_point", point_json(row.worst)}});
  }
  // printed formulas are reported for comparison and never gate the exit code
  ordered_json mismatches = ordered_json::array();
  for (const auto& row : printed) {
    mismatches.push_back({{"case", to_string(row.id)},
                          {"n", row.n},
                          {"a", row.a},
                          {"beta", row.beta},
                          {"max_rel_error", row.max_rel_error},
                          {"agrees", row.max_rel_error <= c.tol},
                          {"worst_point", point_json(row.worst)}});
  }
  for (const auto* set : {&rows, &printed})
    for (const auto& row : *set)
      r.csv_rows.push_back({to_string(row.id), revision_name(row.revision), std::to_string(row.n),
                            format_number(row.a), format_number(row.beta), std::to_string(row.samples),
                            format_number(row.max_rel_error)});
  const bool pass = !rows.empty() && worst <= c.tol;
  r.results = {{"rows", table}, {"max_rel_error", worst}, {"pass", pass}, {"printed_revisions", mismatches}};
  r.tolerances = {{"max_rel_error", c.tol}};
  r.exit_code = pass ? kOk : kCheckFailed;
  return r;
}

// ------------------------------------------------------------ scan-degeneracy

RunResult cmd_scan(const RunConfig& c) {
  const NormKind kind = parse_norm(c.norm);
  const Variant variant = parse_variant(c.variant);
  const double cb = c_beta(c.beta);
  const double step = 2.0 * cb / c.steps;
  const int count = c.steps + 1;
  std::vector<CertReport> reps(static_cast<std::size_t>(count));
  CertOptions opts;
  opts.tol = c.tol;
  SamplerSpec sampler;
  sampler.seed = c.seed;
  sampler.count = c.samples;

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    const double a = std::sqrt(k * step);
    reps[static_cast<std::size_t>(k)] = certify(GroupContext(c.n, a * c.b, variant), QuasiNormSpec(kind, c.b), c.beta,
                                                sampler, opts);
  }

  RunResult r;
  r.csv_header = {"a2", "beta", "verdict", "min_abs_normalized_det", "near_zero_count", "slopes"};
  ordered_json rows = ordered_json::array();
  for (int k = 0; k < count; ++k) {
    const auto& rep = reps[static_cast<std::size_t>(k)];
    const double a2 = k * step;
    const std::vector<double> slopes =
        kind == NormKind::Rho1 && variant == Variant::Full ? paraboloid_slopes(std::sqrt(a2), c.beta) : std::vector<double>{};
    rows.push_back({{"a2", a2},
                    {"beta", c.beta},
                    {"verdict", to_string(rep.verdict)},
                    {"min_abs_normalized_det", rep.min_abs_normalized_det},
                    {"near_zero_count", rep.near_zero.size()},
                    {"slopes", slopes}});
    r.csv_rows.push_back({format_number(a2), format_number(c.beta), to_string(rep.verdict),
                          format_number(rep.min_abs_normalized_det), std::to_string(rep.near_zero.size()),
                          join(slopes)});
  }

  // first Certified -> DegeneracyFound transition away from the Euclidean row
  ordered_json flip = {{"found", false}};
  bool within = false;
  for (int k = 2; k < count; ++k) {
    if (reps[k - 1].verdict == Verdict::Certified && reps[k].verdict == Verdict::DegeneracyFound) {
      const double above = k * step;
      within = std::abs(above - cb) <= step * (1.0 + 1e-12);
      flip = {{"found", true}, {"a2_below", (k - 1) * step}, {"a2_above", above}, {"within_one_step", within}};
      break;
    }
  }
  const bool gated = kind == NormKind::Rho1 && variant == Variant::Full;
  r.results = {{"c_beta", cb}, {"step", step}, {"rows", rows}, {"flip", flip}, {"flip_checked", gated}};
  r.tolerances = {{"det", opts.tol}, {"near_miss_factor", opts.near_miss_factor}, {"flip_distance", step}};
  r.exit_code = !gated || within ? kOk : kCheckFailed;
  return r;
}

// ------------------------------------------------------------ opnorm-decay

ordered_json decay_points(const DecaySeries& s) {
  ordered_json pts = ordered_json::array();
  for (const auto& p : s.points)
    pts.push_back({{"lambda", p.scale},
                   {"norm", p.norm},
                   {"refined_norm", p.refined_norm},
                   {"grid_converged", p.grid_converged}});
  return pts;
}

RunResult cmd_decay_generic(const RunConfig& c) {
  GenericSetup setup;
  double target = -0.5;
  if (c.mode == "euclidean") {
    setup = euclidean_product_setup();
  } else {
    const GroupContext ctx(c.n, c.a, parse_variant(c.variant));
    setup = group_phase_setup(ctx, PhaseSpec(QuasiNormSpec(parse_norm(c.norm), c.b), c.beta), c.p0,
                              std::vector<double>(c.p0.size(), c.half));
    target = -(2.0 * c.n + 1.0) / 2.0;
  }
  PowerOptions popts;
  popts.seed = c.seed;
  DecaySeries s;
  try {
    s = generic_decay(setup, c.lambdas, c.grid, popts);
  } catch (const NyquistError& e) {
    std::ostringstream os;
    os << "grid " << c.grid << " does not resolve the requested lambdas; max feasible lambda = "
       << format_number(e.max_feasible());
    throw Infeasible(os.str(), {{"status", "nyquist"}, {"max_feasible_lambda", e.max_feasible()}});
  }

  RunResult r;
  const bool slope_ok = std::abs(s.slope - target) <= c.tol;
  const bool pass = slope_ok && s.grid_converged;
  r.results = {{"points", decay_points(s)},
               {"slope", s.slope},
               {"intercept", s.intercept},
               {"residual", s.residual},
               {"grid_converged", s.grid_converged},
               {"target_slope", target},
               {"pass", pass}};
  r.tolerances = {{"slope", c.tol}, {"grid", kGridTolerance}, {"power_rel", popts.rel_tol}};
  r.csv_header = {"lambda", "norm", "refined_norm", "grid_converged"};
  for (const auto& p : s.points)
    r.csv_rows.push_back({format_number(p.scale), format_number(p.norm), format_number(p.refined_norm),
                          p.grid_converged ? "true" : "false"});
  r.exit_code = pass ? kOk : kCheckFailed;
  return r;
}

RunResult cmd_decay_dyadic(const RunConfig& c) {
  const GroupContext ctx(c.n, c.a, parse_variant(c.variant));
  const QuasiNormSpec norm(parse_norm(c.norm), c.b);
  const int jmax = max_feasible_j(ctx, c.alpha, c.beta, norm, c.grid, c.in_half);
  const int asked = *std::max_element(c.js.begin(), c.js.end());
  if (asked > jmax) {
    throw Infeasible("grid " + std::to_string(c.grid) + " does not resolve j = " + std::to_string(asked) +
                         "; max feasible j = " + std::to_string(jmax),
                     {{"status", "nyquist"}, {"max_feasible_j", jmax}});
  }
  PowerOptions popts;
  popts.seed = c.seed;
  const DyadicSeries s = dyadic_series(ctx, c.alpha, c.beta, norm, c.js, c.grid, popts, c.in_half);

  RunResult r;
  ordered_json pts = ordered_json::array();
  for (const auto& p : s.points)
    pts.push_back({{"j", p.j},
                   {"norm", p.norm},
                   {"refined_norm", p.refined_norm},
                   {"grid_converged", p.grid_converged},
                   {"iterations", p.iterations}});
  const double target = c.alpha - (c.n + 0.5) * c.beta;
  bool shape_ok;
  if (critical(c)) {
    shape_ok = s.max_ratio_to_median <= c.tol;
  } else {
    shape_ok = !s.log2_increments.empty();
    for (double d : s.log2_increments) shape_ok = shape_ok && std::abs(d - target) <= c.tol;
  }
  const bool pass = shape_ok && s.grid_converged;
  r.results = {{"points", pts},
               {"log2_increments", s.log2_increments},
               {"median", s.median},
               {"max_ratio_to_median", s.max_ratio_to_median},
               {"grid_converged", s.grid_converged},
               {"check", critical(c) ? "uniformity" : "increment"},
               {"target_increment", target},
               {"max_feasible_j", jmax},
               {"pass", pass}};
  r.tolerances = {{critical(c) ? "ratio_to_median" : "increment", c.tol},
                  {"grid", kGridTolerance},
                  {"power_rel", popts.rel_tol}};
  r.csv_header = {"j", "norm", "refined_norm", "grid_converged", "iterations"};
  for (const auto& p : s.points)
    r.csv_rows.push_back({std::to_string(p.j), format_number(p.norm), format_number(p.refined_norm),
                          p.grid_converged ? "true" : "false", std::to_string(p.iterations)});
  r.exit_code = pass ? kOk : kCheckFailed;
  return r;
}

// ------------------------------------------------------------ argument parsing

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--tol", c.tol, "Tolerance (meaning and default depend on the subcommand)");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  sub->add_option("--output,-o", c.output, "Output file (default: stdout)");
}

void add_group(CLI::App* sub, RunConfig& c) {
  sub->add_option("--n", c.n, "Group dimension parameter")->capture_default_str();
  sub->add_option("--a", c.a, "Group law coefficient")->capture_default_str();
  sub->add_option("--b", c.b, "Norm scale")->capture_default_str();
  sub->add_option("--beta", c.beta, "Phase exponent")->capture_default_str();
  sub->add_option("--norm", c.norm, "koranyi, minkowski, rho3 or max")->capture_default_str();
  sub->add_option("--variant", c.variant, "full or polarized")->capture_default_str();
}

void write_document(const RunConfig& c, const RunResult& r, std::ostream& out) {
  if (c.format == "csv") {
    out << to_csv(r.csv_header, r.csv_rows);
  } else {
    out << make_document(c, r).dump(2) << '\n';
  }
}

int emit(const RunConfig& c, const RunResult& r, std::ostream& out, std::ostream& err) {
  if (c.output.empty()) {
    write_document(c, r, out);
    return r.exit_code;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) {
    err << "cannot open " << c.output << " for writing\n";
    return kDataError;
  }
  write_document(c, r, f);
  return r.exit_code;
}

}  // namespace

// ------------------------------------------------------------ public

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto record = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      const std::string& f = fields[i];
      if (f.find_first_of(",\"\r\n") == std::string::npos) {
        out += f;
        continue;
      }
      out += '"';
      for (char ch : f) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    }
    out += "\r\n";
  };
  record(header);
  for (const auto& r : rows) record(r);
  return out;
}

std::string git_describe() { return HEISOSC_GIT_DESCRIBE; }

ordered_json config_to_json(const RunConfig& c) {
  return {{"subcommand", c.subcommand},
          {"n", c.n},
          {"a", c.a},
          {"b", c.b},
          {"beta", c.beta},
          {"alpha", c.alpha},
          {"norm", c.norm},
          {"variant", c.variant},
          {"mode", c.mode},
          {"grid", c.grid},
          {"lambdas", c.lambdas},
          {"js", c.js},
          {"p0", c.p0},
          {"half", c.half},
          {"in_half", c.in_half},
          {"samples", c.samples},
          {"steps", c.steps},
          {"cases", c.cases},
          {"a_grid", c.a_grid},
          {"beta_grid", c.beta_grid},
          {"beta_shift", c.beta_shift},
          {"seed", c.seed},
          {"tol", c.tol},
          {"format", c.format},
          {"output", c.output}};
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  RunConfig c;
  try {
    c.subcommand = j.value("subcommand", c.subcommand);
    c.n = j.value("n", c.n);
    c.a = j.value("a", c.a);
    c.b = j.value("b", c.b);
    c.beta = j.value("beta", c.beta);
    c.alpha = j.value("alpha", c.alpha);
    c.norm = j.value("norm", c.norm);
    c.variant = j.value("variant", c.variant);
    c.mode = j.value("mode", c.mode);
    c.grid = j.value("grid", c.grid);
    c.lambdas = j.value("lambdas", c.lambdas);
    c.js = j.value("js", c.js);
    c.p0 = j.value("p0", c.p0);
    c.half = j.value("half", c.half);
    c.in_half = j.value("in_half", c.in_half);
    c.samples = j.value("samples", c.samples);
    c.steps = j.value("steps", c.steps);
    c.cases = j.value("cases", c.cases);
    c.a_grid = j.value("a_grid", c.a_grid);
    c.beta_grid = j.value("beta_grid", c.beta_grid);
    c.beta_shift = j.value("beta_shift", c.beta_shift);
    c.seed = j.value("seed", c.seed);
    c.tol = j.value("tol", c.tol);
    c.format = j.value("format", c.format);
    c.output = j.value("output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config field: ") + e.what());
  }
  return c;
}

void resolve(RunConfig& c) {
  require(std::find(kSubcommands.begin(), kSubcommands.end(), c.subcommand) != kSubcommands.end(),
          "unknown subcommand '" + c.subcommand + "'");
  require(c.n >= 1, "--n must be at least 1");
  require(std::isfinite(c.a), "--a must be finite");
  require(c.b > 0.0 && std::isfinite(c.b), "--b must be positive");
  require(c.beta > 0.0 && std::isfinite(c.beta), "--beta must be positive");
  require(c.samples >= 1, "--samples must be at least 1");
  require(c.format == "json" || c.format == "csv", "--format must be json or csv");
  require(c.tol >= 0.0, "--tol must be positive");
  const NormKind kind = parse_norm(c.norm);
  parse_variant(c.variant);

  if (c.subcommand == "certify" || c.subcommand == "scan-degeneracy") {
    require(is_smooth(kind), "the max norm has no Hessian; pick koranyi, minkowski or rho3");
    if (c.tol == 0.0) c.tol = CertOptions{}.tol;
    require(c.steps >= 1, "--steps must be at least 1 (empty sweep)");
  } else if (c.subcommand == "hessian-check") {
    for (const auto& name : c.cases) {
      try {
        case_from_string(name);
      } catch (const Error&) {
        throw UsageError("unknown case '" + name + "'");
      }
    }
    require(!c.a_grid.empty() && !c.beta_grid.empty(), "--a-grid and --beta-grid must not be empty");
    for (double b : c.beta_grid) require(b > 0.0, "--beta-grid values must be positive");
    require(std::isfinite(c.beta_shift), "--beta-shift must be finite");
    if (c.tol == 0.0) c.tol = 1e-8;
  } else {
    require(c.mode == "generic" || c.mode == "dyadic" || c.mode == "euclidean",
            "--mode must be generic, dyadic or euclidean");
    require(is_smooth(kind), "oscillatory experiments need a smooth norm");
    if (c.mode == "dyadic") {
      require(c.n == 1, "dyadic experiments are limited to n = 1");
      require(c.alpha > 0.0, "--alpha must be positive");
      require(c.js.size() >= 2, "--js needs at least two values");
      for (int j : c.js) require(j >= 0, "--js values must be nonnegative");
      require(c.in_half > 0.0, "--in-half must be positive");
      if (c.grid == 0) c.grid = 12;
      if (c.tol == 0.0) c.tol = critical(c) ? 2.0 : 0.15;
    } else {
      require(c.lambdas.size() >= 3, "--lambdas needs at least three values for a slope fit");
      for (double l : c.lambdas) require(l > 0.0, "--lambdas values must be positive");
      if (c.mode == "generic") {
        require(c.n == 1, "generic group experiments are limited to n = 1");
        require(c.a != 0.0, "--a must be nonzero for the group experiment");
        require(c.half > 0.0, "--half must be positive");
        if (c.p0.empty()) {
          c.p0.assign(static_cast<std::size_t>(2 * c.n + 1), 0.0);
          c.p0.back() = 1.0;
        }
        require(c.p0.size() == static_cast<std::size_t>(2 * c.n + 1), "--p0 needs 2n+1 coordinates");
        if (c.grid == 0) c.grid = 16;
        if (c.tol == 0.0) c.tol = 0.2;
      } else {
        if (c.grid == 0) c.grid = 128;
        if (c.tol == 0.0) c.tol = 0.1;
      }
    }
    require(c.grid >= 4, "--grid must be at least 4");
  }
}

RunResult run(const RunConfig& c) {
  if (c.subcommand == "certify") return cmd_certify(c);
  if (c.subcommand == "hessian-check") return cmd_hessian_check(c);
  if (c.subcommand == "scan-degeneracy") return cmd_scan(c);
  return c.mode == "dyadic" ? cmd_decay_dyadic(c) : cmd_decay_generic(c);
}

ordered_json make_document(const RunConfig& c, const RunResult& r) {
  return {{"config", config_to_json(c)},
          {"results", r.results},
          {"provenance", {{"seed", c.seed}, {"git-describe", git_describe()}, {"tolerances", r.tolerances}}}};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-Hessian certification and oscillatory operator experiments on Heisenberg-type groups",
               "heisosc"};
  app.require_subcommand(1, 1);
  RunConfig c;
  std::string replay_path;

  auto* cert = app.add_subcommand("certify", "Search for zeros of the normalized mixed-Hessian determinant");
  add_group(cert, c);
  cert->add_option("--samples", c.samples, "Sample points on the unit quasi-sphere")->capture_default_str();

  auto* hess = app.add_subcommand("hessian-check", "Compare closed-form determinants with automatic differentiation");
  hess->add_option("--cases", c.cases, "Comma-separated case names (default: all)")->delimiter(',');
  hess->add_option("--a-grid", c.a_grid, "Values of a")->delimiter(',')->capture_default_str();
  hess->add_option("--beta-grid", c.beta_grid, "Values of beta")->delimiter(',')->capture_default_str();
  hess->add_option("--samples", c.samples, "Annulus points per parameter set");
  hess->add_option("--beta-shift", c.beta_shift, "Test mode: evaluate closed forms at beta + shift");

  auto* scan = app.add_subcommand("scan-degeneracy", "Sweep a^2 over [0, 2 C_beta] and certify each value");
  add_group(scan, c);
  scan->add_option("--steps", c.steps, "Sweep intervals")->capture_default_str();
  scan->add_option("--samples", c.samples, "Sample points per certification")->capture_default_str();

  auto* dec = app.add_subcommand("opnorm-decay", "Operator norms of oscillatory integral operators");
  add_group(dec, c);
  dec->add_option("--mode", c.mode, "generic, dyadic or euclidean")->capture_default_str();
  dec->add_option("--alpha", c.alpha, "Dyadic amplitude exponent")->capture_default_str();
  dec->add_option("--grid", c.grid, "Points per axis (default 16 generic, 12 dyadic, 128 euclidean)");
  dec->add_option("--lambdas", c.lambdas, "Oscillation parameters")->delimiter(',');
  dec->add_option("--js", c.js, "Dyadic scales")->delimiter(',');
  dec->add_option("--p0", c.p0, "Output box centre (default (0,...,0,1))")->delimiter(',');
  dec->add_option("--half", c.half, "Generic box half-width")->capture_default_str();
  dec->add_option("--in-half", c.in_half, "Dyadic input box half-width")->capture_default_str();

  for (auto* sub : {cert, hess, scan, dec}) add_common(sub, c);

  auto* rep = app.add_subcommand("replay", "Rerun the configuration stored in a JSON document");
  rep->add_option("document", replay_path, "JSON document written by an earlier run")->required();
  rep->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  rep->add_option("--output,-o", c.output, "Output file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (rep->parsed()) {
      std::ifstream f(replay_path);
      if (!f) throw UsageError("cannot read " + replay_path);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError(replay_path + " is not valid JSON: " + e.what());
      }
      if (!doc.contains("config")) throw UsageError(replay_path + " has no config object");
      RunConfig stored = config_from_json(doc["config"]);
      if (rep->count("--format")) stored.format = c.format;
      stored.output = c.output;
      c = std::move(stored);
    } else {
      c.subcommand = app.get_subcommands().front()->get_name();
    }
    resolve(c);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    return emit(c, run(c), out, err);
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << "\n";
    RunResult r;
    r.exit_code = kDataError;
    r.results = e.results;
    r.results["message"] = e.what();
    r.tolerances = {{"tol", c.tol}};
    r.csv_header = {"status", "message"};
    r.csv_rows = {{"nyquist", e.what()}};
    emit(c, r, out, err);
    return kDataError;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace heisosc::cli
