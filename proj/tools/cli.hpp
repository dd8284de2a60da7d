#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace heisosc::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kDegeneracyFound = 2,
  kInconclusive = 3,
  kUsage = 64,
  kDataError = 65,
};

/// Everything a run depends on. Unset tolerances and grids are resolved per
/// subcommand before the run, and the resolved values are what gets echoed.
struct RunConfig {
  std::string subcommand;
  int n = 1;
  double a = 1.0;
  double b = 1.0;
  double beta = 1.0;
  double alpha = 1.5;
  std::string norm = "koranyi";
  std::string variant = "full";
  std::string mode = "generic";  // opnorm-decay: generic, dyadic, euclidean
  int grid = 0;
  std::vector<double> lambdas{8.0, 16.0, 32.0};
  std::vector<int> js{0, 1, 2, 3};
  std::vector<double> p0;  // generic output box centre
  double half = 0.2;
  double in_half = 0.5;
  int samples = 256;
  int steps = 40;
  std::vector<std::string> cases;  // hessian-check, empty for all
  std::vector<double> a_grid{0.0, 0.3, 1.0, 3.0};
  std::vector<double> beta_grid{0.5, 1.0, 2.0};
  double beta_shift = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string format = "json";
  std::string output;
};

nlohmann::ordered_json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// Fills unset defaults and checks the subcommand preconditions. Throws UsageError.
void resolve(RunConfig& c);

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Result of one subcommand before serialisation.
struct RunResult {
  int exit_code = kOk;
  nlohmann::ordered_json results;
  nlohmann::ordered_json tolerances;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

RunResult run(const RunConfig& c);

nlohmann::ordered_json make_document(const RunConfig& c, const RunResult& r);

/// RFC 4180: CRLF records, fields quoted when they contain a comma, quote or line break.
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);
/// Shortest decimal that round-trips; nan and inf spelled out.
std::string format_number(double v);

std::string git_describe();

/// Full command line (without the program name) to exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heisosc::cli
