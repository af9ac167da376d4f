#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ordlab/geometry.hpp"

namespace ordlab {

enum class OutputFormat { json, csv, pretty };

const char* to_string(OutputFormat f);
OutputFormat parse_output_format(std::string_view s);

/// One reproducible run. Fields that do not apply to a command are ignored;
/// unset optional fields take command-specific defaults that are written
/// back into the report.
struct RunConfig {
  std::string command;  // curvature potential exponents hydrogen rank identities oscillator
  std::string metric;
  std::optional<int> dimension;
  std::size_t points = 10;
  std::uint64_t seed = 42;
  std::optional<double> tolerance;
  std::string out;  // empty: body only returned
  OutputFormat format = OutputFormat::json;
  DerivativeMode mode = DerivativeMode::analytic;
  bool timestamp = true;

  // curvature
  CurvatureFormula formula = CurvatureFormula::five_term;
  // potential: lb, naive, conformal-lb, conformal, power:a:b
  std::string ordering = "conformal";
  // hydrogen
  int n_max = 3;
  std::vector<int> ms{0};
  int grid = 4000;
  // rank
  std::string family;
  std::optional<int> expect_rank;
  // identities
  std::vector<int> chains{1, 2, 3, 4};
  // oscillator
  double omega = 1.0;
};

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 failed check, 2 usage or input error
  std::string body;
  std::vector<std::string> failures;
};

/// Runs one command, renders the report in the requested format and writes
/// it to config.out when set. Never throws: input errors give exit code 2
/// with the message in `failures`.
RunResult run(const RunConfig& config);

/// "0,1,3..5" -> {0, 1, 3, 4, 5}. Throws ParseError.
std::vector<int> parse_int_list(std::string_view text);

}  // namespace ordlab
