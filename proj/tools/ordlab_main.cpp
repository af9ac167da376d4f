#include <iostream>

#include "CLI11.hpp"
#include "ordlab/cli.hpp"
#include "ordlab/errors.hpp"

namespace {

struct Raw {
  std::string metric;
  int n = 0;
  std::size_t points = 10;
  std::uint64_t seed = 42;
  double tol = 0.0;
  std::string out;
  std::string format = "json";
  std::string mode = "analytic";
  bool no_timestamp = false;
  std::string formula = "five-term";
  std::string ordering = "conformal";
  int n_max = 3;
  std::string m = "0";
  int grid = 4000;
  std::string family;
  int expect_rank = -1;
  std::string chain = "1,2,3,4";
  double omega = 1.0;
};

void add_common(CLI::App* sub, Raw& raw) {
  sub->add_option("--metric", raw.metric, "catalog metric label");
  sub->add_option("--points", raw.points, "number of sample points")->check(CLI::PositiveNumber);
  sub->add_option("--seed", raw.seed, "sampling seed");
  sub->add_option("--tol", raw.tol, "tolerance override");
  sub->add_option("--out", raw.out, "report file (stdout when omitted)");
  sub->add_option("--format", raw.format, "json, csv or pretty")->check(CLI::IsMember({"json", "csv", "pretty"}));
  sub->add_option("--mode", raw.mode, "analytic or numeric metric derivatives")
      ->check(CLI::IsMember({"analytic", "numeric"}));
  sub->add_flag("--no-timestamp", raw.no_timestamp, "omit the timestamp field");
}

bool given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-ordering laboratory: curvature, orderings, exponents, hydrogen spectra"};
  app.require_subcommand(1);
  Raw raw;

  auto* curvature = app.add_subcommand("curvature", "closed-form curvature against the Christoffel route");
  add_common(curvature, raw);
  curvature->add_option("--formula", raw.formula, "five-term or six-term")
      ->check(CLI::IsMember({"five-term", "six-term"}));

  auto* potential = app.add_subcommand("potential", "effective potential and drift of an ordering");
  add_common(potential, raw);
  potential->add_option("--ordering", raw.ordering, "lb, naive, conformal-lb, conformal or power:a:b");

  auto* exponents = app.add_subcommand("exponents", "exact exponents and the numeric two-root scan");
  add_common(exponents, raw);
  exponents->add_option("--n", raw.n, "dimension")->check(CLI::Range(2, 6));

  auto* hydrogen = app.add_subcommand("hydrogen", "naive-ordering hydrogen spectrum");
  add_common(hydrogen, raw);
  hydrogen->add_option("--n-max", raw.n_max, "largest principal quantum number")->check(CLI::PositiveNumber);
  hydrogen->add_option("--m", raw.m, "magnetic quantum numbers, e.g. 0,1 or 0..2");
  hydrogen->add_option("--grid", raw.grid, "radial grid points")->check(CLI::Range(200, 1000000));

  auto* rank = app.add_subcommand("rank", "numerical rank of the seven curvature terms");
  add_common(rank, raw);
  rank->add_option("--family", raw.family, "comma-separated metric labels with lo..hi ranges");
  rank->add_option("--expect-rank", raw.expect_rank, "fail unless the rank equals this");

  auto* identities = app.add_subcommand("identities", "exact metric matrix identities");
  add_common(identities, raw);
  identities->add_option("--chain", raw.chain, "chain lengths in 1..4");

  auto* oscillator = app.add_subcommand("oscillator", "similarity ordering of the free particle");
  add_common(oscillator, raw);
  oscillator->add_option("--omega", raw.omega, "oscillator frequency");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ordlab::RunConfig config;
  try {
    config.command = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommands().front();
    config.metric = raw.metric;
    if (given(sub, "--n")) config.dimension = raw.n;
    config.points = raw.points;
    config.seed = raw.seed;
    if (given(sub, "--tol")) config.tolerance = raw.tol;
    config.out = raw.out;
    config.format = ordlab::parse_output_format(raw.format);
    config.mode = raw.mode == "numeric" ? ordlab::DerivativeMode::numeric : ordlab::DerivativeMode::analytic;
    config.timestamp = !raw.no_timestamp;
    config.formula =
        raw.formula == "six-term" ? ordlab::CurvatureFormula::six_term : ordlab::CurvatureFormula::five_term;
    config.ordering = raw.ordering;
    config.n_max = raw.n_max;
    config.ms = ordlab::parse_int_list(raw.m);
    config.grid = raw.grid;
    config.family = raw.family;
    if (given(sub, "--expect-rank")) config.expect_rank = raw.expect_rank;
    config.chains = ordlab::parse_int_list(raw.chain);
    config.omega = raw.omega;
  } catch (const ordlab::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const ordlab::RunResult result = ordlab::run(config);
  if (config.out.empty()) std::cout << result.body;
  for (const auto& f : result.failures) std::cerr << (result.exit_code == 2 ? "error: " : "check failed: ") << f << "\n";
  return result.exit_code;
}
