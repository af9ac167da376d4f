#include "ordlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "ordlab/basis.hpp"
#include "ordlab/catalog.hpp"
#include "ordlab/conformal.hpp"
#include "ordlab/errors.hpp"
#include "ordlab/hydrogen.hpp"
#include "ordlab/operators.hpp"
#include "ordlab/tolerances.hpp"

namespace ordlab {

const char* to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::json: return "json";
    case OutputFormat::csv: return "csv";
    case OutputFormat::pretty: return "pretty";
  }
  return "?";
}

OutputFormat parse_output_format(std::string_view s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "pretty" || s == "pretty-table") return OutputFormat::pretty;
  throw ParseError("unknown output format '" + std::string(s) + "'");
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  const auto parse_one = [&](std::string_view s) {
    const std::string str(s);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(str, &used);
    } catch (const std::logic_error&) {
      throw ParseError("malformed integer '" + str + "'");
    }
    if (used != str.size()) throw ParseError("malformed integer '" + str + "'");
    return v;
  };
  if (text.empty()) throw ParseError("empty integer list");
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t dots = item.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_one(item));
    } else {
      const int lo = parse_one(item.substr(0, dots));
      const int hi = parse_one(item.substr(dots + 2));
      if (hi < lo) throw ParseError("empty range '" + std::string(item) + "'");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    start = comma + 1;
  }
  return out;
}

namespace {

using nlohmann::json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

struct Outcome {
  json result;
  Table table;
  std::vector<std::string> failures;
  json resolved = json::object();  // defaults filled in by the command
};

std::string render_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::string render_pretty(const Table& t, const std::string& title, const std::vector<std::string>& failures) {
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
  std::vector<std::vector<std::string>> cells = t.rows;
  for (auto& row : cells) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      // shorter numbers read better in a terminal
      char* end = nullptr;
      const double v = std::strtod(row[i].c_str(), &end);
      if (end && *end == '\0' && row[i].find('.') != std::string::npos) {
        std::ostringstream os;
        os << std::setprecision(10) << v;
        row[i] = os.str();
      }
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::ostringstream os;
  os << title << "\n";
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << r[i];
    }
    os << "\n";
  };
  line(t.header);
  for (const auto& r : cells) line(r);
  os << (failures.empty() ? "PASS" : "FAIL") << "\n";
  for (const auto& f : failures) os << "  " << f << "\n";
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

MetricField load_metric(const RunConfig& c, const std::string& label) {
  if (label.empty()) throw ParseError("command '" + c.command + "' needs --metric");
  MetricField m = make_metric(label);
  return c.mode == DerivativeMode::numeric ? m.as_numeric() : m;
}

// ---------------------------------------------------------------- curvature

Outcome run_curvature(const RunConfig& c) {
  Outcome o;
  const MetricField m = load_metric(c, c.metric);
  const DiffConfig cfg;
  const double tol = c.tolerance.value_or(tolerances_for(m.derivative_mode()).curvature);
  o.resolved["tolerance"] = tol;
  const auto samples = sample_points(m, c.points, c.seed);
  const AuditReport audit = formula_audit(m, samples, cfg, tol, c.formula);
  o.result["audit"] = to_json(audit);
  o.result["formula"] = c.formula == CurvatureFormula::five_term ? "five-term" : "six-term";

  std::vector<double> conformal;
  if (m.conformally_flat() && m.dimension() >= 2) {
    json rows = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const MetricJet jet = metric_jet(m, samples[i], cfg);
      const double conf = conformal_ricci(conformal_jet(jet));
      const double chr = audit.christoffel[i];
      const double rel = std::abs(conf - chr) / std::max(1.0, std::abs(chr));
      conformal.push_back(conf);
      rows.push_back({{"conformal", conf}, {"christoffel", chr}, {"rel_diff", rel}});
      if (rel > tol) {
        o.failures.push_back("point " + std::to_string(i) + ": conformal curvature " + fmt(conf) +
                             " vs Christoffel " + fmt(chr));
      }
    }
    o.result["conformal_check"] = rows;
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!audit.point_pass[i]) {
      o.failures.push_back("point " + std::to_string(i) + ": closed form " + fmt(audit.direct[i]) +
                           " vs Christoffel " + fmt(audit.christoffel[i]) + " (missing term " +
                           fmt(audit.missing_term[i]) + ")");
    }
  }

  const int n = m.dimension();
  for (int k = 0; k < n; ++k) o.table.header.push_back("x" + std::to_string(k));
  for (const char* h : {"direct", "christoffel", "abs_diff", "rel_diff", "missing_term", "pass"}) {
    o.table.header.emplace_back(h);
  }
  if (!conformal.empty()) o.table.header.emplace_back("conformal");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<std::string> row;
    for (int k = 0; k < n; ++k) row.push_back(fmt(samples[i][k]));
    row.push_back(fmt(audit.direct[i]));
    row.push_back(fmt(audit.christoffel[i]));
    row.push_back(fmt(audit.abs_diff[i]));
    row.push_back(fmt(audit.rel_diff[i]));
    row.push_back(fmt(audit.missing_term[i]));
    row.emplace_back(audit.point_pass[i] ? "true" : "false");
    if (!conformal.empty()) row.push_back(fmt(conformal[i]));
    o.table.rows.push_back(std::move(row));
  }
  return o;
}

// ---------------------------------------------------------------- potential

OperatorSpec parse_ordering(const std::string& text, int n) {
  if (text == "lb") return OperatorSpec::laplace_beltrami();
  if (text == "naive") return OperatorSpec::naive();
  if (text == "conformal-lb") return OperatorSpec::conformal_lb();
  if (text == "conformal") return OperatorSpec::power(1.0 / n - 0.5, 0.25 - 0.5 / n);
  if (text.rfind("power:", 0) == 0) {
    const auto colon = text.find(':', 6);
    if (colon == std::string::npos) throw ParseError("ordering 'power:a:b' needs two exponents");
    try {
      std::size_t ua = 0;
      std::size_t ub = 0;
      const std::string sa = text.substr(6, colon - 6);
      const std::string sb = text.substr(colon + 1);
      const double a = std::stod(sa, &ua);
      const double b = std::stod(sb, &ub);
      if (ua != sa.size() || ub != sb.size()) throw std::invalid_argument(text);
      return OperatorSpec::power(a, b);
    } catch (const std::logic_error&) {
      throw ParseError("malformed ordering '" + text + "'");
    }
  }
  throw ParseError("unknown ordering '" + text + "' (lb, naive, conformal-lb, conformal, power:a:b)");
}

Outcome run_potential(const RunConfig& c) {
  Outcome o;
  const MetricField m = load_metric(c, c.metric);
  const int n = m.dimension();
  const OperatorSpec spec = parse_ordering(c.ordering, n);
  const DiffConfig cfg;
  const double tol = c.tolerance.value_or(tolerances_for(m.derivative_mode()).operator_);
  o.resolved["tolerance"] = tol;
  o.resolved["route"] = m.derivative_mode() == DerivativeMode::analytic ? "expanded" : "nested";
  const auto samples = sample_points(m, c.points, c.seed);
  const auto batch = effective_potential_batch(spec, m, samples, cfg);
  const CurvatureFit fit = fit_curvature_coefficient(batch);

  const bool power = spec.kind() == OrderingKind::power;
  const bool drift_free = spec.kind() == OrderingKind::laplace_beltrami ||
                          spec.kind() == OrderingKind::conformal_lb ||
                          (power && spec.alpha_tilde() + 2.0 * spec.beta_tilde() == 0.0);
  // potential predicted as a multiple of R, when known
  std::optional<double> xi;
  if (spec.kind() == OrderingKind::laplace_beltrami) xi = 0.0;
  if (spec.kind() == OrderingKind::conformal_lb) xi = conformal_coupling(n);
  if (power && spec.alpha_tilde() == 0.0 && spec.beta_tilde() == 0.0) xi = 0.0;
  if (power && m.conformally_flat() && n >= 2 && c.ordering == "conformal") xi = conformal_coupling(n);

  json reports = json::array();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& r = batch[i];
    reports.push_back(to_json(r));
    if (xi) {
      const double expected = *xi * r.ricci;
      if (std::abs(r.v_eff - expected) > tol * std::max(1.0, std::abs(expected))) {
        o.failures.push_back("point " + std::to_string(i) + ": V_eff " + fmt(r.v_eff) + " vs expected " + fmt(expected));
      }
    }
    if (drift_free && r.drift.lpNorm<Eigen::Infinity>() > tol) {
      o.failures.push_back("point " + std::to_string(i) + ": drift " + fmt(r.drift.lpNorm<Eigen::Infinity>()));
    }
  }
  o.result["ordering"] = spec.to_json();
  o.result["reports"] = reports;
  o.result["fit"] = {{"C", fit.c},
                     {"residual", fit.residual},
                     {"relative_residual", fit.relative_residual},
                     {"points", fit.points}};
  o.result["expected_C"] = xi ? json(-*xi) : json(nullptr);
  o.result["drift_free_expected"] = drift_free;

  for (int k = 0; k < n; ++k) o.table.header.push_back("point_" + std::to_string(k));
  o.table.header.emplace_back("V_eff");
  for (int k = 0; k < n; ++k) o.table.header.push_back("drift_" + std::to_string(k));
  for (const char* h : {"ricci", "fitted_C", "residual"}) o.table.header.emplace_back(h);
  for (const auto& r : batch) {
    std::vector<std::string> row;
    for (int k = 0; k < n; ++k) row.push_back(fmt(r.point[k]));
    row.push_back(fmt(r.v_eff));
    for (int k = 0; k < n; ++k) row.push_back(fmt(r.drift[k]));
    row.push_back(fmt(r.ricci));
    row.push_back(r.fitted_c ? fmt(*r.fitted_c) : std::string());
    row.push_back(fmt(r.residual));
    o.table.rows.push_back(std::move(row));
  }
  return o;
}

// ---------------------------------------------------------------- exponents

Outcome run_exponents(const RunConfig& c) {
  Outcome o;
  std::string label = c.metric;
  int n = 0;
  if (c.dimension) {
    n = *c.dimension;
    if (label.empty()) label = "conf-gauss:" + std::to_string(n) + ":0.25";
  }
  const MetricField m = load_metric(c, label);
  if (!c.dimension) n = m.dimension();
  if (m.dimension() != n) throw ParseError("--n does not match the metric dimension");
  o.resolved["metric"] = label;
  o.resolved["n"] = n;
  const double c_tol = c.tolerance.value_or(1e-4);
  const double beta_tol = 1e-8;
  o.resolved["tolerance"] = c_tol;
  o.resolved["beta_tolerance"] = beta_tol;

  const auto solutions = solve_exponents(n);
  const auto samples = sample_points(m, c.points, c.seed);
  const VerificationReport report = verify_two_solutions(n, m, samples, DiffConfig{});

  json exact = json::array();
  for (const auto& s : solutions) exact.push_back(to_json(s));
  o.result["exact"] = exact;
  o.result["verification"] = to_json(report);

  if (report.root_count() != 2) {
    o.failures.push_back("found " + std::to_string(report.root_count()) + " roots (with multiplicity), expected 2");
  }
  if (!report.drift_condition_checked) o.failures.push_back("drift does not vanish exactly on alpha + 2 beta = 0");
  for (const auto& s : solutions) {
    const double beta = boost::rational_cast<double>(s.beta_tilde);
    const double cc = boost::rational_cast<double>(s.c);
    const ExponentRoot* best = nullptr;
    for (const auto& r : report.roots) {
      if (!best || std::abs(r.beta - beta) < std::abs(best->beta - beta)) best = &r;
    }
    if (!best || std::abs(best->beta - beta) > beta_tol) {
      o.failures.push_back(std::string("no root within ") + fmt(beta_tol) + " of beta = " + fmt(beta));
    } else if (std::abs(best->fitted_c - cc) > c_tol) {
      o.failures.push_back("fitted C " + fmt(best->fitted_c) + " at beta = " + fmt(beta) + " differs from " + fmt(cc));
    }
  }

  o.table.header = {"beta", "alpha", "fitted_C", "residual", "multiplicity"};
  for (const auto& r : report.roots) {
    o.table.rows.push_back({fmt(r.beta), fmt(r.alpha), fmt(r.fitted_c), fmt(r.residual), fmt_int(r.multiplicity)});
  }
  return o;
}

// ---------------------------------------------------------------- hydrogen

Outcome run_hydrogen(const RunConfig& c) {
  Outcome o;
  const double tol = c.tolerance.value_or(1e-5);
  o.resolved["tolerance"] = tol;
  o.resolved["min_order"] = 1.8;
  SpectrumOptions options;
  options.radial_grid = c.grid;
  options.angular_grid = std::max(200, c.grid / 2);
  o.resolved["radial_grid"] = options.radial_grid;
  o.resolved["angular_grid"] = options.angular_grid;
  const SpectrumTable table = naive_spectrum(c.n_max, c.ms, options);
  o.result = to_json(table);
  for (const auto& r : table.rows) {
    const std::string tag = "(" + std::to_string(r.qn.n) + "," + std::to_string(r.qn.l) + "," +
                            std::to_string(r.qn.m) + ")";
    if (r.abs_err > tol) o.failures.push_back(tag + ": |E_numeric - E_closed| = " + fmt(r.abs_err));
    if (r.qn.l == 0 && r.qn.m == 0 && r.e_closed != standard_energy(r.qn.n)) {
      o.failures.push_back(tag + ": closed form differs from -1/(2n^2)");
    }
    if (r.order < 1.8) o.failures.push_back(tag + ": convergence order " + fmt(r.order));
  }
  o.table.header = {"n", "l", "m", "E_closed", "E_numeric", "abs_err", "rel_err"};
  for (const auto& r : table.rows) {
    o.table.rows.push_back({fmt_int(r.qn.n), fmt_int(r.qn.l), fmt_int(r.qn.m), fmt(r.e_closed), fmt(r.e_numeric),
                            fmt(r.abs_err), fmt(r.rel_err)});
  }
  return o;
}

// ---------------------------------------------------------------- rank

Outcome run_rank(const RunConfig& c) {
  Outcome o;
  std::string family = !c.family.empty() ? c.family : c.metric;
  if (family.empty()) family = "poly-perturb:3:1..4:0.1";
  o.resolved["family"] = family;
  const double threshold = c.tolerance.value_or(kRankThreshold);
  o.resolved["tolerance"] = threshold;
  std::vector<MetricField> metrics = make_metric_family(family);
  if (c.mode == DerivativeMode::numeric) {
    for (auto& m : metrics) m = m.as_numeric();
  }
  const RankReport report = independence_rank(metrics, c.points, DiffConfig{}, c.seed, threshold);
  o.result = to_json(report);
  if (c.expect_rank && report.rank != *c.expect_rank) {
    o.failures.push_back("rank " + std::to_string(report.rank) + ", expected " + std::to_string(*c.expect_rank));
  }
  o.table.header = {"index", "singular_value"};
  for (std::size_t i = 0; i < report.singular_values.size(); ++i) {
    o.table.rows.push_back({fmt_int(i), fmt(report.singular_values[i])});
  }
  return o;
}

// ---------------------------------------------------------------- identities

Outcome run_identities(const RunConfig& c) {
  Outcome o;
  const MetricField m = load_metric(c, c.metric);
  const double tol = c.tolerance.value_or(kIdentityTolerance);
  o.resolved["tolerance"] = tol;
  const auto samples = sample_points(m, c.points, c.seed);
  json reports = json::array();
  o.table.header = {"point", "check", "lengths", "expected", "deviation"};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const IdentityReport r = verify_matrix_identities(metric_jet(m, samples[i], DiffConfig{}), c.chains);
    reports.push_back(to_json(r));
    for (const auto& check : r.checks) {
      std::string lengths;
      for (std::size_t k = 0; k < check.lengths.size(); ++k) lengths += (k ? ";" : "") + std::to_string(check.lengths[k]);
      o.table.rows.push_back({fmt_int(i), check.name, lengths, fmt(check.expected), fmt(check.deviation)});
      if (check.deviation > tol) {
        o.failures.push_back("point " + std::to_string(i) + ": " + check.name + " [" + lengths + "] deviates by " +
                             fmt(check.deviation));
      }
    }
  }
  o.result["reports"] = reports;
  return o;
}

// ---------------------------------------------------------------- oscillator

Outcome run_oscillator(const RunConfig& c) {
  Outcome o;
  const double w = c.omega;
  if (!(w > 0.0)) throw ParseError("--omega must be positive");
  const double tol = c.tolerance.value_or(1e-6);
  o.resolved["tolerance"] = tol;
  const ScalarField h = fields::exp_quadratic(1, -0.5 * w);
  const ScalarField f = fields::exp_quadratic(1, w);  // 1 / h^2
  std::mt19937_64 rng(c.seed);
  std::vector<Point> xs;
  for (std::size_t i = 0; i < c.points; ++i) xs.push_back(Point::Constant(1, -2.0 + 4.0 * unit_uniform(rng())));
  const OperatorSpec spec = similarity_ordering(f, h, xs);
  const Operator op = build_operator(spec, make_metric("euclidean:1"));
  const ScalarField one = fields::constant(1, 1.0);
  const DiffConfig cfg;

  json rows = json::array();
  o.table.header = {"x", "H_one", "expected_one", "H_ground", "expected_ground"};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i][0];
    const double h_one = 0.5 * op.apply(one, xs[i], cfg);
    const double e_one = 0.5 * w * w * x * x + 0.5 * w;
    const double h_ground = 0.5 * op.apply(h, xs[i], cfg);
    const double e_ground = w * h(xs[i]);
    rows.push_back({{"x", x}, {"H_one", h_one}, {"expected_one", e_one}, {"H_ground", h_ground},
                    {"expected_ground", e_ground}});
    o.table.rows.push_back({fmt(x), fmt(h_one), fmt(e_one), fmt(h_ground), fmt(e_ground)});
    if (std::abs(h_one - e_one) > tol) o.failures.push_back("x = " + fmt(x) + ": H 1 = " + fmt(h_one));
    if (std::abs(h_ground - e_ground) > tol) o.failures.push_back("x = " + fmt(x) + ": H h = " + fmt(h_ground));
  }
  o.result["ordering"] = spec.to_json();
  o.result["omega"] = w;
  o.result["rows"] = rows;
  return o;
}

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["metric"] = c.metric;
  j["n"] = c.dimension ? json(*c.dimension) : json(nullptr);
  j["points"] = c.points;
  j["seed"] = c.seed;
  j["tolerance"] = c.tolerance ? json(*c.tolerance) : json(nullptr);
  j["format"] = to_string(c.format);
  j["mode"] = to_string(c.mode);
  const DiffConfig cfg;
  j["diff"] = {{"base_step", cfg.base_step},
               {"richardson_levels", cfg.richardson_levels},
               {"stencil_order", cfg.stencil_order},
               {"nested_step_factor", kNestedStepFactor}};
  if (c.command == "curvature") j["formula"] = c.formula == CurvatureFormula::five_term ? "five-term" : "six-term";
  if (c.command == "potential") j["ordering"] = c.ordering;
  if (c.command == "hydrogen") {
    j["n_max"] = c.n_max;
    j["m"] = c.ms;
    j["grid"] = c.grid;
  }
  if (c.command == "rank") {
    j["family"] = c.family;
    j["expect_rank"] = c.expect_rank ? json(*c.expect_rank) : json(nullptr);
  }
  if (c.command == "identities") j["chain"] = c.chains;
  if (c.command == "oscillator") j["omega"] = c.omega;
  return j;
}

}  // namespace

RunResult run(const RunConfig& config) {
  RunResult result;
  Outcome outcome;
  json error = nullptr;
  try {
    if (config.command == "curvature") {
      outcome = run_curvature(config);
    } else if (config.command == "potential") {
      outcome = run_potential(config);
    } else if (config.command == "exponents") {
      outcome = run_exponents(config);
    } else if (config.command == "hydrogen") {
      outcome = run_hydrogen(config);
    } else if (config.command == "rank") {
      outcome = run_rank(config);
    } else if (config.command == "identities") {
      outcome = run_identities(config);
    } else if (config.command == "oscillator") {
      outcome = run_oscillator(config);
    } else {
      throw ParseError("unknown command '" + config.command + "'");
    }
  } catch (const ParseError& e) {
    result.exit_code = 2;
    result.failures.push_back(e.what());
    return result;
  } catch (const InvalidMetric& e) {
    result.exit_code = 2;
    result.failures.push_back(e.what());
    return result;
  } catch (const std::invalid_argument& e) {
    result.exit_code = 2;
    result.failures.push_back(e.what());
    return result;
  } catch (const std::exception& e) {
    // numerical failure: still write a report
    outcome.failures.push_back(e.what());
    error = e.what();
  }
  result.failures = outcome.failures;
  result.exit_code = outcome.failures.empty() ? 0 : 1;

  switch (config.format) {
    case OutputFormat::json: {
      json report;
      report["command"] = config.command;
      json cfg = config_json(config);
      for (auto it = outcome.resolved.begin(); it != outcome.resolved.end(); ++it) cfg[it.key()] = it.value();
      report["config"] = cfg;
      if (config.timestamp) report["timestamp"] = utc_timestamp();
      report["pass"] = result.exit_code == 0;
      report["failures"] = outcome.failures;
      report["error"] = error;
      report["result"] = outcome.result;
      result.body = report.dump(2) + "\n";
      break;
    }
    case OutputFormat::csv: result.body = render_csv(outcome.table); break;
    case OutputFormat::pretty: result.body = render_pretty(outcome.table, config.command, outcome.failures); break;
  }

  if (!config.out.empty()) {
    std::ofstream file(config.out, std::ios::binary);
    if (file) file << result.body;
    if (!file) {
      result.exit_code = 2;
      result.failures.push_back("cannot write report to '" + config.out + "'");
    }
  }
  return result;
}

}  // namespace ordlab
