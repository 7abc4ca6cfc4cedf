#include "precis/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "precis/approx.hpp"
#include "precis/calculus.hpp"
#include "precis/format.hpp"
#include "precis/index.hpp"
#include "precis/optimal.hpp"
#include "precis/simulate.hpp"

namespace precis {

namespace {

constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

int code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Spec:
    case ErrorKind::Parameter:
      return 3;
    case ErrorKind::Io:
      return 5;
    default:
      return 4;
  }
}

std::string error_record(const std::string& kind, const std::string& message) {
  Json j;
  j["error"] = Json{{"kind", kind}, {"message", message}};
  return j.dump() + "\n";
}

// A comma inside a field (poly: specs) forces quoting.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_comment(const std::string& schema, const std::string& extra = "") {
  return "# precis " + std::string(kVersion) + " schema=" + schema + extra + "\n";
}

Json json_doc(const std::string& schema) {
  Json j;
  j["schema"] = schema;
  j["version"] = kVersion;
  return j;
}

// Splits a --rules list, gluing numeric fragments back onto a preceding
// poly: spec whose coefficients the comma split tore apart.
std::vector<std::string> split_rules(const std::string& text) {
  static const char* heads[] = {"log",  "quad", "sph",  "hs",    "tsallis:",
                                "opt:", "poly:", "table:"};
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const bool starts_rule =
        std::any_of(std::begin(heads), std::end(heads),
                    [&](const char* h) { return cur.rfind(h, 0) == 0; });
    if (!out.empty() && !starts_rule && out.back().rfind("poly:", 0) == 0)
      out.back() += "," + cur;
    else
      out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (c == ',')
      flush();
    else
      cur += c;
  }
  flush();
  return out;
}

double interior_x(int j, int samples) {
  return (j + 1.0) / (samples + 1.0);
}

std::string run_index(const std::string& rules_arg,
                      const std::vector<double>& ells,
                      const std::string& format) {
  struct Cell {
    std::string rule;
    IndexReport rep;
  };
  std::vector<Cell> cells;
  for (const std::string& spec : split_rules(rules_arg)) {
    const Rule rule = parse_rule(spec);
    for (double ell : ells)
      cells.push_back({rule.name(), incentivization_index(rule, ell)});
  }
  if (format == "json") {
    Json j = json_doc("index-v1");
    j["results"] = Json::array();
    for (const Cell& c : cells)
      j["results"].push_back({{"rule", c.rule},
                              {"ell", c.rep.ell},
                              {"ind", c.rep.ind},
                              {"mu_ell", c.rep.mu_ell},
                              {"predicted_error_coeff", c.rep.predicted_error_coeff},
                              {"quad_error", c.rep.quad_error}});
    return j.dump(2) + "\n";
  }
  std::string out = csv_comment("index-v1");
  out += "rule,ell,ind,mu_ell,predicted_error_coeff\n";
  for (const Cell& c : cells)
    out += csv_field(c.rule) + "," + fmt_full(c.rep.ell) + "," +
           fmt_full(c.rep.ind) + "," + fmt_full(c.rep.mu_ell) + "," +
           fmt_full(c.rep.predicted_error_coeff) + "\n";
  return out;
}

std::string run_compare(const std::string& rules_arg,
                        const std::vector<double>& ells, bool ratio,
                        const std::string& format) {
  struct Row {
    std::string rule;
    std::vector<double> ind;
    std::vector<double> precision;
  };
  std::vector<Row> rows;
  for (const std::string& spec : split_rules(rules_arg)) {
    const Rule rule = parse_rule(spec);
    Row row{rule.name(), {}, {}};
    for (double ell : ells) {
      row.ind.push_back(incentivization_index(rule, ell).ind);
      if (ratio) row.precision.push_back(precision_ratio(rule, ell));
    }
    rows.push_back(std::move(row));
  }
  if (format == "json") {
    Json j = json_doc("compare-v1");
    j["results"] = Json::array();
    for (const Row& row : rows)
      for (std::size_t i = 0; i < ells.size(); ++i) {
        Json cell{{"rule", row.rule}, {"ell", ells[i]}, {"ind", row.ind[i]}};
        if (ratio) cell["precision_ratio"] = row.precision[i];
        j["results"].push_back(std::move(cell));
      }
    return j.dump(2) + "\n";
  }
  std::string out = csv_comment("compare-v1");
  out += "rule";
  for (double ell : ells) out += ",ind_" + fmt_compact(ell);
  if (ratio)
    for (double ell : ells) out += ",ratio_" + fmt_compact(ell);
  out += "\n";
  for (const Row& row : rows) {
    out += csv_field(row.rule);
    for (double v : row.ind) out += "," + fmt_full(v);
    for (double v : row.precision) out += "," + fmt_full(v);
    out += "\n";
  }
  return out;
}

std::string run_simulate(const SimConfig& cfg, const std::string& format) {
  const SimReport report = monte_carlo(cfg);
  if (format == "json") {
    Json j = json_doc("simulate-v1");
    const Json body = Json::parse(to_json(report));
    for (const auto& [key, value] : body.items()) j[key] = value;
    return j.dump(2) + "\n";
  }
  std::string out =
      csv_comment("simulate-v1", " seed=" + std::to_string(cfg.seed));
  out += "cost,rule,avg_error,predicted_avg_error,ratio,avg_flips,max_flips\n";
  out += to_csv(report);
  return out;
}

std::string run_optimal(const std::string& ell_arg, int samples,
                        const std::string& format) {
  if (samples < 2)
    throw Error(ErrorKind::Parameter, "samples must be at least 2, got " +
                                          std::to_string(samples));
  const Rule rule = parse_rule("opt:" + ell_arg);
  if (format == "json") {
    Json j = json_doc("optimal-v1");
    j["rule"] = rule.name();
    if (ell_arg != "inf") j["kappa"] = kappa(std::strtod(ell_arg.c_str(), nullptr));
    j["samples"] = Json::array();
    for (int i = 0; i < samples; ++i) {
      const double x = interior_x(i, samples);
      j["samples"].push_back(
          {{"x", x}, {"g", rule.f(x)}, {"reward_second", rule.reward_second(x)}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = csv_comment("optimal-v1", " rule=" + rule.name());
  out += "x,g,reward_second\n";
  for (int i = 0; i < samples; ++i) {
    const double x = interior_x(i, samples);
    out += fmt_full(x) + "," + fmt_full(rule.f(x)) + "," +
           fmt_full(rule.reward_second(x)) + "\n";
  }
  return out;
}

std::string run_approx(double ell, double eps, int degree,
                       const std::string& format) {
  auto [rule, rep] = build_polynomial_rule(ell, eps, degree);
  const IndexReport& ind = rep.index;
  if (format == "json") {
    Json j = json_doc("approx-v1");
    j["rule"] = rule.name();
    j["ell"] = rep.ell;
    j["eps"] = rep.eps;
    j["degree"] = rep.degree;
    j["normalizer"] = rep.normalizer;
    j["lower_bound"] = rep.lower_bound;
    j["grid_min"] = rep.grid_min;
    j["sup_gap"] = rep.sup_gap;
    j["stabilization_gap"] = rep.stabilization_gap;
    j["odd_content"] = rep.odd_content;
    j["index"] = {{"ell", ind.ell},
                  {"ind", ind.ind},
                  {"mu_ell", ind.mu_ell},
                  {"predicted_error_coeff", ind.predicted_error_coeff}};
    j["even_coefficients"] = rep.even_coefficients;
    j["spec"] = rep.spec_string;
    return j.dump(2) + "\n";
  }
  std::string out = csv_comment("approx-v1");
  out +=
      "ell,eps,degree,normalizer,lower_bound,grid_min,sup_gap,"
      "stabilization_gap,odd_content,ind,spec\n";
  out += fmt_full(rep.ell) + "," + fmt_full(rep.eps) + "," +
         std::to_string(rep.degree) + "," + fmt_full(rep.normalizer) + "," +
         fmt_full(rep.lower_bound) + "," + fmt_full(rep.grid_min) + "," +
         fmt_full(rep.sup_gap) + "," + fmt_full(rep.stabilization_gap) + "," +
         fmt_full(rep.odd_content) + "," + fmt_full(ind.ind) + "," +
         csv_field(rep.spec_string) + "\n";
  return out;
}

std::string run_check(const std::string& rule_arg) {
  const Rule rule = parse_rule(rule_arg);
  const DiagnosticsReport d = full_diagnostics(rule);
  Json j = json_doc("check-v1");
  j["rule"] = rule.name();
  j["proper"] = d.proper;
  j["proper_identity_max_violation"] = d.proper_identity_max_violation;
  j["fprime_min"] = d.fprime_min;
  j["fprime_nonpositive_fraction"] = d.fprime_nonpositive_fraction;
  j["r2_min"] = d.r2_min;
  j["r2_max"] = d.r2_max;
  j["normalized_residuals"] = {
      {"f_half", d.normalized_residuals.f_half},
      {"mean_reward", d.normalized_residuals.mean_reward}};
  j["respectful"] = Json::array();
  for (const RespectfulCheck& r : d.respectful_at)
    j["respectful"].push_back({{"c", r.c},
                               {"t", r.t},
                               {"pass", r.pass},
                               {"failed_condition", r.failed_condition},
                               {"witness_x", r.witness_x},
                               {"detail", r.detail}});
  return j.dump(2) + "\n";
}

std::string run_curve(const std::string& rules_arg, const std::string& quantity,
                      int samples, const std::string& format) {
  if (samples < 2)
    throw Error(ErrorKind::Parameter, "samples must be at least 2, got " +
                                          std::to_string(samples));
  struct Series {
    std::string rule;
    std::vector<std::pair<double, double>> points;
  };
  std::vector<Series> series;
  for (const std::string& spec : split_rules(rules_arg)) {
    const Rule parsed = parse_rule(spec);
    const Rule rule = parsed.normalized() ? parsed : normalize_rule(parsed).first;
    Series s{parsed.name(), {}};
    for (int i = 0; i < samples; ++i) {
      const double x = interior_x(i, samples);
      const double y = quantity == "rule_value"
                           ? rule.f(x)
                           : std::sqrt(x * (1.0 - x) / rule.reward_second(x));
      s.points.emplace_back(x, y);
    }
    series.push_back(std::move(s));
  }
  if (format == "json") {
    Json j = json_doc("curve-v1");
    j["quantity"] = quantity;
    j["series"] = Json::array();
    for (const Series& s : series) {
      Json entry{{"rule", s.rule}};
      entry["points"] = Json::array();
      for (auto [x, y] : s.points) entry["points"].push_back({x, y});
      j["series"].push_back(std::move(entry));
    }
    return j.dump(2) + "\n";
  }
  std::string out = csv_comment("curve-v1", " quantity=" + quantity);
  out += "rule,x,value\n";
  for (const Series& s : series)
    for (auto [x, y] : s.points)
      out += csv_field(s.rule) + "," + fmt_full(x) + "," + fmt_full(y) + "\n";
  return out;
}

void deliver(CliResult& res, const std::string& text,
             const std::string& out_path) {
  if (out_path.empty()) {
    res.out = text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file)
    throw Error(ErrorKind::Io, "cannot open '" + out_path + "' for writing");
  file << text;
  file.flush();
  if (!file)
    throw Error(ErrorKind::Io, "short write to '" + out_path + "'");
}

}  // namespace

CliResult run_command(const std::vector<std::string>& args) {
  CliResult res;

  CLI::App app{"binary proper scoring rules: incentivization indices, optimal "
               "rules, and coin-flipping expert simulation"};
  app.name("precis");
  app.require_subcommand(1);

  const std::string format_help = "output format (csv|json)";
  const auto format_check = CLI::IsMember({"csv", "json"});

  // index
  std::string index_rules, index_format = "csv", index_out;
  std::vector<double> index_ells{1.0};
  CLI::App* index = app.add_subcommand(
      "index", "incentivization index and predicted-error coefficient");
  index->add_option("-r,--rules,--rule", index_rules, "comma list of rule specs")
      ->required();
  index->add_option("--ell", index_ells, "index orders")->delimiter(',');
  index->add_option("--format", index_format, format_help)->check(format_check);
  index->add_option("--out", index_out, "write to a file instead of stdout");

  // compare
  std::string compare_rules, compare_format = "csv", compare_out;
  std::vector<double> compare_ells{1.0, 2.0, 4.0};
  bool compare_ratio = false;
  CLI::App* compare =
      app.add_subcommand("compare", "index table across rules and orders");
  compare->add_option("-r,--rules,--rule", compare_rules,
                      "comma list of rule specs")
      ->required();
  compare->add_option("--ell", compare_ells, "index orders")->delimiter(',');
  compare->add_flag("--ratio", compare_ratio,
                    "also report precision relative to the order-ell optimum");
  compare->add_option("--format", compare_format, format_help)
      ->check(format_check);
  compare->add_option("--out", compare_out, "write to a file instead of stdout");

  // simulate
  std::string sim_rule, sim_mode = "local", sim_format = "csv", sim_out;
  double sim_cost = 0.0;
  long long sim_trials = 100000;
  std::uint64_t sim_seed = 0;
  std::vector<double> sim_ells{1.0};
  bool sim_coupled = false;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte-Carlo rational coin-flipping expert");
  simulate->add_option("-r,--rule", sim_rule, "rule spec")->required();
  simulate->add_option("--cost", sim_cost, "price per flip")->required();
  simulate->add_option("--trials", sim_trials, "number of trials");
  simulate->add_option("--seed", sim_seed, "stream seed (required: no clock)")
      ->required();
  simulate->add_option("--mode", sim_mode, "stopping strategy (local|global)")
      ->check(CLI::IsMember({"local", "global"}));
  simulate->add_flag("--coupled", sim_coupled,
                     "run both modes on common draws (json output)");
  simulate->add_option("--ell", sim_ells, "error exponents")->delimiter(',');
  simulate->add_option("--format", sim_format, format_help)->check(format_check);
  simulate->add_option("--out", sim_out, "write to a file instead of stdout");

  // optimal
  std::string opt_ell = "1", opt_format = "csv", opt_out;
  int opt_samples = 65;
  CLI::App* optimal = app.add_subcommand(
      "optimal", "sample the optimal precision-incentivizing rule");
  optimal->add_option("--ell", opt_ell, "index order, or 'inf'");
  optimal->add_option("--samples", opt_samples, "interior grid size");
  optimal->add_option("--format", opt_format, format_help)->check(format_check);
  optimal->add_option("--out", opt_out, "write to a file instead of stdout");

  // approx
  double approx_ell = 1.0, approx_eps = 0.0;
  int approx_degree = 0;
  std::string approx_format = "csv", approx_out;
  CLI::App* approx = app.add_subcommand(
      "approx", "polynomial rule built from the clamped optimal curvature");
  approx->add_option("--ell", approx_ell, "index order");
  approx->add_option("--eps", approx_eps, "curvature clamp margin")->required();
  approx->add_option("--degree", approx_degree,
                     "Bernstein degree (0 = automatic)");
  approx->add_option("--format", approx_format, format_help)
      ->check(format_check);
  approx->add_option("--out", approx_out, "write to a file instead of stdout");

  // check
  std::string check_rule, check_format = "json", check_out;
  CLI::App* check =
      app.add_subcommand("check", "properness and regularity diagnostics");
  check->add_option("-r,--rule,--rules", check_rule, "rule spec")->required();
  check->add_option("--format", check_format, format_help)->check(format_check);
  check->add_option("--out", check_out, "write to a file instead of stdout");

  // curve
  std::string curve_rules, curve_quantity = "sqrt_variance",
                           curve_format = "csv", curve_out;
  int curve_samples = 129;
  CLI::App* curve = app.add_subcommand(
      "curve", "per-rule series: posterior spread or rule values");
  curve->add_option("-r,--rules,--rule", curve_rules, "comma list of rule specs")
      ->required();
  curve->add_option("--quantity", curve_quantity, "sqrt_variance | rule_value")
      ->check(CLI::IsMember({"sqrt_variance", "rule_value"}));
  curve->add_option("--samples", curve_samples, "interior grid size");
  curve->add_option("--format", curve_format, format_help)->check(format_check);
  curve->add_option("--out", curve_out, "write to a file instead of stdout");

  try {
    std::vector<std::string> tokens(args.rbegin(), args.rend());
    app.parse(tokens);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    res.out = parsed.empty() ? app.help() : parsed.front()->help();
    return res;
  } catch (const CLI::ParseError& e) {
    res.err = error_record("usage", e.what());
    res.exit_code = 2;
    return res;
  }

  try {
    if (simulate->parsed() && sim_coupled && sim_format == "csv") {
      res.err = error_record("usage", "coupled reports need --format json");
      res.exit_code = 2;
      return res;
    }
    if (check->parsed() && check_format == "csv") {
      res.err = error_record("usage", "check emits a json report");
      res.exit_code = 2;
      return res;
    }
    if (index->parsed())
      deliver(res, run_index(index_rules, index_ells, index_format), index_out);
    else if (compare->parsed())
      deliver(res,
              run_compare(compare_rules, compare_ells, compare_ratio,
                          compare_format),
              compare_out);
    else if (simulate->parsed()) {
      SimConfig cfg;
      cfg.rule_spec = sim_rule;
      cfg.cost = sim_cost;
      cfg.trials = sim_trials;
      cfg.seed = sim_seed;
      cfg.mode = sim_mode == "global" ? Mode::Global : Mode::Local;
      cfg.ells = sim_ells;
      cfg.coupled = sim_coupled;
      deliver(res, run_simulate(cfg, sim_format), sim_out);
    } else if (optimal->parsed())
      deliver(res, run_optimal(opt_ell, opt_samples, opt_format), opt_out);
    else if (approx->parsed())
      deliver(res, run_approx(approx_ell, approx_eps, approx_degree,
                              approx_format),
              approx_out);
    else if (check->parsed())
      deliver(res, run_check(check_rule), check_out);
    else if (curve->parsed())
      deliver(res,
              run_curve(curve_rules, curve_quantity, curve_samples,
                        curve_format),
              curve_out);
  } catch (const Error& e) {
    res.err = error_record(error_kind_name(e.kind()), e.what());
    res.exit_code = code_for(e.kind());
  }
  return res;
}

}  // namespace precis
