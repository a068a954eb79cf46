#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "covspec/catalog.hpp"
#include "covspec/detail/numfmt.hpp"
#include "covspec/equiv.hpp"
#include "covspec/errors.hpp"
#include "covspec/eval.hpp"
#include "covspec/gof.hpp"
#include "covspec/io.hpp"
#include "covspec/mc.hpp"
#include "covspec/spectral.hpp"

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace {

using nlohmann::ordered_json;
using namespace covspec;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;  // not equivalent / hypothesis rejected
constexpr int kExitError = 2;

struct GlobalOpts {
  std::string format = "json";
  std::string out;
  int threads = 0;
};

std::string fmt(double v) { return detail::format_double(v); }

OperatorExpr resolve_operator(const std::string& expr, const std::string& name, int dim) {
  if (!expr.empty() && !name.empty())
    throw ArgumentError("give either --expr or --name, not both");
  if (!expr.empty()) return parse(expr);
  if (!name.empty()) return covariance_expr(name, dim).covariance;
  throw ArgumentError("one of --expr or --name is required");
}

std::string spectrum_table(const Spectrum& s, bool csv) {
  const char* sep = csv ? "," : "\t";
  const char* eol = csv ? "\r\n" : "\n";
  std::string out = std::string("index") + sep + "value" + sep + "inv_value" + eol;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    double v = s.values[i];
    out += std::to_string(i + 1) + sep + fmt(v) + sep + (v != 0.0 ? fmt(1.0 / v) : "inf") + eol;
  }
  return out;
}

int cmd_spectrum(const GlobalOpts& g, const std::string& expr, const std::string& name, int dim,
                 int grid_n, const std::string& method, int modes, int top, bool extrapolate,
                 std::int64_t max_rows) {
  Spectrum s;
  ordered_json j;
  j["schema"] = "covspec/spectrum@1";
  if (method == "secular") {
    if (name != "pinned-sheet" && name != "bridge" && !name.empty())
      throw ArgumentError("--method secular applies to the pinned-sheet family only");
    if (!expr.empty()) throw ArgumentError("--method secular requires --name, not --expr");
    s = pinned_sheet_spectrum(dim, modes, top);
    j["name"] = name.empty() ? "pinned-sheet" : name;
    j["method"] = "secular";
    j["modes"] = modes;
  } else if (method == "dense") {
    OperatorExpr e = resolve_operator(expr, name, dim);
    EvalOptions opts;
    opts.max_rows = max_rows;
    s = nystrom_spectrum(e, dim, grid_n, top, extrapolate, opts);
    if (!name.empty()) j["name"] = name;
    j["expr"] = format(e);
    j["method"] = "dense";
    j["grid_n"] = grid_n;
    j["extrapolated"] = extrapolate;
  } else {
    throw ArgumentError("--method must be dense or secular");
  }
  j["dim"] = dim;
  j["top"] = static_cast<int>(s.values.size());
  j["values"] = s.values;
  std::vector<double> inv;
  for (double v : s.values) inv.push_back(v != 0.0 ? 1.0 / v : 0.0);
  j["inv_values"] = inv;
  j["zero_cut"] = s.zero_cut;
  ordered_json clusters = ordered_json::array();
  for (auto [b, e2] : s.clusters) clusters.push_back({b, e2});
  j["clusters"] = clusters;
  if (s.grid_n == 0) j["parseval_deficit"] = s.parseval_deficit;

  if (g.format == "json")
    write_output(g.out, j.dump(2) + "\n");
  else
    write_output(g.out, spectrum_table(s, g.format == "csv"));
  return kExitOk;
}

std::string verdict_table(const std::vector<EquivVerdict>& vs, bool csv) {
  const char* sep = csv ? "," : "\t";
  const char* eol = csv ? "\r\n" : "\n";
  std::string out = std::string("id") + sep + "dim" + sep + "mode" + sep + "k" + sep +
                    "max_rel_dev" + sep + "pass" + eol;
  for (const auto& v : vs) {
    out += v.pair_id + sep + std::to_string(v.dim) + sep +
           (v.mode == EquivMode::MatrixExact ? "matrix-exact" : "continuum") + sep +
           std::to_string(v.k) + sep + fmt(v.max_rel_dev) + sep + (v.pass ? "true" : "false") +
           eol;
  }
  return out;
}

int cmd_equiv(const GlobalOpts& g, const std::string& lhs, const std::string& rhs,
              const std::string& theorem, bool suite, int dim, const std::string& dims_csv,
              int grid_n, int k, const std::string& mode_name) {
  EquivMode mode =
      mode_name == "continuum" ? EquivMode::Continuum : EquivMode::MatrixExact;
  if (mode_name != "exact" && mode_name != "continuum")
    throw ArgumentError("--mode must be exact or continuum");
  std::vector<EquivVerdict> verdicts;
  if (suite) {
    std::vector<int> dims;
    std::size_t pos = 0;
    while (pos <= dims_csv.size()) {
      auto comma = dims_csv.find(',', pos);
      std::string tok =
          comma == std::string::npos ? dims_csv.substr(pos) : dims_csv.substr(pos, comma - pos);
      if (!tok.empty()) dims.push_back(std::stoi(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (dims.empty()) dims = {1, 2};
    std::map<int, int> n_per_dim;
    if (grid_n > 0)
      for (int d : dims) n_per_dim[d] = grid_n;
    verdicts = run_suite(dims, n_per_dim, k);
  } else if (!theorem.empty()) {
    auto ids = pair_ids_with_prefix(theorem);
    if (ids.empty()) throw ArgumentError("no theorem pair matches '" + theorem + "'");
    for (const auto& id : ids) {
      const TheoremPair& p = find_pair(id);
      for (int d : p.dims) {
        if (dim > 0 && d != dim) continue;
        int n = grid_n > 0 ? grid_n : (d == 1 ? 256 : d == 2 ? 40 : 16);
        int kk = d >= 3 ? std::min(k, 4) : k;
        verdicts.push_back(check_pair(p.lhs(d).covariance, p.rhs(d).covariance, d, n, kk, mode,
                                      {}, id));
      }
    }
    if (verdicts.empty()) throw ArgumentError("theorem '" + theorem + "' has no instance at --dim");
  } else if (!lhs.empty() && !rhs.empty()) {
    int d = dim > 0 ? dim : 1;
    int n = grid_n > 0 ? grid_n : (d == 1 ? 256 : d == 2 ? 40 : 16);
    verdicts.push_back(
        check_pair(parse(lhs), parse(rhs), d, n, k, mode, {}, "cli-pair"));
  } else {
    throw ArgumentError("equiv needs --suite, --theorem, or both --lhs and --rhs");
  }
  bool all = true;
  for (const auto& v : verdicts) all = all && v.pass;
  if (g.format == "json")
    write_output(g.out, verdicts_to_json(verdicts) + "\n");
  else
    write_output(g.out, verdict_table(verdicts, g.format == "csv"));
  return all ? kExitOk : kExitNegative;
}

int cmd_gof(const GlobalOpts& g, const std::string& data, int dim, const std::string& margins,
            const std::string& source, int modes, double alpha, bool mc, int reps,
            std::uint64_t seed) {
  Sample s = read_sample_csv(data, dim);
  std::vector<MarginSpec> ms = parse_margins(margins);
  if (static_cast<int>(ms.size()) == 1 && dim > 1)
    ms.assign(static_cast<std::size_t>(dim), ms.front());
  GofOptions opts;
  opts.spec_source = source;
  opts.modes = modes;
  opts.montecarlo = mc;
  opts.mc_reps = reps;
  opts.seed = seed;
  GofResult res = gof_test(s, ms, opts);

  ordered_json j;
  j["schema"] = "covspec/gof@1";
  j["statistic"] = res.statistic;
  j["n"] = res.n;
  j["dim"] = res.d;
  j["n_times_statistic"] = res.n * res.statistic;
  j["p_value"] = res.p_value;
  j["method"] = res.method;
  ordered_json diag;
  diag["eigenvalues_used"] = res.diagnostics.eigenvalues_used;
  diag["parseval_deficit"] = res.diagnostics.parseval_deficit;
  diag["tail_shift"] = res.diagnostics.tail_shift;
  if (res.method == "imhof")
    diag["integration_error"] = res.diagnostics.integration_error;
  else
    diag["mc_std_error"] = res.diagnostics.mc_std_error;
  j["diagnostics"] = diag;
  if (alpha > 0.0) j["rejected_at_alpha"] = res.p_value < alpha;
  write_output(g.out, j.dump(2) + "\n");
  if (alpha > 0.0 && res.p_value < alpha) return kExitNegative;
  return kExitOk;
}

int cmd_simulate(const GlobalOpts& g, bool format_given, const std::string& expr,
                 const std::string& name, int dim, int reps, std::uint64_t seed, int grid_n,
                 int modes) {
  if (reps < 1) throw ArgumentError("--reps must be positive");
  // draws default to CSV; JSON only on request
  std::string fmt_used = format_given ? g.format : "csv";
  OperatorExpr e = resolve_operator(expr, name, dim);
  McConfig cfg;
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.trunc_m = modes;
  std::vector<double> draws = sample_sqnorm(e, dim, grid_n, cfg);
  if (fmt_used == "json") {
    ordered_json j;
    j["schema"] = "covspec/simulate@1";
    j["expr"] = format(e);
    j["dim"] = dim;
    j["reps"] = reps;
    j["seed"] = seed;
    j["modes"] = modes;
    j["draws"] = draws;
    write_output(g.out, j.dump(2) + "\n");
  } else {
    write_output(g.out, draws_to_csv(draws, "sqnorm"));
  }
  return kExitOk;
}

int cmd_table(const GlobalOpts& g, int modes2, int modes3) {
  ordered_json j;
  j["schema"] = "covspec/table@1";
  ordered_json entries = ordered_json::array();
  std::string text = "dim\tmodes\tlambda1\tinv_lambda1\n";
  for (auto [d, J] : {std::pair<int, int>{2, modes2}, {3, modes3}}) {
    Spectrum s = pinned_sheet_spectrum(d, J, 1);
    ordered_json e;
    e["dim"] = d;
    e["modes"] = J;
    e["lambda1"] = s.values[0];
    e["inv_lambda1"] = 1.0 / s.values[0];
    e["parseval_deficit"] = s.parseval_deficit;
    entries.push_back(e);
    text += std::to_string(d) + "\t" + std::to_string(J) + "\t" + fmt(s.values[0]) + "\t" +
            fmt(1.0 / s.values[0]) + "\n";
  }
  j["entries"] = entries;
  write_output(g.out, g.format == "json" ? j.dump(2) + "\n" : text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covspec: spectra of covariance operators, spectral-equivalence checks,"
               " and the multivariate omega^2 goodness-of-fit test"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--format", g.format, "Output format: json, tsv or csv")
      ->check(CLI::IsMember({"json", "tsv", "csv"}));
  app.add_option("--out", g.out, "Output path (default: stdout)");
  app.add_option("--threads", g.threads, "Cap BLAS worker threads");

  auto* sp = app.add_subcommand("spectrum", "Eigenvalues of a covariance expression");
  sp->fallthrough();
  std::string sp_expr, sp_name, sp_method = "dense";
  int sp_dim = 1, sp_grid = 200, sp_modes = 300, sp_top = 10;
  bool sp_extrap = false;
  std::int64_t sp_rows = 20000;
  sp->add_option("--expr", sp_expr, "Operator expression, e.g. \"T (I - P) T'\"");
  sp->add_option("--name", sp_name, "Catalog process name, e.g. pinned-sheet");
  sp->add_option("--dim", sp_dim, "Field dimension d")->check(CLI::PositiveNumber);
  sp->add_option("--grid", sp_grid, "Grid points per axis (dense method)");
  sp->add_option("--method", sp_method, "dense (grid realization) or secular (analytic)");
  sp->add_option("--modes", sp_modes, "Modes per axis for the secular method");
  sp->add_option("--top", sp_top, "Number of leading eigenvalues");
  sp->add_flag("--extrapolate", sp_extrap, "Richardson-extrapolate resolutions n and n/2");
  sp->add_option("--max-rows", sp_rows, "Dense matrix budget");

  auto* eq = app.add_subcommand("equiv", "Check spectral equivalence of covariance expressions");
  eq->fallthrough();
  std::string eq_lhs, eq_rhs, eq_theorem, eq_dims = "1,2", eq_mode = "exact";
  bool eq_suite = false;
  int eq_dim = 0, eq_grid = 0, eq_k = 8;
  eq->add_option("--lhs", eq_lhs, "Left covariance expression");
  eq->add_option("--rhs", eq_rhs, "Right covariance expression");
  eq->add_option("--theorem", eq_theorem, "Registered pair id (or id prefix)");
  eq->add_flag("--suite", eq_suite, "Run the whole registered suite");
  eq->add_option("--dim", eq_dim, "Restrict to one dimension");
  eq->add_option("--dims", eq_dims, "Suite dimensions, comma separated");
  eq->add_option("--grid", eq_grid, "Grid points per axis (default 256/40/16 by d)");
  eq->add_option("--k", eq_k, "Eigenvalues compared");
  eq->add_option("--mode", eq_mode, "exact or continuum");

  auto* gof = app.add_subcommand("gof", "Multivariate omega^2 goodness-of-fit test");
  gof->fallthrough();
  std::string gof_data, gof_margins = "uniform", gof_source = "secular";
  int gof_dim = 1, gof_modes = 0, gof_reps = 200000;
  double gof_alpha = 0.0;
  bool gof_mc = false;
  std::uint64_t gof_seed = 2027;
  gof->add_option("--data", gof_data, "CSV sample, one observation per row")->required();
  gof->add_option("--dim", gof_dim, "Number of coordinates")->check(CLI::PositiveNumber);
  gof->add_option("--margins", gof_margins,
                  "Null margins, e.g. \"uniform,uniform\" or \"exp:1.0,norm:0:1\"");
  gof->add_option("--source", gof_source, "Spectrum source: secular or nystrom");
  gof->add_option("--modes", gof_modes, "Modes per axis (secular) or grid n (nystrom)");
  gof->add_option("--alpha", gof_alpha, "Reject level: exit 1 when p < alpha");
  gof->add_flag("--mc", gof_mc, "Monte-Carlo tail instead of the Imhof integral");
  gof->add_option("--reps", gof_reps, "Monte-Carlo replicates");
  gof->add_option("--seed", gof_seed, "Monte-Carlo seed");

  auto* sim = app.add_subcommand("simulate", "Draw squared-norm samples of a Gaussian field");
  sim->fallthrough();
  std::string sim_expr, sim_name;
  int sim_dim = 1, sim_reps = 0, sim_grid = 200, sim_modes = 100;
  std::uint64_t sim_seed = 1;
  sim->add_option("--expr", sim_expr, "Operator expression");
  sim->add_option("--name", sim_name, "Catalog process name");
  sim->add_option("--dim", sim_dim, "Field dimension");
  sim->add_option("--reps", sim_reps, "Number of draws")->required();
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--grid", sim_grid, "Grid points per axis");
  sim->add_option("--modes", sim_modes, "KL modes kept");

  auto* tab = app.add_subcommand("table", "Reference table of leading pinned-sheet eigenvalues");
  tab->fallthrough();
  int tab_modes2 = 300, tab_modes3 = 80;
  tab->add_option("--modes2", tab_modes2, "Modes per axis at d=2");
  tab->add_option("--modes3", tab_modes3, "Modes per axis at d=3");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (g.threads > 0 && openblas_set_num_threads) openblas_set_num_threads(g.threads);

  try {
    if (sp->parsed())
      return cmd_spectrum(g, sp_expr, sp_name, sp_dim, sp_grid, sp_method, sp_modes, sp_top,
                          sp_extrap, sp_rows);
    if (eq->parsed())
      return cmd_equiv(g, eq_lhs, eq_rhs, eq_theorem, eq_suite, eq_dim, eq_dims, eq_grid, eq_k,
                       eq_mode);
    if (gof->parsed())
      return cmd_gof(g, gof_data, gof_dim, gof_margins, gof_source, gof_modes, gof_alpha, gof_mc,
                     gof_reps, gof_seed);
    if (sim->parsed())
      return cmd_simulate(g, app.count("--format") > 0, sim_expr, sim_name, sim_dim, sim_reps,
                          sim_seed, sim_grid, sim_modes);
    if (tab->parsed()) return cmd_table(g, tab_modes2, tab_modes3);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "covspec: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
