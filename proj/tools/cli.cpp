#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kacbath/bounds.hpp"
#include "kacbath/config.hpp"
#include "kacbath/csv.hpp"
#include "kacbath/errors.hpp"
#include "kacbath/evolution.hpp"
#include "kacbath/jump_simulator.hpp"
#include "kacbath/projector.hpp"
#include "kacbath/spectral.hpp"
#include "kacbath/studies.hpp"

namespace kacbath::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  // subcommand flags
  std::string system;
  std::string dump_dir;
  std::vector<int> reservoirs{2, 3};
  std::optional<int> max_degree;
  std::optional<std::int64_t> max_samples;
  std::string dir;
};

class Run {
 public:
  Run(std::string command, const Options& o) : command_(std::move(command)), opt_(o) {
    cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) {
      if (*o.threads < 1) throw ConfigError("--threads must be >= 1");
      cfg.threads = *o.threads;
    }
    report["command"] = command_;
    report["config"] = {{"M", cfg.params.M},        {"N", cfg.params.N},   {"lambda_S", cfg.params.lambda_S},
                        {"lambda_R", cfg.params.lambda_R}, {"mu", cfg.params.mu}, {"seed", cfg.seed},
                        {"threads", cfg.threads},    {"degree", cfg.degree}};
    report["checks"] = json::array();
  }

  /// Records a pass/fail check comparing value against threshold.
  void check(const std::string& name, double value, const std::string& rel, double threshold) {
    bool ok = false;
    if (rel == "<=") ok = value <= threshold;
    if (rel == ">=") ok = value >= threshold;
    if (rel == "==") ok = value == threshold;
    report["checks"].push_back({{"name", name}, {"value", value}, {"relation", rel}, {"threshold", threshold}, {"passed", ok}});
  }

  void write_csv(const std::string& csv) {
    if (opt_.out.empty()) return;
    write_text_file(opt_.out, csv);
    report["output"] = opt_.out;
  }

  int finish(std::ostream& out) {
    bool all = true;
    for (const auto& c : report["checks"]) all = all && c["passed"].get<bool>();
    report["passed"] = all;
    const std::string text = report.dump(2) + "\n";
    if (!opt_.out.empty()) write_text_file(opt_.out + ".report.json", text);
    out << text;
    return all ? 0 : 3;
  }

  RunConfig cfg;
  json report;

 private:
  std::string command_;
  const Options& opt_;
};

json curve_summary(const TheoremCase& tc) {
  const auto& b = tc.constants;
  return {{"family", tc.family},
          {"degree", tc.degree},
          {"C", b.C},
          {"lambda", b.lambda},
          {"k_hat", b.k},
          {"l_hat", b.l},
          {"b", b.b},
          {"h0_norm", b.h0_norm},
          {"constants_scope", "configuration-specific estimates on the truncated space"},
          {"min_slack", tc.min_slack},
          {"peak", tc.peak},
          {"peak_time", tc.peak_time},
          {"limit", std::isfinite(tc.limit) ? json(tc.limit) : json(nullptr)},
          {"limit_bound", tc.limit_bound},
          {"points", tc.curve.times.size()}};
}

HermiteCoeffs config_h0(const RunConfig& cfg) { return build_h0(cfg.h0, cfg.params.M, std::max(cfg.degree, 1)); }

int cmd_simulate(Run& r, const Options& o, std::ostream& out) {
  const auto& cfg = r.cfg;
  SimConfig sc;
  sc.t_end = cfg.t_end;
  sc.record_times = cfg.time_grid();
  if (sc.record_times.empty()) throw ConfigError("simulate: the 'auto' grid is not available, give record_times or a grid");
  sc.ensemble = cfg.ensemble;
  sc.seed = cfg.seed;
  sc.system_kind = cfg.system_kind;
  if (o.system == "R") sc.system_kind = SystemKind::RSystem;
  if (o.system == "T") sc.system_kind = SystemKind::TSystem;
  sc.threads = cfg.threads;
  sc.chunk = cfg.chunk;

  const int M = cfg.params.M, N = cfg.params.N;
  std::vector<Observable> obs;
  for (const auto& s : cfg.observables) obs.push_back(make_observable(s, M, N));
  if (obs.empty()) {
    const auto b1 = build_basis(3 * (M + N), 2);
    std::vector<int> e(static_cast<size_t>(3 * (M + N)), 0);
    e[0] = 1;
    obs.push_back(hermite_observable("h1_v11", HermiteCoeffs::unit(b1, e)));
    e[0] = 2;
    obs.push_back(hermite_observable("h2_v11", HermiteCoeffs::unit(b1, e)));
    obs.push_back(energy_observable());
    obs.push_back(momentum_observable(0));
  }
  const InitSampler init =
      cfg.h0.family == "constant" ? gamma_sampler(M, N) : perturbed_sampler(config_h0(cfg), N);
  const auto rec = run_ensemble(sc, cfg.params, init, obs);

  std::ostringstream csv;
  write_moment_csv(csv, rec);
  r.write_csv(csv.str());

  r.report["data"] = {{"system", sc.system_kind == SystemKind::RSystem ? "R" : "T"},
                      {"ensemble", sc.ensemble},
                      {"records", rec.size()},
                      {"h0_family", cfg.h0.family}};
  double worst = 0.0;
  for (const auto& m : rec) {
    if (!std::isfinite(m.mean) || !std::isfinite(m.std_error)) worst = std::numeric_limits<double>::infinity();
  }
  r.check("finite_moments", worst, "<=", 0.0);
  if (sc.system_kind == SystemKind::RSystem) {
    // Every trajectory conserves its energy, so the energy mean is flat.
    std::map<std::string, std::pair<double, double>> range;
    for (const auto& m : rec) {
      if (m.observable != "energy") continue;
      auto [it, fresh] = range.try_emplace(m.observable, m.mean, m.mean);
      if (!fresh) it->second = {std::min(it->second.first, m.mean), std::max(it->second.second, m.mean)};
    }
    if (auto it = range.find("energy"); it != range.end()) {
      const double drift = (it->second.second - it->second.first) / std::max(std::abs(it->second.first), 1e-300);
      r.check("energy_conserved", drift, "<=", 1e-10);
    }
  }
  return r.finish(out);
}

int cmd_spectral(Run& r, const Options& o, std::ostream& out) {
  const auto& cfg = r.cfg;
  SystemKind kind = cfg.system_kind;
  if (o.system == "R") kind = SystemKind::RSystem;
  if (o.system == "T") kind = SystemKind::TSystem;
  const OperatorMatrix G = assemble_generator(kind, cfg.params, cfg.degree);

  std::ostringstream csv;
  CsvWriter w(csv, {"degree", "index", "eigenvalue"});
  double top = -std::numeric_limits<double>::infinity();
  for (int m = 0; m <= G.max_degree(); ++m) {
    const Eigen::VectorXd ev = symmetric_eigenvalues(G.blocks[static_cast<size_t>(m)]);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      w.add(m).add(static_cast<std::int64_t>(i)).add(ev(i));
      w.end_row();
      top = std::max(top, ev(i));
    }
    if (!o.dump_dir.empty()) {
      write_matrix_file(fs::path(o.dump_dir) / ("block_" + std::to_string(m) + ".txt"), G.blocks[static_cast<size_t>(m)]);
    }
  }
  r.write_csv(csv.str());
  r.report["data"] = {{"system", kind == SystemKind::RSystem ? "R" : "T"},
                      {"dimension", G.dim()},
                      {"kernel_dimension", kernel_dimension(G)}};
  r.check("symmetric", G.asymmetry(), "<=", 1e-12);
  r.check("nonpositive_spectrum", top, "<=", 1e-10);
  return r.finish(out);
}

int cmd_lemma1(Run& r, const Options& o, std::ostream& out) {
  const auto& cfg = r.cfg;
  RatioOptions opt;
  opt.inner = cfg.lemma1_inner;
  opt.max_samples = o.max_samples ? *o.max_samples : cfg.lemma1_max_samples;
  opt.rel_target = cfg.lemma1_rel_target;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  const auto rows = lemma1_study(cfg.lemma1_M, cfg.lemma1_N, opt);

  std::ostringstream csv;
  CsvWriter w(csv, {"M", "N", "function", "C", "ratio", "std_error", "samples", "exact_ratio"});
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_rel_err = 0.0;
  double worst_exact = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    const auto& e = row.estimate;
    w.add(e.M).add(e.N).add(row.function).add(e.C).add(e.ratio).add(e.std_error).add(e.samples).add(row.exact_ratio);
    w.end_row();
    worst_excess = std::max(worst_excess, e.ratio - e.C - 3.0 * e.std_error);
    worst_rel_err = std::max(worst_rel_err, e.std_error / e.C);
    worst_exact = std::max(worst_exact, row.exact_ratio - e.C);
  }
  r.write_csv(csv.str());

  json gauss = json::array();
  double worst_gauss = 0.0;
  for (int M : cfg.lemma1_M) {
    for (int N : cfg.lemma1_N) {
      const auto g = verify_gaussian_identity(M, N);
      gauss.push_back({{"M", M}, {"N", N}, {"numeric", g.numeric}, {"exact", g.exact}});
      worst_gauss = std::max(worst_gauss, std::abs(g.numeric - g.exact) / g.exact);
    }
  }
  r.report["data"] = {{"cases", rows.size()}, {"gaussian_identity", gauss}};
  r.check("ratio_within_C_plus_3_stderr", worst_excess, "<=", 0.0);
  r.check("stderr_below_target", worst_rel_err, "<=", opt.rel_target);
  r.check("exact_ratio_within_C", worst_exact, "<=", 1e-12);
  r.check("gaussian_identity", worst_gauss, "<=", 1e-8);
  return r.finish(out);
}

int cmd_lemma2(Run& r, const Options& o, std::ostream& out) {
  const auto& cfg = r.cfg;
  for (int N : o.reservoirs) {
    if (N < 2) throw ConfigError("--reservoirs: N must be >= 2");
  }
  const auto rows = lemma2_study(cfg.params.M, o.reservoirs, cfg.lemma2_random, cfg.lemma2_degree, cfg.seed);

  std::ostringstream csv;
  CsvWriter w(csv, {"label", "M", "N", "lhs", "rhs", "rhs_second_moment", "abs_diff"});
  double worst_identity = 0.0, worst_ineq = -std::numeric_limits<double>::infinity(), worst_moment = 0.0;
  json analytic = nullptr;
  for (const auto& row : rows) {
    const auto& x = row.result;
    w.add(row.label).add(row.M).add(row.N).add(x.lhs).add(x.rhs).add(x.rhs_second_moment).add(x.abs_diff());
    w.end_row();
    worst_identity = std::max(worst_identity, x.abs_diff());
    worst_ineq = std::max(worst_ineq, x.lhs - x.rhs);
    worst_moment = std::max(worst_moment, std::abs(x.lhs - x.rhs_second_moment));
    if (row.label == "v11" && row.M == 1 && row.N == 2) {
      // ĥ1(v) = √(2π) v, so raw-coordinate values carry a factor 1/(2π).
      const double s = 1.0 / (2.0 * std::numbers::pi);
      analytic = {{"lhs_raw", x.lhs * s}, {"rhs_raw", x.rhs * s}, {"expected_raw", 1.0 / (18.0 * std::numbers::pi)}};
    }
  }
  r.write_csv(csv.str());
  r.report["data"] = {{"rows", rows.size()}, {"analytic_v11", analytic}};
  r.check("identity_lhs_equals_rhs", worst_identity, "<=", 1e-9);
  r.check("inequality_lhs_le_rhs", worst_ineq, "<=", 1e-12);
  r.check("second_moment_identity", worst_moment, "<=", 1e-12);
  return r.finish(out);
}

int cmd_lemma3(Run& r, const Options& o, std::ostream& out) {
  const int dmax = o.max_degree ? *o.max_degree : r.cfg.lemma3_max_degree;
  if (dmax < 1 || dmax > 6) throw ConfigError("--max-degree must be in [1, 6]");
  const auto rows = lemma3_table(dmax);

  std::ostringstream csv;
  CsvWriter w(csv, {"degree", "hermite_top", "tensor_top", "tensor_sym_top", "shared_max_diff"});
  json per = json::array();
  double top = -std::numeric_limits<double>::infinity(), diff = 0.0;
  for (const auto& row : rows) {
    w.add(row.degree).add(row.hermite_top).add(row.tensor_top).add(row.tensor_sym_top).add(row.shared_max_diff);
    w.end_row();
    per.push_back({{"degree", row.degree},
                   {"hermite_top", row.hermite_top},
                   {"tensor_top", row.tensor_top},
                   {"tensor_sym_top", row.tensor_sym_top}});
    top = std::max({top, row.hermite_top, row.tensor_top, row.tensor_sym_top});
    diff = std::max(diff, row.shared_max_diff);
  }
  r.write_csv(csv.str());
  r.report["data"] = {{"max_degree", dmax}, {"per_degree", per}};
  r.check("degree1_top_is_two_thirds", std::abs(rows.front().hermite_top - 2.0 / 3.0), "<=", 1e-12);
  r.check("top_eigenvalue_le_two_thirds", top - 2.0 / 3.0, "<=", 1e-10);
  r.check("routes_agree", diff, "<=", 1e-9);
  return r.finish(out);
}

int cmd_gap(Run& r, const Options&, std::ostream& out) {
  const auto& cfg = r.cfg;
  const GapResult g = estimate_gap(cfg.params, std::max(cfg.degree, 1));
  std::ostringstream csv;
  CsvWriter w(csv, {"M", "N", "degree", "k_hat", "l_hat", "kernel_dim", "invariant_dim", "invariant_residual"});
  w.add(g.M).add(g.N).add(g.degree).add(g.k_hat).add(g.l_hat).add(g.kernel_dim).add(g.invariant_dim).add(g.invariant_residual);
  w.end_row();
  r.write_csv(csv.str());
  r.report["data"] = {{"k_hat", g.k_hat},
                      {"l_hat", g.l_hat},
                      {"kernel_dim", g.kernel_dim},
                      {"invariant_dim", g.invariant_dim},
                      {"scope", "configuration-specific estimates on the degree-d truncation"}};
  r.check("invariants_in_kernel", g.invariant_residual, "<=", 1e-9);
  r.check("kernel_equals_invariants", std::abs(g.kernel_dim - g.invariant_dim), "==", 0.0);
  r.check("gap_positive", g.k_hat, ">=", std::numeric_limits<double>::min());
  return r.finish(out);
}

int cmd_distance(Run& r, const Options&, std::ostream& out) {
  const auto& cfg = r.cfg;
  const HermiteCoeffs h0 = config_h0(cfg);
  const TheoremCase tc = theorem_case(cfg.params, cfg.h0.family, h0, std::max(cfg.degree, 1), cfg.time_grid(),
                                      cfg.k_override.value_or(-1.0), cfg.l_override.value_or(-1.0));
  std::ostringstream csv;
  write_curve_csv(csv, tc.curve, tc.bound);
  r.write_csv(csv.str());
  r.report["data"] = curve_summary(tc);
  r.check("distance_below_bound", tc.min_slack, ">=", -1e-9);
  if (std::isfinite(tc.limit)) r.check("limit_below_C_h0", tc.limit - tc.limit_bound, "<=", 1e-12);
  return r.finish(out);
}

int cmd_bound(Run& r, const Options&, std::ostream& out) {
  const auto& cfg = r.cfg;
  const auto& p = cfg.params;
  const HermiteCoeffs h0 = config_h0(cfg);
  double k = cfg.k_override.value_or(-1.0), l = cfg.l_override.value_or(-1.0);
  if (k < 0.0 || l < 0.0) {
    const GapResult g = estimate_gap(p, std::max(cfg.degree, 1));
    if (k < 0.0) k = g.k_hat;
    if (l < 0.0) l = g.l_hat;
  }
  const BoundParams bp =
      BoundParams::make(lemma1_constant(p.M, p.N).C, lambda_rate(p.lambda_S, p.mu), p.mu, k, l, h0.distance_to_one());
  std::vector<double> times = cfg.time_grid();
  if (times.empty()) {
    double slow = std::min(k, bp.lambda * p.M);
    if (p.mu > 0.0) slow = std::min(slow, p.mu / 3.0);
    times = geometric_grid(1e-3, std::log(1e7) / slow, 80);
  }
  const auto curve = bound_curve(bp, p.M, p.N, times);
  std::ostringstream csv;
  CsvWriter w(csv, {"t", "bound", "bound_term1", "bound_term2"});
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& pt : curve) {
    w.add(pt.t).add(pt.value).add(pt.term1).add(pt.term2);
    w.end_row();
    lowest = std::min({lowest, pt.term1, pt.term2});
  }
  r.write_csv(csv.str());
  r.report["data"] = {{"C", bp.C},   {"lambda", bp.lambda}, {"k_hat", bp.k}, {"l_hat", bp.l},
                      {"b", bp.b},   {"h0_norm", bp.h0_norm}, {"points", curve.size()},
                      {"constants_scope", "configuration-specific estimates on the truncated space"}};
  r.check("terms_nonnegative", lowest, ">=", 0.0);
  return r.finish(out);
}

int cmd_report(const Options& o, std::ostream& out) {
  const fs::path dir = o.dir.empty() ? fs::path(".") : fs::path(o.dir);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("report: '" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (fs::recursive_directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    const std::string name = it->path().filename().string();
    if (it->is_regular_file() && name.size() > 12 && name.ends_with(".report.json")) files.push_back(it->path());
  }
  if (ec) throw IoError("report: cannot scan '" + dir.string() + "': " + ec.message());
  if (files.empty()) throw IoError("report: no *.report.json files under '" + dir.string() + "'");
  std::sort(files.begin(), files.end());

  json agg;
  agg["command"] = "report";
  agg["directory"] = dir.string();
  agg["reports"] = json::array();
  bool all = true;
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_text_file(f));
    } catch (const json::parse_error& e) {
      throw IoError("report: '" + f.string() + "' is not valid JSON");
    }
    json checks = json::array();
    for (const auto& c : j.value("checks", json::array())) {
      checks.push_back({{"name", c.value("name", "")}, {"passed", c.value("passed", false)}});
    }
    const bool ok = j.value("passed", false);
    all = all && ok;
    agg["reports"].push_back(
        {{"file", fs::relative(f, dir).string()}, {"command", j.value("command", "")}, {"passed", ok}, {"checks", checks}});
  }
  agg["passed"] = all;
  const std::string text = agg.dump(2) + "\n";
  if (!o.out.empty()) write_text_file(o.out, text);
  out << text;
  return all ? 0 : 3;
}

void error_record(std::ostream& err, const std::string& command, const char* kind, int code, const std::string& msg) {
  json e = {{"error", {{"kind", kind}, {"exit_code", code}, {"command", command}, {"message", msg}}}};
  err << e.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kac bath verification lab", "kacbath"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--out", o.out, "Primary output path; the report goes to <out>.report.json");
  app.add_option("--seed", o.seed, "Overrides the configured seed");
  app.add_option("--threads", o.threads, "Overrides the configured thread count");

  using Handler = std::function<int(Run&, const Options&, std::ostream&)>;
  std::map<CLI::App*, std::pair<std::string, Handler>> handlers;
  auto add = [&](const std::string& name, const std::string& help, Handler h) {
    CLI::App* sub = app.add_subcommand(name, help);
    handlers[sub] = {name, std::move(h)};
    return sub;
  };
  auto* sim = add("simulate", "Ensemble moments from the jump process", cmd_simulate);
  sim->add_option("--system", o.system, "R or T, overrides system_kind")->check(CLI::IsMember({"R", "T"}));
  auto* spec = add("spectral", "Eigenvalues of the assembled generator", cmd_spectral);
  spec->add_option("--system", o.system, "R or T, overrides system_kind")->check(CLI::IsMember({"R", "T"}));
  spec->add_option("--dump-dir", o.dump_dir, "Write each degree block as a text matrix");
  auto* l1 = add("verify-lemma1", "Monte Carlo projector bound and Gaussian identity", cmd_lemma1);
  l1->add_option("--max-samples", o.max_samples, "Overrides lemma1.max_samples");
  auto* l2 = add("verify-lemma2", "Variance identity on assembled matrices", cmd_lemma2);
  l2->add_option("--reservoirs", o.reservoirs, "Reservoir sizes N")->expected(1, -1);
  auto* l3 = add("verify-lemma3", "Degree bound of the thermostat operator", cmd_lemma3);
  l3->add_option("--max-degree", o.max_degree, "Highest total degree, at most 6");
  add("gap", "Spectral gap and l estimate", cmd_gap);
  add("distance", "Exact distance curve with its bound", cmd_distance);
  add("bound", "Bound curve alone", cmd_bound);
  auto* rep = app.add_subcommand("report", "Aggregate *.report.json files in a directory");
  rep->add_option("--dir", o.dir, "Run directory (default: current directory)");

  std::string command = "kacbath";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_record(err, command, "usage", 2, e.what());
    return 2;
  }

  try {
    if (rep->parsed()) {
      command = "report";
      return cmd_report(o, out);
    }
    for (auto& [sub, h] : handlers) {
      if (!sub->parsed()) continue;
      command = h.first;
      Run run(command, o);
      return h.second(run, o, out);
    }
    error_record(err, command, "usage", 2, "no subcommand");
    return 2;
  } catch (const ConfigError& e) {
    error_record(err, command, "config", 2, e.what());
    return 2;
  } catch (const ContractError& e) {
    error_record(err, command, "config", 2, e.what());
    return 2;
  } catch (const NumericalError& e) {
    error_record(err, command, "numerical", 3, e.what());
    return 3;
  } catch (const IoError& e) {
    error_record(err, command, "io", 4, e.what());
    return 4;
  } catch (const std::exception& e) {
    error_record(err, command, "numerical", 3, e.what());
    return 3;
  }
}

}  // namespace kacbath::cli
