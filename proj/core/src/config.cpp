#include "kacbath/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "kacbath/csv.hpp"
#include "kacbath/errors.hpp"

namespace kacbath {

using nlohmann::json;

const std::vector<std::string>& h0_families() {
  static const std::vector<std::string> f{"constant", "linear", "shear", "energy", "custom"};
  return f;
}

HermiteCoeffs build_h0(const H0Spec& spec, int M, int d) {
  if (M < 1 || d < 0) throw ContractError("build_h0: need M >= 1 and d >= 0");
  const int K = 3 * M;
  const auto basis = build_basis(K, d);
  HermiteCoeffs h = HermiteCoeffs::constant(basis);
  auto add = [&](std::vector<int> e, double c) {
    if (static_cast<int>(e.size()) != K) throw ContractError("build_h0: exponent vector must have 3M entries");
    int deg = 0;
    for (int x : e) {
      if (x < 0) throw ContractError("build_h0: negative exponent");
      deg += x;
    }
    if (deg == 0) throw ContractError("build_h0: the perturbation must not contain the constant function");
    if (deg > d) throw ContractError("build_h0: term degree exceeds the basis degree");
    h[e] += c;
  };
  const double eps = spec.epsilon;
  auto unit = [&](std::initializer_list<std::pair<int, int>> nz) {
    std::vector<int> e(static_cast<size_t>(K), 0);
    for (auto [k, x] : nz) e[static_cast<size_t>(k)] = x;
    return e;
  };
  if (spec.family == "constant") {
  } else if (spec.family == "linear") {
    add(unit({{0, 1}}), eps);
  } else if (spec.family == "shear") {
    add(unit({{0, 1}, {1, 1}}), eps);
  } else if (spec.family == "energy") {
    const double s = eps / std::sqrt(static_cast<double>(K));
    for (int k = 0; k < K; ++k) add(unit({{k, 2}}), s);
  } else if (spec.family == "custom") {
    for (const auto& t : spec.terms) add(t.exponents, eps * t.coeff);
  } else {
    throw ContractError("build_h0: unknown family '" + spec.family + "'");
  }
  return h;
}

Observable make_observable(const ObservableSpec& spec, int M, int N) {
  if (spec.kind == "energy") return {spec.name, energy_observable().eval};
  if (spec.kind.rfind("momentum_", 0) == 0 && spec.kind.size() == 10) {
    const int c = spec.kind[9] - 'x';
    if (c >= 0 && c <= 2) return {spec.name, momentum_observable(c).eval};
  }
  if (spec.kind != "hermite") throw ContractError("make_observable: unknown kind '" + spec.kind + "'");
  const int K = 3 * (M + N);
  int d = 0;
  for (const auto& t : spec.terms) {
    if (static_cast<int>(t.exponents.size()) != K) throw ContractError("make_observable: exponent vectors need 3(M+N) entries");
    int deg = 0;
    for (int x : t.exponents) {
      if (x < 0) throw ContractError("make_observable: negative exponent");
      deg += x;
    }
    d = std::max(d, deg);
  }
  HermiteCoeffs f(build_basis(K, d));
  for (const auto& t : spec.terms) f[t.exponents] += t.coeff;
  return hermite_observable(spec.name, f);
}

std::vector<double> RunConfig::time_grid() const {
  if (!record_times.empty()) return record_times;
  std::vector<double> g;
  if (grid.kind == "auto") return g;
  if (grid.kind == "uniform") {
    for (int k = 0; k <= grid.points; ++k) g.push_back(t_end * k / grid.points);
    return g;
  }
  g.push_back(0.0);
  const double r = std::log(t_end / grid.t_min) / (grid.points - 1);
  for (int k = 0; k < grid.points; ++k) g.push_back(k == grid.points - 1 ? t_end : grid.t_min * std::exp(r * k));
  return g;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(where, "unknown key '" + k + "'");
  }
}

double get_real(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

std::int64_t get_int(const json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  // Accept integral floats such as 1e7.
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e15) return static_cast<std::int64_t>(x);
  }
  fail(where, "expected an integer");
}

std::vector<int> get_int_list(const json& j, const std::string& where, int min_value) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of integers");
  std::vector<int> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const auto x = get_int(j[i], where);
    if (x < min_value || x > 1000) fail(where, "value out of range");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::vector<H0Spec::Term> parse_terms(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of terms");
  std::vector<H0Spec::Term> out;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    check_keys(j[i], w, {"exponents", "coeff"});
    if (!j[i].contains("exponents") || !j[i].contains("coeff")) fail(w, "needs 'exponents' and 'coeff'");
    H0Spec::Term t;
    const auto& e = j[i]["exponents"];
    if (!e.is_array() || e.empty()) fail(w + ".exponents", "expected a non-empty array");
    for (const auto& x : e) {
      const auto v = get_int(x, w + ".exponents");
      if (v < 0 || v > 32) fail(w + ".exponents", "exponents must be in [0, 32]");
      t.exponents.push_back(static_cast<int>(v));
    }
    t.coeff = get_real(j[i]["coeff"], w + ".coeff");
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"M", "N", "lambda_S", "lambda_R", "mu", "seed", "threads", "t_end", "record_times", "grid", "ensemble",
              "chunk", "degree", "system_kind", "h0", "observables", "k", "l", "lemma1", "lemma2", "lemma3", "scaling"});
  RunConfig c;
  auto& p = c.params;
  if (j.contains("M")) p.M = static_cast<int>(get_int(j["M"], "M"));
  if (j.contains("N")) p.N = static_cast<int>(get_int(j["N"], "N"));
  if (j.contains("lambda_S")) p.lambda_S = get_real(j["lambda_S"], "lambda_S");
  if (j.contains("lambda_R")) p.lambda_R = get_real(j["lambda_R"], "lambda_R");
  if (j.contains("mu")) p.mu = get_real(j["mu"], "mu");
  if (p.M < 1 || p.M > 64) fail("M", "must be in [1, 64]");
  if (p.N < 2 || p.N > 4096) fail("N", "must be in [2, 4096]");
  if (p.lambda_S < 0 || p.lambda_R < 0 || p.mu < 0) fail("rates", "lambda_S, lambda_R and mu must be >= 0");

  if (j.contains("seed")) {
    const auto s = get_int(j["seed"], "seed");
    if (s < 0) fail("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("threads")) {
    const auto t = get_int(j["threads"], "threads");
    if (t < 1 || t > 1024) fail("threads", "must be in [1, 1024]");
    c.threads = static_cast<int>(t);
  }
  if (j.contains("t_end")) c.t_end = get_real(j["t_end"], "t_end");
  if (!(c.t_end > 0.0)) fail("t_end", "must be > 0");
  if (j.contains("record_times")) {
    if (!j["record_times"].is_array()) fail("record_times", "expected an array");
    for (const auto& x : j["record_times"]) c.record_times.push_back(get_real(x, "record_times"));
    for (size_t k = 0; k < c.record_times.size(); ++k) {
      if (c.record_times[k] < 0.0 || c.record_times[k] > c.t_end) fail("record_times", "values must lie in [0, t_end]");
      if (k > 0 && c.record_times[k] < c.record_times[k - 1]) fail("record_times", "must be sorted");
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, "grid", {"kind", "t_min", "points"});
    if (g.contains("kind")) {
      if (!g["kind"].is_string()) fail("grid.kind", "expected a string");
      c.grid.kind = g["kind"].get<std::string>();
      if (c.grid.kind != "geometric" && c.grid.kind != "uniform" && c.grid.kind != "auto") {
        fail("grid.kind", "must be 'geometric', 'uniform' or 'auto'");
      }
    }
    if (g.contains("t_min")) c.grid.t_min = get_real(g["t_min"], "grid.t_min");
    if (g.contains("points")) c.grid.points = static_cast<int>(get_int(g["points"], "grid.points"));
  }
  if (c.grid.points < 2 || c.grid.points > 100000) fail("grid.points", "must be in [2, 100000]");
  if (!(c.grid.t_min > 0.0) || c.grid.t_min >= c.t_end) fail("grid.t_min", "must satisfy 0 < t_min < t_end");

  if (j.contains("ensemble")) c.ensemble = get_int(j["ensemble"], "ensemble");
  if (c.ensemble < 1) fail("ensemble", "must be >= 1");
  if (j.contains("chunk")) c.chunk = get_int(j["chunk"], "chunk");
  if (c.chunk < 1) fail("chunk", "must be >= 1");
  if (j.contains("degree")) c.degree = static_cast<int>(get_int(j["degree"], "degree"));
  if (c.degree < 0 || c.degree > 8) fail("degree", "must be in [0, 8]");
  if (j.contains("system_kind")) {
    if (!j["system_kind"].is_string()) fail("system_kind", "expected a string");
    const auto k = j["system_kind"].get<std::string>();
    if (k == "R") {
      c.system_kind = SystemKind::RSystem;
    } else if (k == "T") {
      c.system_kind = SystemKind::TSystem;
    } else {
      fail("system_kind", "must be 'R' or 'T'");
    }
  }
  if (j.contains("h0")) {
    const auto& h = j["h0"];
    check_keys(h, "h0", {"family", "epsilon", "terms"});
    if (h.contains("family")) {
      if (!h["family"].is_string()) fail("h0.family", "expected a string");
      c.h0.family = h["family"].get<std::string>();
      const auto& fams = h0_families();
      if (std::find(fams.begin(), fams.end(), c.h0.family) == fams.end()) fail("h0.family", "unknown family");
    }
    if (h.contains("epsilon")) c.h0.epsilon = get_real(h["epsilon"], "h0.epsilon");
    if (h.contains("terms")) c.h0.terms = parse_terms(h["terms"], "h0.terms");
    if (c.h0.family == "custom" && c.h0.terms.empty()) fail("h0.terms", "custom family needs terms");
    for (const auto& t : c.h0.terms) {
      if (static_cast<int>(t.exponents.size()) != 3 * p.M) fail("h0.terms", "exponent vectors need 3M entries");
    }
  }
  if (j.contains("observables")) {
    const auto& o = j["observables"];
    if (!o.is_array()) fail("observables", "expected an array");
    for (size_t i = 0; i < o.size(); ++i) {
      const std::string w = "observables[" + std::to_string(i) + "]";
      check_keys(o[i], w, {"name", "kind", "terms"});
      ObservableSpec s;
      if (!o[i].contains("name") || !o[i]["name"].is_string()) fail(w, "needs a string 'name'");
      s.name = o[i]["name"].get<std::string>();
      if (s.name.empty() || s.name.find_first_of(",\n\r") != std::string::npos) fail(w, "name must be non-empty without commas");
      if (o[i].contains("kind")) {
        if (!o[i]["kind"].is_string()) fail(w + ".kind", "expected a string");
        s.kind = o[i]["kind"].get<std::string>();
      }
      static const std::set<std::string> kinds{"hermite", "energy", "momentum_x", "momentum_y", "momentum_z"};
      if (!kinds.count(s.kind)) fail(w + ".kind", "unknown observable kind");
      if (s.kind == "hermite") {
        if (!o[i].contains("terms")) fail(w, "hermite observables need terms");
        s.terms = parse_terms(o[i]["terms"], w + ".terms");
        for (const auto& t : s.terms) {
          if (static_cast<int>(t.exponents.size()) != 3 * (p.M + p.N)) fail(w, "exponent vectors need 3(M+N) entries");
        }
      }
      c.observables.push_back(std::move(s));
    }
  }
  if (j.contains("k") && !j["k"].is_null()) {
    c.k_override = get_real(j["k"], "k");
    if (!(*c.k_override > 0.0)) fail("k", "must be > 0");
  }
  if (j.contains("l") && !j["l"].is_null()) {
    c.l_override = get_real(j["l"], "l");
    if (!(*c.l_override >= 0.0)) fail("l", "must be >= 0");
  }
  if (j.contains("lemma1")) {
    const auto& l = j["lemma1"];
    check_keys(l, "lemma1", {"M", "N", "max_samples", "inner", "rel_target"});
    if (l.contains("M")) c.lemma1_M = get_int_list(l["M"], "lemma1.M", 1);
    if (l.contains("N")) c.lemma1_N = get_int_list(l["N"], "lemma1.N", 2);
    if (l.contains("max_samples")) c.lemma1_max_samples = get_int(l["max_samples"], "lemma1.max_samples");
    if (l.contains("inner")) c.lemma1_inner = static_cast<int>(get_int(l["inner"], "lemma1.inner"));
    if (l.contains("rel_target")) c.lemma1_rel_target = get_real(l["rel_target"], "lemma1.rel_target");
    if (c.lemma1_max_samples < 1000) fail("lemma1.max_samples", "must be >= 1000");
    if (c.lemma1_inner < 2 || c.lemma1_inner > 4096) fail("lemma1.inner", "must be in [2, 4096]");
    if (!(c.lemma1_rel_target > 0.0)) fail("lemma1.rel_target", "must be > 0");
  }
  if (j.contains("lemma2")) {
    const auto& l = j["lemma2"];
    check_keys(l, "lemma2", {"random", "degree"});
    if (l.contains("random")) c.lemma2_random = static_cast<int>(get_int(l["random"], "lemma2.random"));
    if (l.contains("degree")) c.lemma2_degree = static_cast<int>(get_int(l["degree"], "lemma2.degree"));
    if (c.lemma2_random < 0 || c.lemma2_random > 10000) fail("lemma2.random", "must be in [0, 10000]");
    if (c.lemma2_degree < 1 || c.lemma2_degree > 6) fail("lemma2.degree", "must be in [1, 6]");
  }
  if (j.contains("lemma3")) {
    const auto& l = j["lemma3"];
    check_keys(l, "lemma3", {"max_degree"});
    if (l.contains("max_degree")) c.lemma3_max_degree = static_cast<int>(get_int(l["max_degree"], "lemma3.max_degree"));
    if (c.lemma3_max_degree < 1 || c.lemma3_max_degree > 6) fail("lemma3.max_degree", "must be in [1, 6]");
  }
  if (j.contains("scaling")) {
    const auto& s = j["scaling"];
    check_keys(s, "scaling", {"N"});
    if (s.contains("N")) c.scaling_N = get_int_list(s["N"], "scaling.N", 2);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

}  // namespace kacbath
