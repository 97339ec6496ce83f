#include <locale>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "kacbath/config.hpp"
#include "kacbath/csv.hpp"
#include "kacbath/errors.hpp"

using namespace kacbath;

TEST(FormatReal, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(1.0), "1");
  for (double x : {1.0 / 3.0, 6.02214076e23, -1e-17, 0.047635114987746599}) EXPECT_EQ(std::stod(format_real(x)), x);
}

namespace {

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

}  // namespace

TEST(CsvWriter, IgnoresStreamLocale) {
  std::ostringstream s;
  s.imbue(std::locale(std::locale::classic(), new CommaDecimal));
  CsvWriter w(s, {"n", "x"});
  w.add(std::int64_t{1234567}).add(0.5);
  w.end_row();
  EXPECT_EQ(s.str(), "n,x\n1234567,0.5\n");
}

TEST(CsvWriter, RowsAndErrors) {
  std::ostringstream s;
  CsvWriter w(s, {"a", "b"});
  w.add(1).add(0.25);
  w.end_row();
  EXPECT_EQ(s.str(), "a,b\n1,0.25\n");
  EXPECT_THROW(w.add("x,y"), ContractError);
  w.add(2);
  EXPECT_THROW(w.end_row(), ContractError);
}

TEST(TextFile, MissingFileIsIoError) {
  EXPECT_THROW(read_text_file("/nonexistent/kacbath/file.json"), IoError);
}

TEST(Config, Defaults) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.params.M, 1);
  EXPECT_EQ(c.params.N, 2);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.h0.family, "linear");
  const auto g = c.time_grid();
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), c.t_end);
  EXPECT_EQ(g.size(), static_cast<size_t>(c.grid.points + 1));
}

TEST(Config, FullDocument) {
  const RunConfig c = parse_config(R"({
    "M": 2, "N": 6, "lambda_S": 0.5, "lambda_R": 2, "mu": 0.25, "seed": 99, "threads": 2,
    "t_end": 4, "record_times": [0, 1, 4], "ensemble": 500, "degree": 3, "system_kind": "T",
    "h0": {"family": "custom", "epsilon": 0.2, "terms": [{"exponents": [1,0,0,0,0,1], "coeff": 1.0}]},
    "observables": [{"name": "e", "kind": "energy"}],
    "k": 0.4, "lemma1": {"M": [1], "N": [4], "max_samples": 5000}, "lemma3": {"max_degree": 4}
  })");
  EXPECT_EQ(c.params.N, 6);
  EXPECT_EQ(c.params.mu, 0.25);
  EXPECT_EQ(c.system_kind, SystemKind::TSystem);
  EXPECT_EQ(c.time_grid(), (std::vector<double>{0, 1, 4}));
  EXPECT_EQ(*c.k_override, 0.4);
  EXPECT_FALSE(c.l_override.has_value());
  const HermiteCoeffs h = build_h0(c.h0, 2, 3);
  EXPECT_NEAR(h.distance_to_one(), 0.2, 1e-15);
}

TEST(Config, Rejections) {
  for (const char* bad : {R"({"M": 0})", R"({"N": 1})", R"({"mu": -1})", R"({"bogus": 1})", R"({"seed": -3})",
                          R"({"M": 1.5})", R"({"t_end": 1, "record_times": [0, 2]})", R"({"system_kind": "X"})",
                          R"({"h0": {"family": "nope"}})", R"({"grid": {"kind": "log"}})", "not json",
                          R"({"h0": {"family": "custom"}})", R"({"observables": [{"name": "a,b", "kind": "energy"}]})",
                          R"({"lemma3": {"max_degree": 9}})"}) {
    EXPECT_THROW(parse_config(bad), ConfigError) << bad;
  }
}

TEST(H0Families, NormsAndTerms) {
  for (const auto& fam : h0_families()) {
    if (fam == "custom") continue;
    H0Spec s;
    s.family = fam;
    s.epsilon = 0.3;
    const HermiteCoeffs h = build_h0(s, 2, 2);
    EXPECT_NEAR(h.distance_to_one(), fam == "constant" ? 0.0 : 0.3, 1e-15) << fam;
  }
  H0Spec s;
  s.family = "custom";
  s.terms = {{{0, 0, 3}, 1.0}};
  EXPECT_THROW(build_h0(s, 1, 2), ContractError);
}

TEST(Observables, FromSpec) {
  ObservableSpec s{"m", "momentum_y", {}};
  JointState st = JointState::zeros(1, 2);
  st.v[0] = {1, 2, 3};
  st.w[1] = {0, -5, 0};
  EXPECT_EQ(make_observable(s, 1, 2).eval(st), -3.0);
  ObservableSpec h{"x", "hermite", {{{1, 0, 0, 0, 0, 0, 0, 0, 0}, 2.0}}};
  EXPECT_NEAR(make_observable(h, 1, 2).eval(st), 2.0 * std::sqrt(2.0 * std::numbers::pi), 1e-13);
}

TEST(Config, ShippedExampleLoads) {
  const RunConfig c = load_config(KACBATH_EXAMPLE_CONFIG);
  EXPECT_EQ(c.params.N, 2);
  EXPECT_EQ(c.observables.size(), 2u);
  EXPECT_EQ(c.h0.family, "linear");
}
