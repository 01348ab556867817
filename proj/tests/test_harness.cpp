#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "liepoisson/harness.hpp"

namespace lp = liepoisson;
namespace hn = liepoisson::harness;

namespace {

hn::RunConfig config(const hn::Settings& s) { return hn::config_from_settings(s); }

hn::TrajectoryRecord parse(const std::string& csv) {
  std::istringstream in(csv);
  return hn::read_csv(in);
}

struct Captured {
  int code;
  std::string out, err;
};

template <class Cmd>
Captured run(Cmd cmd, const hn::RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = cmd(cfg, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Parsing, Reals) {
  EXPECT_DOUBLE_EQ(hn::parse_real("0.25"), 0.25);
  EXPECT_DOUBLE_EQ(hn::parse_real(" 1/3 "), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(hn::parse_real("-1e-3"), -1e-3);
  EXPECT_THROW(hn::parse_real("abc"), hn::ConfigError);
  EXPECT_THROW(hn::parse_real("1/0"), hn::ConfigError);
  EXPECT_THROW(hn::parse_real("nan"), hn::ConfigError);
  EXPECT_EQ(hn::parse_real_list("1, 0,1"), (std::vector<double>{1, 0, 1}));
}

TEST(Parsing, Tableaus) {
  const auto rk4 = hn::parse_tableau("rk4");
  EXPECT_EQ(rk4.stages(), 4);
  const auto inline_tab = hn::parse_tableau("1/2|1");
  EXPECT_EQ(inline_tab.stages(), 1);
  EXPECT_DOUBLE_EQ(inline_tab.a()(0, 0), 0.5);
  const auto two = hn::parse_tableau("0,0;1/2,1/2|1/2,1/2");
  EXPECT_EQ(two.stages(), 2);
  EXPECT_DOUBLE_EQ(two.a()(1, 0), 0.5);
  EXPECT_THROW(hn::parse_tableau("nope"), hn::ConfigError);
  EXPECT_THROW(hn::parse_tableau("0,0;1|1,1"), std::invalid_argument);
}

TEST(Settings, ReadsFlatKeyValueText) {
  std::istringstream in(
      "# trajectory sweep\n"
      "method = strang\n"
      "m0 = \"1, 1, 1\"   # quoted\n"
      "sample_every = 5\n"
      "\n"
      "h=0.05\n");
  const hn::Settings s = hn::read_settings(in);
  EXPECT_EQ(s.at("method"), "strang");
  EXPECT_EQ(s.at("m0"), "1, 1, 1");
  EXPECT_EQ(s.at("sample-every"), "5");
  const auto cfg = config(s);
  EXPECT_EQ(cfg.method, hn::Method::strang);
  EXPECT_EQ(cfg.sample_every, 5);
  EXPECT_DOUBLE_EQ(cfg.h, 0.05);
}

TEST(Settings, MalformedLine) {
  std::istringstream in("method strang\n");
  EXPECT_THROW(hn::read_settings(in), hn::ConfigError);
}

TEST(Settings, Shorthands) {
  const auto y6 = config({{"method", "yoshida6"}});
  EXPECT_EQ(y6.method, hn::Method::yoshida);
  EXPECT_EQ(y6.order, 6);
  EXPECT_EQ(config({{"method", "lie_trotter"}, {"frozen", "true"}}).method, hn::Method::lie_trotter_frozen);
  EXPECT_THROW(config({{"method", "strang"}, {"frozen", "true"}}), hn::ConfigError);
  EXPECT_THROW(config({{"colour", "blue"}}), hn::ConfigError);
}

TEST(Validation, RejectsIncompatibleConfigs) {
  EXPECT_THROW(hn::validate(config({{"method", "ruth"}})), hn::ConfigError);
  EXPECT_THROW(hn::validate(config({{"method", "strang"}, {"system", "harmonic_oscillator"}})),
               hn::ConfigError);
  EXPECT_THROW(hn::validate(config({{"m0", "1,2"}})), hn::ConfigError);
  EXPECT_THROW(hn::validate(config({{"h", "0"}})), hn::ConfigError);
  EXPECT_THROW(hn::validate(config({{"steps", "0"}})), hn::ConfigError);
  EXPECT_THROW(hn::validate(config({{"I1", "1"}, {"I3", "2"}})), std::invalid_argument);

  const auto res = run(hn::cmd_integrate, config({{"method", "ruth"}}));
  EXPECT_EQ(res.code, hn::kExitConfigError);
  EXPECT_NE(res.err.find("config error"), std::string::npos);
}

TEST(Integrate, FixedPoint) {
  const auto res = run(hn::cmd_integrate, config({{"m0", "0,0,1"}, {"h", "0.1"}, {"steps", "3"}}));
  ASSERT_EQ(res.code, 0);
  const auto rec = parse(res.out);
  EXPECT_EQ(rec.columns, (std::vector<std::string>{"step", "t", "m1", "m2", "m3", "H", "C"}));
  ASSERT_EQ(rec.rows.size(), 4u);
  for (const auto& row : rec.rows) {
    EXPECT_EQ(row.values[0], 0.0);
    EXPECT_EQ(row.values[1], 0.0);
    EXPECT_EQ(row.values[2], 1.0);
  }
}

TEST(Integrate, CasimirColumn) {
  const auto rec = hn::integrate(config({{"m0", "1,0,1"}, {"h", "0.01"}, {"steps", "100"}}));
  EXPECT_NEAR(rec.rows.back().values.back(), 1.0, 1e-13);
  for (const auto& row : rec.rows) {
    EXPECT_NEAR(row.t, static_cast<double>(row.step) * 0.01, 1e-12);
  }
}

TEST(Integrate, RuthRow) {
  const auto res = run(hn::cmd_integrate, config({{"method", "ruth"}, {"system", "harmonic_oscillator"},
                                                  {"m0", "1,0"}, {"h", "0.1"}, {"steps", "1"}}));
  ASSERT_EQ(res.code, 0);
  const auto rec = parse(res.out);
  EXPECT_EQ(rec.columns, (std::vector<std::string>{"step", "t", "q", "p", "H"}));
  ASSERT_EQ(rec.rows.size(), 2u);
  EXPECT_EQ(rec.rows[1].step, 1);
  EXPECT_DOUBLE_EQ(rec.rows[1].t, 0.1);
  EXPECT_DOUBLE_EQ(rec.rows[1].values[0], 1.0);
  EXPECT_DOUBLE_EQ(rec.rows[1].values[1], -0.1);
  EXPECT_DOUBLE_EQ(rec.rows[1].values[2], 0.5 * (1.0 + 0.01));
}

TEST(Integrate, SeventeenDigitsAndHeader) {
  const auto res = run(hn::cmd_integrate, config({{"m0", "1,1,1"}, {"h", "0.1"}, {"steps", "1"}}));
  std::istringstream in(res.out);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(header, "step,t,m1,m2,m3,H,C");
  EXPECT_EQ(row0, "0,0,1,1,1,1,1.5");
  EXPECT_EQ(hn::format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(hn::format_real(-2.5), "-2.5");
  // every field re-reads to the exact double that produced it
  const auto rec = hn::integrate(config({{"m0", "1,1,1"}, {"h", "0.1"}, {"steps", "1"}}));
  std::istringstream cells(row1);
  std::string cell;
  std::getline(cells, cell, ',');
  std::getline(cells, cell, ',');
  for (double v : rec.rows[1].values) {
    std::getline(cells, cell, ',');
    EXPECT_EQ(std::stod(cell), v);
    EXPECT_LE(cell.find_first_of("eE") == std::string::npos ? cell.size() : 0u, 20u);
  }
}

TEST(Integrate, SampleEveryThinsOutput) {
  const auto full = hn::integrate(config({{"steps", "10"}}));
  const auto thin = hn::integrate(config({{"steps", "10"}, {"sample-every", "4"}}));
  ASSERT_EQ(thin.rows.size(), 4u);  // 0, 4, 8, 10
  EXPECT_EQ(thin.rows[1], full.rows[4]);
  EXPECT_EQ(thin.rows[3], full.rows[10]);
}

TEST(Integrate, DeterministicAndRoundTrips) {
  const auto cfg = config({{"method", "yoshida"}, {"m0", "0.3,-1.2,0.8"}, {"steps", "250"}, {"h", "0.037"}});
  const auto a = run(hn::cmd_integrate, cfg);
  const auto b = run(hn::cmd_integrate, cfg);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(parse(a.out), hn::integrate(cfg));
}

TEST(Integrate, BlowUpKeepsPartialOutput) {
  const auto res = run(hn::cmd_integrate, config({{"method", "euler"}, {"system", "example31"},
                                                  {"A", "1e150"}, {"B", "1e150"}, {"m0", "1,1"},
                                                  {"h", "1"}, {"steps", "50"}}));
  EXPECT_EQ(res.code, hn::kExitBlowUp);
  EXPECT_NE(res.err.find("blow-up"), std::string::npos);
  const auto rec = parse(res.out);
  EXPECT_GE(rec.rows.size(), 1u);
  EXPECT_LT(rec.rows.size(), 51u);
}

TEST(Verify, TableauChecks) {
  const auto mid = run(hn::cmd_verify, config({{"check", "tableau"}, {"tableau", "midpoint"}}));
  EXPECT_EQ(mid.code, 0);
  EXPECT_NE(mid.out.find("[[0]]"), std::string::npos);
  const auto rk4 = run(hn::cmd_verify, config({{"check", "tableau"}, {"tableau", "rk4"}}));
  EXPECT_EQ(rk4.code, hn::kExitCheckFailed);
  EXPECT_NE(rk4.out.find("max residual 0.1111"), std::string::npos);
  const auto bad = run(hn::cmd_verify, config({{"check", "tableau"}, {"tableau", "1/2|1/2"}}));
  EXPECT_NE(bad.err.find("warning"), std::string::npos);
}

TEST(Verify, PoissonCheck) {
  const auto lt = run(hn::cmd_verify, config({{"check", "poisson"}, {"method", "lie_trotter"}, {"h", "0.1"}}));
  EXPECT_EQ(lt.code, 0) << lt.out;
  const auto eu = run(hn::cmd_verify, config({{"check", "poisson"}, {"method", "euler"}, {"h", "0.1"}}));
  EXPECT_EQ(eu.code, hn::kExitCheckFailed);
}

TEST(Verify, SymplecticAndDrift) {
  const auto ruth = run(hn::cmd_verify, config({{"check", "symplectic2d"}, {"method", "ruth"},
                                                {"system", "harmonic_oscillator"}, {"h", "0.3"}}));
  EXPECT_EQ(ruth.code, 0) << ruth.out;
  const auto wrong_dim = run(hn::cmd_verify, config({{"check", "symplectic2d"}}));
  EXPECT_EQ(wrong_dim.code, hn::kExitConfigError);

  const auto casimir = run(hn::cmd_verify, config({{"check", "drift:casimir"}, {"m0", "1,0,1"}, {"steps", "10000"}}));
  EXPECT_EQ(casimir.code, 0) << casimir.out;
  const auto energy = run(hn::cmd_verify, config({{"check", "drift"}, {"observable", "hamiltonian"},
                                                  {"m0", "1,1,1"}, {"h", "0.1"}, {"steps", "1000"}}));
  EXPECT_EQ(energy.code, hn::kExitCheckFailed);
  EXPECT_EQ(run(hn::cmd_verify, config({{"check", "bogus"}})).code, hn::kExitConfigError);
}

TEST(Order, SlopesAndSentinel) {
  for (const auto& [method, lo, hi] : {std::tuple{"lie_trotter", 0.85, 1.15}, std::tuple{"strang", 1.85, 2.15},
                                       std::tuple{"yoshida4", 3.75, 4.25}}) {
    const auto res = run(hn::cmd_order, config({{"method", method}, {"m0", "1,0,1"}}));
    ASSERT_EQ(res.code, 0) << res.err;
    EXPECT_EQ(res.out.rfind("h,error\n", 0), 0u);
    const double slope = std::stod(res.out.substr(res.out.find("slope ") + 6));
    EXPECT_GE(slope, lo) << method;
    EXPECT_LE(slope, hi) << method;
  }
  const auto fixed = run(hn::cmd_order, config({{"m0", "0,0,1"}}));
  EXPECT_NE(fixed.out.find("slope inf"), std::string::npos);
  EXPECT_EQ(run(hn::cmd_order, config({{"h-list", "0.1,0.3,0.05"}})).code, hn::kExitConfigError);
  EXPECT_EQ(run(hn::cmd_order, config({{"method", "ruth"}, {"system", "harmonic_oscillator"}})).code,
            hn::kExitConfigError);
}

TEST(Eig, Reports) {
  const auto zero = run(hn::cmd_eig, config({{"h", "0"}}));
  EXPECT_EQ(zero.code, 0);
  EXPECT_NE(zero.out.find("lambda1 = 1 + 0i"), std::string::npos) << zero.out;
  EXPECT_EQ(run(hn::cmd_integrate, config({{"h", "0"}})).code, hn::kExitConfigError);

  const auto res = run(hn::cmd_eig, config({{"m0", "1,1,1"}, {"h", "0.1"}}));
  EXPECT_EQ(res.code, 0) << res.out;
  EXPECT_NE(res.out.find("lambda3"), std::string::npos);
  EXPECT_NE(res.out.find("PASS"), std::string::npos);
}
