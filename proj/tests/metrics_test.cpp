#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "gapprobe/csv.hpp"
#include "gapprobe/metrics.hpp"
#include "test_support.hpp"

using namespace gapprobe;
using namespace gapprobe::metrics;

namespace {

// Ten values with mean 2.70 and standard error 1.0212.
std::vector<double> headline_vector() {
  std::vector<double> z{-1.5, -1.0, -0.6, -0.3, 0.0, 0.1, 0.4, 0.7, 1.0, 1.2};
  const double m = std::accumulate(z.begin(), z.end(), 0.0) / 10.0;
  double ss = 0.0;
  for (double v : z) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / 9.0);
  const double target_sd = 1.0212 * std::sqrt(10.0);
  for (double& v : z) v = 2.70 + (v - m) / sd * target_sd;
  return z;
}

DeltaScores from_bits(double pfpg, double mfpg, double pfmg, double mfmg) {
  return compute_deltas({{Condition::PFPG, pfpg},
                         {Condition::MFPG, mfpg},
                         {Condition::PFMG, pfmg},
                         {Condition::MFMG, mfmg}});
}

void expect_sig(double got, double want, double rel = 1e-6) {
  EXPECT_LE(std::abs(got - want), rel * std::max(std::abs(want), 1e-300))
      << "got " << got << " want " << want;
}

nlohmann::json oracle() {
  return nlohmann::json::parse(read_file(gapprobe::testing::fixture_path("stats_oracle.json")));
}

}  // namespace

TEST(Deltas, DefinitionAndIdentity) {
  const auto d = from_bits(10.0, 12.0, 7.0, 11.5);
  EXPECT_DOUBLE_EQ(d.delta_plus_filler, -3.0);
  EXPECT_DOUBLE_EQ(d.delta_minus_filler, -0.5);
  EXPECT_DOUBLE_EQ(d.did, -2.5);
  EXPECT_GP_ERROR(compute_deltas({{Condition::PFPG, 1.0}}), ErrorKind::MissingCondition);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int i = 0; i < 500; ++i) {
    const double b[4] = {u(rng), u(rng), u(rng), u(rng)};
    const auto x = from_bits(b[0], b[1], b[2], b[3]);
    EXPECT_EQ(x.did, x.delta_plus_filler - x.delta_minus_filler);
    const double c = 1.0 + u(rng);  // dyadic-free shift; compare with tolerance
    const auto y = from_bits(b[0] + c, b[1] + c, b[2] + c, b[3] + c);
    EXPECT_NEAR(y.delta_plus_filler, x.delta_plus_filler, 1e-12);
    EXPECT_NEAR(y.delta_minus_filler, x.delta_minus_filler, 1e-12);
    EXPECT_NEAR(y.did, x.did, 1e-12);
  }
}

TEST(Accuracy, StrictInequalityAndDidOfOne) {
  std::vector<DeltaScores> v{from_bits(1, 1, 1, 1), from_bits(1, 1, 2, 1), from_bits(1, 0, 2, 1)};
  const auto a = accuracies(v);
  EXPECT_EQ(a.delta_plus.successes, 2u);
  EXPECT_EQ(a.did.successes, 1u);  // the third item has DiD exactly 0
  std::vector<DeltaScores> all_one;
  for (int i = 0; i < 6; ++i) all_one.push_back(from_bits(0, 0, 2, 1));
  EXPECT_EQ(accuracies(all_one).did.value, 1.0);
  EXPECT_GP_ERROR(accuracies({}), ErrorKind::EmptyInput);
}

// Every assignment of {-1, 0, +1} to delta(+filler) and delta(-filler) for
// n <= 5 items, counted by hand.
TEST(Accuracy, BruteForceEnumeration) {
  for (int n = 1; n <= 5; ++n) {
    const int cases = static_cast<int>(std::pow(9, n));
    for (int code = 0; code < cases; code += 7) {
      std::vector<DeltaScores> v;
      std::size_t plus = 0, did = 0;
      int c = code;
      for (int i = 0; i < n; ++i) {
        const int dp = c % 3 - 1;
        const int dm = (c / 3) % 3 - 1;
        c /= 9;
        v.push_back(from_bits(0, 0, dp, dm));
        plus += dp > 0;
        did += dp - dm > 0;
      }
      const auto a = accuracies(v);
      ASSERT_EQ(a.delta_plus.successes, plus);
      ASSERT_EQ(a.did.successes, did);
      ASSERT_EQ(a.did.trials, static_cast<std::size_t>(n));
    }
  }
}

TEST(TTest, HeadlineNumbers) {
  const auto x = headline_vector();
  const auto t = one_sample_t(x);
  EXPECT_NEAR(t.mean, 2.70, 1e-12);
  EXPECT_NEAR(t.std_error, 1.0212, 1e-12);
  EXPECT_NEAR(t.t, 2.64, 0.01);
  EXPECT_EQ(t.df, 9.0);
  const auto ci = t_mean_interval(x);
  EXPECT_NEAR(ci.lower, 0.39, 0.01);
  EXPECT_NEAR(ci.upper, 5.01, 0.01);
  EXPECT_NEAR(t_upper_tail(1.66, 9), 0.066, 0.001);
  EXPECT_NEAR(t.p_one_tailed, 0.013, 0.001);
}

TEST(TTest, LocationScaleLaw) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.5, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(3 + trial % 20);
    for (double& v : x) v = g(rng);
    const auto base = one_sample_t(x);
    auto scaled = x;
    for (double& v : scaled) v *= 3.5;
    EXPECT_NEAR(one_sample_t(scaled).t, base.t, 1e-9 * std::max(1.0, std::abs(base.t)));
    auto shifted = x;
    for (double& v : shifted) v += 1.25;
    const auto s = one_sample_t(shifted, 1.25);
    EXPECT_NEAR(s.t, base.t, 1e-9 * std::max(1.0, std::abs(base.t)));
    EXPECT_NEAR(s.p_one_tailed, base.p_one_tailed, 1e-9);
  }
}

TEST(TTest, Errors) {
  EXPECT_GP_ERROR(one_sample_t(std::vector<double>{1.0}), ErrorKind::InvalidArgument);
  EXPECT_GP_ERROR(one_sample_t(std::vector<double>{2.0, 2.0, 2.0}), ErrorKind::DegenerateSample);
}

TEST(TTest, OracleVectors) {
  const auto o = oracle();
  for (const auto& row : o.at("t_tail")) {
    expect_sig(t_upper_tail(row.at("t").get<double>(), row.at("df").get<double>()),
               row.at("p").get<double>());
  }
  for (const auto& row : o.at("t_vectors")) {
    const auto x = row.at("values").get<std::vector<double>>();
    const auto t = one_sample_t(x);
    expect_sig(t.t, row.at("t").get<double>());
    expect_sig(t.p_one_tailed, row.at("p").get<double>());
    const auto ci = t_mean_interval(x);
    expect_sig(ci.lower, row.at("ci")[0].get<double>());
    expect_sig(ci.upper, row.at("ci")[1].get<double>());
  }
}

TEST(Wilson, ExtremesAndOracle) {
  auto lo = wilson_ci(0, 10);
  EXPECT_EQ(lo.lower, 0.0);
  EXPECT_GT(lo.upper, 0.0);
  auto hi = wilson_ci(10, 10);
  EXPECT_EQ(hi.upper, 1.0);
  EXPECT_LT(hi.lower, 1.0);
  EXPECT_NEAR(lo.upper, 1.0 - hi.lower, 1e-15);
  EXPECT_GP_ERROR(wilson_ci(1, 0), ErrorKind::InvalidArgument);
  EXPECT_GP_ERROR(wilson_ci(3, 2), ErrorKind::InvalidArgument);

  const auto o = oracle();
  ASSERT_EQ(o.at("wilson").size(), 20u);
  for (const auto& row : o.at("wilson")) {
    const auto ci = wilson_ci(row.at("k").get<std::size_t>(), row.at("n").get<std::size_t>());
    const double want_lo = row.at("lower").get<double>();
    const double want_hi = row.at("upper").get<double>();
    if (want_lo < 1e-12) {
      EXPECT_NEAR(ci.lower, want_lo, 1e-12);
    } else {
      expect_sig(ci.lower, want_lo);
    }
    expect_sig(ci.upper, want_hi);
  }
}

TEST(ChiSquare, OracleBothModes) {
  const auto o = oracle();
  ASSERT_EQ(o.at("chi_square").size(), 20u);
  for (const auto& row : o.at("chi_square")) {
    const auto t = row.at("table");
    const double a = t[0][0], b = t[0][1], c = t[1][0], d = t[1][1];
    for (auto [name, corr] : {std::pair{"none", Correction::None}, std::pair{"yates", Correction::Yates}}) {
      const auto x = chi_square_2x2(a, b, c, d, corr);
      expect_sig(x.statistic, row.at(name).at("statistic").get<double>());
      expect_sig(x.p, row.at(name).at("p").get<double>());
      EXPECT_EQ(x.df, 1);
    }
  }
}

TEST(ChiSquare, RowSwapSymmetryAndErrors) {
  std::mt19937 rng(6);
  for (int i = 0; i < 100; ++i) {
    const double a = 1 + rng() % 500, b = 1 + rng() % 500, c = 1 + rng() % 500, d = 1 + rng() % 500;
    for (auto corr : {Correction::None, Correction::Yates}) {
      const auto x = chi_square_2x2(a, b, c, d, corr);
      const auto y = chi_square_2x2(c, d, a, b, corr);
      EXPECT_NEAR(x.statistic, y.statistic, 1e-9 * std::max(1.0, x.statistic));
      EXPECT_GE(x.p, 0.0);
      EXPECT_LE(x.p, 1.0);
    }
    EXPECT_LE(chi_square_2x2(a, b, c, d, Correction::Yates).statistic,
              chi_square_2x2(a, b, c, d, Correction::None).statistic + 1e-12);
  }
  EXPECT_GP_ERROR(chi_square_2x2(0, 0, 3, 4), ErrorKind::ZeroMarginal);
  EXPECT_GP_ERROR(chi_square_2x2(5, 0, 3, 0), ErrorKind::ZeroMarginal);
  EXPECT_GP_ERROR(chi_square_2x2(-1, 2, 3, 4), ErrorKind::InvalidArgument);
  EXPECT_EQ(chi_square_2x2(5, 5, 5, 5).statistic, 0.0);
  EXPECT_EQ(chi_square_2x2(5, 5, 5, 5).p, 1.0);
}

TEST(ChiSquare, ReconstructedFilteringCounts) {
  // 5.61% of 8064 and 7.01% of 5760, rounded to whole items.
  const auto a = compare({452, 8064, 452.0 / 8064, wilson_ci(452, 8064)},
                         {404, 5760, 404.0 / 5760, wilson_ci(404, 5760)}, Correction::None,
                         "delta_plus", "original", "filtered");
  EXPECT_EQ(a.a_fail, 8064u - 452u);
  EXPECT_GT(a.chi_square.statistic, 10.0);
  EXPECT_LT(a.chi_square.statistic, 13.0);
  EXPECT_LT(a.chi_square.p, 0.002);
}

TEST(Aggregate, FillsOptionalFields) {
  std::vector<DeltaScores> v;
  const auto x = headline_vector();
  for (double did : x) v.push_back(from_bits(0, 0, did, 0));
  const auto r = aggregate(v, "refined");
  EXPECT_EQ(r.n_items, 10u);
  ASSERT_TRUE(r.t_did && r.t_delta && r.mean_did_ci);
  EXPECT_NEAR(r.t_did->t, 2.644, 0.001);
  EXPECT_NEAR(r.mean_did, 2.70, 1e-12);

  std::vector<DeltaScores> flat(4, from_bits(1, 1, 1, 1));
  const auto f = aggregate(flat, "flat");
  EXPECT_FALSE(f.t_did.has_value());
  EXPECT_FALSE(f.mean_did_ci.has_value());
  EXPECT_EQ(f.acc_did.successes, 0u);
  EXPECT_EQ(aggregate({}, "none").n_items, 0u);
}
