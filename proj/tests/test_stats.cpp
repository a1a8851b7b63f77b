#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "solsent/aggregate.hpp"
#include "solsent/policyindex.hpp"
#include "solsent/stats.hpp"

using namespace solsent;

// ---------------------------------------------------------------------------
// aggregate

TEST(Aggregate, WilsonFrozenValues) {
  auto ci = aggregate::wilson_interval(80, 100);
  EXPECT_NEAR(10 * ci.low, 7.1117, 5e-5);
  EXPECT_NEAR(10 * ci.high, 8.6663, 5e-5);
  auto zero = aggregate::wilson_interval(0, 20);
  EXPECT_EQ(zero.low, 0.0);
  auto all = aggregate::wilson_interval(20, 20);
  EXPECT_EQ(all.high, 1.0);
  EXPECT_THROW(aggregate::wilson_interval(0, 0), StageError);
  EXPECT_THROW(aggregate::wilson_interval(3, 2), StageError);
}

TEST(Aggregate, ScoresAndCountsMerge) {
  using classify::Label;
  std::vector<classify::SentimentPrediction> preds;
  std::vector<geo::GeoResolution> res;
  auto add = [&](std::string id, Label l, std::string state) {
    preds.push_back({id, l == Label::positive ? 1.0 : 0.0, l, "t"});
    auto g = state.empty() ? geo::GeoResolution::unknown()
                           : geo::GeoResolution::of_state(*geo::StateCode::parse(state), geo::Method::coordinates);
    g.post_id = id;
    res.push_back(g);
  };
  add("1", Label::positive, "CA");
  add("2", Label::negative, "CA");
  add("3", Label::positive, "CA");
  add("4", Label::positive, "TX");
  aggregate::Population pop;
  pop.set(*geo::StateCode::parse("CA"), 2'000'000);
  pop.set(*geo::StateCode::parse("TX"), 1'000'000);
  auto s = aggregate::state_scores(preds, res, pop);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].state.code(), "CA");
  EXPECT_DOUBLE_EQ(s[0].score, 20.0 / 3.0);
  EXPECT_DOUBLE_EQ(s[0].tweets_per_million, 1.5);
  EXPECT_DOUBLE_EQ(s[1].score, 10.0);

  auto c = aggregate::count_by_state(preds, res);
  auto half = aggregate::count_by_state(std::span(preds).first(2), std::span(res).first(2));
  auto rest = aggregate::count_by_state(std::span(preds).subspan(2), std::span(res).subspan(2));
  half.merge(rest);
  EXPECT_EQ(half.n, c.n);
  EXPECT_EQ(half.pos, c.pos);
  EXPECT_EQ(c.total(), 4u);

  add("5", Label::negative, "");
  EXPECT_THROW(aggregate::state_scores(preds, res, pop), StageError);
}

TEST(Aggregate, DailySeriesExclusion) {
  using classify::Label;
  std::vector<classify::SentimentPrediction> preds = {
      {"a", 1, Label::positive, ""}, {"b", 0, Label::negative, ""}, {"c", 1, Label::positive, ""}};
  aggregate::Timestamps ts = {{"a", *parse_rfc3339("2020-03-22T10:00:00Z")},
                              {"b", *parse_rfc3339("2020-03-22T23:59:59Z")},
                              {"c", *parse_rfc3339("2020-03-23T00:00:00Z")}};
  auto all = aggregate::daily_series(preds, ts);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].n_tweets, 2u);
  EXPECT_DOUBLE_EQ(all[0].mean_score, 5.0);
  auto ex = aggregate::daily_series(preds, ts, DateRange::parse("2020-03-23..2020-03-25"));
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].date.str(), "2020-03-22");
  auto out = aggregate::outside_window(preds, ts, DateRange::parse("2020-03-23..2020-03-25"));
  EXPECT_EQ(out.size(), 2u);
}

// ---------------------------------------------------------------------------
// policy index

TEST(Policy, RpsEdgeCases) {
  EXPECT_EQ(policy::rps_score({std::nullopt, std::nullopt, 40}), 0.0);
  EXPECT_EQ(policy::rps_score({50, 2030, 60}), 0.0);
  EXPECT_DOUBLE_EQ(policy::rps_score({50, 2030, 17}), 3.0);
  EXPECT_THROW(policy::rps_score({50, 2019, 17}), InputError);
}

TEST(Policy, TableValidation) {
  const std::string demo = read_file(std::string(SOLSENT_SOURCE_DIR) + "/data/demo/policy_synthetic.csv");
  auto profiles = policy::profiles_from_table(CsvTable::parse(demo, "demo"));
  ASSERT_EQ(profiles.size(), 51u);
  for (const auto& p : profiles) {
    EXPECT_EQ(p.nem_score, p.nem.mechanism() + p.nem.cap() + p.nem.subscriber() + p.nem.compensation() +
                               p.nem.rollover());
    EXPECT_EQ(p.rps_score, policy::rps_score(p.rps_input));
  }
  // swap the first data row for a broken variant
  auto first = demo.find('\n') + 1;
  auto second = demo.find('\n', first) + 1;
  auto broken = [&](const std::string& row) { return demo.substr(0, first) + row + "\n" + demo.substr(second); };
  EXPECT_THROW(policy::profiles_from_table(CsvTable::parse(broken("AK,40,100,2040,5,0,0,0,2,101,83,21,5,West"), "m")),
               InputError);
  EXPECT_THROW(policy::profiles_from_table(CsvTable::parse(broken("AK,40,100,,1,0,0,0,2,101,83,21,5,West"), "m")),
               InputError);
  EXPECT_THROW(policy::profiles_from_table(CsvTable::parse(broken("AK,40,100,2040,1,0,0,0,2,101,83,21,5,South"), "m")),
               InputError);
  EXPECT_THROW(policy::profiles_from_table(CsvTable::parse(broken("AL,40,100,2040,1,0,0,0,2,101,83,21,5,South"), "m")),
               InputError);
}

// ---------------------------------------------------------------------------
// stats

namespace {

std::vector<std::vector<double>> random_cols(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::normal_distribution<double> z(0, 1);
  std::vector<std::vector<double>> cols(k, std::vector<double>(n));
  for (auto& c : cols)
    for (auto& v : c) v = z(rng);
  return cols;
}

}  // namespace

TEST(Stats, OlsHc0AndHc1) {
  std::mt19937_64 rng(1);
  auto cols = random_cols(rng, 40, 3);
  std::vector<double> y(40);
  std::normal_distribution<double> z(0, 1);
  for (std::size_t i = 0; i < 40; ++i) y[i] = 1 + cols[0][i] - 2 * cols[2][i] + z(rng);
  auto m = stats::DataMatrix::from_columns({"a", "b", "c"}, cols);
  auto hc0 = stats::ols(y, m, stats::RobustFlavor::hc0);
  auto hc1 = stats::ols(y, m, stats::RobustFlavor::hc1);
  auto o = oracle::ols(y, cols);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(hc0.coefficients[j].se_robust, o.se_hc0[j], 1e-10 * o.se_hc0[j]);
    EXPECT_NEAR(hc1.coefficients[j].se_robust, o.se_hc1[j], 1e-10 * o.se_hc1[j]);
  }
  EXPECT_EQ(hc1.df, 36u);
  EXPECT_EQ(hc1.coefficients[0].name, "(intercept)");
  EXPECT_DOUBLE_EQ(hc1.coefficient("b").t, hc1.coefficient("b").estimate / hc1.coefficient("b").se_robust);
}

TEST(Stats, OlsRejectsTooFewRows) {
  std::mt19937_64 rng(2);
  auto cols = random_cols(rng, 3, 3);
  EXPECT_THROW(stats::ols(std::vector<double>{1, 2, 3}, stats::DataMatrix::from_columns({"a", "b", "c"}, cols)),
               StageError);
}

TEST(Stats, DescribeMatchesOracle) {
  std::mt19937_64 rng(4);
  auto cols = random_cols(rng, 51, 3);
  cols.push_back(std::vector<double>(51, 2.0));
  auto d = stats::describe(stats::DataMatrix::from_columns({"a", "b", "c", "flat"}, cols));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(d.columns[j].mean, oracle::mean(cols[j]), 1e-13);
    EXPECT_NEAR(d.columns[j].sd, std::sqrt(oracle::variance(cols[j])), 1e-13);
    for (std::size_t k = 0; k < 3; ++k) {
      ASSERT_TRUE(d.correlation[j][k]);
      EXPECT_NEAR(*d.correlation[j][k], j == k ? 1.0 : oracle::pearson(cols[j], cols[k]), 1e-13);
    }
    EXPECT_FALSE(d.correlation[j][3]);
  }
  EXPECT_EQ(d.columns[3].sd, 0.0);
}

TEST(Stats, AnovaDegenerateGroups) {
  std::vector<stats::Group> same = {{"a", {5, 5, 5}}, {"b", {5, 5}}};
  auto r = stats::oneway_anova(same);
  EXPECT_EQ(r.f, 0.0);
  EXPECT_EQ(r.p, 1.0);
  std::vector<stats::Group> split = {{"a", {1, 1, 1}}, {"b", {2, 2}}};
  auto s = stats::oneway_anova(split);
  EXPECT_TRUE(s.f_infinite);
  EXPECT_EQ(s.p, 0.0);
  std::vector<stats::Group> one = {{"a", {1, 2}}};
  EXPECT_THROW(stats::oneway_anova(one), StageError);
}

TEST(Stats, BartlettErrors) {
  std::vector<stats::Group> flat = {{"a", {1, 1, 1}}, {"b", {1, 2, 3}}};
  EXPECT_THROW(stats::bartlett(flat), StageError);
  std::vector<stats::Group> tiny = {{"a", {1}}, {"b", {1, 2, 3}}};
  EXPECT_THROW(stats::bartlett(tiny), StageError);
}

TEST(Stats, DistributionTails) {
  EXPECT_NEAR(stats::t_two_sided_p(2.0, 10), 0.07338803477074, 1e-12);
  EXPECT_NEAR(stats::f_upper_p(3.0, 3, 47), 0.03983846875970819, 1e-12);
  EXPECT_NEAR(stats::chi2_upper_p(7.814727903251178, 3), 0.05, 1e-12);
}
