// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/rational.hpp>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "solsent/aggregate.hpp"
#include "solsent/classify.hpp"
#include "solsent/geolocate.hpp"
#include "solsent/ingest.hpp"
#include "solsent/policyindex.hpp"
#include "solsent/stats.hpp"

namespace fs = std::filesystem;
using namespace solsent;

namespace {

const fs::path kSource = SOLSENT_SOURCE_DIR;
const fs::path kDemo = kSource / "data" / "demo";
const fs::path kFixtures = kSource / "tests" / "data";

struct Failure {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::getline(in, line);  // header
  while (std::getline(in, line)) rows.push_back(split(line, '\t'));
  return rows;
}

// ---------------------------------------------------------------------------

void rps_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  using Q = boost::rational<long long>;
  // Percentages in quarter points so that target - generation is exact.
  struct Case {
    std::optional<Q> target;
    std::optional<int> year;
    Q gen;
    Q expected;
  };
  auto q = [](long long quarters) { return Q(quarters, 4); };
  const std::vector<Case> cases = {
      {std::nullopt, std::nullopt, q(120), Q(0)},   // no RPS
      {q(40), 2015, q(160), Q(0)},                  // achieved
      {q(42), std::nullopt, q(230), Q(0)},          // Iowa-style: achieved, no year
      {q(22), std::nullopt, q(81), Q(0)},           // Texas-style: achieved, no year
      {q(200), 2030, q(80), Q(30, 11)},
      {q(400), 2045, q(102), Q(149, 52)},
      {q(160), 2025, q(49), Q(37, 8)},
      {q(132), 2020, q(131), Q(1, 4)},
      {q(320), 2050, q(0), Q(80, 31)},
      {q(240), 2030, q(238), Q(1, 22)},
      {q(100), 2030, q(100), Q(0)},                 // exactly met
      {q(300), 2035, q(40), Q(65, 16)},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    // the hand value must agree with the formula in exact arithmetic
    Q formula = !c.target || c.gen >= *c.target ? Q(0) : (*c.target - c.gen) / Q(*c.year - 2019);
    require(formula == c.expected, "case " + std::to_string(i) + ": hand value disagrees with rational formula");
    policy::RpsInput in;
    if (c.target) in.target_percent = boost::rational_cast<double>(*c.target);
    in.target_year = c.year;
    in.generation_2019 = boost::rational_cast<double>(c.gen);
    double got = policy::rps_score(in);
    require(got == boost::rational_cast<double>(c.expected), "case " + std::to_string(i) + ": got " + std::to_string(got));
  }
  bool threw = false;
  try {
    policy::rps_score({50.0, std::nullopt, 20.0});
  } catch (const InputError&) {
    threw = true;
  }
  require(threw, "unmet target without year accepted");
  require(seconds_since(t0) < 1.0, "runtime >= 1 s");
}

void nem_exhaustive() {
  int n = 0, lo = 100, hi = -1;
  for (int m = 0; m <= 4; ++m)
    for (int c = 0; c <= 1; ++c)
      for (int s = 0; s <= 1; ++s)
        for (int comp = 0; comp <= 1; ++comp)
          for (int r = 0; r <= 2; ++r) {
            int v = policy::nem_score(policy::NemComponents::make(m, c, s, comp, r));
            require(v == m + c + s + comp + r, "component sum mismatch");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++n;
          }
  require(n == 120, "expected 120 combinations, got " + std::to_string(n));
  require(lo == 0 && hi == 9, "range " + std::to_string(lo) + ".." + std::to_string(hi) + " != 0..9");
  bool threw = false;
  try {
    policy::NemComponents::make(5, 0, 0, 0, 0);
  } catch (const InputError&) {
    threw = true;
  }
  require(threw, "out-of-range mechanism accepted");
}

void aggregation_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> pick(0, geo::StateCode::count - 1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<classify::SentimentPrediction> preds;
  std::vector<geo::GeoResolution> res;
  std::vector<std::size_t> n(51), k(51);
  for (std::size_t i = 0; i < 10'000; ++i) {
    std::size_t s = i < 51 ? i : pick(rng);
    double p = 0.3 + 0.6 * static_cast<double>(s) / 50.0;
    auto label = u(rng) < p ? classify::Label::positive : classify::Label::negative;
    std::string id = "a" + std::to_string(i);
    preds.push_back({id, label == classify::Label::positive ? 0.9 : 0.1, label, "test"});
    auto g = geo::GeoResolution::of_state(geo::StateCode::from_index(s), geo::Method::coordinates);
    g.post_id = id;
    res.push_back(g);
    ++n[s];
    k[s] += label == classify::Label::positive;
  }
  aggregate::Population pop;
  for (auto s : geo::StateCode::all()) pop.set(s, 1'000'000);
  auto scores = aggregate::state_scores(preds, res, pop);
  require(scores.size() == 51, "expected 51 states");
  double sum_scores = 0;
  std::size_t tot_n = 0, tot_k = 0;
  for (const auto& s : scores) {
    auto i = s.state.index();
    double oracle = 10.0 * static_cast<double>(k[i]) / static_cast<double>(n[i]);
    require(std::abs(s.score - oracle) <= 1e-12, std::string(s.state.code()) + " score off");
    require(s.n_tweets == n[i], "count mismatch");
    sum_scores += oracle;
    tot_n += n[i];
    tot_k += k[i];
  }
  double weighted = aggregate::national_average(scores, aggregate::NationalMode::tweet_weighted);
  double state_mean = aggregate::national_average(scores, aggregate::NationalMode::state_mean);
  require(std::abs(weighted - 10.0 * static_cast<double>(tot_k) / static_cast<double>(tot_n)) <= 1e-12,
          "tweet-weighted national average off");
  require(std::abs(state_mean - sum_scores / 51.0) <= 1e-12, "state-mean national average off");

  std::binomial_distribution<std::size_t> binom(100, 0.8);
  std::size_t covered = 0;
  for (int t = 0; t < 2000; ++t) {
    auto ci = aggregate::wilson_interval(binom(rng), 100);
    covered += ci.low <= 0.8 && 0.8 <= ci.high;
  }
  double coverage = static_cast<double>(covered) / 2000.0;
  require(coverage >= 0.93 && coverage <= 0.97, "Wilson coverage " + std::to_string(coverage));
  require(seconds_since(t0) < 30.0, "runtime >= 30 s");
}

void ols_equivalence() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z(0, 1);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 51, k = 7;
    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < k; ++j) {
      names.push_back("x" + std::to_string(j));
      for (std::size_t i = 0; i < n; ++i) cols[j][i] = z(rng) + (j > 0 ? 0.3 * cols[j - 1][i] : 0.0);
    }
    std::vector<double> beta(k + 1);
    for (auto& b : beta) b = mag(rng) * (z(rng) < 0 ? -1 : 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = beta[0];
      for (std::size_t j = 0; j < k; ++j) y[i] += beta[j + 1] * cols[j][i];
      y[i] += (0.5 + std::abs(cols[0][i])) * z(rng);
    }
    auto got = stats::ols(y, stats::DataMatrix::from_columns(names, cols));
    auto want = oracle::ols(y, cols);
    for (std::size_t j = 0; j <= k; ++j) {
      const auto& c = got.coefficients[j];
      std::string where = "instance " + std::to_string(inst) + " coef " + std::to_string(j);
      require(rel_close(c.estimate, want.beta[j], 1e-8), where + " estimate");
      require(rel_close(c.se_classical, want.se_classical[j], 1e-8), where + " classical SE");
      require(rel_close(c.se_robust, want.se_hc1[j], 1e-8), where + " HC1 SE");
    }
    require(rel_close(got.r_squared, want.r_squared, 1e-8), "instance " + std::to_string(inst) + " R^2");
    auto vifs = oracle::vif(cols);
    for (std::size_t j = 0; j < k; ++j) {
      require(std::abs(got.vif[j] - vifs[j]) <= 1e-10, "instance " + std::to_string(inst) + " VIF");
    }
  }
  // exact collinearity: x2 = 2 x0 - x1
  std::vector<std::vector<double>> cols(3, std::vector<double>(20));
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    cols[0][i] = z(rng);
    cols[1][i] = z(rng);
    cols[2][i] = 2 * cols[0][i] - cols[1][i];
    y[i] = z(rng);
  }
  bool threw = false;
  try {
    stats::ols(y, stats::DataMatrix::from_columns({"a", "b", "dependent"}, cols));
  } catch (const StageError& e) {
    threw = std::string(e.what()).find("dependent") != std::string::npos;
  }
  require(threw, "collinear design not rejected with the column named");
}

void anova_suite() {
  // 4 groups, 51 observations (census-region sizes)
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0, 1);
  const std::vector<std::size_t> sizes = {9, 12, 17, 13};
  const std::vector<double> means = {7.5, 7.9, 7.1, 8.0};
  std::vector<stats::Group> groups;
  std::vector<std::vector<double>> raw;
  const char* names[] = {"Northeast", "Midwest", "South", "West"};
  for (std::size_t g = 0; g < 4; ++g) {
    std::vector<double> v;
    for (std::size_t i = 0; i < sizes[g]; ++i) v.push_back(means[g] + 0.6 * z(rng));
    groups.push_back({names[g], v});
    raw.push_back(v);
  }
  auto a = stats::oneway_anova(groups);
  auto o = oracle::anova(raw);
  require(a.df_between == 3 && a.df_within == 47, "df not (3, 47)");
  require(rel_close(a.f, o.f, 1e-10), "F " + std::to_string(a.f) + " vs " + std::to_string(o.f));
  require(a.pairwise.size() == 6, "expected 6 pairs");
  for (const auto& c : a.pairwise) {
    require(c.p_bonferroni == std::min(1.0, 6.0 * c.p_raw), "Bonferroni not min(1, 6p)");
    std::vector<double> ga, gb;
    for (std::size_t g = 0; g < 4; ++g) {
      if (c.group_a == names[g]) ga = raw[g];
      if (c.group_b == names[g]) gb = raw[g];
    }
    double na = ga.size(), nb = gb.size();
    double sp2 = ((na - 1) * oracle::variance(ga) + (nb - 1) * oracle::variance(gb)) / (na + nb - 2);
    double t = (oracle::mean(ga) - oracle::mean(gb)) / std::sqrt(sp2 * (1 / na + 1 / nb));
    boost::math::students_t dist(na + nb - 2);
    double p = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    require(rel_close(c.p_raw, p, 1e-9), c.group_a + "-" + c.group_b + " raw p");
  }
  // variance ratio 100 between the extreme groups
  std::vector<stats::Group> vg;
  std::vector<std::vector<double>> vraw;
  const std::vector<double> sds = {1.0, 2.0, 5.0, 10.0};
  for (std::size_t g = 0; g < 4; ++g) {
    std::vector<double> v;
    for (std::size_t i = 0; i < 15; ++i) v.push_back(sds[g] * z(rng));
    vg.push_back({names[g], v});
    vraw.push_back(v);
  }
  auto b = stats::bartlett(vg);
  double ob = oracle::bartlett(vraw);
  require(rel_close(b.statistic, ob, 1e-10), "Bartlett " + std::to_string(b.statistic) + " vs " + std::to_string(ob));
  require(b.df == 3, "Bartlett df");
}

void filter_chain() {
  auto loaded = ingest::load_jsonl_file((kFixtures / "filter_fixture.jsonl").string());
  require(loaded.rejects.empty(), "fixture has rejects");
  auto chain = ingest::run_filter_chain(loaded.posts);
  std::ifstream in(kFixtures / "filter_expected.txt");
  std::vector<std::string> expected;
  for (std::string id; std::getline(in, id);) {
    if (!id.empty()) expected.push_back(id);
  }
  std::vector<std::string> got;
  for (const auto& p : chain.posts) got.push_back(p.id);
  require(got == expected, "retained set differs (" + std::to_string(got.size()) + " vs " +
                               std::to_string(expected.size()) + ")");
  auto want = nlohmann::json::parse(read_file((kFixtures / "filter_expected_report.json").string()));
  const auto& r = chain.report;
  require(r.n_input == want["n_input"] && r.n_keyword_matched == want["n_keyword_matched"] &&
              r.n_excluded_irrelevant == want["n_excluded_irrelevant"] &&
              r.n_excluded_profile_only == want["n_excluded_profile_only"] && r.n_deduped == want["n_deduped"] &&
              r.n_retained == want["n_retained"],
          "FilterReport differs from the planted counts");
  require(r.reconciles(), "FilterReport does not reconcile");
}

void geolocation() {
  auto gaz = geo::load_gazetteer(kDemo);
  auto profiles = read_tsv(kFixtures / "geo_profiles.tsv");
  require(profiles.size() == 60, "expected 60 profile rows");
  for (const auto& row : profiles) {
    auto got = geo::resolve_profile(row[0], gaz).outcome_str();
    require(got == row[1], "'" + row[0] + "' -> " + got + ", expected " + row[1]);
  }
  auto coords = read_tsv(kFixtures / "geo_coords.tsv");
  require(coords.size() == 20, "expected 20 coordinate rows");
  for (const auto& row : coords) {
    auto got = geo::resolve_coordinates(*parse_double(row[0]), *parse_double(row[1]), gaz).outcome_str();
    require(got == row[2], row[3] + " -> " + got + ", expected " + row[2]);
  }
  for (const auto& s : gaz.states()) {
    auto got = geo::resolve_coordinates(s.centroid_lat, s.centroid_lon, gaz);
    require(got.resolved() && *got.state == s.code, std::string(s.code.code()) + " centroid -> " + got.outcome_str());
  }
  // Austin coordinates against a Boston profile
  auto r = geo::resolve(std::string("Boston, MA"), ingest::GeoPoint{30.27, -97.74}, gaz);
  require(r.outcome_str() == "TX" && r.method == geo::Method::coordinates, "coordinates did not take precedence");
}

std::vector<classify::AnnotatedExample> separable_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> word(0, 39), len(4, 9), shared(0, 9);
  std::vector<classify::AnnotatedExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    bool pos = i % 2 == 0;
    std::string text;
    int m = len(rng);
    for (int w = 0; w < m; ++w) {
      if (w) text += ' ';
      text += w % 3 == 2 ? "common" + std::to_string(shared(rng))
                         : (pos ? "good" : "bad") + std::to_string(word(rng));
    }
    out.push_back({text, pos ? classify::Label::positive : classify::Label::negative});
  }
  return out;
}

void baseline_classifier() {
  auto data = separable_corpus(1000, 11);
  classify::SplitSpec spec;
  auto s = classify::split(data, spec);
  auto t0 = std::chrono::steady_clock::now();
  auto m1 = classify::train_baseline(s.train, s.dev);
  require(seconds_since(t0) < 30.0, "training >= 30 s");
  classify::BaselineBackend b(m1);
  auto metrics = classify::evaluate_examples(b, s.test);
  require(metrics.accuracy >= 0.95, "test accuracy " + std::to_string(metrics.accuracy));
  auto s2 = classify::split(data, spec);
  auto m2 = classify::train_baseline(s2.train, s2.dev);
  require(m1.to_json().dump() == m2.to_json().dump(), "training not deterministic");
}

int run(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void end_to_end() {
  fs::path base = fs::temp_directory_path() / ("solsent_accept_" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<fs::path> outs = {base / "run1", base / "run2"};
  for (const auto& o : outs) {
    std::string cmd = std::string(SOLSENT_CLI) + " pipeline --config " + (kDemo / "config.json").string() +
                      " --exclude 2020-03-23..2020-03-25 --out " + o.string() + " 2>/dev/null";
    require(run(cmd) == 0, "pipeline run failed: " + cmd);
  }
  std::size_t n_csv = 0;
  for (const auto& e : fs::directory_iterator(outs[0])) {
    if (e.path().extension() != ".csv") continue;
    ++n_csv;
    auto other = outs[1] / e.path().filename();
    require(fs::exists(other), e.path().filename().string() + " missing from second run");
    require(read_file(e.path().string()) == read_file(other.string()),
            e.path().filename().string() + " differs between runs");
  }
  require(n_csv == 5, "expected 5 CSV artifacts, found " + std::to_string(n_csv));
  require(fs::exists(outs[0] / "table3_excl.csv"), "table3_excl.csv missing");
  require(read_file((outs[0] / "table3_excl.csv").string()) != read_file((outs[0] / "table3.csv").string()),
          "exclusion rerun identical to the full table");
  fs::remove_all(base);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"rps-score-oracle", rps_oracle},
      {"net-metering-exhaustive", nem_exhaustive},
      {"aggregation-oracle", aggregation_oracle},
      {"ols-equivalence", ols_equivalence},
      {"anova-bonferroni-bartlett", anova_suite},
      {"filter-chain-planted", filter_chain},
      {"geolocation-fixture", geolocation},
      {"baseline-classifier", baseline_classifier},
      {"end-to-end-determinism", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
      std::cout << "PASS " << name << " (" << format_fixed(seconds_since(t0), 2) << " s)\n";
    } catch (const Failure& f) {
      ++failed;
      std::cout << "FAIL " << name << ": " << f.why << '\n';
    } catch (const std::exception& e) {
      ++failed;
      std::cout << "FAIL " << name << ": exception: " << e.what() << '\n';
    }
  }
  return failed == 0 ? 0 : 1;
}
