#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "solsent/aggregate.hpp"
#include "solsent/backend.hpp"
#include "solsent/classify.hpp"
#include "solsent/error.hpp"
#include "solsent/geolocate.hpp"
#include "solsent/ingest.hpp"
#include "solsent/policyindex.hpp"
#include "solsent/stats.hpp"
#include "solsent/svg.hpp"
#include "solsent/textprep.hpp"
#include "solsent/util.hpp"

namespace solsent::report {

namespace fs = std::filesystem;
using nlohmann::json;
using geo::StateCode;

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw StageError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

// ---------------------------------------------------------------------------
// configuration

/// Which classifier scores the posts. With none of model/command/address
/// set, a baseline is trained from the annotations.
struct BackendSpec {
  std::optional<fs::path> model;
  std::optional<std::string> command;
  std::optional<std::string> address;
  int timeout_seconds = 60;

  json to_json() const {
    json j = json::object();
    if (model) j["model"] = model->string();
    if (command) j["command"] = *command;
    if (address) j["address"] = *address;
    j["timeout_seconds"] = timeout_seconds;
    return j;
  }
};

struct RunConfig {
  fs::path corpus;
  std::optional<fs::path> keywords;
  std::optional<fs::path> stopphrases;
  fs::path gazetteer;
  fs::path population;
  fs::path policy;
  std::optional<fs::path> annotations;
  BackendSpec backend;
  std::optional<DateRange> exclude;
  fs::path out_dir;
  std::uint64_t seed = 42;

  /// Relative paths are resolved against `base`, normally the directory
  /// holding the config file.
  static RunConfig from_json(const json& j, const fs::path& base = {}) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    static const std::vector<std::string> known = {"corpus",      "keywords", "stopphrases", "gazetteer",
                                                   "population",  "policy",   "annotations", "backend",
                                                   "exclude",     "out_dir",  "seed"};
    for (const auto& [k, v] : j.items()) {
      if (std::find(known.begin(), known.end(), k) == known.end()) throw InputError("config: unknown key '" + k + "'");
    }
    auto str = [&](const json& node, const char* key) -> std::optional<std::string> {
      auto it = node.find(key);
      if (it == node.end() || it->is_null()) return std::nullopt;
      if (!it->is_string()) throw InputError(std::string("config: '") + key + "' must be a string");
      return it->get<std::string>();
    };
    auto path = [&](const json& node, const char* key) -> std::optional<fs::path> {
      auto s = str(node, key);
      if (!s) return std::nullopt;
      fs::path p(*s);
      return p.is_absolute() || base.empty() ? p : base / p;
    };
    RunConfig c;
    auto required = [&](const char* key) {
      auto p = path(j, key);
      if (!p) throw InputError(std::string("config: missing required key '") + key + "'");
      return *p;
    };
    c.corpus = required("corpus");
    c.gazetteer = required("gazetteer");
    c.population = required("population");
    c.policy = required("policy");
    c.out_dir = required("out_dir");
    c.keywords = path(j, "keywords");
    c.stopphrases = path(j, "stopphrases");
    c.annotations = path(j, "annotations");
    if (auto it = j.find("seed"); it != j.end()) {
      if (!it->is_number_unsigned()) throw InputError("config: 'seed' must be a non-negative integer");
      c.seed = it->get<std::uint64_t>();
    }
    if (auto it = j.find("exclude"); it != j.end() && !it->is_null()) {
      if (it->is_string()) {
        c.exclude = DateRange::parse(it->get<std::string>());
      } else if (it->is_object()) {
        auto a = str(*it, "first"), b = str(*it, "last");
        if (!a || !b) throw InputError("config: 'exclude' needs 'first' and 'last'");
        c.exclude = DateRange::parse(*a + ".." + *b);
      } else {
        throw InputError("config: 'exclude' must be \"YYYY-MM-DD..YYYY-MM-DD\" or {first, last}");
      }
    }
    if (auto it = j.find("backend"); it != j.end() && !it->is_null()) {
      if (!it->is_object()) throw InputError("config: 'backend' must be an object");
      for (const auto& [k, v] : it->items()) {
        if (k != "model" && k != "command" && k != "address" && k != "timeout_seconds") {
          throw InputError("config: unknown backend key '" + k + "'");
        }
      }
      c.backend.model = path(*it, "model");
      c.backend.command = str(*it, "command");
      c.backend.address = str(*it, "address");
      if (auto t = it->find("timeout_seconds"); t != it->end()) {
        if (!t->is_number_integer() || t->get<int>() <= 0) {
          throw InputError("config: backend.timeout_seconds must be a positive integer");
        }
        c.backend.timeout_seconds = t->get<int>();
      }
    }
    return c;
  }

  static RunConfig load(const fs::path& file) {
    if (!fs::exists(file)) throw InputError("config file not found: " + file.string());
    json j;
    try {
      j = json::parse(read_file(file.string()));
    } catch (const json::exception& e) {
      throw InputError("config " + file.string() + ": " + e.what());
    }
    return from_json(j, file.parent_path());
  }

  /// Every referenced input exists; exactly one backend kind is chosen.
  void validate() const {
    auto need_file = [](const fs::path& p, const std::string& what) {
      if (!fs::is_regular_file(p)) throw InputError(what + " not found: " + p.string());
    };
    need_file(corpus, "corpus");
    if (keywords) need_file(*keywords, "keyword list");
    if (stopphrases) need_file(*stopphrases, "stopphrase list");
    if (!fs::is_directory(gazetteer)) throw InputError("gazetteer directory not found: " + gazetteer.string());
    need_file(gazetteer / "states.csv", "gazetteer states table");
    need_file(population, "population CSV");
    need_file(policy, "policy CSV");
    int kinds = (backend.model ? 1 : 0) + (backend.command ? 1 : 0) + (backend.address ? 1 : 0);
    if (kinds > 1) throw InputError("backend: choose one of model, command, address");
    if (backend.model) need_file(*backend.model, "baseline model");
    if (kinds == 0) {
      if (!annotations) throw InputError("no backend configured and no annotations to train a baseline from");
      need_file(*annotations, "annotations TSV");
    } else if (annotations) {
      need_file(*annotations, "annotations TSV");
    }
    if (out_dir.empty()) throw InputError("out_dir is empty");
  }

  std::vector<fs::path> inputs() const {
    std::vector<fs::path> v = {corpus, population, policy, gazetteer / "states.csv", gazetteer / "cities.csv",
                               gazetteer / "aliases.csv"};
    for (const auto& p : {keywords, stopphrases, annotations, backend.model}) {
      if (p) v.push_back(*p);
    }
    return v;
  }

  json to_json() const {
    json j = {{"corpus", corpus.string()},         {"gazetteer", gazetteer.string()},
              {"population", population.string()}, {"policy", policy.string()},
              {"out_dir", out_dir.string()},       {"seed", seed},
              {"backend", backend.to_json()}};
    j["keywords"] = keywords ? json(keywords->string()) : json(nullptr);
    j["stopphrases"] = stopphrases ? json(stopphrases->string()) : json(nullptr);
    j["annotations"] = annotations ? json(annotations->string()) : json(nullptr);
    j["exclude"] = exclude ? json(exclude->str()) : json(nullptr);
    return j;
  }
};

// ---------------------------------------------------------------------------
// backends and the train / eval commands

struct TrainResult {
  classify::BaselineModel model;
  classify::Split split;
  classify::TrainTrace trace;
  classify::EvalMetrics test_metrics;
  std::size_t n_neutral_dropped = 0;
};

inline constexpr std::string_view kTestIdPrefix = "test-";

/// Splits by `seed`, trains on train (early stopping on dev), scores test.
inline TrainResult train_from_annotations(const fs::path& annotations, std::uint64_t seed) {
  auto load = classify::load_annotations(annotations.string());
  classify::SplitSpec spec;
  spec.seed = seed;
  TrainResult r{.model = {}, .split = classify::split(load.examples, spec), .trace = {}, .test_metrics = {},
                .n_neutral_dropped = load.n_neutral_dropped};
  classify::TrainOptions opt;
  opt.seed = seed;
  r.model = classify::train_baseline(r.split.train, r.split.dev, opt, &r.trace);
  classify::BaselineBackend b(r.model);
  r.test_metrics = classify::evaluate_examples(b, r.split.test, kTestIdPrefix);
  return r;
}

inline json metrics_json(const classify::EvalMetrics& m, const classify::Split& s) {
  json j = m.to_json();
  j["n_train"] = s.train.size();
  j["n_dev"] = s.dev.size();
  j["n_test"] = s.test.size();
  return j;
}

inline std::unique_ptr<classify::Backend> open_backend(const BackendSpec& spec) {
  auto timeout = std::chrono::seconds(spec.timeout_seconds);
  if (spec.model) {
    return std::make_unique<classify::BaselineBackend>(classify::BaselineModel::load(spec.model->string()));
  }
  if (spec.command) return classify::ExternalBackend::spawn(*spec.command, timeout);
  if (spec.address) return classify::ExternalBackend::connect(*spec.address, timeout);
  throw InputError("no backend configured");
}

/// Scores the seeded test split of `annotations` through `backend`.
inline classify::EvalMetrics eval_backend(classify::Backend& backend, const fs::path& annotations, std::uint64_t seed) {
  auto load = classify::load_annotations(annotations.string());
  classify::SplitSpec spec;
  spec.seed = seed;
  auto s = classify::split(load.examples, spec);
  return classify::evaluate_examples(backend, s.test, kTestIdPrefix);
}

// ---------------------------------------------------------------------------
// tables

inline std::string na_or(const std::optional<double>& v, int prec = 6) { return v ? format_fixed(*v, prec) : "NA"; }

inline std::string stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

/// Rows of the state-level regression data: one per state that has both a
/// sentiment score and a policy profile.
struct StateTable {
  std::vector<StateCode> states;
  std::vector<double> y;
  stats::DataMatrix x;
};

inline StateTable join_policy(std::span<const aggregate::StateSentiment> scores,
                              const std::vector<policy::PolicyProfile>& profiles) {
  std::array<const policy::PolicyProfile*, StateCode::count> by{};
  for (const auto& p : profiles) by[p.state.index()] = &p;
  std::vector<StateCode> states;
  std::vector<double> y;
  std::vector<std::vector<double>> cols(policy::predictor_names().size());
  for (const auto& s : scores) {
    const auto* p = by[s.state.index()];
    if (!p) continue;
    states.push_back(s.state);
    y.push_back(s.score);
    auto v = policy::predictors(*p);
    for (std::size_t j = 0; j < v.size(); ++j) cols[j].push_back(v[j]);
  }
  if (states.empty()) throw StageError("no state has both a sentiment score and a policy profile");
  return {states, y, stats::DataMatrix::from_columns(policy::predictor_names(), cols)};
}

/// Descriptive statistics and correlations for the score and all predictors.
inline std::string table2_csv(const StateTable& t) {
  std::vector<std::string> names = {"sentiment_score"};
  std::vector<std::string> labels = {"Sentiment score"};
  std::vector<std::vector<double>> cols = {t.y};
  for (std::size_t j = 0; j < t.x.cols(); ++j) {
    names.push_back(t.x.names()[j]);
    labels.push_back(policy::predictor_labels()[j]);
    const auto c = t.x.values().col(static_cast<Eigen::Index>(j));
    cols.emplace_back(c.data(), c.data() + c.size());
  }
  auto d = stats::describe(stats::DataMatrix::from_columns(names, cols));
  std::ostringstream os;
  os << "variable,label,n,mean,sd,min,max";
  for (const auto& n : names) os << ",r_" << n;
  os << '\n';
  for (std::size_t a = 0; a < names.size(); ++a) {
    const auto& c = d.columns[a];
    os << names[a] << ',' << csv_escape(labels[a]) << ',' << c.n << ',' << format_fixed(c.mean, 6) << ','
       << format_fixed(c.sd, 6) << ',' << format_fixed(c.min, 6) << ',' << format_fixed(c.max, 6);
    for (std::size_t b = 0; b < names.size(); ++b) os << ',' << na_or(d.correlation[a][b]);
    os << '\n';
  }
  return os.str();
}

/// Models 1-7 regress the score on one predictor each; model 8 on all.
inline std::vector<stats::RegressionResult> table3_models(const StateTable& t) {
  std::vector<stats::RegressionResult> out;
  for (std::size_t j = 0; j < t.x.cols(); ++j) out.push_back(stats::ols(t.y, t.x.select({j})));
  out.push_back(stats::ols(t.y, t.x));
  return out;
}

inline std::string table3_csv(const std::vector<stats::RegressionResult>& models) {
  std::ostringstream os;
  os << "model,term,estimate,se_classical,se_robust,t,p,significance,r_squared,n,vif\n";
  for (std::size_t m = 0; m < models.size(); ++m) {
    const auto& r = models[m];
    for (std::size_t c = 0; c < r.coefficients.size(); ++c) {
      const auto& co = r.coefficients[c];
      std::string vif = c > 0 && !r.vif.empty() ? format_fixed(r.vif[c - 1], 6) : "";
      os << (m + 1) << ',' << co.name << ',' << format_fixed(co.estimate, 6) << ',' << format_fixed(co.se_classical, 6)
         << ',' << format_fixed(co.se_robust, 6) << ',' << format_fixed(co.t, 6) << ',' << format_fixed(co.p, 6) << ','
         << stars(co.p) << ',' << format_fixed(r.r_squared, 6) << ',' << r.n << ',' << vif << '\n';
    }
  }
  return os.str();
}

/// One-way ANOVA of state scores across census regions, Bartlett's test,
/// and Bonferroni pairwise comparisons.
inline json region_anova_json(std::span<const aggregate::StateSentiment> scores) {
  std::vector<stats::Group> groups;
  for (auto r : geo::all_regions) {
    stats::Group g{std::string(geo::region_name(r)), {}};
    for (const auto& s : scores) {
      if (s.state.region() == r) g.values.push_back(s.score);
    }
    if (!g.values.empty()) groups.push_back(std::move(g));
  }
  json j;
  auto a = stats::oneway_anova(groups);
  j["f"] = a.f_infinite ? json("inf") : json(a.f);
  j["df_between"] = a.df_between;
  j["df_within"] = a.df_within;
  j["p"] = a.p;
  j["groups"] = json::array();
  for (const auto& g : a.groups) j["groups"].push_back({{"region", g.name}, {"n", g.n}, {"mean", g.mean}});
  j["pairwise"] = json::array();
  for (const auto& c : a.pairwise) {
    j["pairwise"].push_back({{"a", c.group_a},
                             {"b", c.group_b},
                             {"mean_difference", c.mean_difference},
                             {"p_raw", c.p_raw},
                             {"p_bonferroni", c.p_bonferroni}});
  }
  try {
    auto b = stats::bartlett(groups);
    j["bartlett"] = {{"statistic", b.statistic}, {"df", b.df}, {"p", b.p}};
  } catch (const StageError& e) {
    j["bartlett"] = {{"error", e.what()}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// pipeline

struct StageRecord {
  std::string name;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  double seconds = 0;
  json detail = json::object();
};

struct PipelineResult {
  json manifest;
  std::vector<aggregate::StateSentiment> state_scores;
  std::vector<aggregate::DailyPoint> daily;
};

namespace detail {

class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, std::vector<fs::path> inputs) : dir_(std::move(dir)) {
    for (auto& p : inputs) {
      std::error_code ec;
      auto c = fs::weakly_canonical(p, ec);
      inputs_.push_back(ec ? p : c);
    }
  }

  void write(const std::string& name, const std::string& content) {
    fs::path target = dir_ / name;
    std::error_code ec;
    auto canon = fs::weakly_canonical(target, ec);
    for (const auto& in : inputs_) {
      if (!ec && canon == in) throw InputError("refusing to overwrite input file " + in.string());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw StageError("cannot write " + tmp.string());
      out << content;
      if (!out.flush()) throw StageError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
    artifacts_.push_back({{"name", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
  }

  const json& artifacts() const { return artifacts_; }

 private:
  fs::path dir_;
  std::vector<fs::path> inputs_;
  json artifacts_ = json::array();
};

inline std::string csv_of(const std::function<void(std::ostream&)>& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

}  // namespace detail

inline const std::vector<std::string>& pipeline_artifacts() {
  static const std::vector<std::string> v = {"state_scores.csv", "daily_series.csv", "table2.csv",  "table3.csv",
                                             "table3_excl.csv",  "anova.json",       "map.svg",     "bars.svg",
                                             "trend.svg",        "manifest.json"};
  return v;
}

/// Runs every stage and writes artifacts under cfg.out_dir. On failure the
/// manifest is still written with status "failed" and the list of complete
/// artifacts, then the error is rethrown.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  cfg.validate();
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw InputError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
  fs::remove(cfg.out_dir / "manifest.json", ec);

  detail::ArtifactWriter writer(cfg.out_dir, cfg.inputs());
  PipelineResult result;
  std::vector<StageRecord> stages;
  json& man = result.manifest;
  man["config"] = cfg.to_json();

  auto timed = [&](const std::string& name, auto&& body) {
    StageRecord rec;
    rec.name = name;
    auto t0 = clock::now();
    body(rec);
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    stages.push_back(std::move(rec));
  };

  auto finish = [&](const std::string& status, const std::string& error) {
    man["status"] = status;
    if (!error.empty()) man["error"] = error;
    man["stages"] = json::array();
    for (const auto& s : stages) {
      man["stages"].push_back(
          {{"name", s.name}, {"n_in", s.n_in}, {"n_out", s.n_out}, {"seconds", s.seconds}, {"detail", s.detail}});
    }
    man["artifacts"] = writer.artifacts();
    man["partial"] = status != "ok";
    std::ofstream out(cfg.out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << man.dump(2) << '\n';
  };

  try {
    // inputs that later stages need, loaded before any work so that a bad
    // file fails fast
    ingest::FilterConfig fcfg;
    if (cfg.keywords) fcfg.keywords = load_phrase_list(cfg.keywords->string());
    if (cfg.stopphrases) fcfg.stopphrases = load_phrase_list(cfg.stopphrases->string());
    auto gaz = geo::load_gazetteer(cfg.gazetteer);
    auto population = aggregate::Population::load(cfg.population.string());
    auto profiles = policy::load_profiles(cfg.policy.string());

    ingest::LoadResult loaded;
    timed("ingest", [&](StageRecord& r) {
      loaded = ingest::load_jsonl_file(cfg.corpus.string());
      r.n_in = loaded.posts.size() + loaded.rejects.size();
      r.n_out = loaded.posts.size();
      r.detail["n_rejected"] = loaded.rejects.size();
      json rej = json::array();
      for (std::size_t i = 0; i < loaded.rejects.size() && i < 20; ++i) {
        rej.push_back({{"line", loaded.rejects[i].line}, {"reason", loaded.rejects[i].reason}});
      }
      r.detail["first_rejects"] = rej;
    });

    ingest::ChainResult chain;
    timed("filter", [&](StageRecord& r) {
      chain = ingest::run_filter_chain(loaded.posts, fcfg);
      r.n_in = chain.report.n_input;
      r.n_out = chain.report.n_retained;
    });
    const auto& fr = chain.report;
    man["filter_report"] = {{"n_input", fr.n_input},
                            {"n_keyword_matched", fr.n_keyword_matched},
                            {"n_excluded_irrelevant", fr.n_excluded_irrelevant},
                            {"n_excluded_profile_only", fr.n_excluded_profile_only},
                            {"n_deduped", fr.n_deduped},
                            {"n_retained", fr.n_retained}};
    if (!fr.reconciles()) throw StageError("filter report does not reconcile");

    std::vector<textprep::NormalizedText> texts;
    aggregate::Timestamps timestamps;
    std::vector<const ingest::RawPost*> kept;
    timed("textprep", [&](StageRecord& r) {
      r.n_in = chain.posts.size();
      std::size_t empty = 0;
      for (const auto& p : chain.posts) {
        const std::string& body = p.extended_text && !trim(*p.extended_text).empty() ? *p.extended_text : p.text;
        auto t = textprep::normalize_post(body, p.id);
        if (t.value.empty()) {
          ++empty;
          continue;
        }
        texts.push_back(std::move(t));
        kept.push_back(&p);
      }
      r.n_out = texts.size();
      r.detail["n_empty_after_normalize"] = empty;
    });

    std::vector<geo::GeoResolution> resolutions;
    std::vector<textprep::NormalizedText> located;
    timed("geolocate", [&](StageRecord& r) {
      r.n_in = kept.size();
      std::size_t non_us = 0, unknown = 0, by_coords = 0, by_exact = 0, by_city = 0;
      for (std::size_t i = 0; i < kept.size(); ++i) {
        auto g = geo::resolve_post(*kept[i], gaz);
        if (g.kind == geo::GeoResolution::Kind::non_us) ++non_us;
        if (g.kind == geo::GeoResolution::Kind::unknown) ++unknown;
        if (!g.resolved()) continue;
        if (g.method == geo::Method::coordinates) ++by_coords;
        if (g.method == geo::Method::profile_exact) ++by_exact;
        if (g.method == geo::Method::profile_city) ++by_city;
        timestamps.emplace(kept[i]->id, kept[i]->created_at);
        located.push_back(texts[i]);
        resolutions.push_back(std::move(g));
      }
      r.n_out = located.size();
      r.detail = {{"n_non_us", non_us},
                  {"n_unknown", unknown},
                  {"by_coordinates", by_coords},
                  {"by_profile_exact", by_exact},
                  {"by_profile_city", by_city}};
    });

    std::vector<classify::SentimentPrediction> preds;
    timed("classify", [&](StageRecord& r) {
      std::unique_ptr<classify::Backend> backend;
      if (cfg.backend.model || cfg.backend.command || cfg.backend.address) {
        backend = open_backend(cfg.backend);
      } else {
        auto tr = train_from_annotations(*cfg.annotations, cfg.seed);
        r.detail["trained_baseline"] = metrics_json(tr.test_metrics, tr.split);
        backend = std::make_unique<classify::BaselineBackend>(std::move(tr.model));
      }
      r.n_in = located.size();
      preds = classify::score_batch(*backend, located);
      r.n_out = preds.size();
      std::size_t pos = 0;
      for (const auto& p : preds) pos += p.label == classify::Label::positive;
      r.detail["backend_id"] = backend->id();
      r.detail["n_positive"] = pos;
    });

    double national_weighted = 0, national_state_mean = 0;
    timed("aggregate", [&](StageRecord& r) {
      r.n_in = preds.size();
      result.state_scores = aggregate::state_scores(preds, resolutions, population);
      result.daily = aggregate::daily_series(preds, timestamps);
      national_weighted = aggregate::national_average(result.state_scores, aggregate::NationalMode::tweet_weighted);
      national_state_mean = aggregate::national_average(result.state_scores, aggregate::NationalMode::state_mean);
      std::size_t total = 0;
      for (const auto& s : result.state_scores) total += s.n_tweets;
      r.n_out = total;
      r.detail["n_states"] = result.state_scores.size();
      r.detail["n_days"] = result.daily.size();
    });
    man["national"] = {{"tweet_weighted", national_weighted}, {"state_mean", national_state_mean}};
    writer.write("state_scores.csv",
                 detail::csv_of([&](std::ostream& os) { aggregate::write_state_scores_csv(os, result.state_scores); }));
    writer.write("daily_series.csv",
                 detail::csv_of([&](std::ostream& os) { aggregate::write_daily_csv(os, result.daily); }));

    timed("stats", [&](StageRecord& r) {
      auto table = join_policy(result.state_scores, profiles);
      r.n_in = table.states.size();
      writer.write("table2.csv", table2_csv(table));
      auto models = table3_models(table);
      writer.write("table3.csv", table3_csv(models));
      r.detail["r_squared_full"] = models.back().r_squared;
      if (models.back().mean_vif) r.detail["mean_vif"] = *models.back().mean_vif;
      if (cfg.exclude) {
        auto rest = aggregate::outside_window(preds, timestamps, *cfg.exclude);
        auto excl_scores = aggregate::state_scores(rest, resolutions, population);
        auto excl_table = join_policy(excl_scores, profiles);
        writer.write("table3_excl.csv", table3_csv(table3_models(excl_table)));
        r.detail["n_excluded_window"] = preds.size() - rest.size();
      }
      writer.write("anova.json", region_anova_json(result.state_scores).dump(2) + "\n");
      r.n_out = table.states.size();
    });

    timed("plots", [&](StageRecord& r) {
      r.n_in = result.state_scores.size();
      writer.write("map.svg", svg::choropleth(result.state_scores, "Solar energy sentiment by state"));
      writer.write("bars.svg", svg::score_bars(result.state_scores, national_weighted,
                                               "State sentiment scores with 95% confidence intervals"));
      writer.write("trend.svg", svg::trend(result.daily, cfg.exclude, "Daily mean sentiment score"));
      r.n_out = 3;
    });
  } catch (const std::exception& e) {
    finish("failed", e.what());
    throw;
  }
  finish("ok", "");
  return result;
}

}  // namespace solsent::report
