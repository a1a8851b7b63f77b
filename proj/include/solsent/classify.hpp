#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "solsent/error.hpp"
#include "solsent/ingest.hpp"
#include "solsent/textprep.hpp"
#include "solsent/util.hpp"

namespace solsent::classify {

enum class Label : std::uint8_t { negative, positive };

inline std::string_view label_name(Label l) { return l == Label::positive ? "positive" : "negative"; }

struct AnnotatedExample {
  std::string text;
  Label label = Label::negative;
};

/// One scored post. `label` is always derived from `p_positive`.
struct SentimentPrediction {
  std::string post_id;
  double p_positive = 0.0;
  Label label = Label::negative;
  std::string backend_id;
};

/// p = 0.5 counts as positive.
inline Label label_for(double p_positive) { return p_positive >= 0.5 ? Label::positive : Label::negative; }

// ---------------------------------------------------------------------------
// annotations

struct AnnotationLoad {
  std::vector<AnnotatedExample> examples;
  std::size_t n_neutral_dropped = 0;
};

/// Tab-separated, header `text<TAB>label`. Labels are case-insensitive;
/// `neutral` rows are dropped and counted.
inline AnnotationLoad parse_annotations(std::istream& in, const std::string& source) {
  AnnotationLoad out;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> c_text, c_label;
  std::size_t n_cols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, '\t');
    if (!c_text) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        auto h = to_lower_ascii(trim(cells[i]));
        if (h == "text") c_text = i;
        if (h == "label") c_label = i;
      }
      if (!c_text || !c_label) throw InputError(source + ":" + std::to_string(line_no) + ": header must contain 'text' and 'label'");
      n_cols = cells.size();
      continue;
    }
    if (cells.size() != n_cols) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(n_cols) +
                       " tab-separated fields, got " + std::to_string(cells.size()));
    }
    auto label = to_lower_ascii(trim(cells[*c_label]));
    if (label == "neutral") {
      ++out.n_neutral_dropped;
      continue;
    }
    AnnotatedExample ex;
    ex.text = std::string(trim(cells[*c_text]));
    if (label == "positive") ex.label = Label::positive;
    else if (label == "negative") ex.label = Label::negative;
    else throw InputError(source + ":" + std::to_string(line_no) + ": unknown label '" + cells[*c_label] + "'");
    out.examples.push_back(std::move(ex));
  }
  if (out.examples.empty()) throw InputError(source + ": no examples");
  return out;
}

inline AnnotationLoad load_annotations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open annotations: " + path);
  return parse_annotations(in, path);
}

// ---------------------------------------------------------------------------
// splitting

struct SplitSpec {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(train > 0 && dev > 0 && test > 0)) throw InputError("split fractions must be positive");
    if (std::abs(train + dev + test - 1.0) > 1e-9) throw InputError("split fractions must sum to 1");
  }
};

struct Split {
  std::vector<AnnotatedExample> train;
  std::vector<AnnotatedExample> dev;
  std::vector<AnnotatedExample> test;
  /// Positions in the input for each partition, same order as above.
  std::vector<std::size_t> train_idx, dev_idx, test_idx;
};

/// Unbiased draw from [0, bound) using rejection on a 64-bit engine.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Seeded shuffle, then floor(n*train) / floor(n*dev) / remainder.
inline Split split(const std::vector<AnnotatedExample>& examples, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = examples.size();
  if (n < 10) throw InputError("need at least 10 annotated examples to split, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[bounded(rng, i + 1)]);

  auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train + 1e-9));
  auto n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.dev + 1e-9));
  Split s;
  for (std::size_t k = 0; k < n; ++k) {
    auto i = order[k];
    if (k < n_train) {
      s.train.push_back(examples[i]);
      s.train_idx.push_back(i);
    } else if (k < n_train + n_dev) {
      s.dev.push_back(examples[i]);
      s.dev_idx.push_back(i);
    } else {
      s.test.push_back(examples[i]);
      s.test_idx.push_back(i);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// bag-of-words features

/// Lower-cased unigrams and adjacent-pair bigrams. ASCII punctuation
/// separates tokens; non-ASCII bytes stay inside tokens.
inline std::vector<std::string> features(std::string_view text) {
  std::string c = ingest::canonical_text(text);
  std::vector<std::string> words;
  std::string cur;
  for (char ch : c) {
    auto u = static_cast<unsigned char>(ch);
    bool keep = u >= 0x80 || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '\'';
    if (keep) {
      cur += ch;
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  std::vector<std::string> out = words;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) out.push_back(words[i] + " " + words[i + 1]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct TrainOptions {
  double l2 = 1e-4;
  int max_epochs = 2000;
  int patience = 25;
  std::uint64_t seed = 42;
};

struct TrainTrace {
  std::vector<double> train_loss;
  std::vector<double> dev_loss;
  int best_epoch = 0;
};

/// Logistic regression over L2-normalised binary bag-of-words features.
class BaselineModel {
 public:
  static constexpr std::string_view format_tag = "solsent-baseline/1";

  double predict(std::string_view text) const {
    return sigmoid(logit(encode(text)));
  }

  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  const nlohmann::json& metadata() const { return meta_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = format_tag;
    j["vocabulary"] = vocab_;
    j["weights"] = weights_;
    j["bias"] = bias_;
    j["metadata"] = meta_;
    return j;
  }

  static BaselineModel from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != format_tag) {
      throw InputError("not a baseline model file (format tag mismatch)");
    }
    BaselineModel m;
    m.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
    m.weights_ = j.at("weights").get<std::vector<double>>();
    m.bias_ = j.at("bias").get<double>();
    m.meta_ = j.value("metadata", nlohmann::json::object());
    if (m.vocab_.size() != m.weights_.size()) throw InputError("model vocabulary/weights size mismatch");
    m.index_vocab();
    return m;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write model: " + path);
    out << to_json().dump(1) << '\n';
  }

  static BaselineModel load(const std::string& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("model file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
  }

  // Sparse row: feature indices, each with value 1/sqrt(count).
  struct Row {
    std::vector<std::uint32_t> idx;
    double value = 0.0;
  };

  Row encode(std::string_view text) const {
    Row r;
    for (const auto& f : features(text)) {
      auto it = lookup_.find(f);
      if (it != lookup_.end()) r.idx.push_back(it->second);
    }
    if (!r.idx.empty()) r.value = 1.0 / std::sqrt(static_cast<double>(r.idx.size()));
    return r;
  }

  double logit(const Row& r) const {
    double z = bias_;
    for (auto i : r.idx) z += weights_[i] * r.value;
    return z;
  }

  static double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
  }

 private:
  friend BaselineModel train_baseline(const std::vector<AnnotatedExample>&,
                                      const std::vector<AnnotatedExample>&, const TrainOptions&,
                                      TrainTrace*);

  void index_vocab() {
    lookup_.clear();
    for (std::size_t i = 0; i < vocab_.size(); ++i) lookup_.emplace(vocab_[i], static_cast<std::uint32_t>(i));
  }

  std::vector<std::string> vocab_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  nlohmann::json meta_ = nlohmann::json::object();
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

namespace detail {

// Mean log-loss plus the L2 penalty on weights (bias unpenalised).
inline double objective(const BaselineModel& m, const std::vector<BaselineModel::Row>& rows,
                        const std::vector<double>& y, double l2) {
  double loss = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double z = m.logit(rows[i]);
    // log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0, computed stably
    double s = y[i] > 0.5 ? -z : z;
    loss += s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  }
  loss /= static_cast<double>(rows.size());
  double reg = 0;
  for (double w : m.weights()) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

}  // namespace detail

/// Full-batch gradient descent with step 1/L, where L bounds the gradient's
/// Lipschitz constant (rows have unit norm, bias feature 1), so the
/// training objective never increases. Stops when the dev loss has not
/// improved for `patience` epochs and keeps the best-dev weights.
inline BaselineModel train_baseline(const std::vector<AnnotatedExample>& train,
                                    const std::vector<AnnotatedExample>& dev,
                                    const TrainOptions& opt = {}, TrainTrace* trace = nullptr) {
  if (train.empty()) throw InputError("training set is empty");
  bool has_pos = false, has_neg = false;
  for (const auto& e : train) (e.label == Label::positive ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw InputError("training set must contain both positive and negative examples");

  BaselineModel m;
  std::map<std::string, int> vocab;
  for (const auto& e : train) {
    for (auto& f : features(e.text)) vocab.emplace(std::move(f), 0);
  }
  for (const auto& [k, v] : vocab) m.vocab_.push_back(k);
  m.weights_.assign(m.vocab_.size(), 0.0);
  m.index_vocab();

  auto encode_all = [&](const std::vector<AnnotatedExample>& xs, std::vector<BaselineModel::Row>& rows,
                        std::vector<double>& y) {
    for (const auto& e : xs) {
      rows.push_back(m.encode(e.text));
      y.push_back(e.label == Label::positive ? 1.0 : 0.0);
    }
  };
  std::vector<BaselineModel::Row> tr_rows, dv_rows;
  std::vector<double> tr_y, dv_y;
  encode_all(train, tr_rows, tr_y);
  encode_all(dev, dv_rows, dv_y);

  const double lipschitz = 0.25 * 2.0 + opt.l2;
  const double step = 1.0 / lipschitz;
  const double inv_n = 1.0 / static_cast<double>(tr_rows.size());

  TrainTrace local;
  TrainTrace& tr = trace ? *trace : local;
  tr = {};
  std::vector<double> best_w = m.weights_;
  double best_b = m.bias_;
  double best_dev = std::numeric_limits<double>::infinity();
  int since_best = 0;
  int epochs_run = 0;
  std::vector<double> grad(m.weights_.size());

  tr.train_loss.push_back(detail::objective(m, tr_rows, tr_y, opt.l2));
  for (int epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0;
    for (std::size_t i = 0; i < tr_rows.size(); ++i) {
      double r = BaselineModel::sigmoid(m.logit(tr_rows[i])) - tr_y[i];
      grad_b += r;
      for (auto k : tr_rows[i].idx) grad[k] += r * tr_rows[i].value;
    }
    for (std::size_t k = 0; k < grad.size(); ++k) {
      m.weights_[k] -= step * (grad[k] * inv_n + opt.l2 * m.weights_[k]);
    }
    m.bias_ -= step * grad_b * inv_n;
    epochs_run = epoch;
    tr.train_loss.push_back(detail::objective(m, tr_rows, tr_y, opt.l2));

    if (dv_rows.empty()) continue;
    double dl = detail::objective(m, dv_rows, dv_y, 0.0);
    tr.dev_loss.push_back(dl);
    if (dl < best_dev - 1e-12) {
      best_dev = dl;
      best_w = m.weights_;
      best_b = m.bias_;
      tr.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= opt.patience) {
      break;
    }
  }
  if (!dv_rows.empty()) {
    m.weights_ = std::move(best_w);
    m.bias_ = best_b;
  } else {
    tr.best_epoch = epochs_run;
  }
  m.meta_ = {{"n_train", train.size()}, {"n_dev", dev.size()},   {"epochs_run", epochs_run},
             {"best_epoch", tr.best_epoch}, {"l2", opt.l2},      {"step", step},
             {"seed", opt.seed},            {"vocabulary_size", m.vocab_.size()}};
  return m;
}

// ---------------------------------------------------------------------------
// backends

/// Anything that maps normalised texts to positive-class probabilities.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual const std::string& id() const = 0;
  /// One probability per input, same order.
  virtual std::vector<double> score(std::span<const textprep::NormalizedText> texts) = 0;
};

class BaselineBackend final : public Backend {
 public:
  explicit BaselineBackend(BaselineModel model, std::string id = "baseline-bow-logreg")
      : model_(std::move(model)), id_(std::move(id)) {}

  const std::string& id() const override { return id_; }

  std::vector<double> score(std::span<const textprep::NormalizedText> texts) override {
    std::vector<double> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(model_.predict(t.value));
    return out;
  }

  const BaselineModel& model() const { return model_; }

 private:
  BaselineModel model_;
  std::string id_;
};

inline std::vector<SentimentPrediction> score_batch(Backend& backend,
                                                    std::span<const textprep::NormalizedText> texts) {
  if (texts.empty()) return {};
  auto probs = backend.score(texts);
  if (probs.size() != texts.size()) {
    throw ProtocolError("backend returned " + std::to_string(probs.size()) + " scores for " +
                        std::to_string(texts.size()) + " inputs");
  }
  std::vector<SentimentPrediction> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) throw ProtocolError("p_positive outside [0,1]", texts[i].source_id);
    out.push_back({texts[i].source_id, p, label_for(p), backend.id()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// evaluation

struct EvalMetrics {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t n() const { return tp + fp + fn + tn; }

  nlohmann::json to_json() const {
    return {{"accuracy", accuracy}, {"precision", precision}, {"recall", recall}, {"f1", f1},
            {"tp", tp},             {"fp", fp},               {"fn", fn},         {"tn", tn}};
  }
};

struct GoldLabel {
  std::string id;
  Label label = Label::negative;
};

inline EvalMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  EvalMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  const auto n = static_cast<double>(tp + fp + fn + tn);
  m.accuracy = n > 0 ? static_cast<double>(tp + tn) / n : 0.0;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

/// Predictions and gold must list the same ids in the same order.
inline EvalMetrics evaluate(std::span<const SentimentPrediction> predictions, std::span<const GoldLabel> gold) {
  if (predictions.size() != gold.size()) {
    throw StageError("evaluate: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(gold.size()) + " gold labels");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i].post_id != gold[i].id) {
      throw StageError("evaluate: id mismatch at position " + std::to_string(i) + ": '" +
                       predictions[i].post_id + "' vs '" + gold[i].id + "'");
    }
    bool pred = predictions[i].label == Label::positive;
    bool truth = gold[i].label == Label::positive;
    if (pred && truth) ++tp;
    else if (pred) ++fp;
    else if (truth) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

/// Scores annotated examples through a backend. Ids are `<prefix><k>`.
inline EvalMetrics evaluate_examples(Backend& backend, const std::vector<AnnotatedExample>& examples,
                                     std::string_view prefix = "ex-") {
  std::vector<textprep::NormalizedText> texts;
  std::vector<GoldLabel> gold;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    std::string id = std::string(prefix) + std::to_string(i);
    texts.push_back({textprep::normalize(examples[i].text), id});
    gold.push_back({id, examples[i].label});
  }
  auto preds = score_batch(backend, texts);
  return evaluate(preds, gold);
}

}  // namespace solsent::classify
