// solsent command-line entry point.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "solsent/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace solsent;

namespace {

struct PipelineFlags {
  std::string config;
  std::string corpus, keywords, stopphrases, gazetteer, population, policy, annotations;
  std::string model, backend_command, backend_address, exclude, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> timeout;
};

// Config paths are relative to the config file; flag paths to the cwd.
report::RunConfig build_config(const PipelineFlags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    fs::path file(f.config);
    if (!fs::exists(file)) throw InputError("config file not found: " + f.config);
    try {
      j = json::parse(read_file(f.config));
    } catch (const json::exception& e) {
      throw InputError("config " + f.config + ": " + e.what());
    }
    if (!j.is_object()) throw InputError("config must be a JSON object");
    auto rebase = [&](json& node, const char* key) {
      auto it = node.find(key);
      if (it == node.end() || !it->is_string()) return;
      fs::path p(it->get<std::string>());
      if (p.is_relative()) *it = (file.parent_path() / p).string();
    };
    for (auto key : {"corpus", "keywords", "stopphrases", "gazetteer", "population", "policy", "annotations",
                     "out_dir"}) {
      rebase(j, key);
    }
    if (j.contains("backend") && j["backend"].is_object()) rebase(j["backend"], "model");
  }
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  set("corpus", f.corpus);
  set("keywords", f.keywords);
  set("stopphrases", f.stopphrases);
  set("gazetteer", f.gazetteer);
  set("population", f.population);
  set("policy", f.policy);
  set("annotations", f.annotations);
  set("exclude", f.exclude);
  set("out_dir", f.out_dir);
  if (f.seed) j["seed"] = *f.seed;
  if (!f.model.empty() || !f.backend_command.empty() || !f.backend_address.empty()) {
    json b = json::object();
    if (!f.model.empty()) b["model"] = f.model;
    if (!f.backend_command.empty()) b["command"] = f.backend_command;
    if (!f.backend_address.empty()) b["address"] = f.backend_address;
    j["backend"] = b;
  }
  if (f.timeout) {
    if (!j.contains("backend") || !j["backend"].is_object()) j["backend"] = json::object();
    j["backend"]["timeout_seconds"] = *f.timeout;
  }
  return report::RunConfig::from_json(j);
}

int run_pipeline(const PipelineFlags& f) {
  auto cfg = build_config(f);
  auto r = report::run_pipeline(cfg);
  std::cerr << "pipeline ok: " << r.state_scores.size() << " states, artifacts in " << cfg.out_dir.string() << '\n';
  return 0;
}

struct TrainFlags {
  std::string annotations, model_out, metrics_out;
  std::uint64_t seed = 42;
};

int run_train(const TrainFlags& f) {
  if (!fs::is_regular_file(f.annotations)) throw InputError("annotations TSV not found: " + f.annotations);
  auto r = report::train_from_annotations(f.annotations, f.seed);
  r.model.save(f.model_out);
  json m = report::metrics_json(r.test_metrics, r.split);
  m["n_neutral_dropped"] = r.n_neutral_dropped;
  m["best_epoch"] = r.trace.best_epoch;
  m["seed"] = f.seed;
  std::string text = m.dump(2) + "\n";
  if (!f.metrics_out.empty()) {
    std::ofstream out(f.metrics_out, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + f.metrics_out);
    out << text;
  }
  std::cout << text;
  return 0;
}

struct EvalFlags {
  std::string annotations, model, command, address;
  std::uint64_t seed = 42;
  int timeout = 60;
};

int run_eval(const EvalFlags& f) {
  if (!fs::is_regular_file(f.annotations)) throw InputError("annotations TSV not found: " + f.annotations);
  report::BackendSpec spec;
  if (!f.model.empty()) spec.model = f.model;
  if (!f.command.empty()) spec.command = f.command;
  if (!f.address.empty()) spec.address = f.address;
  int kinds = !f.model.empty() + !f.command.empty() + !f.address.empty();
  if (kinds != 1) throw InputError("choose exactly one of --model, --backend-command, --backend-address");
  if (spec.model && !fs::is_regular_file(*spec.model)) throw InputError("baseline model not found: " + f.model);
  spec.timeout_seconds = f.timeout;
  auto backend = report::open_backend(spec);
  auto m = report::eval_backend(*backend, f.annotations, f.seed);
  json j = m.to_json();
  j["backend_id"] = backend->id();
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_index(const std::string& policy_csv, const std::string& out) {
  auto profiles = policy::load_profiles(policy_csv);
  if (out.empty()) {
    policy::write_index_csv(std::cout, profiles);
  } else {
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot write " + out);
    policy::write_index_csv(os, profiles);
  }
  return 0;
}

int run_stats(const std::string& data, const std::string& y_col, const std::vector<std::string>& x_cols,
              const std::string& flavor) {
  auto t = CsvTable::load(data);
  auto column = [&](const std::string& name) {
    auto c = t.column(name);
    std::vector<double> v;
    for (const auto& r : t.rows()) {
      auto d = parse_double(r.cells[c]);
      if (!d) throw InputError(t.where(r) + ": column '" + name + "' is not numeric: '" + r.cells[c] + "'");
      v.push_back(*d);
    }
    return v;
  };
  std::vector<std::vector<double>> cols;
  for (const auto& x : x_cols) cols.push_back(column(x));
  auto y = column(y_col);
  auto fl = flavor == "hc0" ? stats::RobustFlavor::hc0 : stats::RobustFlavor::hc1;
  auto r = stats::ols(y, stats::DataMatrix::from_columns(x_cols, cols), fl);
  std::cout << report::table3_csv({r});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solar-energy sentiment pipeline and state policy analysis"};
  app.require_subcommand(1);

  PipelineFlags pf;
  auto* pipe = app.add_subcommand("pipeline", "Run the full pipeline and write all artifacts");
  pipe->add_option("--config", pf.config, "JSON run configuration");
  pipe->add_option("--corpus", pf.corpus, "JSONL corpus");
  pipe->add_option("--keywords", pf.keywords, "keyword list file");
  pipe->add_option("--stopphrases", pf.stopphrases, "stopphrase list file");
  pipe->add_option("--gazetteer", pf.gazetteer, "gazetteer directory");
  pipe->add_option("--population", pf.population, "population CSV");
  pipe->add_option("--policy", pf.policy, "policy CSV");
  pipe->add_option("--annotations", pf.annotations, "annotations TSV");
  pipe->add_option("--model", pf.model, "baseline model file");
  pipe->add_option("--backend-command", pf.backend_command, "external backend command");
  pipe->add_option("--backend-address", pf.backend_address, "external backend host:port");
  pipe->add_option("--timeout", pf.timeout, "backend timeout in seconds");
  pipe->add_option("--exclude", pf.exclude, "exclusion window YYYY-MM-DD..YYYY-MM-DD");
  pipe->add_option("--out", pf.out_dir, "output directory");
  pipe->add_option("--seed", pf.seed, "random seed");

  TrainFlags tf;
  auto* train = app.add_subcommand("train-baseline", "Train the bag-of-words baseline from annotations");
  train->add_option("--annotations", tf.annotations, "annotations TSV")->required();
  train->add_option("--model-out", tf.model_out, "where to write the model")->required();
  train->add_option("--metrics-out", tf.metrics_out, "where to write test metrics JSON");
  train->add_option("--seed", tf.seed, "random seed");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval-backend", "Score the annotation test split through a backend");
  eval->add_option("--annotations", ef.annotations, "annotations TSV")->required();
  eval->add_option("--model", ef.model, "baseline model file");
  eval->add_option("--backend-command", ef.command, "external backend command");
  eval->add_option("--backend-address", ef.address, "external backend host:port");
  eval->add_option("--seed", ef.seed, "random seed (selects the split)");
  eval->add_option("--timeout", ef.timeout, "backend timeout in seconds");

  std::string policy_csv, index_out;
  auto* index = app.add_subcommand("index", "Compute RPS and net-metering scores");
  index->add_option("--policy", policy_csv, "policy CSV")->required();
  index->add_option("--out", index_out, "output CSV (default stdout)");

  std::string data, y_col, flavor = "hc1";
  std::vector<std::string> x_cols;
  auto* st = app.add_subcommand("stats", "OLS with robust standard errors on a CSV");
  st->add_option("--data", data, "CSV file")->required();
  st->add_option("--y", y_col, "response column")->required();
  st->add_option("--x", x_cols, "predictor columns")->required()->delimiter(',');
  st->add_option("--robust", flavor, "hc1 or hc0")->check(CLI::IsMember({"hc0", "hc1"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::input_error);
  }

  try {
    if (*pipe) return run_pipeline(pf);
    if (*train) return run_train(tf);
    if (*eval) return run_eval(ef);
    if (*index) return run_index(policy_csv, index_out);
    if (*st) return run_stats(data, y_col, x_cols, flavor);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::input_error);
  } catch (const ProtocolError& e) {
    std::cerr << "backend protocol error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::protocol_failure);
  } catch (const StageError& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::stage_failure);
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::stage_failure);
  }
  return static_cast<int>(ExitCode::input_error);
}
