#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluscope/collector.hpp"
#include "fluscope/config.hpp"
#include "fluscope/corpus.hpp"
#include "fluscope/features.hpp"
#include "fluscope/learners.hpp"
#include "fluscope/parallel.hpp"
#include "fluscope/pipeline.hpp"
#include "fluscope/report.hpp"
#include "fluscope/stats.hpp"
#include "fluscope/synthetic.hpp"
#include "fluscope/textprep.hpp"

namespace fs = std::filesystem;
using namespace fluscope;

namespace {

struct Globals {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::string> data_dir;
};

void log(const std::string& msg) { std::cerr << "[fluscope] " << msg << '\n'; }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

config::ExperimentConfig load_config(const Globals& g) {
  const auto env = config::process_environment();
  std::optional<fs::path> file;
  if (g.config_path) {
    file = *g.config_path;
  } else if (const auto it = env.find("FLUSCOPE_CONFIG"); it != env.end()) {
    file = it->second;
  }
  auto cfg = config::load(file, env);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out_dir) cfg.out_dir = *g.out_dir;
  if (g.threads) cfg.threads = *g.threads;
  if (g.data_dir) cfg.data_dir = *g.data_dir;
  cfg.validate();
  set_thread_count(cfg.threads);
  return cfg;
}

// Resolves the configuration and records it in the output directory.
config::ExperimentConfig resolve(const Globals& g) {
  auto cfg = load_config(g);
  fs::create_directories(cfg.out_dir);
  report::write_file(cfg.out_dir / "config.toml", config::to_toml(cfg));
  return cfg;
}

corpus::Cohort load_input(const config::ExperimentConfig& cfg) {
  if (cfg.data_dir) {
    log("loading cohort from " + cfg.data_dir->string());
    return corpus::load_cohort(*cfg.data_dir, cfg.window);
  }
  log("generating synthetic cohort (seed " + std::to_string(cfg.seed) + ")");
  return corpus::generate_synthetic_cohort(cfg.synthetic_config());
}

textprep::StopList stoplist(const config::ExperimentConfig& cfg) {
  return cfg.stopwords ? textprep::StopList::from_file(*cfg.stopwords) : textprep::StopList::bundled();
}

pipeline::Prepared prepare(const corpus::Cohort& cohort, const config::ExperimentConfig& cfg) {
  Stopwatch w;
  auto p = pipeline::prepare(cohort, stoplist(cfg), cfg.zero_tweet_policy);
  log("prepared " + std::to_string(p.months.size()) + " user-months from " + std::to_string(cohort.tweets().size()) +
      " tweets in " + report::fixed(w.seconds(), 1) + " s");
  return p;
}

pipeline::BaseSignals base_signals(const pipeline::Prepared& p, const corpus::Cohort& cohort,
                                   const config::ExperimentConfig& cfg) {
  Stopwatch w;
  auto s = pipeline::compute_base_signals(p, cohort, cfg.signal_config());
  log("base signals: " + std::to_string(s.candidates.size()) + " candidates in " + report::fixed(w.seconds(), 1) +
      " s");
  return s;
}

pipeline::MetaResult meta_result(const pipeline::BaseSignals& s, const pipeline::Prepared& p,
                                 const config::ExperimentConfig& cfg) {
  std::vector<learners::AlgorithmSpec> specs;
  for (const auto k : cfg.meta_classifiers) specs.push_back(cfg.spec(k));
  Stopwatch w;
  auto m = pipeline::run_meta(s, p, specs, cfg.threshold);
  log("meta learners in " + report::fixed(w.seconds(), 1) + " s");
  return m;
}

std::vector<report::NamedRoc> selected_rocs(const pipeline::BaseSignals& s) {
  std::vector<report::NamedRoc> out;
  for (const auto sig : meta::all_signals()) {
    const auto& c = s.best(sig);
    out.emplace_back(std::string(meta::to_string(sig)) + ":" + c.label(), c.report.roc);
  }
  return out;
}

// ---- subcommands ----

int cmd_generate(const Globals& g, std::optional<int> users) {
  auto cfg = resolve(g);
  if (users) {
    cfg.synthetic.n_seed_users = *users;
    cfg.validate();
    report::write_file(cfg.out_dir / "config.toml", config::to_toml(cfg));
  }
  const auto cohort = corpus::generate_synthetic_cohort(cfg.synthetic_config());
  corpus::save_cohort(cohort, cfg.out_dir);
  log("wrote " + std::to_string(cohort.users().size()) + " users, " + std::to_string(cohort.tweets().size()) +
      " tweets, " + std::to_string(cohort.edges().size()) + " edges to " + cfg.out_dir.string());
  return 0;
}

int cmd_preprocess(const Globals& g) {
  const auto cfg = resolve(g);
  const auto cohort = load_input(cfg);
  const auto stops = stoplist(cfg);
  const auto months = corpus::partition_user_months(cohort, cfg.zero_tweet_policy);
  std::ostringstream o;
  o << "instance\tlabel\ttweets\tchars\tstems\n";
  for (const auto& m : months) {
    std::size_t chars = 0;
    std::string stems;
    for (const auto t : m.tweet_refs) {
      const auto doc = textprep::preprocess(cohort.tweets()[t].text, stops);
      chars += doc.source_char_count;
      for (const auto& s : doc.stems) {
        if (!stems.empty()) stems += ' ';
        stems += s;
      }
    }
    o << m.id() << '\t' << to_string(m.label) << '\t' << m.tweet_refs.size() << '\t' << chars << '\t' << stems << '\n';
  }
  report::write_file(cfg.out_dir / "preprocessed.tsv", o.str());
  return 0;
}

int cmd_keywords(const Globals& g, std::size_t k, std::size_t top) {
  const auto cfg = resolve(g);
  const auto cohort = load_input(cfg);
  const auto p = prepare(cohort, cfg);
  std::vector<std::pair<std::string, double>> expert;
  for (const auto& t : pipeline::expert_keyword_tests(p)) expert.emplace_back(t.keyword, t.odds_ratio);
  report::write_file(cfg.out_dir / "expert_keywords.csv", report::keyword_scores_csv(expert));

  std::vector<std::size_t> rows(p.labels.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto ranking = features::rank_by_information_gain(p.own, p.labels, rows, cfg.vocab_max);
  if (k > ranking.size()) throw ConfigError("--k exceeds the vocabulary of " + std::to_string(ranking.size()));
  std::vector<std::pair<std::string, double>> mined;
  for (std::size_t i = 0; i < k; ++i) mined.emplace_back(p.own.lexicon.term(ranking[i].term), ranking[i].gain);
  report::write_file(cfg.out_dir / "mined_keywords.csv", report::keyword_scores_csv(mined));

  std::vector<std::pair<std::string, double>> ratios;
  for (const auto& r : features::top_predictive_keywords(p.own, p.labels, top)) ratios.emplace_back(r.keyword, r.ratio);
  report::write_file(cfg.out_dir / "predictive_keywords.csv", report::keyword_scores_csv(ratios));
  return 0;
}

int cmd_signals(const Globals& g) {
  const auto cfg = resolve(g);
  const auto cohort = load_input(cfg);
  const auto p = prepare(cohort, cfg);
  const auto s = base_signals(p, cohort, cfg);
  report::write_file(cfg.out_dir / "signals.csv", report::signals_csv(s, p));
  report::write_file(cfg.out_dir / "candidates.tsv", report::candidates_tsv(s));
  report::write_file(cfg.out_dir / "roc_base.csv", report::roc_csv(selected_rocs(s)));
  return 0;
}

int cmd_anomaly(const Globals& g) {
  const auto cfg = resolve(g);
  const auto cohort = load_input(cfg);
  const auto p = prepare(cohort, cfg);
  const auto a = pipeline::compute_anomaly_signal(p, cohort, cfg.signal_config());
  report::write_file(cfg.out_dir / "anomaly.csv", report::anomaly_csv(a, p));
  report::write_file(cfg.out_dir / "anomaly_summary.tsv", report::anomaly_summary_tsv(a));
  return 0;
}

int cmd_meta_run(const Globals& g) {
  const auto cfg = resolve(g);
  const auto cohort = load_input(cfg);
  const auto p = prepare(cohort, cfg);
  const auto s = base_signals(p, cohort, cfg);
  const auto m = meta_result(s, p, cfg);
  report::write_file(cfg.out_dir / "signals.csv", report::signals_csv(s, p));
  report::write_file(cfg.out_dir / "meta.tsv", report::meta_tsv(m));
  std::cout << report::meta_tsv(m);
  return 0;
}

std::vector<double> parse_numbers(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw DataError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_stats(const Globals& g, const std::vector<std::uint64_t>& fisher, const std::string& ks_x,
              const std::string& ks_y) {
  load_config(g);
  std::ostringstream o;
  if (!fisher.empty()) {
    const stats::ContingencyTable2x2 t{fisher[0], fisher[1], fisher[2], fisher[3]};
    const auto r = stats::fisher_exact(t);
    o << "test\tstatistic\tp_value\todds_ratio\n";
    o << "fisher_exact\t" << report::sci(r.statistic, 6) << '\t' << report::sci(r.p_value, 6) << '\t'
      << report::fixed(stats::odds_ratio(t), 6) << '\n';
    std::cout << o.str();
    return 0;
  }
  if (!ks_x.empty() || !ks_y.empty()) {
    const auto r = stats::ks_two_sample(parse_numbers(ks_x), parse_numbers(ks_y));
    o << "test\tstatistic\tp_value\n";
    o << "ks_two_sample\t" << report::fixed(r.statistic, 6) << '\t' << report::sci(r.p_value, 6) << '\n';
    std::cout << o.str();
    return 0;
  }
  const auto cfg = resolve(g);
  const auto cohort = load_input(cfg);
  const auto p = prepare(cohort, cfg);
  const auto tsv = report::keyword_tests_tsv(pipeline::expert_keyword_tests(p));
  report::write_file(cfg.out_dir / "expert_keyword_tests.tsv", tsv);
  std::cout << tsv;
  return 0;
}

int cmd_collect_simulate(const Globals& g, std::optional<double> days, std::optional<std::size_t> accounts,
                         std::optional<std::size_t> seeds) {
  auto cfg = resolve(g);
  if (days) cfg.collector.days = *days;
  if (accounts) cfg.collector.accounts = *accounts;
  if (seeds) cfg.collector.seeds = *seeds;
  cfg.validate();
  report::write_file(cfg.out_dir / "config.toml", config::to_toml(cfg));
  collector::World world;
  if (cfg.data_dir) {
    world = collector::world_from_cohort(corpus::load_cohort(*cfg.data_dir, cfg.window));
  } else {
    world = collector::synthetic_world(cfg.collector.accounts, cfg.collector.seeds, cfg.seed);
  }
  Stopwatch w;
  const auto result = collector::simulate(world, cfg.simulation_config());
  log("simulated " + report::fixed(cfg.collector.days, 1) + " days over " + std::to_string(world.accounts.size()) +
      " accounts: " + std::to_string(result.trace.size()) + " events in " + report::fixed(w.seconds(), 1) + " s");
  report::write_file(cfg.out_dir / "trace.jsonl", collector::trace_to_jsonl(result.trace, world));
  report::write_file(cfg.out_dir / "coverage.tsv", report::coverage_tsv(result.coverage, world));
  const auto& c = result.coverage;
  std::cout << "limit_violations\t" << c.limit_violations << "\nrequery_violations\t" << c.requery_violations
            << "\npriority_violations\t" << c.priority_violations << '\n';
  return c.limit_violations + c.requery_violations + c.priority_violations == 0 ? 0 : 1;
}

int cmd_report(const Globals& g) {
  const auto cfg = resolve(g);
  const auto cohort = load_input(cfg);
  const auto p = prepare(cohort, cfg);
  const auto& out = cfg.out_dir;

  report::write_file(out / "fig1_diagnoses.tsv", report::diagnosis_histogram_tsv(pipeline::diagnosis_histogram(cohort)));
  report::write_file(out / "table1_expert_keywords.tsv", report::keyword_tests_tsv(pipeline::expert_keyword_tests(p)));
  report::write_file(out / "table6_predictive_keywords.tsv",
                     report::keyword_ratios_tsv(features::top_predictive_keywords(p.own, p.labels, 30)));

  const auto s = base_signals(p, cohort, cfg);
  report::write_file(out / "table2_human_confusion.tsv", report::human_confusion_tsv(s.human_confusion, s.annotated));
  report::write_file(out / "table3_anomaly.tsv", report::anomaly_summary_tsv(s.anomaly));
  report::write_file(out / "candidates.tsv", report::candidates_tsv(s));
  report::write_file(out / "signals.csv", report::signals_csv(s, p));
  report::write_file(out / "anomaly.csv", report::anomaly_csv(s.anomaly, p));
  const auto base_rocs = selected_rocs(s);
  report::write_file(out / "roc_base.csv", report::roc_csv(base_rocs));
  report::write_file(out / "roc_base.svg", report::roc_svg(base_rocs, "Selected base signals"));

  Stopwatch w;
  const auto anova = pipeline::network_anova(p, cfg.anova_config());
  log("network ANOVA: " + std::to_string(anova.observations.size()) + " observations in " +
      report::fixed(w.seconds(), 1) + " s");
  report::write_file(out / "table4_anova.tsv", report::anova_tsv(anova.table));
  report::write_file(out / "anova_observations.tsv", report::anova_observations_tsv(anova));

  const auto m = meta_result(s, p, cfg);
  report::write_file(out / "table5_meta.tsv", report::meta_tsv(m));
  std::vector<report::NamedRoc> meta_rocs;
  for (const auto& r : m.rows) meta_rocs.emplace_back(r.classifier, r.report.roc);
  meta_rocs.emplace_back("baseline:" + m.baseline.label(), m.baseline.report.roc);
  report::write_file(out / "roc_meta.csv", report::roc_csv(meta_rocs));
  report::write_file(out / "roc_meta.svg", report::roc_svg(meta_rocs, "Meta classifiers"));
  log("report written to " + out.string());
  return 0;
}

Dataset read_features(const std::string& path, bool require_labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[1] != "label") throw DataError(path + ":1: expected id,label,<features...>");
  std::string schema = "csv:";
  for (std::size_t j = 2; j < header.size(); ++j) schema += (j > 2 ? "," : "") + header[j];
  Dataset data(schema, header.size() - 2);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    Label label = Label::not_sick;
    if (require_labels || !cells[1].empty()) {
      try {
        label = parse_label(cells[1]);
      } catch (const DataError& e) {
        throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    std::vector<double> values;
    for (std::size_t j = 2; j < cells.size(); ++j) {
      try {
        const auto v = parse_numbers(cells[j]);
        if (v.size() != 1) throw DataError("bad value");
        values.push_back(v[0]);
      } catch (const DataError&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": column " + header[j] + " is not a number");
      }
    }
    data.add(values, label, cells[0]);
  }
  return data;
}

learners::HyperValue parse_hyper(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.find_first_of(".eE") == std::string::npos && v.find(',') == std::string::npos) {
    try {
      std::size_t used = 0;
      const auto i = std::stoll(v, &used);
      if (used == v.size()) return static_cast<std::int64_t>(i);
    } catch (const std::exception&) {
    }
  }
  const auto nums = parse_numbers(v);
  if (nums.size() == 1 && v.find(',') == std::string::npos) return nums[0];
  return nums;
}

int cmd_train(const Globals& g, const std::string& features, const std::string& algorithm,
              const std::vector<std::string>& params, const std::string& model_out) {
  const auto cfg = resolve(g);
  auto spec = cfg.spec(learners::parse_kind(algorithm));
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects key=value, got '" + kv + "'");
    spec.set(kv.substr(0, eq), parse_hyper(kv.substr(eq + 1)));
  }
  learners::validate(spec);
  const auto data = read_features(features, true);
  const auto model = learners::train(spec, data);
  const fs::path path = model_out.empty() ? cfg.out_dir / "model.json" : fs::path(model_out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  learners::save_model(model, path.string());
  log("trained " + std::string(learners::to_string(spec.kind)) + " on " + std::to_string(data.size()) +
      " instances -> " + path.string());
  return 0;
}

int cmd_predict(const Globals& g, const std::string& features, const std::string& model_path) {
  const auto cfg = resolve(g);
  const auto model = learners::load_model(model_path);
  const auto data = read_features(features, false);
  std::ostringstream o;
  o << "id,p_sick\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    o << data.id(i) << ',' << report::fixed(model.predict(data.vector(i)).p_sick, 6) << '\n';
  report::write_file(cfg.out_dir / "predictions.csv", o.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluscope: individual illness detection from social-media timelines"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "TOML experiment configuration");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  auto add_data = [&](CLI::App* sub) { sub->add_option("--data", g.data_dir, "Cohort directory (default: synthetic)"); };

  std::optional<int> users;
  auto* generate = app.add_subcommand("generate", "Write a synthetic cohort as JSONL");
  generate->add_option("--users", users, "Number of seed users")->check(CLI::PositiveNumber);

  auto* preprocess = app.add_subcommand("preprocess", "Tokenize, filter and stem every user-month");
  add_data(preprocess);

  std::size_t k = 100, top = 30;
  auto* keywords = app.add_subcommand("keywords", "Expert, mined and predictive keyword tables");
  add_data(keywords);
  keywords->add_option("--k", k, "Number of mined keywords")->check(CLI::PositiveNumber);
  keywords->add_option("--top", top, "Number of predictive keywords")->check(CLI::PositiveNumber);
  keywords->add_subcommand("export", "Same as keywords")->fallthrough();

  auto* signals = app.add_subcommand("signals", "Held-out predictions of the five base signals");
  add_data(signals);

  auto* anomaly = app.add_subcommand("anomaly", "Posting-rate z-scores and the LOOCV threshold");
  add_data(anomaly);

  auto* meta = app.add_subcommand("meta", "Meta classifier");
  meta->require_subcommand(1);
  auto* meta_run = meta->add_subcommand("run", "Evaluate the meta learners by leave-one-out");
  meta_run->fallthrough();
  add_data(meta_run);

  std::vector<std::uint64_t> fisher;
  std::string ks_x, ks_y;
  auto* stats_cmd = app.add_subcommand("stats", "Statistical tests");
  add_data(stats_cmd);
  stats_cmd->add_option("--fisher", fisher, "Fisher exact test of a 2x2 table: a b c d")->expected(4);
  stats_cmd->add_option("--ks-x", ks_x, "First sample, comma separated");
  stats_cmd->add_option("--ks-y", ks_y, "Second sample, comma separated");

  std::optional<double> days;
  std::optional<std::size_t> accounts, seeds;
  auto* collect = app.add_subcommand("collect", "Collection scheduler");
  collect->require_subcommand(1);
  auto* simulate = collect->add_subcommand("simulate", "Simulate rate-limited collection");
  simulate->fallthrough();
  add_data(simulate);
  simulate->add_option("--days", days, "Simulated days")->check(CLI::NonNegativeNumber);
  simulate->add_option("--accounts", accounts, "Synthetic world size");
  simulate->add_option("--seeds", seeds, "Seed accounts in the synthetic world");

  auto* report_cmd = app.add_subcommand("report", "All tables, ROC curves and the diagnosis histogram");
  add_data(report_cmd);

  std::string features, algorithm, model_out, model_in;
  std::vector<std::string> params;
  auto* train = app.add_subcommand("train", "Train a model on a features CSV (id,label,features...)");
  train->add_option("--features", features, "Features CSV")->required();
  train->add_option("--algorithm", algorithm, "Learner kind")->required();
  train->add_option("--param", params, "Hyperparameter key=value");
  train->add_option("--model-out", model_out, "Model JSON path (default <out-dir>/model.json)");

  auto* predict = app.add_subcommand("predict", "Score a features CSV with a saved model");
  predict->add_option("--features", features, "Features CSV")->required();
  predict->add_option("--model", model_in, "Model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*generate) return cmd_generate(g, users);
    if (*preprocess) return cmd_preprocess(g);
    if (*keywords) return cmd_keywords(g, k, top);
    if (*signals) return cmd_signals(g);
    if (*anomaly) return cmd_anomaly(g);
    if (*meta_run) return cmd_meta_run(g);
    if (*stats_cmd) return cmd_stats(g, fisher, ks_x, ks_y);
    if (*simulate) return cmd_collect_simulate(g, days, accounts, seeds);
    if (*report_cmd) return cmd_report(g);
    if (*train) return cmd_train(g, features, algorithm, params, model_out);
    if (*predict) return cmd_predict(g, features, model_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << app.help();
  return 2;
}
