#include "fluscope/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include <toml.hpp>

#include "fluscope/meta.hpp"

extern char** environ;

namespace fluscope::config {

namespace {

using Kind = learners::Kind;

std::string where(std::string_view section, std::string_view key) {
  return section.empty() ? std::string(key) : std::string(section) + "." + std::string(key);
}

[[noreturn]] void type_error(std::string_view section, std::string_view key, std::string_view expected) {
  throw ConfigError("config key '" + where(section, key) + "' must be " + std::string(expected));
}

std::int64_t as_int(const toml::node& n, std::string_view s, std::string_view k) {
  if (const auto v = n.value_exact<std::int64_t>()) return *v;
  type_error(s, k, "an integer");
}

std::size_t as_size(const toml::node& n, std::string_view s, std::string_view k) {
  const auto v = as_int(n, s, k);
  if (v < 0) type_error(s, k, "non-negative");
  return static_cast<std::size_t>(v);
}

double as_double(const toml::node& n, std::string_view s, std::string_view k) {
  if (const auto v = n.value_exact<double>()) return *v;
  if (const auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
  type_error(s, k, "a number");
}

bool as_bool(const toml::node& n, std::string_view s, std::string_view k) {
  if (const auto v = n.value_exact<bool>()) return *v;
  type_error(s, k, "true or false");
}

std::string as_string(const toml::node& n, std::string_view s, std::string_view k) {
  if (const auto v = n.value_exact<std::string>()) return *v;
  type_error(s, k, "a string");
}

std::vector<std::size_t> as_sizes(const toml::node& n, std::string_view s, std::string_view k) {
  const auto* arr = n.as_array();
  if (!arr) type_error(s, k, "an array of integers");
  std::vector<std::size_t> out;
  for (const auto& e : *arr) out.push_back(as_size(e, s, k));
  return out;
}

std::vector<Kind> as_kinds(const toml::node& n, std::string_view s, std::string_view k) {
  const auto* arr = n.as_array();
  if (!arr) type_error(s, k, "an array of classifier names");
  std::vector<Kind> out;
  for (const auto& e : *arr) out.push_back(learners::parse_kind(as_string(e, s, k)));
  return out;
}

learners::HyperValue as_hyper(const toml::node& n, std::string_view s, std::string_view k) {
  if (const auto v = n.value_exact<bool>()) return *v;
  if (const auto v = n.value_exact<std::int64_t>()) return *v;
  if (const auto v = n.value_exact<double>()) return *v;
  if (const auto* arr = n.as_array()) {
    std::vector<double> out;
    for (const auto& e : *arr) out.push_back(as_double(e, s, k));
    return out;
  }
  type_error(s, k, "a boolean, number or array of numbers");
}

template <class T>
toml::array to_array(const std::vector<T>& v) {
  toml::array a;
  for (const auto& x : v) {
    if constexpr (std::is_same_v<T, Kind>) {
      a.push_back(std::string(learners::to_string(x)));
    } else {
      a.push_back(static_cast<std::int64_t>(x));
    }
  }
  return a;
}

// One configurable key: how to read it from TOML and write it back.
struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, const toml::node&)> read;
  std::function<void(const ExperimentConfig&, toml::table&)> write;
};

#define FIELD(SEC, KEY, READ, WRITE)                                                                    \
  Field {                                                                                               \
    SEC, KEY, [](ExperimentConfig& c, const toml::node& n) { READ; },                                    \
        [](const ExperimentConfig& c, toml::table& t) { WRITE; }                                         \
  }

#define SIZE_FIELD(SEC, KEY, MEMBER) \
  FIELD(SEC, KEY, c.MEMBER = as_size(n, SEC, KEY), t.insert_or_assign(KEY, static_cast<std::int64_t>(c.MEMBER)))
#define DOUBLE_FIELD(SEC, KEY, MEMBER) \
  FIELD(SEC, KEY, c.MEMBER = as_double(n, SEC, KEY), t.insert_or_assign(KEY, c.MEMBER))
#define BOOL_FIELD(SEC, KEY, MEMBER) FIELD(SEC, KEY, c.MEMBER = as_bool(n, SEC, KEY), t.insert_or_assign(KEY, c.MEMBER))
#define SIZES_FIELD(SEC, KEY, MEMBER) \
  FIELD(SEC, KEY, c.MEMBER = as_sizes(n, SEC, KEY), t.insert_or_assign(KEY, to_array(c.MEMBER)))
#define KINDS_FIELD(SEC, KEY, MEMBER) \
  FIELD(SEC, KEY, c.MEMBER = as_kinds(n, SEC, KEY), t.insert_or_assign(KEY, to_array(c.MEMBER)))

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      FIELD("", "seed", c.seed = static_cast<std::uint64_t>(as_int(n, "", "seed")),
            t.insert_or_assign("seed", static_cast<std::int64_t>(c.seed))),
      FIELD("", "out_dir", c.out_dir = as_string(n, "", "out_dir"), t.insert_or_assign("out_dir", c.out_dir.string())),
      FIELD("", "threads", c.threads = static_cast<int>(as_int(n, "", "threads")),
            t.insert_or_assign("threads", static_cast<std::int64_t>(c.threads))),

      FIELD("data", "dir", c.data_dir = as_string(n, "data", "dir"),
            if (c.data_dir) t.insert_or_assign("dir", c.data_dir->string())),
      FIELD("data", "window", c.window = StudyWindow::parse(as_string(n, "data", "window")),
            if (c.window) t.insert_or_assign("window", c.window->str())),
      FIELD("data", "stopwords", c.stopwords = as_string(n, "data", "stopwords"),
            if (c.stopwords) t.insert_or_assign("stopwords", c.stopwords->string())),
      FIELD("data", "zero_tweet_policy",
            c.zero_tweet_policy = corpus::parse_zero_tweet_policy(as_string(n, "data", "zero_tweet_policy")),
            t.insert_or_assign("zero_tweet_policy", std::string(corpus::to_string(c.zero_tweet_policy)))),

      FIELD("synthetic", "users", c.synthetic.n_seed_users = static_cast<int>(as_size(n, "synthetic", "users")),
            t.insert_or_assign("users", static_cast<std::int64_t>(c.synthetic.n_seed_users))),
      FIELD("synthetic", "window", c.synthetic.window = StudyWindow::parse(as_string(n, "synthetic", "window")),
            t.insert_or_assign("window", c.synthetic.window.str())),
      DOUBLE_FIELD("synthetic", "sick_fraction", synthetic.sick_fraction),
      DOUBLE_FIELD("synthetic", "self_report_rate", synthetic.self_report_rate),
      DOUBLE_FIELD("synthetic", "mean_monthly_tweets", synthetic.mean_monthly_tweets),
      DOUBLE_FIELD("synthetic", "user_rate_spread", synthetic.user_rate_spread),
      DOUBLE_FIELD("synthetic", "dispersion", synthetic.dispersion),
      DOUBLE_FIELD("synthetic", "sick_rate_multiplier", synthetic.sick_rate_multiplier),
      FIELD("synthetic", "background_vocabulary",
            c.synthetic.background_vocabulary = static_cast<int>(as_size(n, "synthetic", "background_vocabulary")),
            t.insert_or_assign("background_vocabulary", static_cast<std::int64_t>(c.synthetic.background_vocabulary))),
      DOUBLE_FIELD("synthetic", "zipf_exponent", synthetic.zipf_exponent),
      DOUBLE_FIELD("synthetic", "tokens_per_tweet", synthetic.tokens_per_tweet),
      DOUBLE_FIELD("synthetic", "stopword_fraction", synthetic.stopword_fraction),
      DOUBLE_FIELD("synthetic", "mean_followers", synthetic.mean_followers),
      DOUBLE_FIELD("synthetic", "mean_friends", synthetic.mean_friends),
      FIELD("synthetic", "celebrity_accounts",
            c.synthetic.celebrity_accounts = static_cast<int>(as_size(n, "synthetic", "celebrity_accounts")),
            t.insert_or_assign("celebrity_accounts", static_cast<std::int64_t>(c.synthetic.celebrity_accounts))),
      DOUBLE_FIELD("synthetic", "mean_celebrities_followed", synthetic.mean_celebrities_followed),
      DOUBLE_FIELD("synthetic", "periphery_monthly_tweets", synthetic.periphery_monthly_tweets),
      DOUBLE_FIELD("synthetic", "celebrity_monthly_tweets", synthetic.celebrity_monthly_tweets),
      DOUBLE_FIELD("synthetic", "follower_signal_scale", synthetic.follower_signal_scale),
      DOUBLE_FIELD("synthetic", "friend_signal_scale", synthetic.friend_signal_scale),

      SIZE_FIELD("signals", "folds", folds),
      SIZES_FIELD("signals", "mined_k", mined_k),
      SIZES_FIELD("signals", "network_k", network_k),
      KINDS_FIELD("signals", "classifiers", base_classifiers),
      SIZE_FIELD("signals", "vocab_max", vocab_max),
      FIELD("signals", "ig_scope", c.ig_scope = pipeline::parse_ig_scope(as_string(n, "signals", "ig_scope")),
            t.insert_or_assign("ig_scope", std::string(pipeline::to_string(c.ig_scope)))),
      BOOL_FIELD("signals", "exclude_target", exclude_target),
      BOOL_FIELD("signals", "anomaly_hard_label", anomaly_hard_label),
      DOUBLE_FIELD("signals", "human_epsilon", human_epsilon),
      DOUBLE_FIELD("signals", "threshold", threshold),

      KINDS_FIELD("meta", "classifiers", meta_classifiers),

      SIZE_FIELD("anova", "repeats", anova_repeats),
      SIZE_FIELD("anova", "folds", anova_folds),
      SIZES_FIELD("anova", "k", anova_k),
      KINDS_FIELD("anova", "classifiers", anova_classifiers),

      DOUBLE_FIELD("collector", "days", collector.days),
      SIZE_FIELD("collector", "accounts", collector.accounts),
      SIZE_FIELD("collector", "seeds", collector.seeds),
      SIZE_FIELD("collector", "capacity", collector.capacity),
      DOUBLE_FIELD("collector", "window_minutes", collector.window_minutes),
      DOUBLE_FIELD("collector", "requery_days", collector.requery_days),
      DOUBLE_FIELD("collector", "latency_seconds", collector.latency_seconds),
      SIZE_FIELD("collector", "fetch_ceiling", collector.fetch_ceiling),
  };
  return f;
}

#undef FIELD
#undef SIZE_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD
#undef SIZES_FIELD
#undef KINDS_FIELD

const std::vector<std::string> kSections = {"data", "synthetic", "signals", "meta", "anova", "collector"};

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

void apply_table(ExperimentConfig& c, const toml::table& root) {
  for (const auto& [k, node] : root) {
    const std::string key(k.str());
    if (key == "hyperparameters") {
      const auto* kinds = node.as_table();
      if (!kinds) throw ConfigError("config key 'hyperparameters' must be a table");
      for (const auto& [kind_name, params] : *kinds) {
        const auto kind = learners::parse_kind(kind_name.str());
        const auto* pt = params.as_table();
        if (!pt) throw ConfigError("config key 'hyperparameters." + std::string(kind_name.str()) + "' must be a table");
        for (const auto& [pk, pv] : *pt) {
          const auto section = "hyperparameters." + std::string(kind_name.str());
          c.hyperparameters[kind][std::string(pk.str())] = as_hyper(pv, section, pk.str());
        }
      }
      continue;
    }
    if (const auto* sub = node.as_table()) {
      if (std::find(kSections.begin(), kSections.end(), key) == kSections.end())
        throw ConfigError("unknown config section [" + key + "]");
      for (const auto& [sk, sv] : *sub) {
        const auto* f = find_field(key, sk.str());
        if (!f) throw ConfigError("unknown config key '" + where(key, sk.str()) + "'");
        f->read(c, sv);
      }
      continue;
    }
    const auto* f = find_field("", key);
    if (!f) throw ConfigError("unknown config key '" + key + "'");
    f->read(c, node);
  }
}

toml::table parse_toml(std::string_view text, const std::string& origin) {
  try {
    return toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError(msg.str());
  }
}

void apply_environment(toml::table& root, const Environment& env) {
  constexpr std::string_view kPrefix = "FLUSCOPE_";
  for (const auto& [name, raw] : env) {
    if (name.rfind(kPrefix, 0) != 0) continue;
    std::string rest = name.substr(kPrefix.size());
    std::transform(rest.begin(), rest.end(), rest.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (rest == "config") continue;
    std::string section, key = rest;
    for (const auto& s : kSections)
      if (rest.rfind(s + "_", 0) == 0) {
        section = s;
        key = rest.substr(s.size() + 1);
      }
    if (!find_field(section, key)) throw ConfigError("environment variable " + name + " names no config key");

    toml::table parsed;
    try {
      parsed = toml::parse("v = " + raw);
    } catch (const toml::parse_error&) {
      parsed = toml::table{{"v", raw}};
    }
    toml::table* target = &root;
    if (!section.empty()) {
      if (!root.contains(section)) root.insert(section, toml::table{});
      target = root[section].as_table();
      if (!target) throw ConfigError("config key '" + section + "' must be a table");
    }
    target->insert_or_assign(key, *parsed.get("v"));
  }
}

}  // namespace

Environment process_environment() {
  Environment env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const auto name = entry.substr(0, eq);
    if (name.rfind("FLUSCOPE_", 0) == 0) env[name] = entry.substr(eq + 1);
  }
  return env;
}

ExperimentConfig parse(std::string_view toml_text, const Environment& env) {
  auto root = parse_toml(toml_text, "config");
  apply_environment(root, env);
  ExperimentConfig c;
  apply_table(c, root);
  c.validate();
  return c;
}

ExperimentConfig load(const std::optional<std::filesystem::path>& file, const Environment& env) {
  std::string text;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  auto root = parse_toml(text, file ? file->string() : "config");
  apply_environment(root, env);
  ExperimentConfig c;
  apply_table(c, root);
  c.validate();
  return c;
}

std::string to_toml(const ExperimentConfig& c) {
  toml::table root;
  for (const auto& f : fields()) {
    if (f.section.empty()) {
      f.write(c, root);
      continue;
    }
    if (!root.contains(f.section)) root.insert(f.section, toml::table{});
    f.write(c, *root[f.section].as_table());
  }
  if (!c.hyperparameters.empty()) {
    toml::table hp;
    for (const auto& [kind, params] : c.hyperparameters) {
      toml::table pt;
      for (const auto& [k, v] : params) {
        std::visit(
            [&](const auto& x) {
              using T = std::decay_t<decltype(x)>;
              if constexpr (std::is_same_v<T, std::vector<double>>) {
                toml::array a;
                for (const double d : x) a.push_back(d);
                pt.insert_or_assign(k, a);
              } else {
                pt.insert_or_assign(k, x);
              }
            },
            v);
      }
      hp.insert_or_assign(std::string(learners::to_string(kind)), pt);
    }
    root.insert_or_assign("hyperparameters", hp);
  }
  std::ostringstream out;
  out << toml::toml_formatter(root, toml::toml_formatter::default_flags & ~toml::format_flags::indentation);
  out << '\n';
  return out.str();
}

void ExperimentConfig::validate() const {
  if (threads < 0) throw ConfigError("config key 'threads' must be non-negative");
  if (folds < 2) throw ConfigError("config key 'signals.folds' must be at least 2");
  if (anova_folds < 2) throw ConfigError("config key 'anova.folds' must be at least 2");
  if (anova_repeats < 1) throw ConfigError("config key 'anova.repeats' must be at least 1");
  for (const auto* ks : {&mined_k, &network_k, &anova_k}) {
    if (ks->empty()) throw ConfigError("keyword size lists must not be empty");
    for (const auto k : *ks)
      if (k == 0) throw ConfigError("keyword sizes must be positive");
  }
  if (base_classifiers.empty()) throw ConfigError("config key 'signals.classifiers' must not be empty");
  if (anova_classifiers.empty()) throw ConfigError("config key 'anova.classifiers' must not be empty");
  if (meta_classifiers.empty()) throw ConfigError("config key 'meta.classifiers' must not be empty");
  const auto& allowed = meta::meta_kinds();
  for (const auto k : meta_classifiers)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(std::string(learners::to_string(k)) + " is not a meta learner");
  if (!(human_epsilon >= 0.0 && human_epsilon <= 0.5))
    throw ConfigError("config key 'signals.human_epsilon' must lie in [0, 0.5]");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("config key 'signals.threshold' must lie in [0, 1]");
  if (vocab_max == 0) throw ConfigError("config key 'signals.vocab_max' must be positive");
  synthetic_config().validate();
  if (!(collector.days >= 0)) throw ConfigError("config key 'collector.days' must be non-negative");
  if (collector.seeds > collector.accounts) throw ConfigError("config key 'collector.seeds' exceeds the account count");
  if (!(collector.latency_seconds >= 0)) throw ConfigError("config key 'collector.latency_seconds' must be non-negative");
  simulation_config().scheduler.validate();
  for (const auto& [kind, params] : hyperparameters) learners::validate(spec(kind));
}

learners::AlgorithmSpec ExperimentConfig::spec(Kind kind) const {
  auto s = pipeline::seeded_spec(kind, seed);
  if (const auto it = hyperparameters.find(kind); it != hyperparameters.end())
    for (const auto& [k, v] : it->second) s.set(k, v);
  return s;
}

pipeline::SignalConfig ExperimentConfig::signal_config() const {
  pipeline::SignalConfig s;
  s.seed = seed;
  s.folds = folds;
  s.mined_k = mined_k;
  s.network_k = network_k;
  for (const auto k : base_classifiers) s.classifiers.push_back(spec(k));
  s.vocab_max = vocab_max;
  s.ig_scope = ig_scope;
  s.exclude_target = exclude_target;
  s.anomaly_hard_label = anomaly_hard_label;
  s.human_epsilon = human_epsilon;
  s.threshold = threshold;
  return s;
}

pipeline::AnovaConfig ExperimentConfig::anova_config() const {
  pipeline::AnovaConfig a;
  a.seed = seed;
  a.repeats = anova_repeats;
  a.folds = anova_folds;
  a.k = anova_k;
  for (const auto k : anova_classifiers) a.classifiers.push_back(spec(k));
  a.vocab_max = vocab_max;
  return a;
}

collector::SimulationConfig ExperimentConfig::simulation_config() const {
  collector::SimulationConfig s;
  s.duration = collector.days * collector::kDay;
  for (std::size_t e = 0; e < collector::kEndpointCount; ++e)
    s.scheduler.limits[e] = {static_cast<collector::Endpoint>(e), collector.capacity, collector.window_minutes * 60.0};
  s.scheduler.tweet_requery_interval = collector.requery_days * collector::kDay;
  s.latency = collector.latency_seconds;
  s.fetch_ceiling = collector.fetch_ceiling;
  s.seed = seed;
  return s;
}

corpus::SyntheticConfig ExperimentConfig::synthetic_config() const {
  auto s = synthetic;
  s.rng_seed = seed;
  return s;
}

}  // namespace fluscope::config
