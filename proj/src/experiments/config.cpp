#include "galu/experiments/config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <thread>

#include "galu/error.hpp"

namespace galu::experiments {

namespace {

template <typename Enum, std::size_t N>
Enum lookup(std::string_view name, const std::pair<std::string_view, Enum> (&table)[N],
            const char* what) {
  for (const auto& [key, value] : table)
    if (key == name) return value;
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [key, v] : table)
    if (v == value) return key;
  return "?";
}

constexpr std::pair<std::string_view, Experiment> kExperiments[] = {
    {"memorize", Experiment::memorize},       {"underparam", Experiment::underparam},
    {"clustered", Experiment::clustered},     {"linsep", Experiment::linsep},
    {"parity", Experiment::parity},           {"kernel-check", Experiment::kernel_check},
    {"theory-check", Experiment::theory_check}};
constexpr std::pair<std::string_view, Activation> kActivations[] = {
    {"galu", Activation::galu}, {"relu", Activation::relu}, {"both", Activation::both}};
constexpr std::pair<std::string_view, Mode> kModes[] = {{"closed-form", Mode::closed_form},
                                                        {"iterative", Mode::iterative}};
constexpr std::pair<std::string_view, MarginKind> kMarginKinds[] = {
    {"absolute", MarginKind::absolute}, {"cosine", MarginKind::cosine}};

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("cannot parse number '" + std::string(text) + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
    std::string_view item = text.substr(start, stop - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw ConfigError("empty entry in list '" + std::string(text) + "'");
    out.push_back(parse_number<T>(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(Experiment e) { return name_of(e, kExperiments); }
Experiment experiment_from_string(std::string_view name) {
  return lookup(name, kExperiments, "experiment");
}
std::string_view to_string(Activation a) { return name_of(a, kActivations); }
Activation activation_from_string(std::string_view name) {
  return lookup(name, kActivations, "activation");
}
std::string_view to_string(Mode m) { return name_of(m, kModes); }
Mode mode_from_string(std::string_view name) { return lookup(name, kModes, "mode"); }

std::vector<Index> parse_index_list(std::string_view text) { return parse_list<Index>(text); }
std::vector<double> parse_double_list(std::string_view text) { return parse_list<double>(text); }

void ExperimentConfig::validate() const {
  auto positive_list = [](const std::vector<Index>& values, const char* name, bool allow_empty) {
    if (values.empty() && !allow_empty) throw ConfigError(std::string(name) + " must be non-empty");
    for (Index v : values)
      if (v < 1) throw ConfigError(std::string(name) + " entries must be positive");
  };
  positive_list(m, "m", false);
  if (experiment == Experiment::clustered) {
    // d = 0 selects the dimension from the clustered-data lemma.
    if (d.empty()) throw ConfigError("d must be non-empty");
    for (Index v : d)
      if (v < 0) throw ConfigError("d entries must be non-negative");
  } else {
    positive_list(d, "d", false);
  }
  positive_list(k, "k", true);
  for (double r : ratios)
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("ratios must be positive");
  if (trials < 1) throw ConfigError("trials must be positive");
  if (label_draws < 1) throw ConfigError("label_draws must be positive");
  if (!(success_mse > 0.0)) throw ConfigError("success_mse must be positive");
  if (k_max < 0) throw ConfigError("k_max must be non-negative");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (clusters < 1) throw ConfigError("clusters must be positive");
  if (m_test < 1) throw ConfigError("m_test must be positive");
  if (!(margin >= 0.0)) throw ConfigError("margin must be non-negative");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (out_dir.empty()) throw ConfigError("out must be a directory path");
  try {
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig default_config(Experiment experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.threads = std::max<Index>(1, static_cast<Index>(std::thread::hardware_concurrency()));
  cfg.optimizer.method = Method::adam;
  cfg.optimizer.step_size = 1e-3;
  cfg.optimizer.batch_size = 128;
  cfg.optimizer.iterations = 20000;
  cfg.optimizer.log_every = 100;
  switch (experiment) {
    case Experiment::memorize:
      cfg.m = {1000};
      cfg.d = {20, 50, 100};
      cfg.trials = 5;
      break;
    case Experiment::underparam:
      cfg.m = {4096};
      cfg.d = {64};
      cfg.ratios = {0.0625, 0.125, 0.1875, 0.25, 0.375, 0.5, 0.5625, 0.75, 1.0};
      cfg.trials = 10;
      cfg.label_draws = 5;
      break;
    case Experiment::clustered:
      cfg.m = {40};
      cfg.d = {0};  // resolved to the lemma dimension
      cfg.m_test = 10;
      cfg.delta = 0.01;
      cfg.trials = 1;
      break;
    case Experiment::linsep:
    case Experiment::parity:
      cfg.m = {50000};
      cfg.d = {100};
      cfg.k = {32};
      cfg.m_test = 10000;
      cfg.trials = 1;
      cfg.activation = Activation::both;
      cfg.mode = Mode::iterative;
      cfg.loss = Loss::hinge;
      break;
    case Experiment::kernel_check:
    case Experiment::theory_check:
      cfg.trials = 1;
      break;
  }
  return cfg;
}

ExperimentConfig apply_json(ExperimentConfig cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "m",      "d",           "k",         "ratios",   "seed",
      "trials",     "label_draws", "activation", "mode",   "optimizer", "loss",
      "success_mse", "k_max", "delta",       "clusters",  "m_test",   "margin",
      "margin_kind", "threads", "memory_budget", "negate_indicator", "out"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  try {
    auto index_list = [](const nlohmann::json& v) {
      if (v.is_array()) return v.get<std::vector<Index>>();
      return std::vector<Index>{v.get<Index>()};
    };
    if (doc.contains("experiment"))
      cfg.experiment = experiment_from_string(doc["experiment"].get<std::string>());
    if (doc.contains("m")) cfg.m = index_list(doc["m"]);
    if (doc.contains("d")) cfg.d = index_list(doc["d"]);
    if (doc.contains("k")) cfg.k = index_list(doc["k"]);
    if (doc.contains("ratios")) cfg.ratios = doc["ratios"].get<std::vector<double>>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("trials")) cfg.trials = doc["trials"].get<Index>();
    if (doc.contains("label_draws")) cfg.label_draws = doc["label_draws"].get<Index>();
    if (doc.contains("activation"))
      cfg.activation = activation_from_string(doc["activation"].get<std::string>());
    if (doc.contains("mode")) cfg.mode = mode_from_string(doc["mode"].get<std::string>());
    if (doc.contains("loss")) cfg.loss = loss_from_string(doc["loss"].get<std::string>());
    if (doc.contains("success_mse")) cfg.success_mse = doc["success_mse"].get<double>();
    if (doc.contains("k_max")) cfg.k_max = doc["k_max"].get<Index>();
    if (doc.contains("delta")) cfg.delta = doc["delta"].get<double>();
    if (doc.contains("clusters")) cfg.clusters = doc["clusters"].get<Index>();
    if (doc.contains("m_test")) cfg.m_test = doc["m_test"].get<Index>();
    if (doc.contains("margin")) cfg.margin = doc["margin"].get<double>();
    if (doc.contains("margin_kind"))
      cfg.margin_kind = lookup(doc["margin_kind"].get<std::string>(), kMarginKinds, "margin kind");
    if (doc.contains("threads")) cfg.threads = doc["threads"].get<Index>();
    if (doc.contains("memory_budget")) cfg.memory_budget = doc["memory_budget"].get<std::size_t>();
    if (doc.contains("negate_indicator")) cfg.negate_indicator = doc["negate_indicator"].get<bool>();
    if (doc.contains("out")) cfg.out_dir = doc["out"].get<std::string>();
    if (doc.contains("optimizer")) {
      const auto& o = doc["optimizer"];
      if (!o.is_object()) throw ConfigError("optimizer must be an object");
      static const std::set<std::string> opt_keys = {"method", "step_size", "batch_size",
                                                     "iterations", "adam_beta1", "adam_beta2",
                                                     "adam_eps", "seed", "train_alpha",
                                                     "log_every"};
      for (const auto& [key, value] : o.items())
        if (!opt_keys.count(key)) throw ConfigError("unknown optimizer key '" + key + "'");
      auto& opt = cfg.optimizer;
      if (o.contains("method")) opt.method = method_from_string(o["method"].get<std::string>());
      if (o.contains("step_size")) opt.step_size = o["step_size"].get<double>();
      if (o.contains("batch_size")) opt.batch_size = o["batch_size"].get<Index>();
      if (o.contains("iterations")) opt.iterations = o["iterations"].get<Index>();
      if (o.contains("adam_beta1")) opt.adam_beta1 = o["adam_beta1"].get<double>();
      if (o.contains("adam_beta2")) opt.adam_beta2 = o["adam_beta2"].get<double>();
      if (o.contains("adam_eps")) opt.adam_eps = o["adam_eps"].get<double>();
      if (o.contains("seed")) opt.seed = o["seed"].get<std::uint64_t>();
      if (o.contains("train_alpha")) opt.train_alpha = o["train_alpha"].get<bool>();
      if (o.contains("log_every")) opt.log_every = o["log_every"].get<Index>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = std::string(to_string(cfg.experiment));
  j["m"] = cfg.m;
  j["d"] = cfg.d;
  j["k"] = cfg.k;
  j["ratios"] = cfg.ratios;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["label_draws"] = cfg.label_draws;
  j["activation"] = std::string(to_string(cfg.activation));
  j["mode"] = std::string(to_string(cfg.mode));
  j["loss"] = std::string(to_string(cfg.loss));
  j["success_mse"] = cfg.success_mse;
  j["k_max"] = cfg.k_max;
  j["delta"] = cfg.delta;
  j["clusters"] = cfg.clusters;
  j["m_test"] = cfg.m_test;
  j["margin"] = cfg.margin;
  j["margin_kind"] = std::string(name_of(cfg.margin_kind, kMarginKinds));
  j["threads"] = cfg.threads;
  j["memory_budget"] = cfg.memory_budget;
  j["negate_indicator"] = cfg.negate_indicator;
  j["out"] = cfg.out_dir;
  const auto& o = cfg.optimizer;
  j["optimizer"] = {{"method", std::string(to_string(o.method))},
                    {"step_size", o.step_size},
                    {"batch_size", o.batch_size},
                    {"iterations", o.iterations},
                    {"adam_beta1", o.adam_beta1},
                    {"adam_beta2", o.adam_beta2},
                    {"adam_eps", o.adam_eps},
                    {"seed", o.seed},
                    {"train_alpha", o.train_alpha},
                    {"log_every", o.log_every}};
  return j;
}

}  // namespace galu::experiments
