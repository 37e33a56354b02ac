#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "galu/datagen.hpp"
#include "galu/error.hpp"
#include "galu/experiments/checks.hpp"
#include "galu/experiments/commands.hpp"
#include "galu/experiments/config.hpp"
#include "galu/experiments/pool.hpp"
#include "galu/experiments/results.hpp"
#include "galu/experiments/serialization.hpp"
#include "galu/feature_map.hpp"
#include "galu/rng.hpp"

using namespace galu;
using namespace galu::experiments;

namespace {

std::map<std::string, std::vector<ResultRow>> by_metric(const std::vector<ResultRow>& rows) {
  std::map<std::string, std::vector<ResultRow>> out;
  for (const ResultRow& r : rows) out[r.metric].push_back(r);
  return out;
}

ExperimentConfig small(Experiment e) {
  ExperimentConfig cfg = default_config(e);
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST(Config, DefaultsPerExperiment) {
  const ExperimentConfig mem = default_config(Experiment::memorize);
  EXPECT_EQ(mem.m, std::vector<Index>{1000});
  EXPECT_EQ(mem.d, (std::vector<Index>{20, 50, 100}));
  EXPECT_EQ(mem.trials, 5);
  EXPECT_EQ(mem.mode, Mode::closed_form);
  EXPECT_DOUBLE_EQ(mem.success_mse, 0.01);
  const ExperimentConfig lin = default_config(Experiment::linsep);
  EXPECT_EQ(lin.optimizer.iterations, 20000);
  EXPECT_EQ(lin.optimizer.batch_size, 128);
  EXPECT_DOUBLE_EQ(lin.optimizer.step_size, 1e-3);
  EXPECT_EQ(lin.k, std::vector<Index>{32});
  EXPECT_EQ(lin.mode, Mode::iterative);
  const ExperimentConfig under = default_config(Experiment::underparam);
  EXPECT_GE(under.trials * under.label_draws, 50);
  for (Experiment e : {Experiment::memorize, Experiment::underparam, Experiment::clustered,
                       Experiment::linsep, Experiment::parity, Experiment::kernel_check,
                       Experiment::theory_check})
    EXPECT_NO_THROW(default_config(e).validate()) << to_string(e);
}

TEST(Config, JsonOverlayAndRoundTrip) {
  ExperimentConfig cfg = default_config(Experiment::memorize);
  const nlohmann::json doc = {{"m", {100, 200}}, {"d", 10}, {"seed", 7},
                              {"optimizer", {{"iterations", 50}, {"method", "sgd"}}},
                              {"activation", "both"}};
  cfg = apply_json(cfg, doc);
  EXPECT_EQ(cfg.m, (std::vector<Index>{100, 200}));
  EXPECT_EQ(cfg.d, std::vector<Index>{10});
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.optimizer.iterations, 50);
  EXPECT_EQ(cfg.optimizer.method, Method::sgd);
  EXPECT_EQ(cfg.activation, Activation::both);
  const ExperimentConfig back = apply_json(default_config(Experiment::linsep), to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
}

TEST(Config, RejectsBadInput) {
  const ExperimentConfig base = default_config(Experiment::memorize);
  EXPECT_THROW(apply_json(base, {{"bogus", 1}}), ConfigError);
  EXPECT_THROW(apply_json(base, {{"optimizer", {{"lr", 1}}}}), ConfigError);
  EXPECT_THROW(apply_json(base, {{"m", "many"}}), ConfigError);
  EXPECT_THROW(apply_json(base, {{"activation", "tanh"}}), ConfigError);
  ExperimentConfig cfg = base;
  cfg.success_mse = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = base;
  cfg.d = {};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = base;
  cfg.optimizer.adam_beta2 = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, ListParsing) {
  EXPECT_EQ(parse_index_list("8"), std::vector<Index>{8});
  EXPECT_EQ(parse_index_list("4, 8,16"), (std::vector<Index>{4, 8, 16}));
  EXPECT_EQ(parse_double_list("0.5,1"), (std::vector<double>{0.5, 1.0}));
  EXPECT_THROW(parse_index_list("4,,8"), ConfigError);
  EXPECT_THROW(parse_index_list("x"), ConfigError);
}

TEST(Results, CsvFormat) {
  std::vector<ResultRow> rows = {{"b", 1, 2, 3, "galu", "mse", 0.1, 9, 0.5},
                                 {"a", 1, 2, 3, "galu", "mse", 1.0 / 3.0, 9, 0.25}};
  sort_canonical(rows);
  EXPECT_EQ(rows[0].experiment, "a");
  std::ostringstream out;
  write_csv(out, rows);
  std::istringstream in(out.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, kCsvHeader);
  EXPECT_EQ(first, "a,1,2,3,galu,mse,0.33333333333333331,9,0.25");
  rows[0].value = std::nan("");
  std::ostringstream bad;
  EXPECT_THROW(write_csv(bad, rows), DomainError);
}

TEST(Results, SummaryAndTally) {
  const std::vector<CheckRow> checks = {{"p", 0.1, 0.2, true, ""}, {"q", 3.0, 1.0, false, ""}};
  EXPECT_FALSE(all_passed(checks));
  std::ostringstream out;
  write_summary(out, checks);
  EXPECT_NE(out.str().find("PASS p"), std::string::npos);
  EXPECT_NE(out.str().find("FAIL q"), std::string::npos);
}

TEST(Serialization, RoundTripReproducesOutputs) {
  const GateBank gates = GateBank::gaussian(6, 9, 1);
  const SavedModel model{gates, NaturalParams::random(6, 9, 2), true, "galu"};
  const Matrix xs = gen_gaussian(50, 6, 3).xs;
  const SavedModel back = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
  EXPECT_LE((back.predict(xs) - model.predict(xs)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(back.gates.gates, gates.gates);

  const SavedModel relu{gates, NaturalParams{gates.gates, Vector::Ones(9)}, false, "relu"};
  const auto path = std::filesystem::temp_directory_path() / "galu_model_roundtrip.json";
  save_model(relu, path.string());
  const SavedModel loaded = load_model(path.string());
  EXPECT_EQ(loaded.activation, "relu");
  EXPECT_LE((loaded.predict(xs) - relu.predict(xs)).cwiseAbs().maxCoeff(), 1e-15);
  std::filesystem::remove(path);
}

TEST(Serialization, RowMajorLayoutAndErrors) {
  Matrix g(2, 3);
  g << 1, 2, 3, 4, 5, 6;
  const SavedModel model{GateBank{g, GateSource::gaussian, 5}, NaturalParams{g, Vector::Ones(3)}, true, "galu"};
  const nlohmann::json j = model_to_json(model);
  EXPECT_EQ(j["gates"].get<std::vector<double>>(), (std::vector<double>{1, 2, 3, 4, 5, 6}));
  nlohmann::json broken = j;
  broken["alpha"] = {1.0};
  EXPECT_THROW(model_from_json(broken), DimensionError);
  broken = j;
  broken.erase("weights");
  EXPECT_THROW(model_from_json(broken), DomainError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), DomainError);
}

TEST(Pool, CoversAllIndicesAndRethrows) {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](Index i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](Index i) { if (i == 7) throw DomainError("x"); }), DomainError);
}

TEST(TracePlateau, Detection) {
  TrainTrace flat, falling;
  for (int i = 0; i < 100; ++i) {
    flat.records.push_back({i, 1.0, 0.0, {}, {}});
    falling.records.push_back({i, 100.0 - i, 0.0, {}, {}});
  }
  EXPECT_TRUE(trace_plateaued(flat));
  EXPECT_FALSE(trace_plateaued(falling));
}

TEST(Memorize, MinimalWidthNearRatio) {
  ExperimentConfig cfg = small(Experiment::memorize);
  cfg.m = {200};
  cfg.d = {10, 25};
  cfg.trials = 2;
  const CommandOutput out = cmd_memorize(cfg);
  const auto rows = by_metric(out.rows);
  ASSERT_EQ(rows.at("min_k").size(), 4u);
  for (const ResultRow& r : rows.at("min_k")) {
    const Index ratio = (r.m + r.d - 1) / r.d;
    EXPECT_LE(std::abs(static_cast<Index>(r.value) - ratio), 2) << "d=" << r.d;
    EXPECT_EQ(r.k, static_cast<Index>(r.value));
  }
  EXPECT_FALSE(rows.contains("search_failed"));
  for (const ResultRow& r : rows.at("probe_mse"))
    for (const ResultRow& best : rows.at("min_k"))
      if (r.seed == best.seed && r.k < best.k) {
        EXPECT_GE(r.value, cfg.success_mse);
      }
}

TEST(Memorize, FewExamplesNeedEveryExampleGated) {
  // With m <= d every example must see at least one open gate; the minimal k is
  // the first prefix of the bank that covers all examples.
  ExperimentConfig cfg = small(Experiment::memorize);
  cfg.m = {8};
  cfg.d = {20};
  cfg.trials = 3;
  cfg.k_max = 16;
  const CommandOutput out = cmd_memorize(cfg);
  for (const ResultRow& r : by_metric(out.rows).at("min_k")) {
    const LabeledSet data = gen_gaussian(8, 20, derive_seed(r.seed, 1));
    const GateBank bank = GateBank::gaussian(20, 16, derive_seed(r.seed, 2));
    const Matrix open = gate_pattern(data.xs, bank);
    Index cover = 0;
    for (Index k = 1; k <= 16 && cover == 0; ++k)
      if ((open.leftCols(k).rowwise().maxCoeff().array() > 0.0).all()) cover = k;
    EXPECT_EQ(static_cast<Index>(r.value), cover);
  }
}

TEST(Memorize, SearchFailureReported) {
  ExperimentConfig cfg = small(Experiment::memorize);
  cfg.m = {100};
  cfg.d = {5};
  cfg.trials = 1;
  cfg.k_max = 5;
  const CommandOutput out = cmd_memorize(cfg);
  EXPECT_TRUE(by_metric(out.rows).contains("search_failed"));
  EXPECT_FALSE(out.notes.empty());
}

TEST(Memorize, ReluSkippedInClosedForm) {
  ExperimentConfig cfg = small(Experiment::memorize);
  cfg.m = {40};
  cfg.d = {10};
  cfg.trials = 1;
  cfg.activation = Activation::relu;
  const CommandOutput out = cmd_memorize(cfg);
  EXPECT_TRUE(out.rows.empty());
  EXPECT_FALSE(out.notes.empty());
}

TEST(Memorize, IterativeModeLogsPlateau) {
  ExperimentConfig cfg = small(Experiment::memorize);
  cfg.m = {30};
  cfg.d = {10};
  cfg.trials = 1;
  cfg.mode = Mode::iterative;
  cfg.activation = Activation::both;
  cfg.optimizer.iterations = 3000;
  cfg.optimizer.step_size = 1e-2;
  cfg.k_max = 12;
  const CommandOutput out = cmd_memorize(cfg);
  const auto rows = by_metric(out.rows);
  EXPECT_TRUE(rows.contains("probe_plateaued"));
  EXPECT_EQ(rows.at("min_k").size() + (rows.contains("search_failed") ? rows.at("search_failed").size() : 0), 2u);
}

TEST(Memorize, CapacityErrorPropagates) {
  ExperimentConfig cfg = small(Experiment::memorize);
  cfg.m = {100};
  cfg.d = {10};
  cfg.trials = 1;
  cfg.memory_budget = 1024;
  EXPECT_THROW(cmd_memorize(cfg), CapacityError);
}

TEST(Underparam, RankLawAndAggregates) {
  ExperimentConfig cfg = small(Experiment::underparam);
  cfg.m = {400};
  cfg.d = {20};
  cfg.ratios = {0.25, 0.5, 1.0};
  cfg.trials = 5;
  cfg.label_draws = 4;
  const CommandOutput out = cmd_underparam(cfg);
  const auto rows = by_metric(out.rows);
  ASSERT_EQ(rows.at("mse").size(), 15u);
  for (const ResultRow& mean : rows.at("mse_mean")) {
    const double ratio = double(mean.k * mean.d) / double(mean.m);
    if (ratio >= 1.0) {
      EXPECT_LE(mean.value, 1e-3);
    } else {
      EXPECT_NEAR(mean.value, 1.0 - ratio, 0.05) << "ratio " << ratio;
    }
  }
  for (const ResultRow& r : rows.at("rank_law")) EXPECT_GE(r.value, 0.0);
}

TEST(Underparam, TrainedReluBetweenLowerBoundAndGalu) {
  ExperimentConfig cfg = small(Experiment::underparam);
  cfg.m = {200};
  cfg.d = {10};
  cfg.ratios = {0.5};
  cfg.trials = 1;
  cfg.activation = Activation::both;
  cfg.optimizer.iterations = 10000;
  cfg.optimizer.step_size = 1e-2;
  cfg.optimizer.batch_size = 200;
  const CommandOutput out = cmd_underparam(cfg);
  double galu = -1.0, relu = -1.0;
  for (const ResultRow& r : out.rows)
    if (r.metric == "mse_mean") (r.activation == "galu" ? galu : relu) = r.value;
  ASSERT_GE(galu, 0.0);
  ASSERT_GE(relu, 0.0);
  EXPECT_GE(relu, 1.0 - 2.0 * 0.5 - 0.1);
  EXPECT_LE(relu, galu);
}

TEST(Clustered, ThresholdWidthMemorizesAndGeneralizesInSpan) {
  const ClusteredOutcome o = run_clustered(1, 4, 60, 0.01, 16, 8);
  EXPECT_EQ(o.k, o.threshold_k);
  EXPECT_EQ(o.threshold_k, cluster_width(4, o.mu, 0.01));
  EXPECT_LE(o.train_mse, 1e-8);
  EXPECT_LE(o.test_error, 1e-6);
  EXPECT_EQ(o.rank, 16);
}

TEST(Clustered, SingleGateCannotMemorize) {
  const ClusteredOutcome o = run_clustered(2, 10, 20, 0.01, 40, 5, 1);
  EXPECT_GT(o.train_mse, 0.01);
}

TEST(Clustered, CommandRows) {
  ExperimentConfig cfg = small(Experiment::clustered);
  cfg.clusters = 4;
  cfg.d = {60};
  cfg.m = {16};
  cfg.m_test = 4;
  const auto rows = by_metric(cmd_clustered(cfg).rows);
  EXPECT_LE(rows.at("train_mse").at(0).value, 1e-8);
  EXPECT_LE(rows.at("test_error").at(0).value, 1e-6);
  EXPECT_EQ(rows.at("clusters").at(0).value, 4.0);
}

TEST(Classification, SmallLinsepLearns) {
  ExperimentConfig cfg = small(Experiment::linsep);
  cfg.m = {2000};
  cfg.d = {10};
  cfg.k = {8};
  cfg.m_test = 1000;
  cfg.optimizer.iterations = 3000;
  cfg.optimizer.step_size = 1e-2;
  const CommandOutput out = cmd_linsep(cfg);
  for (const ResultRow& r : by_metric(out.rows).at("test_accuracy")) EXPECT_GE(r.value, 0.95) << r.activation;
  EXPECT_EQ(out.models.size(), 2u);
}

TEST(Classification, LowDimensionalParityIsLearnable) {
  ExperimentConfig cfg = small(Experiment::parity);
  cfg.m = {2000};
  cfg.d = {2};
  cfg.k = {32};
  cfg.m_test = 1000;
  cfg.optimizer.iterations = 5000;
  cfg.optimizer.step_size = 1e-2;
  const CommandOutput out = cmd_parity(cfg);
  for (const ResultRow& r : by_metric(out.rows).at("test_accuracy")) EXPECT_GE(r.value, 0.95) << r.activation;
}

TEST(Checks, KernelSpecialValuesExact) {
  const CheckRow row = check_kappa_special_values();
  EXPECT_TRUE(row.passed);
  EXPECT_LE(row.measured, 1e-12);
}

TEST(Checks, Theorem4RankLaw) {
  const CheckRow row = check_theorem4(3);
  EXPECT_TRUE(row.passed) << row.measured;
}

TEST(Checks, KhatriRaoAndSigmaEigen) {
  EXPECT_TRUE(check_khatri_rao(4).passed);
  EXPECT_TRUE(check_sigma_vs_eigen(5).passed);
}

TEST(Checks, NormTransfer) { EXPECT_TRUE(check_norm_transfer(6).passed); }

TEST(Commands, ExitStatusReflectsChecks) {
  CommandOutput ok;
  ok.checks = {{"a", 0, 1, true, ""}};
  EXPECT_EQ(exit_status(ok), 0);
  ok.checks.push_back({"b", 2, 1, false, ""});
  EXPECT_EQ(exit_status(ok), 2);
  EXPECT_EQ(exit_status(CommandOutput{}), 0);
}

TEST(Commands, ThreadCountDoesNotChangeResults) {
  ExperimentConfig cfg = small(Experiment::underparam);
  cfg.m = {200};
  cfg.d = {10};
  cfg.ratios = {0.25, 0.5};
  cfg.trials = 3;
  const CommandOutput one = cmd_underparam(cfg);
  cfg.threads = 3;
  const CommandOutput three = cmd_underparam(cfg);
  ASSERT_EQ(one.rows.size(), three.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].metric, three.rows[i].metric);
    EXPECT_EQ(one.rows[i].k, three.rows[i].k);
    EXPECT_EQ(one.rows[i].seed, three.rows[i].seed);
    EXPECT_EQ(one.rows[i].value, three.rows[i].value);
  }
}

TEST(Commands, WriteOutputsCreatesFiles) {
  ExperimentConfig cfg = small(Experiment::clustered);
  cfg.clusters = 2;
  cfg.d = {20};
  cfg.m = {6};
  cfg.m_test = 2;
  cfg.out_dir = (std::filesystem::temp_directory_path() / "galu_write_outputs").string();
  std::filesystem::remove_all(cfg.out_dir);
  write_outputs(cfg, cmd_clustered(cfg));
  for (const char* f : {"results.csv", "config.json", "summary.txt"})
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / f)) << f;
  std::filesystem::remove_all(cfg.out_dir);
}
