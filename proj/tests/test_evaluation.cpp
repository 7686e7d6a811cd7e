#include <doctest.h>

#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "har/errors.hpp"
#include "har/evaluation.hpp"

using namespace har;

namespace {

// Predicts the truth, and records what it was shown.
FoldRunner perfect_runner() {
  return [](const FoldContext& ctx) {
    FoldOutcome out;
    for (auto i : ctx.fold.test) out.predictions.push_back(ctx.dataset.labels[i]);
    out.stats = fit_normalization(ctx.dataset, ctx.fold.train);
    return out;
  };
}

TrainingConfig quick(std::size_t epochs = 1) {
  TrainingConfig tc;
  tc.epochs = epochs;
  tc.batch_size = 16;
  return tc;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("session folds partition the windows") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermal, 3, 5, 6, 1);
  const auto folds = loso_split(ds);
  REQUIRE(folds.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& f = folds[k];
    CHECK(f.name == "session_" + std::to_string(k + 1));
    CHECK(f.held_out_session == static_cast<int>(k + 1));
    CHECK(f.train.size() + f.test.size() == ds.size());
    std::set<std::size_t> seen(f.train.begin(), f.train.end());
    for (auto i : f.test) {
      CHECK(ds.session_ids[i] == f.held_out_session);
      CHECK(seen.insert(i).second);
    }
    for (auto i : f.train) CHECK(ds.session_ids[i] != f.held_out_session);
  }
}

TEST_CASE("subject-session folds") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermal, 2, 3, 4, 1);
  const auto folds = loso_split(ds, FoldUnit::SubjectSession);
  REQUIRE(folds.size() == 6);
  CHECK(folds.front().name == "S01/session_1");
  CHECK(folds.back().name == "S02/session_3");
  for (const auto& f : folds) CHECK(f.test.size() == 4);
  CHECK(parse_fold_unit(fold_unit_name(FoldUnit::SubjectSession)) == FoldUnit::SubjectSession);
  CHECK_THROWS_AS(parse_fold_unit("subject"), Error);
}

TEST_CASE("a single session cannot be split") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermal, 2, 1, 4, 1);
  try {
    loso_split(ds);
    FAIL("expected a split error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Split);
  }
}

TEST_CASE("perfect predictions summarise to one with zero spread") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermal, 2, 5, 14, 1);
  const auto cv = run_cv(ds, perfect_runner(), 7);
  REQUIRE(cv.folds.size() == 5);
  CHECK(cv.summary == CvSummary{1.0, 0.0, 1.0, 0.0});
  CHECK(format_percent(cv.summary.mean_accuracy, cv.summary.std_accuracy) == "100.00 ± 0.00");
}

TEST_CASE("summary uses population spread") {
  std::vector<FoldResult> folds(2);
  folds[0].accuracy = 0.8;
  folds[1].accuracy = 1.0;
  folds[0].macro_f1 = 0.5;
  folds[1].macro_f1 = 0.5;
  const auto s = summarize(folds);
  CHECK(s.mean_accuracy == doctest::Approx(0.9));
  CHECK(s.std_accuracy == doctest::Approx(0.1));
  CHECK(s.std_f1 == 0.0);
  CHECK(format_percent(0.9054, 0.0499) == "90.54 ± 4.99");
}

TEST_CASE("normalization is fitted on the training windows of each fold") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermal, 2, 3, 5, 2);
  const auto cv = run_cv(ds, ModelConfig{.subset = Subset::NoThermal}, quick(), 3);
  const auto folds = loso_split(ds);
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const auto want = fit_normalization(ds, folds[k].train);
    CHECK(cv.folds[k].stats == want);
  }
  CHECK(cv.folds[0].stats != cv.folds[1].stats);
}

TEST_CASE("cross-validation is deterministic and independent of job count") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermalNoAccGyro, 2, 3, 8, 3);
  const ModelConfig mc{.subset = Subset::NoThermalNoAccGyro};
  CvOptions one, two;
  two.jobs = 2;
  const auto a = run_cv(ds, mc, quick(2), 11, one);
  const auto b = run_cv(ds, mc, quick(2), 11, two);
  REQUIRE(a.folds.size() == b.folds.size());
  for (std::size_t k = 0; k < a.folds.size(); ++k) {
    CHECK(format_fold_result(a.folds[k]) == format_fold_result(b.folds[k]));
    CHECK(a.folds[k].confusion == b.folds[k].confusion);
  }
  CHECK(a.summary == b.summary);
  CHECK(fold_seed(11, 0) != fold_seed(11, 1));
  CHECK(fold_seed(11, 0) != fold_seed(12, 0));
}

TEST_CASE("runner errors propagate") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermal, 1, 3, 3, 1);
  FoldRunner broken = [](const FoldContext&) -> FoldOutcome { throw Error(ErrorKind::Numeric, "boom"); };
  CHECK_THROWS_AS(run_cv(ds, broken, 1), Error);
  FoldRunner short_runner = [](const FoldContext&) { return FoldOutcome{}; };
  CHECK_THROWS_AS(run_cv(ds, short_runner, 1), Error);
}

TEST_CASE("nearest centroid separates offset classes") {
  const auto ds = fixtures::toy_dataset(Subset::NoThermal, 2, 3, 28, 5, 14, 3.0);
  const auto cv = run_cv(ds, nearest_centroid_runner(), 1);
  CHECK(cv.summary.mean_accuracy > 0.9);
}

TEST_CASE("leakage canary: corrupting held-out windows only moves predictions") {
  auto ds = fixtures::toy_dataset(Subset::NoThermalNoAccGyro, 2, 3, 10, 6);
  const auto folds = loso_split(ds);
  const auto runner = cnn_fold_runner(ModelConfig{.subset = Subset::NoThermalNoAccGyro}, quick(2));
  for (const auto& make : {runner, nearest_centroid_runner()}) {
    auto clean_ds = ds;
    const auto clean = make(FoldContext{clean_ds, folds[0], 0, 17});
    auto dirty_ds = ds;
    for (auto i : folds[0].test)
      for (auto& v : dirty_ds.window(i)) v = -50.0f * v + 1000.0f;
    const auto dirty = make(FoldContext{dirty_ds, folds[0], 0, 17});
    CHECK(clean.training == dirty.training);
    CHECK(clean.stats == dirty.stats);
    CHECK(clean.predictions != dirty.predictions);
  }
}

TEST_CASE("ablation covers six cells and leaves two undefined") {
  const auto ds = fixtures::toy_dataset(Subset::All, 1, 2, 4, 7);
  const auto report = run_ablation(ds, ModelConfig{}, quick(1), 5);
  REQUIRE(report.cells.size() == 8);
  std::size_t defined = 0;
  for (const auto& c : report.cells) defined += c.result.has_value();
  CHECK(defined == 6);
  CHECK_FALSE(report.cell(FusionMethod::FeatureFusion, Subset::NoThermal).result.has_value());
  CHECK_FALSE(report.cell(FusionMethod::FeatureFusion, Subset::NoThermalNoAccGyro).result.has_value());
  CHECK(report.cell(FusionMethod::FeatureFusion, Subset::ThermalOnly).result.has_value());

  const auto table = report.to_table();
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  const auto records = report.to_records();
  CHECK(std::count(records.begin(), records.end(), '\n') == 8);
  CHECK(records.find("method=feature-fusion subset=NO_THERMAL mean_acc=-") != std::string::npos);

  const auto again = run_ablation(ds, ModelConfig{}, quick(1), 5);
  CHECK(again.to_records() == records);
  CHECK(again.to_table() == table);
}

}
