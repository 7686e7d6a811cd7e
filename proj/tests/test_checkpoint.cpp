#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "checks.hpp"
#include "fixtures.hpp"
#include "har/checkpoint.hpp"
#include "har/errors.hpp"
#include "har/training.hpp"

using namespace har;
namespace fs = std::filesystem;

namespace {

CheckpointMeta meta_for(std::size_t channels) {
  CheckpointMeta meta;
  meta.seed = 99;
  meta.holdout_session = 3;
  meta.stats = NormalizationStats::identity(channels);
  meta.stats.mean[0] = 1.25;
  meta.stats.stddev[1] = 3.5;
  return meta;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("round trip keeps predictions on 100 windows") {
  for (auto method : {FusionMethod::DataFusion, FusionMethod::FeatureFusion}) {
    CAPTURE(method_name(method));
    ModelConfig cfg;
    cfg.method = method;
    cfg.subset = Subset::ThermalOnly;
    FusionModel model(cfg, 5);
    const auto meta = meta_for(model.input_channels());
    const auto bytes = serialize_checkpoint(model, meta);
    auto loaded = parse_checkpoint(bytes);
    CHECK(loaded.model.config() == cfg);
    CHECK(loaded.meta.seed == 99);
    CHECK(loaded.meta.holdout_session == 3);
    CHECK(loaded.meta.stats == meta.stats);
    // stored weights are 32-bit, so a second trip is exact
    CHECK(serialize_checkpoint(loaded.model, loaded.meta) == bytes);

    oracle::Gen gen(6);
    const auto x = checks::random_tensor(gen, {100, 20, model.input_channels()});
    const auto before = predict_batch(model, x);
    const auto after = predict_batch(loaded.model, x);
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(before[i].label == after[i].label);
      for (std::size_t k = 0; k < 14; ++k)
        CHECK(before[i].probabilities[k] == doctest::Approx(after[i].probabilities[k]).epsilon(1e-5));
    }
  }
}

TEST_CASE("file round trip") {
  const auto dir = fs::temp_directory_path() / "har_ckpt_test";
  fs::create_directories(dir);
  auto model = build_data_fusion(Subset::NoThermal, 8);
  CheckpointMeta meta;
  meta.stats = NormalizationStats::identity(23);
  save_checkpoint(dir / "m.ckpt", model, meta);
  auto loaded = load_checkpoint(dir / "m.ckpt");
  CHECK_FALSE(loaded.meta.holdout_session.has_value());
  CHECK(loaded.model.input_channels() == 23);
  fs::remove_all(dir);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), Error);
}

TEST_CASE("corrupt checkpoints are format errors") {
  auto model = build_data_fusion(Subset::NoThermalNoAccGyro, 1);
  CheckpointMeta meta;
  meta.stats = NormalizationStats::identity(17);
  const auto good = serialize_checkpoint(model, meta);
  auto kind_of = [](const std::string& bytes) {
    try {
      parse_checkpoint(bytes);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;  // no error at all
  };
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(kind_of(bad_magic) == ErrorKind::Format);
  CHECK(kind_of(good.substr(0, good.size() - 3)) == ErrorKind::Format);
  CHECK(kind_of(good + "xx") == ErrorKind::Format);
  CHECK(kind_of("") == ErrorKind::Format);
}

TEST_CASE("a 23-channel model rejects 791-channel windows") {
  auto model = build_data_fusion(Subset::NoThermal, 1);
  CheckpointMeta meta;
  meta.stats = NormalizationStats::identity(23);
  auto loaded = parse_checkpoint(serialize_checkpoint(model, meta));
  auto ds = fixtures::toy_dataset(Subset::All, 1, 1, 2, 1);
  std::vector<std::size_t> idx = {0, 1};
  WindowBatcher batcher(ds, Subset::All, NormalizationStats::identity(791));
  try {
    loaded.model.forward(batcher.batch(idx));
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Shape);
  }
}

}
