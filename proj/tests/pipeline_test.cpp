#include <gtest/gtest.h>

#include "mammoseg/phantom.hpp"
#include "mammoseg/pipeline.hpp"
#include "test_support.hpp"

using namespace mammoseg;

namespace {

GrayImage noisy_phantom() {
  DiskPhantom p;
  p.salt_pepper = 0.02;
  p.seed = 3;
  return make_disk_phantom(p);
}

}  // namespace

TEST(Pipeline, DefaultOrderOnPhantom) {
  const auto state = run_pipeline(noisy_phantom());
  ASSERT_EQ(state.stages.size(), 6u);
  EXPECT_EQ(state.stages[0].first, "median");
  EXPECT_EQ(state.stages[5].first, "components");
  ASSERT_EQ(state.provenance.size(), 6u);
  EXPECT_EQ(state.provenance[1].name, "otsu");
  ASSERT_TRUE(state.threshold);
  EXPECT_GE(*state.threshold, 20);
  EXPECT_LT(*state.threshold, 200);
  ASSERT_TRUE(state.components);

  const auto d = auto_diameter(*state.components);
  ASSERT_TRUE(d.label);
  EXPECT_NEAR(d.pixels, 60.0, 2.0);
}

TEST(Pipeline, StepsNeedTheirInputs) {
  PipelineState s(GrayImage(8, 8, 10));
  for (const char* step : {"morph-open", "morph-close", "watershed", "components"}) {
    try {
      apply_step(s, step);
      FAIL() << step;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::PrerequisiteMissing) << step;
    }
  }
  EXPECT_TRUE(s.stages.empty());
  EXPECT_THROW(measurement_components(s), Error);
}

TEST(Pipeline, ParameterValidation) {
  PipelineState s(GrayImage(8, 8, 10));
  const auto code = [&](const std::string& step, StepParams p) {
    try {
      apply_step(s, step, p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code("median", {{"window", "4"}}), ErrorCode::InvalidParams);
  EXPECT_EQ(code("median", {{"window", "three"}}), ErrorCode::InvalidParams);
  EXPECT_EQ(code("median", {{"size", "3"}}), ErrorCode::InvalidParams);
  EXPECT_EQ(code("otsu", {{"invert", "maybe"}}), ErrorCode::InvalidParams);
  EXPECT_EQ(code("sharpen", {}), ErrorCode::InvalidParams);
  apply_step(s, "otsu");
  EXPECT_EQ(code("morph-open", {{"se", "blob"}}), ErrorCode::InvalidParams);
  EXPECT_EQ(code("watershed", {{"h", "-1"}}), ErrorCode::InvalidParams);
  EXPECT_EQ(code("components", {{"connectivity", "6"}}), ErrorCode::InvalidParams);
}

TEST(Pipeline, OtsuReportsThresholdOfCurrentImage) {
  const auto img = noisy_phantom();
  PipelineState s(img);
  apply_step(s, "median", {{"window", "5"}});
  const auto out = apply_step(s, "otsu");
  const int expected = otsu_threshold(histogram(median_filter(img, 5)));
  EXPECT_EQ(out.outputs.at("threshold"), expected);
  EXPECT_EQ(std::get<BinaryMask>(s.stages.back().second), binarize(median_filter(img, 5), expected));
}

TEST(Pipeline, RerunReplacesStage) {
  PipelineState s(noisy_phantom());
  apply_step(s, "median");
  apply_step(s, "otsu");
  apply_step(s, "median", {{"window", "1"}});
  ASSERT_EQ(s.stages.size(), 2u);
  EXPECT_EQ(s.stages[0].first, "otsu");
  EXPECT_EQ(s.stages[1].first, "median");
  EXPECT_EQ(s.provenance.size(), 3u);
}

TEST(Pipeline, WatershedSplitsTouchingDisks) {
  const auto fg = support::union_of(support::disk_mask(60, 40, 22, 20, 9), support::disk_mask(60, 40, 37, 20, 9));
  GrayImage img(60, 40, 10);
  for (std::size_t i = 0; i < img.size(); ++i)
    if (fg[i]) img[i] = 220;
  PipelineState s(img);
  apply_step(s, "otsu");
  EXPECT_EQ(apply_step(s, "watershed").outputs.at("regions"), 2);
  EXPECT_EQ(apply_step(s, "components").outputs.at("count"), 2);
}

TEST(Pipeline, EmptyMaskIsHealthy) {
  PipelineState s(GrayImage(16, 16, 0));
  apply_step(s, "otsu");
  EXPECT_EQ(apply_step(s, "watershed").outputs.at("regions"), 0);
  EXPECT_EQ(apply_step(s, "components").outputs.at("selected_label"), 0);
  EXPECT_FALSE(auto_diameter(measurement_components(s)).label);
}

TEST(Snapshot, PgmRendering) {
  BinaryMask m(2, 1);
  m(0, 0) = 1;
  EXPECT_EQ(snapshot_image(Snapshot{m}), GrayImage(2, 1, std::vector<std::uint8_t>{255, 0}));
  LabelMap l(3, 1, 0);
  l(1, 0) = 2;
  l(2, 0) = 400;
  EXPECT_EQ(snapshot_image(Snapshot{l}), GrayImage(3, 1, std::vector<std::uint8_t>{0, 2, 255}));
}
