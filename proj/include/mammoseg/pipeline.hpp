#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mammoseg/components.hpp"
#include "mammoseg/distance.hpp"
#include "mammoseg/error.hpp"
#include "mammoseg/histogram.hpp"
#include "mammoseg/measurement.hpp"
#include "mammoseg/median.hpp"
#include "mammoseg/morphology.hpp"
#include "mammoseg/pgm.hpp"
#include "mammoseg/raster.hpp"
#include "mammoseg/report.hpp"
#include "mammoseg/watershed.hpp"

namespace mammoseg {

inline const std::vector<std::string>& pipeline_step_names() {
  static const std::vector<std::string> names{"median",      "otsu",      "morph-open",
                                              "morph-close", "watershed", "components"};
  return names;
}

inline bool is_pipeline_step(std::string_view name) {
  const auto& n = pipeline_step_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

/// Defaults for every step; per-call parameters override them.
struct PipelineConfig {
  int median_window = 3;
  std::string se = "square3";
  int connectivity = 8;
  double h_min = 1.0;
  std::int64_t min_area = 5;
  bool invert = false;
  /// median -> otsu -> opening -> closing -> watershed split -> components.
  std::vector<std::string> steps = pipeline_step_names();
};

using Snapshot = std::variant<GrayImage, BinaryMask, LabelMap>;

inline std::string_view snapshot_kind(const Snapshot& s) {
  switch (s.index()) {
    case 0: return "gray";
    case 1: return "mask";
    default: return "labels";
  }
}

/// PGM rendering: masks as 0/255, labels clamped to 255.
inline GrayImage snapshot_image(const Snapshot& s) {
  if (const auto* g = std::get_if<GrayImage>(&s)) return *g;
  if (const auto* m = std::get_if<BinaryMask>(&s)) return to_gray(*m);
  const auto& labels = std::get<LabelMap>(s);
  GrayImage out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::clamp(labels[i], 0, 255));
  }
  return out;
}

using StepParams = std::map<std::string, std::string>;

struct StepOutcome {
  std::string step;
  /// Scalar outputs of the step, e.g. {"threshold", 97}.
  std::map<std::string, double> outputs;
};

struct PipelineState {
  GrayImage original;
  std::vector<std::pair<std::string, Snapshot>> stages;
  std::optional<int> threshold;
  std::optional<Components> components;
  PipelineProvenance provenance;

  explicit PipelineState(GrayImage image) : original(std::move(image)) {}

  const Snapshot* find_stage(std::string_view name) const {
    for (const auto& [n, s] : stages)
      if (n == name) return &s;
    return nullptr;
  }

  /// Most recent grayscale stage, or the original.
  const GrayImage& current_image() const {
    for (auto it = stages.rbegin(); it != stages.rend(); ++it)
      if (const auto* g = std::get_if<GrayImage>(&it->second)) return *g;
    return original;
  }

  /// Most recent binary stage, if any.
  const BinaryMask* current_mask() const {
    for (auto it = stages.rbegin(); it != stages.rend(); ++it)
      if (const auto* m = std::get_if<BinaryMask>(&it->second)) return m;
    return nullptr;
  }

  /// Most recent label stage, provided it is newer than the current mask.
  const LabelMap* current_labels() const {
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
      if (std::holds_alternative<BinaryMask>(it->second)) return nullptr;
      if (const auto* l = std::get_if<LabelMap>(&it->second)) return l;
    }
    return nullptr;
  }
};

namespace detail {

class ParamReader {
 public:
  ParamReader(const std::string& step, const StepParams& params) : step_(step), params_(params) {}

  std::string text(const std::string& key, std::string fallback) {
    used_.push_back(key);
    const auto it = params_.find(key);
    return it == params_.end() ? std::move(fallback) : it->second;
  }

  long long integer(const std::string& key, long long fallback) {
    used_.push_back(key);
    const auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    long long v = 0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(key, "expected an integer");
    return v;
  }

  double real(const std::string& key, double fallback) {
    used_.push_back(key);
    const auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) fail(key, "expected a number");
      return v;
    } catch (const std::logic_error&) {
      fail(key, "expected a number");
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    used_.push_back(key);
    const auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    fail(key, "expected true or false");
  }

  void reject_unknown() const {
    for (const auto& [k, v] : params_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) fail(k, "unknown parameter");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw Error(ErrorCode::InvalidParams, step_ + "." + key + ": " + what, key);
  }

 private:
  const std::string& step_;
  const StepParams& params_;
  std::vector<std::string> used_;
};

inline std::string number_text(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline const BinaryMask& require_mask(const PipelineState& state, const std::string& step) {
  const BinaryMask* m = state.current_mask();
  if (!m) {
    throw Error(ErrorCode::PrerequisiteMissing, step + " needs a binary mask (run otsu first)");
  }
  return *m;
}

}  // namespace detail

/// Runs one named step against the current state, replacing any earlier
/// snapshot of the same name and appending the new one.
inline StepOutcome apply_step(PipelineState& state, const std::string& step,
                              const StepParams& params = {}, const PipelineConfig& config = {}) {
  if (!is_pipeline_step(step)) {
    throw Error(ErrorCode::InvalidParams, "unknown pipeline step '" + step + "'", "step");
  }
  detail::ParamReader in(step, params);
  StepOutcome outcome{step, {}};
  PipelineStep record{step, {}};
  std::optional<Snapshot> snapshot;
  std::optional<Components> components;

  if (step == "median") {
    const auto window = in.integer("window", config.median_window);
    in.reject_unknown();
    if (window < 1 || window > 99) in.fail("window", "must be in [1,99]");
    if (window % 2 == 0) in.fail("window", "must be odd");
    snapshot = median_filter(state.current_image(), static_cast<int>(window));
    record.params["window"] = std::to_string(window);
  } else if (step == "otsu") {
    const bool invert = in.boolean("invert", config.invert);
    in.reject_unknown();
    const int t = otsu_threshold(histogram(state.current_image()));
    state.threshold = t;
    snapshot = binarize(state.current_image(), t, invert);
    outcome.outputs["threshold"] = t;
    record.params["invert"] = invert ? "true" : "false";
    record.params["threshold"] = std::to_string(t);
  } else if (step == "morph-open" || step == "morph-close") {
    const auto se_name = in.text("se", config.se);
    in.reject_unknown();
    std::optional<StructuringElement> se;
    try {
      se = StructuringElement::from_name(se_name);
    } catch (const Error&) {
      in.fail("se", "unknown structuring element");
    }
    const auto& mask = detail::require_mask(state, step);
    snapshot = step == "morph-open" ? opening(mask, *se) : closing(mask, *se);
    record.params["se"] = se_name;
  } else if (step == "watershed") {
    const double h = in.real("h", config.h_min);
    const auto conn = in.integer("connectivity", config.connectivity);
    in.reject_unknown();
    if (!(h >= 0.0) || !std::isfinite(h)) in.fail("h", "must be non-negative");
    if (conn != 4 && conn != 8) in.fail("connectivity", "must be 4 or 8");
    const auto& mask = detail::require_mask(state, step);
    LabelMap labels(mask.width(), mask.height(), 0);
    if (count_foreground(mask) > 0) {
      const ScalarField field = negated(distance_transform(mask));
      const LabelMap markers = find_markers(field, mask, h, static_cast<int>(conn));
      labels = watershed(field, markers, mask, static_cast<int>(conn));
    }
    std::int32_t k = 0;
    for (auto v : labels) k = std::max(k, v);
    outcome.outputs["regions"] = k;
    snapshot = std::move(labels);
    record.params["h"] = detail::number_text(h);
    record.params["connectivity"] = std::to_string(conn);
  } else {  // components
    const auto conn = in.integer("connectivity", config.connectivity);
    const auto min_area = in.integer("min_area", config.min_area);
    in.reject_unknown();
    if (conn != 4 && conn != 8) in.fail("connectivity", "must be 4 or 8");
    if (min_area < 1) in.fail("min_area", "must be positive");
    if (const LabelMap* split = state.current_labels()) {
      components = Components{*split, region_stats(*split)};
    } else {
      components = connected_components(detail::require_mask(state, step), static_cast<int>(conn));
    }
    outcome.outputs["count"] = components->count();
    const auto chosen = select_tumor_component(components->regions, min_area);
    outcome.outputs["selected_label"] = chosen.value_or(0);
    outcome.outputs["selected_area"] =
        chosen ? static_cast<double>(components->regions[static_cast<std::size_t>(*chosen - 1)].area)
               : 0.0;
    snapshot = components->labels;
    record.params["connectivity"] = std::to_string(conn);
    record.params["min_area"] = std::to_string(min_area);
  }

  std::erase_if(state.stages, [&](const auto& s) { return s.first == step; });
  state.stages.emplace_back(step, std::move(*snapshot));
  if (components) state.components = std::move(components);
  else if (step != "components") state.components.reset();
  state.provenance.push_back(std::move(record));
  return outcome;
}

/// Runs `config.steps` in order on a fresh state.
inline PipelineState run_pipeline(const GrayImage& image, const PipelineConfig& config = {}) {
  PipelineState state(image);
  for (const auto& step : config.steps) apply_step(state, step, {}, config);
  return state;
}

/// Components for automatic measurement: the components stage when present,
/// otherwise the labelling of the most recent mask.
inline Components measurement_components(const PipelineState& state, int connectivity = 8) {
  if (state.components) return *state.components;
  if (const LabelMap* split = state.current_labels()) return {*split, region_stats(*split)};
  return connected_components(detail::require_mask(state, "measurement"), connectivity);
}

}  // namespace mammoseg
