#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mammoseg/error.hpp"
#include "mammoseg/measurement.hpp"
#include "mammoseg/pgm.hpp"
#include "mammoseg/pipeline.hpp"
#include "mammoseg/report.hpp"

namespace mammoseg::service {

/// Error surfaced to API clients as { error_code, message, field? }.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message, std::string field = {})
      : std::runtime_error(message),
        status_(status),
        code_(std::move(code)),
        field_(std::move(field)) {}

  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int status_;
  std::string code_;
  std::string field_;
};

/// HTTP status for a library error.
inline int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::BadHeader:
    case ErrorCode::TruncatedRaster:
    case ErrorCode::InvalidCalibration:
    case ErrorCode::NegativeDiameter:
    case ErrorCode::NonFinite:
    case ErrorCode::NonPositiveDiameter:
      return 422;
    case ErrorCode::PrerequisiteMissing:
      return 409;
    default:
      return 400;
  }
}

inline ServiceError from_library(const Error& e) {
  return ServiceError(status_for(e.code()), std::string(to_string(e.code())), e.what(), e.field());
}

inline nlohmann::json patient_to_json(const PatientRecord& p) {
  return {{"patient_id", p.patient_id},
          {"name", p.name ? nlohmann::json(*p.name) : nlohmann::json(nullptr)},
          {"age_years", p.age_years ? nlohmann::json(*p.age_years) : nlohmann::json(nullptr)}};
}

inline nlohmann::json measurement_to_json(const DiameterMeasurement& m) {
  return {{"pixels", m.pixels},
          {"cm", m.cm},
          {"method", std::string(to_string(m.method))},
          {"component_area_px", m.component_area_px}};
}

struct CaseSummary {
  std::string case_id;
  std::string patient_id;
  bool has_image = false;
  std::vector<std::string> stages;
  bool has_measurement = false;
  bool has_report = false;
};

/// One patient study: the uploaded slide, its pipeline snapshots, and the
/// measurement/report derived from them.
struct Case {
  std::string case_id;
  PatientRecord patient;
  std::optional<PipelineState> pipeline;
  std::optional<Calibration> calibration;
  std::optional<DiameterMeasurement> measurement;
  std::optional<TestReport> report;

  mutable std::shared_mutex mutex;
};

struct MeasurementRequest {
  MeasureMethod mode = MeasureMethod::Auto;
  std::optional<PixelLine> line;
  double cm_per_pixel = 0.0;
  std::optional<std::int64_t> min_area;
};

/// Thread-safe case registry with optional on-disk persistence. Each case is
/// a directory holding original.pgm, one file per stage and case.json.
class CaseStore {
 public:
  explicit CaseStore(std::optional<std::filesystem::path> data_dir = std::nullopt,
                     PipelineConfig config = {})
      : data_dir_(std::move(data_dir)), config_(std::move(config)), rng_(seeded_engine()) {
    if (data_dir_) {
      std::filesystem::create_directories(*data_dir_);
      load_all();
    }
  }

  const PipelineConfig& config() const noexcept { return config_; }

  std::string create_case(const PatientRecord& patient) {
    try {
      patient.validate();
    } catch (const Error& e) {
      throw ServiceError(400, "ValidationError", e.what(), e.field());
    }
    auto c = std::make_shared<Case>();
    c->patient = patient;
    std::unique_lock lock(map_mutex_);
    do {
      c->case_id = new_id();
    } while (cases_.count(c->case_id));
    persist(*c, true);
    cases_.emplace(c->case_id, c);
    return c->case_id;
  }

  std::vector<CaseSummary> list_cases() const {
    std::vector<std::shared_ptr<Case>> all;
    {
      std::shared_lock lock(map_mutex_);
      for (const auto& [id, c] : cases_) all.push_back(c);
    }
    std::vector<CaseSummary> out;
    for (const auto& c : all) {
      std::shared_lock lock(c->mutex);
      CaseSummary s{c->case_id, c->patient.patient_id, c->pipeline.has_value(), {},
                    c->measurement.has_value(), c->report.has_value()};
      if (c->pipeline)
        for (const auto& [name, snap] : c->pipeline->stages) s.stages.push_back(name);
      out.push_back(std::move(s));
    }
    return out;
  }

  PatientRecord patient(const std::string& id) const {
    auto c = find(id);
    std::shared_lock lock(c->mutex);
    return c->patient;
  }

  /// Stores the slide and resets every derived artefact.
  std::pair<int, int> upload_image(const std::string& id, std::string_view pgm_bytes) {
    auto c = find(id);
    GrayImage image;
    try {
      image = read_pgm(pgm_bytes);
    } catch (const Error& e) {
      throw from_library(e);
    }
    std::unique_lock lock(c->mutex);
    c->pipeline.emplace(std::move(image));
    c->calibration.reset();
    c->measurement.reset();
    c->report.reset();
    persist(*c, true);
    return {c->pipeline->original.width(), c->pipeline->original.height()};
  }

  StepOutcome run_step(const std::string& id, const std::string& step, const StepParams& params) {
    auto c = find(id);
    std::unique_lock lock(c->mutex);
    if (!c->pipeline) {
      throw ServiceError(409, "PrerequisiteMissing", step + " needs an uploaded image", "image");
    }
    if (!is_pipeline_step(step)) {
      throw ServiceError(404, "NotFound", "unknown pipeline step '" + step + "'", "step");
    }
    // Work on a copy so a failed step leaves the committed state untouched.
    PipelineState next = *c->pipeline;
    StepOutcome outcome;
    try {
      outcome = apply_step(next, step, params, config_);
    } catch (const Error& e) {
      throw from_library(e);
    }
    c->pipeline = std::move(next);
    persist(*c, false, step);
    return outcome;
  }

  /// Runs the default step order (median, otsu, opening, closing, watershed,
  /// components) as one atomic commit.
  std::vector<StepOutcome> run_default_pipeline(const std::string& id) {
    auto c = find(id);
    std::unique_lock lock(c->mutex);
    if (!c->pipeline) {
      throw ServiceError(409, "PrerequisiteMissing", "pipeline needs an uploaded image", "image");
    }
    PipelineState next(c->pipeline->original);
    std::vector<StepOutcome> outcomes;
    try {
      for (const auto& step : config_.steps) outcomes.push_back(apply_step(next, step, {}, config_));
    } catch (const Error& e) {
      throw from_library(e);
    }
    c->pipeline = std::move(next);
    persist(*c, true);
    return outcomes;
  }

  std::vector<std::pair<std::string, std::string>> stage_list(const std::string& id) const {
    auto c = find(id);
    std::shared_lock lock(c->mutex);
    std::vector<std::pair<std::string, std::string>> out;
    if (!c->pipeline) return out;
    out.emplace_back("original", "gray");
    for (const auto& [name, snap] : c->pipeline->stages)
      out.emplace_back(name, std::string(snapshot_kind(snap)));
    return out;
  }

  /// PGM bytes of a stage; "original" names the uploaded slide.
  std::string stage_pgm(const std::string& id, const std::string& name) const {
    auto c = find(id);
    std::shared_lock lock(c->mutex);
    if (!c->pipeline) throw ServiceError(404, "NotFound", "case has no image", "stage");
    if (name == "original") return write_pgm(c->pipeline->original);
    const Snapshot* s = c->pipeline->find_stage(name);
    if (!s) throw ServiceError(404, "NotFound", "no stage named '" + name + "'", "stage");
    return write_pgm(snapshot_image(*s));
  }

  /// Histogram of a grayscale stage; defaults to the current working image.
  Histogram stage_histogram(const std::string& id, const std::optional<std::string>& stage) const {
    auto c = find(id);
    std::shared_lock lock(c->mutex);
    if (!c->pipeline) {
      throw ServiceError(409, "PrerequisiteMissing", "case has no image", "image");
    }
    if (!stage) return histogram(c->pipeline->current_image());
    if (*stage == "original") return histogram(c->pipeline->original);
    const Snapshot* s = c->pipeline->find_stage(*stage);
    if (!s) throw ServiceError(404, "NotFound", "no stage named '" + *stage + "'", "stage");
    return histogram(snapshot_image(*s));
  }

  DiameterMeasurement set_measurement(const std::string& id, const MeasurementRequest& req) {
    auto c = find(id);
    std::optional<Calibration> cal;
    try {
      cal.emplace(req.cm_per_pixel);
    } catch (const Error& e) {
      throw from_library(e);
    }
    std::unique_lock lock(c->mutex);
    DiameterMeasurement m;
    try {
      if (req.mode == MeasureMethod::Manual) {
        if (!req.line) throw ServiceError(422, "MissingLine", "manual mode needs a line", "line");
        if (c->pipeline &&
            !req.line->fits(c->pipeline->original.width(), c->pipeline->original.height())) {
          throw ServiceError(422, "InvalidParams", "line endpoints lie outside the image", "line");
        }
        m = measure_manual(*req.line, *cal);
      } else {
        if (!c->pipeline) {
          throw ServiceError(409, "PrerequisiteMissing", "auto measurement needs an image",
                             "image");
        }
        const auto min_area = req.min_area.value_or(config_.min_area);
        if (min_area < 1) throw ServiceError(400, "InvalidParams", "min_area must be positive", "min_area");
        m = measure_auto(measurement_components(*c->pipeline, config_.connectivity), *cal,
                         min_area);
      }
    } catch (const Error& e) {
      throw from_library(e);
    }
    c->calibration = cal;
    c->measurement = m;
    persist(*c, false);
    return m;
  }

  std::optional<DiameterMeasurement> measurement(const std::string& id) const {
    auto c = find(id);
    std::shared_lock lock(c->mutex);
    return c->measurement;
  }

  /// generate=true builds and stores a fresh report; otherwise returns the
  /// stored one.
  TestReport report(const std::string& id, bool generate,
                    std::optional<std::string> fixed_timestamp = std::nullopt) {
    auto c = find(id);
    if (!generate) {
      std::shared_lock lock(c->mutex);
      if (!c->report) throw ServiceError(404, "NoReportYet", "no report has been generated");
      return *c->report;
    }
    std::unique_lock lock(c->mutex);
    if (!c->measurement || !c->calibration) {
      throw ServiceError(409, "PrerequisiteMissing", "report needs a measurement", "measurement");
    }
    PipelineProvenance provenance = c->pipeline ? c->pipeline->provenance : PipelineProvenance{};
    provenance.push_back(measurement_step(*c->measurement, *c->calibration));
    try {
      c->report = generate_report(c->patient, *c->measurement, *c->calibration,
                                  std::move(provenance), std::move(fixed_timestamp));
    } catch (const Error& e) {
      throw from_library(e);
    }
    persist(*c, false);
    return *c->report;
  }

  static PipelineStep measurement_step(const DiameterMeasurement& m, const Calibration& cal) {
    std::ostringstream os;
    os.precision(17);
    os << cal.cm_per_pixel();
    return {"measure", {{"method", std::string(to_string(m.method))}, {"cm_per_pixel", os.str()}}};
  }

 private:
  std::shared_ptr<Case> find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    const auto it = cases_.find(id);
    if (it == cases_.end()) throw ServiceError(404, "NotFound", "no case '" + id + "'", "case_id");
    return it->second;
  }

  static std::mt19937_64 seeded_engine() {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }

  std::string new_id() {
    std::lock_guard lock(rng_mutex_);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id;
    for (int word = 0; word < 2; ++word) {
      std::uint64_t v = rng_();
      for (int i = 0; i < 16; ++i) {
        id.push_back(kHex[v & 0xF]);
        v >>= 4;
      }
    }
    return id;
  }

  // ---- persistence -------------------------------------------------------

  static std::string stage_file(const std::string& name, const Snapshot& s) {
    return "stage_" + name + (std::holds_alternative<LabelMap>(s) ? ".labels" : ".pgm");
  }

  static std::string encode_labels(const LabelMap& labels) {
    std::string out = "LABELS\n" + std::to_string(labels.width()) + " " +
                      std::to_string(labels.height()) + "\n";
    for (auto v : labels) {
      const auto u = static_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
    }
    return out;
  }

  static LabelMap decode_labels(const std::string& bytes) {
    std::istringstream is(bytes);
    std::string magic;
    int w = 0;
    int h = 0;
    is >> magic >> w >> h;
    is.get();
    if (magic != "LABELS" || w <= 0 || h <= 0) {
      throw Error(ErrorCode::BadHeader, "corrupt label file");
    }
    const auto start = static_cast<std::size_t>(is.tellg());
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() < start + 4 * n) throw Error(ErrorCode::TruncatedRaster, "short label file");
    LabelMap out(w, h, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b)
        u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[start + 4 * i + b]))
             << (8 * b);
      out[i] = static_cast<std::int32_t>(u);
    }
    return out;
  }

  static void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    write_file_bytes(tmp.string(), bytes);
    std::filesystem::rename(tmp, path);
  }

  nlohmann::json case_document(const Case& c) const {
    nlohmann::json doc = {{"case_id", c.case_id}, {"patient", patient_to_json(c.patient)}};
    nlohmann::json stages = nlohmann::json::array();
    nlohmann::json provenance = nlohmann::json::array();
    if (c.pipeline) {
      for (const auto& [name, snap] : c.pipeline->stages) {
        stages.push_back({{"name", name},
                          {"kind", std::string(snapshot_kind(snap))},
                          {"file", stage_file(name, snap)}});
      }
      for (const auto& s : c.pipeline->provenance)
        provenance.push_back({{"name", s.name}, {"params", s.params}});
    }
    doc["has_image"] = c.pipeline.has_value();
    doc["stages"] = std::move(stages);
    doc["provenance"] = std::move(provenance);
    doc["threshold"] = c.pipeline && c.pipeline->threshold ? nlohmann::json(*c.pipeline->threshold)
                                                           : nlohmann::json(nullptr);
    doc["components_current"] = c.pipeline && c.pipeline->components.has_value();
    doc["cm_per_pixel"] =
        c.calibration ? nlohmann::json(c.calibration->cm_per_pixel()) : nlohmann::json(nullptr);
    doc["measurement"] = c.measurement ? measurement_to_json(*c.measurement) : nlohmann::json(nullptr);
    doc["report"] = c.report ? report_to_json(*c.report) : nlohmann::json(nullptr);
    return doc;
  }

  /// Commits case state. `all_stages` rewrites the image files; otherwise
  /// only `changed_stage` (if any) and case.json are written.
  void persist(const Case& c, bool all_stages, const std::string& changed_stage = {}) const {
    if (!data_dir_) return;
    namespace fs = std::filesystem;
    const fs::path dir = *data_dir_ / c.case_id;
    fs::create_directories(dir);
    if (c.pipeline) {
      if (all_stages) {
        for (const auto& entry : fs::directory_iterator(dir)) {
          if (entry.path().filename().string().starts_with("stage_")) fs::remove(entry.path());
        }
        write_atomic(dir / "original.pgm", write_pgm(c.pipeline->original));
      }
      for (const auto& [name, snap] : c.pipeline->stages) {
        if (!all_stages && name != changed_stage) continue;
        const auto file = dir / stage_file(name, snap);
        if (const auto* labels = std::get_if<LabelMap>(&snap)) {
          write_atomic(file, encode_labels(*labels));
        } else {
          write_atomic(file, write_pgm(snapshot_image(snap)));
        }
      }
    }
    write_atomic(dir / "case.json", case_document(c).dump(2));
  }

  void load_all() {
    namespace fs = std::filesystem;
    for (const auto& entry : fs::directory_iterator(*data_dir_)) {
      if (!entry.is_directory() || !fs::exists(entry.path() / "case.json")) continue;
      auto c = load_case(entry.path());
      cases_.emplace(c->case_id, std::move(c));
    }
  }

  static std::shared_ptr<Case> load_case(const std::filesystem::path& dir) {
    const auto doc = nlohmann::json::parse(read_file_bytes((dir / "case.json").string()));
    auto c = std::make_shared<Case>();
    c->case_id = doc.at("case_id").get<std::string>();
    const auto& p = doc.at("patient");
    c->patient.patient_id = p.at("patient_id").get<std::string>();
    if (!p.at("name").is_null()) c->patient.name = p.at("name").get<std::string>();
    if (!p.at("age_years").is_null()) c->patient.age_years = p.at("age_years").get<int>();

    if (doc.at("has_image").get<bool>()) {
      PipelineState state(load_pgm((dir / "original.pgm").string()));
      for (const auto& s : doc.at("stages")) {
        const auto name = s.at("name").get<std::string>();
        const auto kind = s.at("kind").get<std::string>();
        const auto file = (dir / s.at("file").get<std::string>()).string();
        if (kind == "labels") {
          state.stages.emplace_back(name, decode_labels(read_file_bytes(file)));
        } else {
          GrayImage g = load_pgm(file);
          if (kind == "mask") {
            BinaryMask m(g.width(), g.height());
            for (std::size_t i = 0; i < g.size(); ++i) m[i] = g[i] ? 1 : 0;
            state.stages.emplace_back(name, std::move(m));
          } else {
            state.stages.emplace_back(name, std::move(g));
          }
        }
      }
      for (const auto& s : doc.at("provenance")) {
        state.provenance.push_back(
            {s.at("name").get<std::string>(), s.at("params").get<std::map<std::string, std::string>>()});
      }
      if (!doc.at("threshold").is_null()) state.threshold = doc.at("threshold").get<int>();
      if (doc.at("components_current").get<bool>()) {
        if (const auto* labels = state.find_stage("components")) {
          const auto& l = std::get<LabelMap>(*labels);
          state.components = Components{l, region_stats(l)};
        }
      }
      c->pipeline = std::move(state);
    }
    if (!doc.at("cm_per_pixel").is_null()) c->calibration.emplace(doc.at("cm_per_pixel").get<double>());
    if (!doc.at("measurement").is_null()) {
      const auto& m = doc.at("measurement");
      c->measurement = DiameterMeasurement{
          m.at("pixels").get<double>(), m.at("cm").get<double>(),
          *parse_measure_method(m.at("method").get<std::string>()),
          m.at("component_area_px").get<std::int64_t>()};
    }
    if (!doc.at("report").is_null()) c->report = report_from_json(doc.at("report"));
    return c;
  }

  std::optional<std::filesystem::path> data_dir_;
  PipelineConfig config_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Case>> cases_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

}  // namespace mammoseg::service
