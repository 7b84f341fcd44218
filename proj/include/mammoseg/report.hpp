#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mammoseg/classification.hpp"
#include "mammoseg/error.hpp"
#include "mammoseg/measurement.hpp"

namespace mammoseg {

struct PatientRecord {
  std::string patient_id;
  std::optional<std::string> name = std::nullopt;
  std::optional<int> age_years = std::nullopt;

  void validate() const {
    if (patient_id.empty()) {
      throw Error(ErrorCode::InvalidArgument, "patient_id must not be empty", "patient_id");
    }
    if (age_years && *age_years <= 0) {
      throw Error(ErrorCode::InvalidArgument, "age_years must be positive", "age_years");
    }
  }
  friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

struct PipelineStep {
  std::string name;
  std::map<std::string, std::string> params;
  friend bool operator==(const PipelineStep&, const PipelineStep&) = default;
};

/// Steps in the order they were executed.
using PipelineProvenance = std::vector<PipelineStep>;

struct TestReport {
  PatientRecord record;
  std::string generated_at;  // UTC, ISO-8601, seconds precision
  double diameter_px = 0.0;
  double diameter_cm = 0.0;  // exact; rounded only for display
  MeasureMethod method = MeasureMethod::Auto;
  double cm_per_pixel = 0.0;
  TumorType tumor_type = TumorType::Healthy;
  RiskStage risk_stage = RiskStage::NoRisk;
  std::optional<TCategory> t_category;
  PipelineProvenance provenance;

  friend bool operator==(const TestReport&, const TestReport&) = default;
};

inline std::string utc_timestamp(std::chrono::system_clock::time_point when =
                                     std::chrono::system_clock::now()) {
  const std::time_t t = std::chrono::system_clock::to_time_t(when);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Builds a report with classifications recomputed from the measured pixels
/// and the calibration. `generated_at` defaults to the current instant.
inline TestReport generate_report(const PatientRecord& record,
                                  const DiameterMeasurement& measurement,
                                  const Calibration& cal, PipelineProvenance provenance,
                                  std::optional<std::string> generated_at = std::nullopt) {
  record.validate();
  TestReport r;
  r.record = record;
  r.diameter_px = measurement.pixels;
  r.diameter_cm = measurement.pixels * cal.cm_per_pixel();
  r.method = measurement.method;
  r.cm_per_pixel = cal.cm_per_pixel();
  r.tumor_type = classify_type(r.diameter_cm);
  r.risk_stage = classify_risk(r.diameter_cm);
  if (r.diameter_cm > 0.0) r.t_category = classify_t_category(r.diameter_cm * 10.0);
  r.provenance = std::move(provenance);
  r.generated_at = generated_at ? std::move(*generated_at) : utc_timestamp();
  return r;
}

/// True when the stored classifications match a fresh classification of
/// diameter_cm.
inline bool is_consistent(const TestReport& r) {
  if (!std::isfinite(r.diameter_cm) || r.diameter_cm < 0.0) return false;
  std::optional<TCategory> t;
  if (r.diameter_cm > 0.0) t = classify_t_category(r.diameter_cm * 10.0);
  return r.tumor_type == classify_type(r.diameter_cm) &&
         r.risk_stage == classify_risk(r.diameter_cm) && r.t_category == t;
}

/// Non-negative value rounded half-up to `decimals` places. Binary
/// representation error is absorbed at the 1e-6 level first, so 1.005 -> "1.01".
inline std::string format_half_up(double value, int decimals = 2) {
  if (!std::isfinite(value)) return "nan";
  const bool negative = value < 0.0;
  const auto micro = std::llround(std::fabs(value) * 1e6);
  long long unit = 1;
  for (int i = decimals; i < 6; ++i) unit *= 10;
  const long long scaled = (micro + unit / 2) / unit;
  long long scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  std::string out = (negative && scaled != 0 ? "-" : "") + std::to_string(scaled / scale);
  if (decimals > 0) {
    std::string frac = std::to_string(scaled % scale);
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out;
}

inline std::string type_phrase(TumorType t) {
  switch (t) {
    case TumorType::Healthy: return "healthy breast with no lump";
    case TumorType::Benign: return "possibility to be benign tumor";
    case TumorType::Malignant: return "possibility to be malignant tumor";
  }
  return "";
}

inline std::string risk_phrase(RiskStage r) {
  switch (r) {
    case RiskStage::NoRisk: return "no risk stage (no lump found)";
    case RiskStage::Low: return "low risk stage";
    case RiskStage::LowMedium: return "low to medium risk stage";
    case RiskStage::High: return "high risk stage";
  }
  return "";
}

inline std::string render_report_text(const TestReport& r) {
  std::ostringstream os;
  os << "PATIENT TEST REPORT\n";
  os << "Patient ID   : " << r.record.patient_id << "\n";
  os << "Name         : " << r.record.name.value_or("-") << "\n";
  os << "Age          : " << (r.record.age_years ? std::to_string(*r.record.age_years) : "-")
     << "\n";
  os << "Generated    : " << r.generated_at << "\n";
  os << "Diameter     : " << format_half_up(r.diameter_px) << " px / "
     << format_half_up(r.diameter_cm) << " cm (" << to_string(r.method) << ", "
     << format_half_up(r.cm_per_pixel, 4) << " cm/px)\n";
  os << "Tumor type   : " << type_phrase(r.tumor_type) << "\n";
  os << "Risk stage   : " << risk_phrase(r.risk_stage) << "\n";
  if (r.t_category) {
    os << "T category   : " << to_string(*r.t_category) << " (AJCC size category, informational)\n";
  }
  os << "Pipeline     :";
  if (r.provenance.empty()) os << " -";
  os << "\n";
  for (std::size_t i = 0; i < r.provenance.size(); ++i) {
    os << "  " << (i + 1) << ". " << r.provenance[i].name;
    for (const auto& [k, v] : r.provenance[i].params) os << " " << k << "=" << v;
    os << "\n";
  }
  os << "Note: size-based decision aid only; not a medical diagnosis.\n";
  return os.str();
}

inline nlohmann::json report_to_json(const TestReport& r) {
  nlohmann::json record = {
      {"patient_id", r.record.patient_id},
      {"name", r.record.name ? nlohmann::json(*r.record.name) : nlohmann::json(nullptr)},
      {"age_years",
       r.record.age_years ? nlohmann::json(*r.record.age_years) : nlohmann::json(nullptr)},
  };
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.provenance) {
    steps.push_back({{"name", s.name}, {"params", s.params}});
  }
  return {
      {"record", std::move(record)},
      {"generated_at", r.generated_at},
      {"diameter_px", r.diameter_px},
      {"diameter_cm", r.diameter_cm},
      {"method", std::string(to_string(r.method))},
      {"cm_per_pixel", r.cm_per_pixel},
      {"tumor_type", std::string(to_string(r.tumor_type))},
      {"risk_stage", std::string(to_string(r.risk_stage))},
      {"t_category", r.t_category ? nlohmann::json(std::string(to_string(*r.t_category)))
                                  : nlohmann::json(nullptr)},
      {"provenance", std::move(steps)},
  };
}

/// Canonical form: sorted keys, no insignificant whitespace.
inline std::string serialize_report(const TestReport& r) { return report_to_json(r).dump(); }

namespace detail {

class JsonReader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ParseError, path + ": " + what, path);
  }

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  static void expect_object(const nlohmann::json& j, const std::string& path,
                            std::initializer_list<const char*> keys) {
    if (!j.is_object()) fail(path.empty() ? "$" : path, "expected an object");
    for (const auto& [k, v] : j.items()) {
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      if (!known) fail(join(path, k), "unknown field");
    }
    for (const char* key : keys) {
      if (!j.contains(key)) fail(join(path, key), "missing field");
    }
  }

  static std::string string_at(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  static double number_at(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }
};

}  // namespace detail

inline TestReport report_from_json(const nlohmann::json& j) {
  using R = detail::JsonReader;
  R::expect_object(j, "",
                   {"record", "generated_at", "diameter_px", "diameter_cm", "method",
                    "cm_per_pixel", "tumor_type", "risk_stage", "t_category", "provenance"});
  TestReport r;

  const auto& rec = j.at("record");
  R::expect_object(rec, "record", {"patient_id", "name", "age_years"});
  r.record.patient_id = R::string_at(rec.at("patient_id"), "record.patient_id");
  if (r.record.patient_id.empty()) R::fail("record.patient_id", "must not be empty");
  if (!rec.at("name").is_null()) r.record.name = R::string_at(rec.at("name"), "record.name");
  if (!rec.at("age_years").is_null()) {
    const auto& age = rec.at("age_years");
    if (!age.is_number_integer() || age.get<long long>() <= 0 || age.get<long long>() > 1000) {
      R::fail("record.age_years", "expected a positive integer");
    }
    r.record.age_years = age.get<int>();
  }

  r.generated_at = R::string_at(j.at("generated_at"), "generated_at");
  r.diameter_px = R::number_at(j.at("diameter_px"), "diameter_px");
  r.diameter_cm = R::number_at(j.at("diameter_cm"), "diameter_cm");
  r.cm_per_pixel = R::number_at(j.at("cm_per_pixel"), "cm_per_pixel");
  if (r.diameter_px < 0.0) R::fail("diameter_px", "must be non-negative");
  if (r.diameter_cm < 0.0) R::fail("diameter_cm", "must be non-negative");
  if (r.cm_per_pixel <= 0.0) R::fail("cm_per_pixel", "must be positive");

  const auto method = parse_measure_method(R::string_at(j.at("method"), "method"));
  if (!method) R::fail("method", "expected \"auto\" or \"manual\"");
  r.method = *method;
  const auto type = parse_tumor_type(R::string_at(j.at("tumor_type"), "tumor_type"));
  if (!type) R::fail("tumor_type", "unknown tumor type");
  r.tumor_type = *type;
  const auto risk = parse_risk_stage(R::string_at(j.at("risk_stage"), "risk_stage"));
  if (!risk) R::fail("risk_stage", "unknown risk stage");
  r.risk_stage = *risk;
  if (!j.at("t_category").is_null()) {
    const auto t = parse_t_category(R::string_at(j.at("t_category"), "t_category"));
    if (!t) R::fail("t_category", "unknown T category");
    r.t_category = *t;
  }

  const auto& steps = j.at("provenance");
  if (!steps.is_array()) R::fail("provenance", "expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string path = "provenance[" + std::to_string(i) + "]";
    R::expect_object(steps[i], path, {"name", "params"});
    PipelineStep step;
    step.name = R::string_at(steps[i].at("name"), path + ".name");
    const auto& params = steps[i].at("params");
    if (!params.is_object()) R::fail(path + ".params", "expected an object");
    for (const auto& [k, v] : params.items()) {
      step.params[k] = R::string_at(v, path + ".params." + k);
    }
    r.provenance.push_back(std::move(step));
  }

  if (!is_consistent(r)) {
    R::fail("tumor_type", "classification fields disagree with diameter_cm");
  }
  return r;
}

inline TestReport deserialize_report(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed report document: ") + e.what(), "$");
  }
  return report_from_json(j);
}

}  // namespace mammoseg
