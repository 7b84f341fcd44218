#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "mammoseg/error.hpp"

namespace mammoseg {

enum class TumorType { Healthy, Benign, Malignant };

/// Ordered: NoRisk < Low < LowMedium < High.
enum class RiskStage { NoRisk, Low, LowMedium, High };

/// AJCC (8th edition) size categories, ordered by size; T4 is invasion-driven.
enum class TCategory { T1mi, T1a, T1b, T1c, T2, T3, T4 };

inline std::string_view to_string(TumorType t) {
  switch (t) {
    case TumorType::Healthy: return "healthy";
    case TumorType::Benign: return "benign";
    case TumorType::Malignant: return "malignant";
  }
  return "";
}

inline std::string_view to_string(RiskStage r) {
  switch (r) {
    case RiskStage::NoRisk: return "no-risk";
    case RiskStage::Low: return "low";
    case RiskStage::LowMedium: return "low-medium";
    case RiskStage::High: return "high";
  }
  return "";
}

inline std::string_view to_string(TCategory c) {
  switch (c) {
    case TCategory::T1mi: return "T1mi";
    case TCategory::T1a: return "T1a";
    case TCategory::T1b: return "T1b";
    case TCategory::T1c: return "T1c";
    case TCategory::T2: return "T2";
    case TCategory::T3: return "T3";
    case TCategory::T4: return "T4";
  }
  return "";
}

inline std::optional<TumorType> parse_tumor_type(std::string_view s) {
  for (auto t : {TumorType::Healthy, TumorType::Benign, TumorType::Malignant})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

inline std::optional<RiskStage> parse_risk_stage(std::string_view s) {
  for (auto r : {RiskStage::NoRisk, RiskStage::Low, RiskStage::LowMedium, RiskStage::High})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

inline std::optional<TCategory> parse_t_category(std::string_view s) {
  for (auto c : {TCategory::T1mi, TCategory::T1a, TCategory::T1b, TCategory::T1c, TCategory::T2,
                 TCategory::T3, TCategory::T4})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

namespace detail {

inline void check_diameter(double d) {
  if (!std::isfinite(d)) throw Error(ErrorCode::NonFinite, "diameter must be finite");
  if (d < 0.0) throw Error(ErrorCode::NegativeDiameter, "diameter must be non-negative");
}

}  // namespace detail

/// 0 -> healthy, (0, 1) cm -> benign, >= 1 cm -> malignant.
inline TumorType classify_type(double diameter_cm) {
  detail::check_diameter(diameter_cm);
  if (diameter_cm == 0.0) return TumorType::Healthy;
  if (diameter_cm < 1.0) return TumorType::Benign;
  return TumorType::Malignant;
}

/// 0 -> none, (0, 1] -> low, (1, 2] -> low-medium, > 2 cm -> high.
inline RiskStage classify_risk(double diameter_cm) {
  detail::check_diameter(diameter_cm);
  if (diameter_cm == 0.0) return RiskStage::NoRisk;
  if (diameter_cm <= 1.0) return RiskStage::Low;
  if (diameter_cm <= 2.0) return RiskStage::LowMedium;
  return RiskStage::High;
}

/// Size intervals are open below and closed above, e.g. T1a is (1, 5] mm.
inline TCategory classify_t_category(double diameter_mm, bool chest_wall_or_skin_invasion = false) {
  if (!std::isfinite(diameter_mm)) throw Error(ErrorCode::NonFinite, "diameter must be finite");
  if (diameter_mm <= 0.0) {
    throw Error(ErrorCode::NonPositiveDiameter, "T category needs a positive diameter");
  }
  if (chest_wall_or_skin_invasion) return TCategory::T4;
  if (diameter_mm <= 1.0) return TCategory::T1mi;
  if (diameter_mm <= 5.0) return TCategory::T1a;
  if (diameter_mm <= 10.0) return TCategory::T1b;
  if (diameter_mm <= 20.0) return TCategory::T1c;
  if (diameter_mm <= 50.0) return TCategory::T2;
  return TCategory::T3;
}

}  // namespace mammoseg
