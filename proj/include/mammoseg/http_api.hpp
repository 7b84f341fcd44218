#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "mammoseg/case_store.hpp"

namespace mammoseg::service {

namespace detail {

inline nlohmann::json number_json(double v) {
  if (std::floor(v) == v && std::fabs(v) < 1e15) return static_cast<std::int64_t>(v);
  return v;
}

inline nlohmann::json outcome_json(const StepOutcome& o) {
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& [k, v] : o.outputs) outputs[k] = number_json(v);
  return {{"step", o.step}, {"stage", o.step}, {"outputs", std::move(outputs)}};
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const ServiceError& e) {
  nlohmann::json body = {{"error_code", e.code()}, {"message", e.what()}};
  if (!e.field().empty()) body["field"] = e.field();
  send_json(res, e.status(), body);
}

inline nlohmann::json parse_body(const httplib::Request& req, bool allow_empty) {
  if (req.body.empty()) {
    if (allow_empty) return nlohmann::json::object();
    throw ServiceError(400, "ValidationError", "request body must be a JSON object");
  }
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw ServiceError(400, "ValidationError", "body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error&) {
    throw ServiceError(400, "ValidationError", "body is not valid JSON");
  }
}

inline PatientRecord parse_patient(const nlohmann::json& j) {
  PatientRecord p;
  for (const auto& [k, v] : j.items()) {
    if (k != "patient_id" && k != "name" && k != "age_years") {
      throw ServiceError(400, "ValidationError", "unknown field", k);
    }
  }
  if (!j.contains("patient_id") || !j["patient_id"].is_string()) {
    throw ServiceError(400, "ValidationError", "patient_id must be a string", "patient_id");
  }
  p.patient_id = j["patient_id"].get<std::string>();
  if (j.contains("name") && !j["name"].is_null()) {
    if (!j["name"].is_string()) throw ServiceError(400, "ValidationError", "name must be a string", "name");
    p.name = j["name"].get<std::string>();
  }
  if (j.contains("age_years") && !j["age_years"].is_null()) {
    if (!j["age_years"].is_number_integer()) {
      throw ServiceError(400, "ValidationError", "age_years must be an integer", "age_years");
    }
    p.age_years = j["age_years"].get<int>();
  }
  return p;
}

inline StepParams parse_params(const nlohmann::json& j) {
  StepParams params;
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) {
      params[k] = v.get<bool>() ? "true" : "false";
    } else if (v.is_number_integer()) {
      params[k] = std::to_string(v.get<long long>());
    } else if (v.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << v.get<double>();
      params[k] = os.str();
    } else if (v.is_string()) {
      params[k] = v.get<std::string>();
    } else {
      throw ServiceError(400, "InvalidParams", "parameter must be a scalar", k);
    }
  }
  return params;
}

inline double require_number(const nlohmann::json& j, const char* key, const std::string& field) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ServiceError(422, "InvalidParams", field + " must be a number", field);
  }
  return j[key].get<double>();
}

inline MeasurementRequest parse_measurement(const nlohmann::json& j) {
  MeasurementRequest req;
  const std::string mode = j.value("mode", std::string("auto"));
  const auto m = parse_measure_method(mode);
  if (!m) throw ServiceError(400, "InvalidParams", "mode must be auto or manual", "mode");
  req.mode = *m;
  if (!j.contains("cm_per_pixel") || !j["cm_per_pixel"].is_number()) {
    throw ServiceError(422, "InvalidCalibration", "cm_per_pixel must be a positive number",
                       "cm_per_pixel");
  }
  req.cm_per_pixel = j["cm_per_pixel"].get<double>();
  if (j.contains("line") && !j["line"].is_null()) {
    const auto& line = j["line"];
    if (!line.is_object() || !line.contains("p1") || !line.contains("p2")) {
      throw ServiceError(422, "InvalidParams", "line needs p1 and p2", "line");
    }
    req.line = PixelLine{{require_number(line["p1"], "x", "line.p1.x"),
                          require_number(line["p1"], "y", "line.p1.y")},
                         {require_number(line["p2"], "x", "line.p2.x"),
                          require_number(line["p2"], "y", "line.p2.y")}};
  }
  if (j.contains("min_area")) {
    if (!j["min_area"].is_number_integer()) {
      throw ServiceError(400, "InvalidParams", "min_area must be an integer", "min_area");
    }
    req.min_area = j["min_area"].get<std::int64_t>();
  }
  return req;
}

template <typename Fn>
auto guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e);
    } catch (const Error& e) {
      send_error(res, from_library(e));
    } catch (const std::exception& e) {
      send_error(res, ServiceError(500, "InternalError", e.what()));
    }
  };
}

}  // namespace detail

/// Registers the case-management endpoints on `server`. `store` must outlive it.
inline void register_routes(httplib::Server& server, CaseStore& store) {
  using detail::guarded;
  using detail::send_json;
  using nlohmann::json;

  server.Post("/cases", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto id = store.create_case(detail::parse_patient(detail::parse_body(req, false)));
                send_json(res, 201, {{"case_id", id}});
              }));

  server.Get("/cases", guarded([&store](const httplib::Request&, httplib::Response& res) {
               json out = json::array();
               for (const auto& s : store.list_cases()) {
                 out.push_back({{"case_id", s.case_id},
                                {"patient_id", s.patient_id},
                                {"has_image", s.has_image},
                                {"stages", s.stages},
                                {"has_measurement", s.has_measurement},
                                {"has_report", s.has_report}});
               }
               send_json(res, 200, out);
             }));

  server.Get(R"(/cases/([0-9a-f]+))",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto& id = req.matches[1].str();
               json stages = json::array();
               for (const auto& [name, kind] : store.stage_list(id))
                 stages.push_back({{"name", name}, {"kind", kind}});
               const auto m = store.measurement(id);
               send_json(res, 200,
                         {{"case_id", id},
                          {"patient", patient_to_json(store.patient(id))},
                          {"stages", std::move(stages)},
                          {"measurement", m ? measurement_to_json(*m) : json(nullptr)}});
             }));

  server.Post(R"(/cases/([0-9a-f]+)/image)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto [w, h] = store.upload_image(req.matches[1].str(), req.body);
                send_json(res, 200, {{"width", w}, {"height", h}});
              }));

  server.Post(R"(/cases/([0-9a-f]+)/steps/([a-z\-]+))",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto id = req.matches[1].str();
                const auto step = req.matches[2].str();
                const auto params = detail::parse_params(detail::parse_body(req, true));
                if (step == "default-pipeline") {
                  if (!params.empty()) {
                    throw ServiceError(400, "InvalidParams", "default-pipeline takes no parameters");
                  }
                  json steps = json::array();
                  for (const auto& o : store.run_default_pipeline(id))
                    steps.push_back(detail::outcome_json(o));
                  send_json(res, 200, {{"steps", std::move(steps)}});
                  return;
                }
                send_json(res, 200, detail::outcome_json(store.run_step(id, step, params)));
              }));

  server.Get(R"(/cases/([0-9a-f]+)/stages)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               json out = json::array();
               for (const auto& [name, kind] : store.stage_list(req.matches[1].str()))
                 out.push_back({{"name", name}, {"kind", kind}});
               send_json(res, 200, out);
             }));

  server.Get(R"(/cases/([0-9a-f]+)/stages/([a-z\-]+))",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               res.status = 200;
               res.set_content(store.stage_pgm(req.matches[1].str(), req.matches[2].str()),
                               "image/x-portable-graymap");
             }));

  server.Get(R"(/cases/([0-9a-f]+)/histogram)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               std::optional<std::string> stage;
               if (req.has_param("stage")) stage = req.get_param_value("stage");
               const auto h = store.stage_histogram(req.matches[1].str(), stage);
               send_json(res, 200, json(h.bins));
             }));

  server.Post(R"(/cases/([0-9a-f]+)/measurement)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto m = store.set_measurement(
                    req.matches[1].str(), detail::parse_measurement(detail::parse_body(req, false)));
                send_json(res, 200, measurement_to_json(m));
              }));

  server.Get(R"(/cases/([0-9a-f]+)/measurement)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const auto m = store.measurement(req.matches[1].str());
               if (!m) throw ServiceError(404, "NoMeasurementYet", "no measurement has been set");
               send_json(res, 200, measurement_to_json(*m));
             }));

  server.Get(R"(/cases/([0-9a-f]+)/report)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               bool generate = false;
               if (req.has_param("generate")) {
                 const auto g = req.get_param_value("generate");
                 if (g != "true" && g != "false") {
                   throw ServiceError(400, "InvalidParams", "generate must be true or false",
                                      "generate");
                 }
                 generate = g == "true";
               }
               const auto report = store.report(req.matches[1].str(), generate);
               if (req.get_param_value("format") == "text") {
                 res.status = 200;
                 res.set_content(render_report_text(report), "text/plain; charset=utf-8");
                 return;
               }
               res.status = 200;
               res.set_content(serialize_report(report), "application/json");
             }));
}

}  // namespace mammoseg::service
