// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "mammoseg/http_api.hpp"
#include "mammoseg/mammoseg.hpp"
#include "mammoseg/phantom.hpp"
#include "test_support.hpp"

using namespace mammoseg;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects the first few mismatches of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) detail_ << (failures_ > 1 ? "; " : "") << what;
  }
  bool ok() const { return failures_ == 0; }
  std::string detail() const { return detail_.str(); }
  void note(const std::string& s) { note_ = s; }
  const std::string& note() const { return note_; }

 private:
  int failures_ = 0;
  std::ostringstream detail_;
  std::string note_;
};

int g_failed = 0;

void criterion(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  std::cout << (c.ok() ? "PASS " : "FAIL ") << name;
  if (!c.note().empty()) std::cout << " (" << c.note() << ")";
  if (!c.ok()) {
    std::cout << " :: " << c.detail();
    ++g_failed;
  }
  std::cout << std::endl;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool subset(const BinaryMask& a, const BinaryMask& b) { return support::subset(a, b); }

GrayImage end_to_end_phantom(std::uint64_t seed) {
  DiskPhantom p;
  p.width = p.height = 128;
  p.background = 20;
  p.foreground = 200;
  p.center_x = p.center_y = 64.0;
  p.radius = 30.0;
  p.salt_pepper = 0.02;
  p.seed = seed;
  return make_disk_phantom(p);
}

std::string bytes_of(const GrayImage& img) { return write_pgm(img); }

}  // namespace

int main() {
  criterion("otsu-oracle-equivalence", [](Check& c) {
    std::mt19937_64 rng(101);
    std::vector<Histogram> hists;
    for (int i = 0; i < 200; ++i) hists.push_back(support::random_histogram(rng, i));
    std::vector<int> got;
    const auto t0 = Clock::now();
    for (const auto& h : hists) got.push_back(otsu_threshold(h));
    const double elapsed = seconds_since(t0);
    for (std::size_t i = 0; i < hists.size(); ++i) {
      const int want = support::otsu_oracle(hists[i]);
      c.expect(got[i] == want, "histogram " + std::to_string(i) + ": got " + std::to_string(got[i]) +
                                   " want " + std::to_string(want));
    }
    c.expect(elapsed < 1.0, "runtime " + fmt(elapsed) + " s");
    c.note("200 histograms, " + fmt(elapsed * 1000) + " ms");
  });

  criterion("median-oracle-equivalence", [](Check& c) {
    std::mt19937_64 rng(102);
    for (int i = 0; i < 50; ++i) {
      const auto img = support::random_image(rng, 16, 16);
      for (int window : {3, 5}) {
        c.expect(median_filter(img, window) == support::median_oracle(img, window),
                 "image " + std::to_string(i) + " window " + std::to_string(window));
      }
    }
  });

  criterion("morphology-laws", [](Check& c) {
    std::mt19937_64 rng(103);
    for (int i = 0; i < 100; ++i) {
      const auto m = support::random_mask(rng, 32, 32);
      const auto se = support::random_se(rng);
      const auto tag = "mask " + std::to_string(i);
      const auto e = erode(m, se);
      const auto d = dilate(m, se);
      c.expect(e == complement(dilate(complement(m), se.reflected(), Border::Foreground)),
               tag + " erosion duality");
      c.expect(d == complement(erode(complement(m), se.reflected(), Border::Foreground)),
               tag + " dilation duality");
      c.expect(subset(e, m), tag + " erosion anti-extensive");
      c.expect(subset(m, d), tag + " dilation extensive");
      const auto o = opening(m, se);
      const auto cl = closing(m, se);
      c.expect(opening(o, se) == o, tag + " opening idempotent");
      c.expect(closing(cl, se) == cl, tag + " closing idempotent");
      c.expect(subset(o, m), tag + " opening anti-extensive");
      c.expect(subset(m, cl), tag + " closing extensive");
    }
  });

  criterion("distance-transform-exact", [](Check& c) {
    std::mt19937_64 rng(104);
    for (int i = 0; i < 30; ++i) {
      const auto m = support::random_mask(rng, 12, 12, i % 3 == 0 ? 0.9 : 0.5);
      c.expect(distance_transform(m) == support::distance_oracle(m), "mask " + std::to_string(i));
    }
  });

  criterion("watershed-two-disk-split", [](Check& c) {
    const int w = 40, h = 30;
    const auto fg = support::union_of(support::disk_mask(w, h, 15, 15, 6), support::disk_mask(w, h, 25, 15, 6));
    const auto field = negated(distance_transform(fg));
    const auto markers = find_markers(field, fg);
    const auto regions = watershed(field, markers, fg);
    const auto stats = region_stats(regions);
    c.expect(stats.size() == 2, "regions " + std::to_string(stats.size()));
    if (stats.size() != 2) return;
    std::vector<std::pair<int, int>> seeds;
    for (const auto& r : region_stats(markers))
      seeds.emplace_back(static_cast<int>(std::lround(r.centroid_x)), static_cast<int>(std::lround(r.centroid_y)));
    const auto oracle = support::seeded_growth_areas(fg, seeds);
    std::string areas;
    for (std::size_t i = 0; i < 2; ++i) {
      const double rel = std::fabs(static_cast<double>(stats[i].area - oracle[i])) / static_cast<double>(oracle[i]);
      c.expect(rel <= 0.05, "region " + std::to_string(i + 1) + " off by " + fmt(rel * 100) + "%");
      areas += (i ? ", " : "") + std::to_string(stats[i].area) + "/" + std::to_string(oracle[i]);
    }
    c.note("areas vs oracle " + areas);
  });

  criterion("end-to-end-phantom", [](Check& c) {
    const Calibration cal(0.02);
    double worst = 0.0, slowest = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto img = end_to_end_phantom(seed);
      const auto t0 = Clock::now();
      const auto state = run_pipeline(img);
      const auto m = measure_auto(measurement_components(state), cal);
      const auto report = generate_report({"phantom"}, m, cal, state.provenance);
      const double elapsed = seconds_since(t0);
      slowest = std::max(slowest, elapsed);
      const auto tag = "seed " + std::to_string(seed);
      const double rel = std::fabs(report.diameter_cm - 1.2) / 1.2;
      worst = std::max(worst, rel);
      c.expect(rel <= 0.04, tag + " diameter " + fmt(report.diameter_cm) + " cm");
      c.expect(report.tumor_type == TumorType::Malignant, tag + " type");
      c.expect(report.risk_stage == RiskStage::LowMedium, tag + " stage");
      c.expect(report.t_category == TCategory::T1c, tag + " t-category");
      c.expect(elapsed < 1.0, tag + " runtime " + fmt(elapsed) + " s");
    }
    c.note("worst deviation " + fmt(worst * 100) + "%, slowest " + fmt(slowest * 1000) + " ms");
  });

  criterion("classification-grid", [](Check& c) {
    struct Row {
      double d;
      TumorType type;
      RiskStage risk;
    };
    const std::vector<Row> rows = {
        {0.0, TumorType::Healthy, RiskStage::NoRisk},     {0.5, TumorType::Benign, RiskStage::Low},
        {0.999, TumorType::Benign, RiskStage::Low},       {1.0, TumorType::Malignant, RiskStage::Low},
        {1.001, TumorType::Malignant, RiskStage::LowMedium}, {1.5, TumorType::Malignant, RiskStage::LowMedium},
        {2.0, TumorType::Malignant, RiskStage::LowMedium}, {2.001, TumorType::Malignant, RiskStage::High},
        {2.5, TumorType::Malignant, RiskStage::High},
    };
    for (const auto& r : rows) {
      c.expect(classify_type(r.d) == r.type, "type at " + fmt(r.d) + " cm");
      c.expect(classify_risk(r.d) == r.risk, "risk at " + fmt(r.d) + " cm");
    }
    const std::vector<std::pair<double, TCategory>> ajcc = {
        {0.5, TCategory::T1mi}, {1.0, TCategory::T1mi}, {1.001, TCategory::T1a},
        {5.0, TCategory::T1a},  {5.001, TCategory::T1b}, {10.0, TCategory::T1b},
        {20.0, TCategory::T1c}, {50.0, TCategory::T2},   {50.001, TCategory::T3},
    };
    for (const auto& [mm, t] : ajcc) {
      c.expect(classify_t_category(mm) == t, "t-category at " + fmt(mm) + " mm");
      c.expect(classify_t_category(mm, true) == TCategory::T4, "invasion at " + fmt(mm) + " mm");
    }
  });

  criterion("pgm-round-trip", [](Check& c) {
    std::mt19937_64 rng(105);
    std::uniform_int_distribution<int> dim(1, 64);
    for (int i = 0; i < 100; ++i) {
      const auto img = support::random_image(rng, dim(rng), dim(rng));
      const auto bytes = write_pgm(img);
      c.expect(read_pgm(bytes) == img, "image " + std::to_string(i));
      c.expect(write_pgm(read_pgm(bytes)) == bytes, "bytes " + std::to_string(i));
    }
  });

  criterion("report-round-trip-latency-consistency", [](Check& c) {
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<double> px(0.0, 400.0);
    std::uniform_real_distribution<double> scale(0.001, 0.1);
    double slowest = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double pixels = i % 10 == 0 ? 0.0 : px(rng);
      const Calibration cal(scale(rng));
      const DiameterMeasurement m{pixels, pixels * cal.cm_per_pixel(),
                                  i % 2 ? MeasureMethod::Manual : MeasureMethod::Auto, 0};
      PatientRecord rec{"P-" + std::to_string(i)};
      if (i % 3 == 0) rec.name = "Patient \"" + std::to_string(i) + "\"";
      if (i % 4 == 0) rec.age_years = 30 + i % 50;
      const PipelineProvenance prov = {{"median", {{"window", "3"}}}, {"otsu", {}}};
      const auto t0 = Clock::now();
      const auto r = generate_report(rec, m, cal, prov);
      slowest = std::max(slowest, seconds_since(t0));
      const auto tag = "report " + std::to_string(i);
      c.expect(deserialize_report(serialize_report(r)) == r, tag + " round-trip");
      c.expect(serialize_report(deserialize_report(serialize_report(r))) == serialize_report(r),
               tag + " canonical");
      std::optional<TCategory> t;
      if (r.diameter_cm > 0) t = classify_t_category(r.diameter_cm * 10.0);
      c.expect(r.tumor_type == classify_type(r.diameter_cm) && r.risk_stage == classify_risk(r.diameter_cm) &&
                   r.t_category == t,
               tag + " consistency");
    }
    c.expect(slowest < 0.1, "slowest generate_report " + fmt(slowest) + " s");
    c.note("200 reports, slowest " + fmt(slowest * 1000) + " ms");
  });

  criterion("service-differential", [](Check& c) {
    service::CaseStore store;
    httplib::Server server;
    service::register_routes(server, store);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);

    const auto img = end_to_end_phantom(7);
    const auto state = run_pipeline(img);
    const Calibration cal(0.02);

    auto res = cli.Post("/cases", R"({"patient_id":"P-7"})", "application/json");
    const auto id = json::parse(res->body).at("case_id").get<std::string>();
    res = cli.Post("/cases/" + id + "/image", bytes_of(img), "application/octet-stream");
    c.expect(res->status == 200, "upload status " + std::to_string(res->status));

    res = cli.Get("/cases/" + id + "/histogram");
    const auto h = histogram(img);
    c.expect(json::parse(res->body) == json(h.bins), "original histogram");

    res = cli.Post("/cases/" + id + "/steps/default-pipeline", "", "application/json");
    const auto steps = json::parse(res->body).at("steps");
    c.expect(steps.size() == state.stages.size(), "step count");
    for (const auto& s : steps) {
      if (s.at("step") == "otsu")
        c.expect(s.at("outputs").at("threshold").get<int>() == *state.threshold, "otsu threshold");
      if (s.at("step") == "components")
        c.expect(s.at("outputs").at("count").get<std::int32_t>() == state.components->count(), "component count");
    }
    for (const auto& [name, snap] : state.stages) {
      res = cli.Get("/cases/" + id + "/stages/" + name);
      c.expect(res->body == write_pgm(snapshot_image(snap)), "stage " + name);
    }
    res = cli.Get("/cases/" + id + "/histogram?stage=median");
    c.expect(json::parse(res->body) == json(histogram(median_filter(img)).bins), "median histogram");

    const auto expected = measure_auto(measurement_components(state), cal);
    res = cli.Post("/cases/" + id + "/measurement", R"({"mode":"auto","cm_per_pixel":0.02})", "application/json");
    auto m = json::parse(res->body);
    c.expect(m.at("pixels").get<double>() == expected.pixels, "auto pixels");
    c.expect(m.at("cm").get<double>() == expected.pixels * 0.02, "auto cm");

    res = cli.Get("/cases/" + id + "/report?generate=true");
    const auto report = deserialize_report(res->body);
    auto prov = state.provenance;
    prov.push_back(service::CaseStore::measurement_step(expected, cal));
    c.expect(report == generate_report({"P-7"}, expected, cal, prov, report.generated_at), "report fields");
    res = cli.Get("/cases/" + id + "/report?format=text");
    c.expect(res->body == render_report_text(report), "report text");

    res = cli.Post("/cases/" + id + "/measurement",
                   R"({"mode":"manual","cm_per_pixel":0.05,"line":{"p1":{"x":10,"y":20},"p2":{"x":70,"y":100}}})",
                   "application/json");
    m = json::parse(res->body);
    const auto manual = measure_manual({{10, 20}, {70, 100}}, Calibration(0.05));
    c.expect(m.at("pixels").get<double>() == manual.pixels, "manual pixels");
    c.expect(m.at("cm").get<double>() == manual.pixels * 0.05, "manual cm");

    res = cli.Get("/cases");
    c.expect(json::parse(res->body).size() == 1, "case list");

    server.stop();
    listener.join();
    c.note("no webui component is built or linked");
  });

  std::cout << (g_failed ? "FAILED " : "ALL PASSED ") << g_failed << " criteria failed" << std::endl;
  return g_failed ? 1 : 0;
}
