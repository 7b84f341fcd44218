// mammoseg: batch tumour-measurement runner, phantom generator and HTTP service.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mammoseg/http_api.hpp"
#include "mammoseg/mammoseg.hpp"
#include "mammoseg/phantom.hpp"

namespace fs = std::filesystem;
using namespace mammoseg;

namespace {

struct RunOptions {
  std::vector<std::string> inputs;
  std::string out_dir = "mammoseg-out";
  PipelineConfig config;
  std::string pipeline;
  std::optional<double> cm_per_px;
  bool classify = false;
  std::string patient_id;
  std::optional<std::string> fixed_timestamp;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_summary(const std::string& stem, double px, const std::optional<TestReport>& r) {
  std::ostringstream os;
  os << stem << " diameter_px=" << format_half_up(px);
  if (r) {
    os << " diameter_cm=" << format_half_up(r->diameter_cm) << " type=" << to_string(r->tumor_type)
       << " stage=" << to_string(r->risk_stage)
       << " t_category=" << (r->t_category ? std::string(to_string(*r->t_category)) : "-");
  }
  return os.str();
}

// Processes one image; returns false on failure (already reported on stderr).
bool process_image(const fs::path& input, const RunOptions& opt) {
  try {
    const GrayImage image = load_pgm(input.string());
    const PipelineState state = run_pipeline(image, opt.config);
    const Components comps = measurement_components(state, opt.config.connectivity);
    const AutoDiameter d = auto_diameter(comps, opt.config.min_area);

    const std::string stem = input.stem().string();
    const fs::path out = fs::path(opt.out_dir);
    BinaryMask mask = mask_of_labels(comps.labels);
    if (d.label) mask = mask_of_label(comps.labels, *d.label);
    write_file_bytes((out / (stem + ".mask.pgm")).string(), write_pgm(mask));

    const Histogram h = histogram(state.current_image());
    write_file_bytes((out / (stem + ".histogram.json")).string(), nlohmann::json(h.bins).dump());

    std::optional<TestReport> report;
    if (opt.classify) {
      const Calibration cal(*opt.cm_per_px);
      const DiameterMeasurement m{d.pixels, pixels_to_cm(d.pixels, cal), MeasureMethod::Auto, d.area};
      PipelineProvenance provenance = state.provenance;
      provenance.push_back(service::CaseStore::measurement_step(m, cal));
      PatientRecord record{opt.patient_id.empty() ? stem : opt.patient_id, std::nullopt,
                           std::nullopt};
      report = generate_report(record, m, cal, std::move(provenance), opt.fixed_timestamp);
      write_file_bytes((out / (stem + ".report.json")).string(), serialize_report(*report));
      write_file_bytes((out / (stem + ".report.txt")).string(), render_report_text(*report));
    }
    std::cout << format_summary(stem, d.pixels, report) << std::endl;
    return true;
  } catch (const Error& e) {
    std::cerr << input.string() << ": " << to_string(e.code()) << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << input.string() << ": " << e.what() << "\n";
  }
  return false;
}

int run_batch(RunOptions opt) {
  if (opt.classify && !opt.cm_per_px) {
    std::cerr << "error: --classify requires --cm-per-px\n";
    return 2;
  }
  if (opt.cm_per_px) {
    if (!(*opt.cm_per_px > 0.0)) {
      std::cerr << "error: --cm-per-px must be positive\n";
      return 2;
    }
    opt.classify = true;
  }
  if (!opt.pipeline.empty()) {
    opt.config.steps = split_list(opt.pipeline);
    for (const auto& s : opt.config.steps) {
      if (!is_pipeline_step(s)) {
        std::cerr << "error: unknown pipeline step '" << s << "'\n";
        return 2;
      }
    }
  }
  if (opt.config.median_window < 1 || opt.config.median_window % 2 == 0) {
    std::cerr << "error: --median-window must be odd and positive\n";
    return 2;
  }
  try {
    StructuringElement::from_name(opt.config.se);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<fs::path> files;
  for (const auto& in : opt.inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      std::cerr << "error: no such input " << in << "\n";
      return 2;
    }
  }
  if (files.empty()) {
    std::cerr << "error: no .pgm inputs found\n";
    return 2;
  }
  fs::create_directories(opt.out_dir);

  bool ok = true;
  for (const auto& f : files) ok = process_image(f, opt) && ok;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mammogram tumour segmentation, measurement and staging"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run the pipeline on PGM images or directories");
  run_cmd->add_option("inputs", run.inputs, "PGM files or directories")->required();
  run_cmd->add_option("--out-dir", run.out_dir, "Directory for artefacts");
  run_cmd->add_option("--median-window", run.config.median_window, "Median window (odd)");
  run_cmd->add_option("--se", run.config.se, "Structuring element: square3, square5, cross3, cross5, disk<r>");
  run_cmd->add_option("--connectivity", run.config.connectivity, "4 or 8")
      ->check(CLI::IsMember({4, 8}));
  run_cmd->add_option("--h-min", run.config.h_min, "h-minima depth for watershed markers")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--min-area", run.config.min_area, "Smallest component counted as a lump")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--invert", run.config.invert, "Treat dark pixels as foreground");
  run_cmd->add_option("--cm-per-px", run.cm_per_px, "Calibration (cm per pixel)");
  run_cmd->add_flag("--classify", run.classify, "Classify and write reports (needs --cm-per-px)");
  run_cmd->add_option("--patient-id", run.patient_id, "Patient id for reports (default: file stem)");
  run_cmd->add_option("--pipeline", run.pipeline, "Comma-separated step list");
  run_cmd->add_option("--fixed-timestamp", run.fixed_timestamp, "Report timestamp override");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string ui_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP case service");
  serve_cmd->add_option("--listen", host, "Listen address")->envname("MAMMOSEG_LISTEN");
  serve_cmd->add_option("--port", port, "Listen port")->envname("MAMMOSEG_PORT");
  serve_cmd->add_option("--data-dir", data_dir, "Case persistence directory")
      ->envname("MAMMOSEG_DATA_DIR");
  serve_cmd->add_option("--ui-dir", ui_dir, "Static files served at /")->envname("MAMMOSEG_UI_DIR");

  DiskPhantom phantom;
  std::string phantom_out;
  int phantom_fg = phantom.foreground;
  int phantom_bg = phantom.background;
  auto* phantom_cmd = app.add_subcommand("phantom", "Write a synthetic disk phantom PGM");
  phantom_cmd->add_option("output", phantom_out, "Output PGM path")->required();
  phantom_cmd->add_option("--size", phantom.width, "Width and height")->check(CLI::PositiveNumber);
  phantom_cmd->add_option("--radius", phantom.radius, "Disk radius in pixels");
  phantom_cmd->add_option("--noise", phantom.salt_pepper, "Salt-and-pepper fraction")
      ->check(CLI::Range(0.0, 1.0));
  phantom_cmd->add_option("--seed", phantom.seed, "Noise seed");
  phantom_cmd->add_option("--foreground", phantom_fg)->check(CLI::Range(0, 255));
  phantom_cmd->add_option("--background", phantom_bg)->check(CLI::Range(0, 255));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*run_cmd) return run_batch(run);

  if (*phantom_cmd) {
    phantom.height = phantom.width;
    phantom.center_x = phantom.center_y = phantom.width / 2.0;
    phantom.foreground = static_cast<std::uint8_t>(phantom_fg);
    phantom.background = static_cast<std::uint8_t>(phantom_bg);
    try {
      write_file_bytes(phantom_out, write_pgm(make_disk_phantom(phantom)));
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    return 0;
  }

  std::optional<fs::path> dir;
  if (!data_dir.empty()) dir = data_dir;
  service::CaseStore store(dir);
  httplib::Server server;
  service::register_routes(server, store);
  if (!ui_dir.empty() && !server.set_mount_point("/", ui_dir)) {
    std::cerr << "error: cannot serve UI from " << ui_dir << "\n";
    return 2;
  }
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}
