#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>

#include "mammoseg/mammoseg.hpp"
#include "mammoseg/phantom.hpp"

using namespace mammoseg;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(MAMMOSEG_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class CliFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mammoseg_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_ / "in");
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_phantom(const std::string& name, std::uint64_t seed = 3) {
    DiskPhantom p;
    p.salt_pepper = 0.02;
    p.seed = seed;
    const auto path = dir_ / "in" / name;
    write_file_bytes(path.string(), write_pgm(make_disk_phantom(p)));
    return path;
  }

  std::string out() const { return (dir_ / "out").string(); }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  const auto b = read_file_bytes(p.string());
  return {b.begin(), b.end()};
}

}  // namespace

TEST_F(CliFixture, PhantomIsClassified) {
  const auto in = write_phantom("case1.pgm");
  const auto r = run("run " + in.string() + " --out-dir " + out() + " --cm-per-px 0.02 --classify");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("type=malignant"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("stage=low-medium"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("t_category=T1c"), std::string::npos) << r.out;

  const auto report = deserialize_report(slurp(fs::path(out()) / "case1.report.json"));
  EXPECT_NEAR(report.diameter_cm, 1.2, 0.048);
  EXPECT_TRUE(is_consistent(report));

  const auto state = run_pipeline(load_pgm(in.string()));
  const auto d = auto_diameter(measurement_components(state));
  EXPECT_DOUBLE_EQ(report.diameter_px, d.pixels);

  const auto hist = nlohmann::json::parse(slurp(fs::path(out()) / "case1.histogram.json"));
  const auto expected = histogram(median_filter(load_pgm(in.string())));
  EXPECT_EQ(hist.get<std::vector<std::uint64_t>>(),
            std::vector<std::uint64_t>(expected.bins.begin(), expected.bins.end()));
  EXPECT_TRUE(fs::exists(fs::path(out()) / "case1.mask.pgm"));
  EXPECT_TRUE(fs::exists(fs::path(out()) / "case1.report.txt"));
}

TEST_F(CliFixture, ClassifyWithoutCalibrationIsUsageError) {
  const auto in = write_phantom("case1.pgm");
  const auto r = run("run " + in.string() + " --out-dir " + out() + " --classify");
  EXPECT_EQ(r.status, 2);
  EXPECT_FALSE(fs::exists(fs::path(out()) / "case1.mask.pgm"));
  EXPECT_FALSE(fs::exists(fs::path(out()) / "case1.report.json"));
}

TEST_F(CliFixture, UnknownFlagIsUsageError) {
  EXPECT_EQ(run("run --bogus x.pgm").status, 2);
  EXPECT_EQ(run("").status, 2);
}

TEST_F(CliFixture, DirectoryWithCorruptFileContinues) {
  write_phantom("a.pgm", 1);
  write_phantom("b.pgm", 2);
  write_file_bytes((dir_ / "in" / "c.pgm").string(), std::string("P5\n10 10\n255\nshort"));
  const auto r = run("run " + (dir_ / "in").string() + " --out-dir " + out() + " --cm-per-px 0.02 --classify");
  EXPECT_EQ(r.status, 1);
  EXPECT_TRUE(fs::exists(fs::path(out()) / "a.report.json"));
  EXPECT_TRUE(fs::exists(fs::path(out()) / "b.report.json"));
  EXPECT_FALSE(fs::exists(fs::path(out()) / "c.report.json"));
  EXPECT_FALSE(fs::exists(fs::path(out()) / "c.mask.pgm"));
}

TEST_F(CliFixture, FixedTimestampIsDeterministic) {
  const auto in = write_phantom("case1.pgm");
  const std::string args = "run " + in.string() + " --out-dir " + out() +
                           " --cm-per-px 0.02 --classify --fixed-timestamp 2026-01-01T00:00:00Z";
  ASSERT_EQ(run(args).status, 0);
  const auto first = slurp(fs::path(out()) / "case1.report.json");
  ASSERT_EQ(run(args).status, 0);
  EXPECT_EQ(slurp(fs::path(out()) / "case1.report.json"), first);
  EXPECT_EQ(deserialize_report(first).generated_at, "2026-01-01T00:00:00Z");
}

TEST_F(CliFixture, PhantomSubcommandMatchesLibrary) {
  const auto path = dir_ / "p.pgm";
  ASSERT_EQ(run("phantom " + path.string() + " --noise 0.02 --seed 9").status, 0);
  DiskPhantom p;
  p.salt_pepper = 0.02;
  p.seed = 9;
  EXPECT_EQ(load_pgm(path.string()), make_disk_phantom(p));
}
