#include "mcf/pipeline.hpp"
#include "mcf/report.hpp"
#include "mcf/scenario.hpp"
#include "mcf/trajectory_io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

using namespace mcf;
namespace fs = std::filesystem;

const char* kSmallCircle = R"(schema: 1
name: small-circle
shape:
  type: circle
  r0: 1.0
grid:
  samples: 64
flow:
  dt_safety: 0.45
  stop_factor: 40
  snapshot_stride: 200
  crossing_levels: 4
analysis:
  rescale_levels: 3
)";

const char* kSmallGraph = R"(schema: 1
name: small-graph
seed: 3
shape:
  type: graph
  preset: random
  r: 1.0
  m: 2
  n: 1
  degree: 3
grid:
  samples: 17
flow:
  max_steps: 40
  snapshot_stride: 20
analysis:
  graph_radius_anchors: 4
)";

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("mcf_cli_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string bundled(const std::string& name) {
  return (fs::path(MCF_SCENARIO_DIR) / (name + ".scenario")).string();
}

// Runs mcflab and returns its exit code; stderr goes to `err` when given.
int mcflab(const std::string& args, const fs::path& err = {}) {
  std::string cmd = std::string("\"") + MCFLAB_PATH + "\" " + args + " > /dev/null";
  cmd += err.empty() ? " 2> /dev/null" : " 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string with_line(const std::string& text, const std::string& after, const std::string& line) {
  const std::size_t pos = text.find(after);
  EXPECT_NE(pos, std::string::npos);
  const std::size_t eol = text.find('\n', pos);
  return text.substr(0, eol + 1) + line + "\n" + text.substr(eol + 1);
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::InvalidArgument;
}

TEST(LoadScenario, BundledCircle) {
  const ScenarioSpec spec = load_scenario(bundled("circle"));
  EXPECT_EQ(spec.shape.type, ShapeType::Circle);
  EXPECT_EQ(spec.shape.r0, 1.0);
  EXPECT_EQ(spec.samples, 512);
  EXPECT_EQ(spec.name, "circle");
}

TEST(LoadScenario, EveryBundledScenarioParses) {
  for (const auto& entry : fs::directory_iterator(MCF_SCENARIO_DIR)) {
    if (entry.path().extension() != ".scenario") continue;
    EXPECT_NO_THROW(load_scenario(entry.path().string())) << entry.path();
  }
}

TEST(LoadScenario, UnknownKeyNamesKeyAndLine) {
  const std::string text = with_line(kSmallCircle, "dt_safety", "  viscosity: 0.1");
  try {
    parse_scenario(text, "bad.scenario");
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("viscosity"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bad.scenario:10"), std::string::npos) << msg;
  }
}

TEST(LoadScenario, MalformedYamlIsParseError) {
  EXPECT_EQ(kind_of([] { parse_scenario("schema: 1\nshape: [unclosed\n"); }), ErrorKind::ParseError);
}

TEST(LoadScenario, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { load_scenario("/nonexistent/x.scenario"); }), ErrorKind::IoError);
}

TEST(LoadScenario, NonPositiveNeckIsValidationError) {
  std::string text = R"(schema: 1
name: bad
shape:
  type: dumbbell
  bell_r: 1.0
  neck_r: -0.2
  neck_len: 1.0
grid:
  samples: 4
)";
  try {
    parse_scenario(text);
    FAIL() << "expected ValidationError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    const std::string msg = e.what();
    // Both violated invariants are listed.
    EXPECT_NE(msg.find("neck_r"), std::string::npos) << msg;
    EXPECT_NE(msg.find("samples"), std::string::npos) << msg;
  }
}

TEST(LoadScenario, UnsupportedSchemaVersion) {
  std::string text = kSmallCircle;
  text.replace(0, 9, "schema: 2");
  EXPECT_EQ(kind_of([&] { parse_scenario(text); }), ErrorKind::ParseError);
}

TEST(LoadScenario, TextRoundTrip) {
  for (const char* name : {"circle", "dumbbell", "ellipse", "graph", "sphere", "trefoil"}) {
    const ScenarioSpec spec = load_scenario(bundled(name));
    const std::string text = scenario_to_text(spec);
    EXPECT_EQ(scenario_to_text(parse_scenario(text)), text) << name;
  }
}

TEST(TrajectoryIo, RoundTripIsExact) {
  const ScenarioSpec spec = parse_scenario(kSmallCircle);
  const Trajectory traj = run(make_flow_config(spec));
  TempDir dir;
  write_trajectory(traj, spec, dir.path().string());
  const StoredTrajectory back = read_trajectory(dir.path().string());
  ASSERT_EQ(back.traj.snapshots.size(), traj.snapshots.size());
  EXPECT_EQ(back.traj.diagnostics.size(), traj.diagnostics.size());
  EXPECT_EQ(back.traj.stop_reason, traj.stop_reason);
  EXPECT_EQ(back.traj.Q0, traj.Q0);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    EXPECT_EQ(back.traj.snapshots[i].t, traj.snapshots[i].t);
    EXPECT_EQ(back.traj.snapshots[i].crossing_level, traj.snapshots[i].crossing_level);
    EXPECT_EQ((back.traj.snapshots[i].imm.positions - traj.snapshots[i].imm.positions).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_EQ(back.traj.diagnostics.back().int_dtg, traj.diagnostics.back().int_dtg);
  EXPECT_EQ(back.spec.name, "small-circle");
}

TEST(TrajectoryIo, CorruptedIndexIsIoError) {
  TempDir dir;
  write_text_file((dir / "index.json").string(), "{\"format\": \"mcf-trajectory\", \"snapshots\": [");
  EXPECT_EQ(kind_of([&] { read_trajectory(dir.path().string()); }), ErrorKind::IoError);
  EXPECT_EQ(kind_of([&] { read_trajectory((dir / "missing").string()); }), ErrorKind::IoError);
}

TEST(TrajectoryIo, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Pipeline, CircleAllStages) {
  TempDir dir;
  const ScenarioSpec spec = parse_scenario(kSmallCircle);
  PipelineOptions opts;
  opts.out_dir = dir.path().string();
  const int code = run_pipeline(spec, {Stage::Simulate, Stage::Analyze, Stage::Verify, Stage::Rescale}, opts);
  EXPECT_EQ(code, kExitPass);
  for (const char* f : {"index.json", "diagnostics.csv", "analysis.json", "verification.json", "rescale.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const std::string analysis = read_text_file((dir / "analysis.json").string());
  const std::size_t pos = analysis.find("\"T_est\": ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(analysis.substr(pos + 9)), 0.5, 0.01);
  EXPECT_NE(report_stage(dir.path().string()).find("small-circle"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
}

TEST(Pipeline, UnknownCheckIdIsRejected) {
  TempDir dir;
  const ScenarioSpec spec = parse_scenario(kSmallGraph);
  simulate_stage(spec, dir.path().string());
  EXPECT_EQ(kind_of([&] { verify_stage(dir.path().string(), dir.path().string(), ToleranceProfile::Default, {"bogus"}); }),
            ErrorKind::InvalidArgument);
}

TEST(Pipeline, RescaleNeedsSingularStop) {
  TempDir dir;
  simulate_stage(parse_scenario(kSmallGraph), dir.path().string());
  EXPECT_EQ(kind_of([&] { rescale_stage(dir.path().string(), dir.path().string(), 2); }), ErrorKind::InsufficientData);
}

TEST(Pipeline, RepeatedRunsAreByteIdentical) {
  TempDir a, b;
  const ScenarioSpec spec = parse_scenario(kSmallGraph);
  for (const TempDir* d : {&a, &b}) {
    PipelineOptions opts;
    opts.out_dir = d->path().string();
    EXPECT_EQ(run_pipeline(spec, {Stage::Simulate, Stage::Analyze, Stage::Verify}, opts), kExitPass);
  }
  for (const char* f : {"index.json", "diagnostics.csv", "analysis.json", "verification.json"}) {
    EXPECT_EQ(read_text_file((a / f).string()), read_text_file((b / f).string())) << f;
  }
}

TEST(Cli, SimulateThenVerifyOnly) {
  TempDir dir;
  const fs::path scenario = dir / "graph.scenario";
  write_text_file(scenario.string(), kSmallGraph);
  const fs::path traj = dir / "traj";
  ASSERT_EQ(mcflab("simulate \"" + scenario.string() + "\" --out \"" + traj.string() + "\""), 0);
  const auto stamp = fs::last_write_time(traj / "index.json");
  EXPECT_EQ(mcflab("verify \"" + traj.string() + "\" --tolerance-profile strict"), 0);
  EXPECT_EQ(fs::last_write_time(traj / "index.json"), stamp);
  EXPECT_TRUE(fs::exists(traj / "verification.json"));
  EXPECT_EQ(mcflab("verify \"" + traj.string() + "\" --checks trace_A,hessian_bound"), 0);
  const std::string report = read_text_file((traj / "verification.json").string());
  EXPECT_NE(report.find("hessian_bound"), std::string::npos);
  EXPECT_EQ(report.find("eigen_bound"), std::string::npos);
  EXPECT_EQ(mcflab("report \"" + traj.string() + "\""), 0);
}

TEST(Cli, CorruptedIndexExitsTwo) {
  TempDir dir;
  write_text_file((dir / "index.json").string(), "not json");
  const fs::path err = dir / "err.txt";
  EXPECT_EQ(mcflab("verify \"" + dir.path().string() + "\"", err), 2);
  EXPECT_NE(read_text_file(err.string()).find("IoError"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  TempDir dir;
  EXPECT_EQ(mcflab("simulate /nonexistent.scenario"), 2);
  EXPECT_EQ(mcflab("frobnicate"), 2);
  EXPECT_EQ(mcflab("verify \"" + dir.path().string() + "\" --tolerance-profile lax"), 2);
}

TEST(Cli, SeedChangesGraphScenario) {
  TempDir dir;
  const fs::path scenario = dir / "graph.scenario";
  write_text_file(scenario.string(), kSmallGraph);
  for (const char* seed : {"3", "4"}) {
    ASSERT_EQ(mcflab("simulate \"" + scenario.string() + "\" --seed " + seed + " --out \"" + (dir / seed).string() + "\""), 0);
  }
  const std::string a = read_text_file((dir / "3" / "snapshots" / "snap_00000.csv").string());
  const std::string b = read_text_file((dir / "4" / "snapshots" / "snap_00000.csv").string());
  EXPECT_NE(a, b);
}

}  // namespace
