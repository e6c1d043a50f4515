#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "plenreg/io.hpp"

namespace fs = std::filesystem;
using plenreg::json;
using plenreg::read_file;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("plenreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args, const std::string& env = "") {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" PLENREG_BIN "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, read_file(out), read_file(err)};
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string fixture(const std::string& name) { return std::string(PLENREG_FIXTURES) + "/" + name; }

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("register bogus --cloud0 a --cam0-pose b").status, 2);
  EXPECT_EQ(run("--help").status, 0);
}

TEST_F(Cli, IoErrorsExitTwo) {
  const Outcome r = run("parse-mla does_not_exist.xml");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(run("parse-mla " + fixture("mla_canonical.xml") + " --config missing.toml").status, 2);
}

TEST_F(Cli, ParseMlaGolden) {
  const Outcome r = run("parse-mla " + fixture("mla_canonical.xml"));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, read_file(fixture("mla_canonical.xml")));
  EXPECT_NE(r.err.find("seed: 0"), std::string::npos);

  const Outcome j = run("parse-mla " + fixture("mla_attributes.xml") + " --json");
  EXPECT_EQ(j.status, 0);
  EXPECT_EQ(json::parse(j.out)["tcp"].get<double>(), 7.5);
  EXPECT_NE(j.err.find("warning"), std::string::npos);
}

TEST_F(Cli, SeedResolution) {
  EXPECT_NE(run("parse-mla " + fixture("mla_canonical.xml"), "PLENREG_SEED=17").err.find("seed: 17"),
            std::string::npos);
  EXPECT_NE(run("parse-mla " + fixture("mla_canonical.xml") + " --seed 9", "PLENREG_SEED=17").err.find("seed: 9"),
            std::string::npos);
  plenreg::write_file(path("cfg.toml"), "seed = 23\n");
  EXPECT_NE(run("parse-mla " + fixture("mla_canonical.xml") + " --params cfg.toml", "PLENREG_SEED=17")
                .err.find("seed: 23"),
            std::string::npos);
  EXPECT_EQ(run("parse-mla " + fixture("mla_canonical.xml"), "PLENREG_SEED=abc").status, 2);
}

TEST_F(Cli, SynthRegisterEvaluate) {
  ASSERT_EQ(run("synth --out-dir data --seed 5").status, 0);
  const json truth = json::parse(read_file(path("data/truth.json")));
  const std::string common = " --cloud0 data/cloud0.lfmf --cam0-pose data/cam0_pose.json";

  const Outcome r3 = run("register ransac3d" + common + " --cloudX data/cloudx.lfmf --calibX data/camx_pose.json --out r3.json --seed 5");
  ASSERT_EQ(r3.status, 0) << r3.err;
  const json j3 = json::parse(read_file(path("r3.json")));
  EXPECT_EQ(j3["method"], "ransac3d");
  EXPECT_EQ(j3["seed"], 5);
  EXPECT_EQ(j3["extrinsic"]["parent"], "CX");
  EXPECT_EQ(j3["extrinsic"]["child"], "C0");
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(j3["extrinsic"]["translation"][i].get<double>(),
                truth["extrinsic"]["translation"][i].get<double>(), 1e-2);
  }

  const Outcome rp = run("register pnp" + common + " --image-features data/image.lfmf --intrinsics data/intrinsics.json --out rp.json --seed 5");
  ASSERT_EQ(rp.status, 0) << rp.err;
  const json jp = json::parse(read_file(path("rp.json")));
  for (int i = 0; i < 9; ++i) {
    EXPECT_NEAR(jp["extrinsic"]["rotation"][i].get<double>(), truth["extrinsic"]["rotation"][i].get<double>(), 1e-6);
  }

  // Repeated and multi-threaded runs give identical output.
  ASSERT_EQ(run("register pnp" + common + " --image data/image.lfmf --intrinsics data/intrinsics.json --out rp2.json --seed 5 --threads 4").status, 0);
  EXPECT_EQ(read_file(path("rp.json")), read_file(path("rp2.json")));
  ASSERT_EQ(run("register ransac3d" + common + " --cloudx data/cloudx.lfmf --camx-pose data/camx_pose.json --out r3b.json --seed 5 --threads 3").status, 0);
  EXPECT_EQ(read_file(path("r3.json")), read_file(path("r3b.json")));

  const Outcome al = run("align --vicon data/vicon.csv --schema data/vicon_schema.toml --plate data/plate.json --frames 20 --out aligned.json");
  ASSERT_EQ(al.status, 0) << al.err;
  EXPECT_EQ(json::parse(read_file(path("aligned.json")))["poses"].size(), 20u);

  const Outcome ev = run("evaluate --est data/trajectory_est.json --gt data/vicon.csv --schema data/vicon_schema.toml "
                     "--plate data/plate.json --out report.csv --per-axis --diff data/trajectory_gt.json --sequence s5");
  ASSERT_EQ(ev.status, 0) << ev.err;
  const std::string csv = read_file(path("report.csv"));
  EXPECT_TRUE(csv.starts_with("sequence,synthetic_T_RMSE_mm")) << csv;
  EXPECT_NE(csv.find("\ns5,"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("report_per_axis.csv")));
  EXPECT_TRUE(fs::exists(path("report_difference.csv")));

  const Outcome evj = run("evaluate --est data/trajectory_est.json --gt aligned.json --out report.json");
  ASSERT_EQ(evj.status, 0) << evj.err;
  const json rep = json::parse(read_file(path("report.json")));
  EXPECT_GT(rep["sequences"][0]["methods"][0]["relative"]["translation"]["rmse"].get<double>(), 0.0);
}

TEST_F(Cli, AlgorithmicFailureExitsOne) {
  ASSERT_EQ(run("synth --out-dir data --seed 2").status, 0);
  const Outcome r = run("register pnp --cloud0 data/cloud0.lfmf --cam0-pose data/cam0_pose.json --image data/image.lfmf "
                    "--intrinsics data/intrinsics.json --min-inliers 500");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("stage pnp"), std::string::npos) << r.err;

  // Mismatched trajectory lengths.
  plenreg::write_file(path("short.json"), R"({"poses": [null]})");
  EXPECT_EQ(run("evaluate --est short.json --gt data/trajectory_gt.json --out x.json").status, 1);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  ASSERT_EQ(run("synth --out-dir data").status, 0);
  plenreg::write_file(path("bad.toml"), "[ransac3d]\nunknown_key = 1\n");
  EXPECT_EQ(run("register ransac3d --cloud0 data/cloud0.lfmf --cam0-pose data/cam0_pose.json --cloudx data/cloudx.lfmf "
                "--camx-pose data/camx_pose.json --config bad.toml").status,
            2);
  // Missing inputs for the chosen method.
  EXPECT_EQ(run("register pnp --cloud0 data/cloud0.lfmf --cam0-pose data/cam0_pose.json").status, 2);
  // Calibration pose that does not involve the cloud frame.
  EXPECT_EQ(run("register ransac3d --cloud0 data/cloud0.lfmf --cam0-pose data/cam0_pose.json --cloudx data/cloudx.lfmf "
                "--camx-pose data/cam0_pose.json").status,
            2);
}

TEST_F(Cli, SynthIsDeterministic) {
  ASSERT_EQ(run("synth --out-dir a --seed 8").status, 0);
  ASSERT_EQ(run("synth --out-dir b --seed 8 --threads 4").status, 0);
  for (const char* f : {"cloud0.lfmf", "cloudx.lfmf", "image.lfmf", "truth.json", "vicon.csv", "trajectory_est.json"}) {
    EXPECT_EQ(read_file(path(std::string("a/") + f)), read_file(path(std::string("b/") + f))) << f;
  }
}
