// Copyright 2026 The bsmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <sys/wait.h>

#include "bsmkit/cli.hpp"
#include "bsmkit/io.hpp"
#include "bsmkit/scene.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bsm;
using bsm::testing::TempDir;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(std::vector<std::string> args) { return cli::run(args); }

// Small analytic data set on ring:N used by most cases.
struct Fixture {
  TempDir dir{"cli"};
  std::string v, h;
  explicit Fixture(const std::string& distance = "0.45", const std::string& grid = "ring:24") {
    v = dir.file("v.bsm");
    h = dir.file("h.bsm");
    REQUIRE(run({"gen-steering", "--grid", grid, "--distance", distance, "--fs", "16000", "--nfft", "64",
                 "--out", v}) == 0);
    REQUIRE(run({"gen-hrtf", "--grid", grid, "--distance", distance, "--fs", "16000", "--nfft", "64",
                 "--out", h}) == 0);
  }
};

}  // namespace

TEST_CASE("exit codes for usage errors") {
  CHECK(run({}) == cli::kExitUsage);  // a subcommand is required
  CHECK(run({"--version"}) == cli::kExitOk);
  CHECK(run({"no-such-command"}) == cli::kExitUsage);
  CHECK(run({"gen-steering", "--grid", "ring:8"}) == cli::kExitUsage);  // missing --distance
  CHECK(run({"gen-steering", "--distance", "far", "--out", "/tmp/x.bsm"}) == cli::kExitUsage);
  CHECK(run({"gen-steering", "--distance", "1", "--nfft", "abc", "--out", "/tmp/x.bsm"}) == cli::kExitUsage);
  CHECK(run({"sweep", "--out-dir", "/tmp/bsmkit-none"}) == cli::kExitUsage);
  CHECK(run({"sweep", "--out-dir", "/tmp/bsmkit-none", "--criteria", ""}) == cli::kExitUsage);
  CHECK(run({"sweep", "--out-dir", "/tmp/bsmkit-none", "--criteria", "bogus"}) == cli::kExitUsage);
}

TEST_CASE("exit-code mapping covers every error kind") {
  CHECK(cli::exit_code_for(ErrorCode::kInvalidArgument) == 2);
  CHECK(cli::exit_code_for(ErrorCode::kBadFrameConfig) == 2);
  CHECK(cli::exit_code_for(ErrorCode::kIncompatible) == 3);
  CHECK(cli::exit_code_for(ErrorCode::kDimsMismatch) == 3);
  CHECK(cli::exit_code_for(ErrorCode::kChecksumMismatch) == 3);
  CHECK(cli::exit_code_for(ErrorCode::kSchemaUnknown) == 3);
  CHECK(cli::exit_code_for(ErrorCode::kSourceInsideArray) == 3);
  CHECK(cli::exit_code_for(ErrorCode::kIo) == 3);
  CHECK(cli::exit_code_for(ErrorCode::kSingularSystem) == 4);
  CHECK(cli::exit_code_for(ErrorCode::kNoConvergence) == 4);
  CHECK(cli::exit_code_for(ErrorCode::kZeroReference) == 4);
  CHECK(cli::exit_code_for(ErrorCode::kSilentChannel) == 4);
  CHECK(cli::exit_code_for(ErrorCode::kAllBinsExcluded) == 4);
}

TEST_CASE("gen-steering records distance and grid in the manifest") {
  TempDir dir("cli");
  const std::string out = dir.file("v.bsm");
  REQUIRE(run({"gen-steering", "--grid", "ring:72", "--distance", "0.15", "--nfft", "32", "--out", out}) == 0);
  const SteeringSet v = load_steering(out);
  CHECK(v.source_distance == SourceDistance::meters(0.15));
  CHECK(v.num_dirs() == 72);
  CHECK(v.num_mics() == 5);
  CHECK(v.num_freqs() == 17);
  CHECK(v.provenance.at("command").find("--distance 0.15") != std::string::npos);
  CHECK(slurp(out).find("\"source_distance\": 0.15") != std::string::npos);

  REQUIRE(run({"gen-steering", "--grid", "ring:8", "--distance", "planewave", "--nfft", "32", "--out", out}) == 0);
  CHECK(load_steering(out).source_distance.is_plane_wave());
  CHECK(slurp(out).find("\"source_distance\": \"planewave\"") != std::string::npos);

  // Source spheres inside the array radius are rejected as bad arguments.
  CHECK(run({"gen-steering", "--grid", "ring:8", "--distance", "0.05", "--nfft", "32", "--out", out}) ==
        cli::kExitUsage);
}

TEST_CASE("grid and geometry files") {
  TempDir dir("cli");
  {
    std::ofstream g(dir.file("grid.txt"));
    g << "# units: deg-elevation\n0 0\n90 0\n180 30\n";
    std::ofstream m(dir.file("geom.txt"));
    m << "# label x y z\na 0.05 0 0\nb -0.05 0 0\nc 0 0.05 0\n";
  }
  const std::string out = dir.file("v.bsm");
  REQUIRE(run({"gen-steering", "--geometry", dir.file("geom.txt"), "--grid", dir.file("grid.txt"),
               "--distance", "1", "--nfft", "16", "--out", out}) == 0);
  const SteeringSet v = load_steering(out);
  CHECK(v.num_mics() == 3);
  REQUIRE(v.num_dirs() == 3);
  CHECK((*v.grid)[2].elevation_deg() == doctest::Approx(30.0));
  CHECK((*v.grid)[1].azimuth_deg() == doctest::Approx(90.0));
  CHECK(v.geometry->labels[1] == "b");
  CHECK(run({"gen-steering", "--grid", dir.file("missing.txt"), "--distance", "1", "--out", out}) ==
        cli::kExitUsage);
}

TEST_CASE("design writes a mixed filter whose low band equals LS") {
  Fixture fx;
  const std::string mixed = fx.dir.file("c.bsm");
  const std::string ls = fx.dir.file("ls.bsm");
  REQUIRE(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--out", mixed}) == 0);
  REQUIRE(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--criterion", "ls", "--out", ls}) == 0);
  const BsmFilterBank c = load_filterbank(mixed);
  const BsmFilterBank l = load_filterbank(ls);
  CHECK(c.criterion == Criterion::kMixed);
  CHECK(c.noise.snr_db() == doctest::Approx(20.0));
  CHECK(c.provenance.at("steering_file") == fx.v);
  CHECK(c.provenance.at("hrtf_file") == fx.h);
  CHECK(c.provenance.at("command").rfind("bsmkit design", 0) == 0);
  CHECK(slurp(mixed).find("\"criterion\": \"mixed\"") != std::string::npos);
  for (std::size_t f = 0; f < c.num_freqs(); ++f) {
    if (c.freq_axis->frequency(f) < 800.0) {
      CHECK((c.weights[f] - l.weights[f]).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  // FoV flag is stored.
  REQUIRE(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--fov", "30:20:0.1", "--out", mixed}) == 0);
  const BsmFilterBank cf = load_filterbank(mixed);
  REQUIRE(cf.fov);
  CHECK(cf.fov->beta == doctest::Approx(0.1));
  CHECK(cf.fov->az_halfwidth == doctest::Approx(deg2rad(30.0)));
  CHECK(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--fov", "30:20", "--out", mixed}) ==
        cli::kExitUsage);
  CHECK(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--criterion", "fast", "--out", mixed}) ==
        cli::kExitUsage);
}

TEST_CASE("incompatible inputs exit with the data code") {
  Fixture fx;
  TempDir other("cli");
  const std::string h2 = other.file("h.bsm");
  REQUIRE(run({"gen-hrtf", "--grid", "ring:12", "--distance", "0.45", "--fs", "16000", "--nfft", "64",
               "--out", h2}) == 0);
  CHECK(run({"design", "--steering", fx.v, "--hrtf", h2, "--out", other.file("c.bsm")}) == cli::kExitData);
  // Wrong kind in the filter slot.
  CHECK(run({"evaluate", "--filter", fx.v, "--steering-eval", fx.v, "--hrtf-eval", fx.h, "--out-prefix",
             other.file("r")}) == cli::kExitData);
  CHECK(run({"design", "--steering", other.file("none.bsm"), "--hrtf", fx.h, "--out", other.file("c.bsm")}) ==
        cli::kExitData);
}

TEST_CASE("evaluate writes both tables") {
  Fixture fx;
  const std::string c = fx.dir.file("c.bsm");
  REQUIRE(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--out", c}) == 0);
  const std::string prefix = fx.dir.file("sub/report");
  REQUIRE(run({"evaluate", "--filter", c, "--steering-eval", fx.v, "--hrtf-eval", fx.h, "--out-prefix", prefix}) ==
          0);
  const MetricsReport r = load_report_csv(prefix + "_freq.csv", prefix + "_dir.csv");
  CHECK(r.frequency_rows.size() == 33);
  CHECK(r.direction_rows.size() == 48);  // ILD and ITD for 24 directions
  REQUIRE(run({"evaluate", "--filter", c, "--steering-eval", fx.v, "--hrtf-eval", fx.h, "--region", "in-fov",
               "--no-per-direction", "--out-prefix", prefix}) == 0);
  const MetricsReport r2 = load_report_csv(prefix + "_freq.csv", prefix + "_dir.csv");
  CHECK(r2.direction_rows.empty());
  CHECK(run({"evaluate", "--filter", c, "--steering-eval", fx.v, "--hrtf-eval", fx.h, "--region", "left",
             "--out-prefix", prefix}) == cli::kExitUsage);
}

TEST_CASE("sweep cells match separate design and evaluate runs") {
  TempDir dir("sweep");
  const std::string out = dir.file("sweep");
  REQUIRE(run({"sweep", "--distances", "0.45,0.05", "--criteria", "ls,mixed", "--grid", "ring:24", "--fs", "16000",
               "--nfft", "64", "--out-dir", out}) == 0);
  const std::string summary = slurp(out + "/summary.csv");
  CHECK(summary.rfind("cell,distance,rotation_deg,criterion,fov_beta,status,", 0) == 0);
  CHECK(summary.find("cell0000_d0.45_rot0_ls_betanone,0.45,0,ls,none,ok,") != std::string::npos);
  CHECK(summary.find("cell0001_d0.45_rot0_mixed_betanone,0.45,0,mixed,none,ok,") != std::string::npos);
  // The 5 cm distance puts sources inside the array: those cells fail but the sweep completes.
  CHECK(summary.find("cell0002_d0.05_rot0_ls_betanone,0.05,0,ls,none,failed,") != std::string::npos);
  CHECK(summary.find("cell0003_d0.05_rot0_mixed_betanone,0.05,0,mixed,none,failed,") != std::string::npos);

  Fixture fx("0.45", "ring:24");
  const std::string c = fx.dir.file("c.bsm");
  REQUIRE(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--criterion", "mixed", "--out", c}) == 0);
  const std::string prefix = fx.dir.file("single");
  REQUIRE(run({"evaluate", "--filter", c, "--steering-eval", fx.v, "--hrtf-eval", fx.h, "--out-prefix", prefix}) ==
          0);
  const std::string cell = out + "/cell0001_d0.45_rot0_mixed_betanone";
  CHECK(slurp(cell + "_freq.csv") == slurp(prefix + "_freq.csv"));
  CHECK(slurp(cell + "_dir.csv") == slurp(prefix + "_dir.csv"));
  CHECK_FALSE(slurp(cell + "_freq.csv").empty());
}

TEST_CASE("sweep with rotations and FoV betas") {
  TempDir dir("sweep");
  const std::string out = dir.file("s");
  REQUIRE(run({"sweep", "--distances", "planewave", "--rotations", "0,15", "--criteria", "ls",
               "--fov-betas", "none,0.2", "--grid", "ring:24", "--fs", "16000", "--nfft", "32",
               "--rotation-placement", "eval-only", "--no-per-direction", "--out-dir", out}) == 0);
  const std::string summary = slurp(out + "/summary.csv");
  CHECK(summary.find("cell0003_dplanewave_rot15_ls_beta0.2,planewave,15,ls,0.2,ok,") != std::string::npos);
  CHECK(run({"sweep", "--criteria", "ls", "--steering-pattern", "x_{d}.bsm", "--out-dir", out}) ==
        cli::kExitUsage);
  CHECK(run({"sweep", "--criteria", "ls", "--rotation-placement", "sideways", "--out-dir", out}) ==
        cli::kExitUsage);
}

TEST_CASE("render: silence, synth level and determinism") {
  Fixture fx("planewave", "ring:24");
  const std::string c = fx.dir.file("c.bsm");
  REQUIRE(run({"design", "--steering", fx.v, "--hrtf", fx.h, "--out", c}) == 0);

  WavData silence;
  silence.sample_rate = 16000;
  silence.channels.assign(5, std::vector<double>(1000, 0.0));
  write_wav(fx.dir.file("silence.wav"), silence, WavFormat::kFloat32);
  REQUIRE(run({"render", "--filter", c, "--mics", fx.dir.file("silence.wav"), "--out", fx.dir.file("y0.wav")}) == 0);
  const WavData y0 = read_wav(fx.dir.file("y0.wav"));
  REQUIRE(y0.channels.size() == 2);
  CHECK(y0.channels[0].size() == 1000);
  for (const auto& ch : y0.channels) {
    for (double x : ch) CHECK(x == 0.0);
  }

  const std::string synth = "synth:az=30,el=0,seconds=0.25";
  REQUIRE(run({"render", "--filter", c, "--mics", synth, "--steering", fx.v, "--seed", "7", "--out",
               fx.dir.file("a.wav")}) == 0);
  REQUIRE(run({"render", "--filter", c, "--mics", synth, "--steering", fx.v, "--seed", "7", "--out",
               fx.dir.file("b.wav")}) == 0);
  REQUIRE(run({"render", "--filter", c, "--mics", synth, "--steering", fx.v, "--seed", "8", "--out",
               fx.dir.file("d.wav")}) == 0);
  CHECK(slurp(fx.dir.file("a.wav")) == slurp(fx.dir.file("b.wav")));
  CHECK(slurp(fx.dir.file("a.wav")) != slurp(fx.dir.file("d.wav")));
  const WavData y = read_wav(fx.dir.file("a.wav"));
  CHECK(y.sample_rate == 16000);
  double peak = 0.0;
  for (const auto& ch : y.channels) {
    for (double x : ch) peak = std::max(peak, std::abs(x));
  }
  CHECK(20.0 * std::log10(peak) == doctest::Approx(-12.0).epsilon(1e-4));

  // Channel count must match the filter; synth needs a steering set.
  WavData three;
  three.sample_rate = 16000;
  three.channels.assign(3, std::vector<double>(100, 0.0));
  write_wav(fx.dir.file("three.wav"), three, WavFormat::kPcm16);
  CHECK(run({"render", "--filter", c, "--mics", fx.dir.file("three.wav"), "--out", fx.dir.file("z.wav")}) ==
        cli::kExitData);
  CHECK(run({"render", "--filter", c, "--mics", synth, "--out", fx.dir.file("z.wav")}) == cli::kExitUsage);
  CHECK(run({"render", "--filter", c, "--mics", fx.dir.file("silence.wav"), "--hop", "20", "--out",
             fx.dir.file("z.wav")}) == cli::kExitUsage);
}

TEST_CASE("the installed binary runs") {
  TempDir dir("bin");
  const std::string cmd = std::string(BSMKIT_CLI_PATH) + " gen-steering --grid ring:4 --distance 1 --nfft 8 --out " +
                          dir.file("v.bsm") + " > " + dir.file("log.txt") + " 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(load_steering(dir.file("v.bsm")).num_dirs() == 4);
  const std::string bad = std::string(BSMKIT_CLI_PATH) + " design > " + dir.file("log.txt") + " 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
