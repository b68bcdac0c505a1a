// Copyright 2026 The flamespec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the command-line tool and checks its exit codes.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "flamespec_cli";

struct Run {
  int code;
  std::string out;
};

Run Exec(const std::string& args) {
  const fs::path log = kRoot / "stdout.txt";
  const std::string cmd = std::string(FLAMESPEC_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

void Write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string P(const char* name) { return (kRoot / name).string(); }

}  // namespace

TEST_CASE("command-line exit codes") {
  fs::remove_all(kRoot);
  fs::create_directories(kRoot);
  Write(kRoot / "tiny.json", R"({
    "seed": 3, "grid": {"n_pixels": 64},
    "design": {"train_pressure_levels": 3, "train_phi_levels": 3, "test_samples": 2},
    "acquisition": {"n_ls": 3, "n_hs": 2, "n_dark": 10},
    "train": {"epochs": 1, "batch_size": 8}})");
  const std::string cfg = "--config " + P("tiny.json");

  SUBCASE("calculators print to stdout") {
    const Run r = Exec("calc rf --layers 7 --kernel 15 --downsample 16");
    CHECK(r.code == 0);
    CHECK(r.out.find("1584") != std::string::npos);
    CHECK(Exec("calc params --layers 7 --channels 32 --kernel 15 --downsample 16").out.find("92368") !=
          std::string::npos);
  }
  SUBCASE("usage errors exit 2") {
    CHECK(Exec("frobnicate").code == 2);
    CHECK(Exec("gen").code == 2);
    Write(kRoot / "bad.json", R"({"acquisition": {"n_lx": 3}})");
    const Run r = Exec("gen --config " + P("bad.json") + " --out " + P("d"));
    CHECK(r.code == 2);
    CHECK(r.out.find("acquisition.n_lx") != std::string::npos);
    CHECK(Exec("gen --preset enormous --out " + P("d")).code == 2);
  }
  SUBCASE("missing files exit 3") {
    CHECK(Exec("gen --config " + P("absent.json") + " --out " + P("d")).code == 3);
    CHECK(Exec("calibrate " + cfg + " --dataset " + P("absent") + " --out " + P("m")).code == 3);
  }
  SUBCASE("pipeline failures") {
    REQUIRE(Exec("gen " + cfg + " --out " + P("data")).code == 0);
    // No pod.fsa yet.
    CHECK(Exec("train " + cfg + " --dataset " + P("data") + " --out " + P("m")).code == 3);
    // More modes than snapshots.
    Write(kRoot / "rank.json", R"({
      "seed": 3, "grid": {"n_pixels": 64},
      "design": {"train_pressure_levels": 3, "train_phi_levels": 3, "test_samples": 2},
      "acquisition": {"n_ls": 3, "n_hs": 2, "n_dark": 10},
      "calibration": {"pod_rank": 40}})");
    CHECK(Exec("calibrate --config " + P("rank.json") + " --dataset " + P("data") + " --out " + P("m")).code == 4);
    REQUIRE(Exec("calibrate " + cfg + " --dataset " + P("data") + " --out " + P("m")).code == 0);

    Write(kRoot / "narrow.txt", "1,2,3\n");
    const Run grid = Exec("predict --models " + P("m") + " --scheme raw " + P("narrow.txt"));
    CHECK(grid.code == 2);
    CHECK(grid.out.find("GridMismatch") != std::string::npos);
    Write(kRoot / "empty.txt", "");
    CHECK(Exec("predict --models " + P("m") + " --scheme raw " + P("empty.txt")).code == 2);
    CHECK(Exec("predict --models " + P("m") + " --scheme raw " + P("absent.txt")).code == 3);
    CHECK(Exec("predict --models " + P("m") + " --scheme raw --preprocess " + P("narrow.txt")).code == 2);

    const Run ok = Exec("predict --models " + P("m") + " --scheme raw " + P("data"));
    CHECK(ok.code == 0);
    CHECK(ok.out.find("P_pred") != std::string::npos);
    CHECK(Exec("report --out " + P("nothing")).code == 2);

    // Raw counts with a dark frame give the same answer as the normalized
    // spectrum. On this 64-pixel grid only pixel 6 lies in the OH* window.
    std::string raw, dark, norm;
    for (int i = 0; i < 64; ++i) {
      const char* sep = i ? "," : "";
      raw += sep + std::string(i == 6 ? "5" : "3");
      dark += sep + std::string("1");
      norm += sep + std::string(i == 6 ? "1" : "0.5");
    }
    Write(kRoot / "raw.txt", raw + "\n");
    Write(kRoot / "dark.txt", dark + "\n");
    Write(kRoot / "norm.txt", norm + "\n");
    const Run a = Exec("predict --models " + P("m") + " --scheme raw --preprocess --dark " +
                       P("dark.txt") + " " + P("raw.txt"));
    const Run b = Exec("predict --models " + P("m") + " --scheme raw " + P("norm.txt"));
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(a.out == b.out);
  }
}
