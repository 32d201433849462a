// Copyright (c) 2026 crossvox project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Drives the installed binary as a subprocess: exit-code contract, seed
// echoing, artifact checks, and the corpus/report happy paths.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "test_support.h"

namespace fs = std::filesystem;
using crossvox::testsupport::TempDir;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(TempDir& tmp, const std::string& tag,
                  const std::string& args) {
  const std::string out_path = tmp.file("cli-" + tag + ".out");
  const std::string err_path = tmp.file("cli-" + tag + ".err");
  const std::string cmd = std::string(CROSSVOX_CLI_PATH) + " " + args + " > " +
                          out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CliResult r;
  r.code = WEXITSTATUS(status);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

std::string data_file(const std::string& leaf) {
  return std::string(CROSSVOX_TEST_DATA_DIR) + "/" + leaf;
}

// Two-speaker micro configuration rooted inside the temp dir.
std::string write_micro_config(TempDir& tmp) {
  const std::string text = "{\n"
      "  \"seed\": 1,\n"
      "  \"paths\": {\"work_dir\": \"" + tmp.path() + "/work\"},\n"
      "  \"corpus\": {\"num_speakers\": 2, \"num_emotions\": 2,\n"
      "             \"utts_per_pair\": 1, \"min_phonemes\": 3,\n"
      "             \"max_phonemes\": 4, \"min_duration\": 4,\n"
      "             \"max_duration\": 5}\n"
      "}\n";
  const std::string path = tmp.file("micro.json");
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
  return path;
}

}  // namespace

TEST_CASE("help and argument errors use the documented exit codes") {
  TempDir tmp("cli-args");
  const CliResult help = run_cli(tmp, "help", "--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("gen-corpus") != std::string::npos);
  CHECK(help.out.find("report") != std::string::npos);

  // Missing required --config, missing subcommand, unknown subcommand.
  CHECK(run_cli(tmp, "noconfig", "gen-corpus").code == 2);
  const std::string cfg = write_micro_config(tmp);
  CHECK(run_cli(tmp, "nosub", "--config " + cfg).code == 2);
  CHECK(run_cli(tmp, "badsub", "--config " + cfg + " frobnicate").code == 2);
}

TEST_CASE("config errors exit with code 2") {
  TempDir tmp("cli-config");
  CHECK(run_cli(tmp, "missing",
                "--config " + tmp.file("absent.json") + " gen-corpus")
            .code == 2);

  const std::string bad = tmp.file("bad.json");
  {
    std::ofstream out(bad);
    out << "{\"wat\": 1}\n";
  }
  const CliResult r = run_cli(tmp, "unknown-key",
                              "--config " + bad + " gen-corpus");
  CHECK(r.code == 2);
  CHECK(r.err.find("config error") != std::string::npos);
  CHECK(r.err.find("wat") != std::string::npos);

  // Guard validation inside a subcommand also maps to 2.
  const std::string cfg = write_micro_config(tmp);
  CHECK(run_cli(tmp, "badcases", "--config " + cfg + " eval --cases 0").code ==
        2);
}

TEST_CASE("missing upstream artifacts exit with code 3") {
  TempDir tmp("cli-artifacts");
  const std::string cfg = write_micro_config(tmp);
  const CliResult r = run_cli(tmp, "perturb", "--config " + cfg + " perturb");
  CHECK(r.code == 3);
  CHECK(r.err.find("missing artifact") != std::string::npos);
  CHECK(r.err.find("manifest") != std::string::npos);
  CHECK(run_cli(tmp, "t2v", "--config " + cfg + " train-txt2vec").code == 3);
}

TEST_CASE("corpus and perturbation stages run end to end") {
  TempDir tmp("cli-corpus");
  const std::string cfg = write_micro_config(tmp);

  const CliResult gen = run_cli(tmp, "gen", "--config " + cfg + " gen-corpus");
  CHECK(gen.code == 0);
  // Every run echoes the resolved seed and configuration.
  CHECK(gen.out.find("crossvox gen-corpus | seed 1 | threads 1") !=
        std::string::npos);
  CHECK(gen.out.find("resolved config:") != std::string::npos);
  CHECK(gen.out.find("wrote 4 utterances") != std::string::npos);
  CHECK(fs::exists(tmp.path() + "/work/corpus/manifest.tsv"));

  const CliResult pert = run_cli(tmp, "pert", "--config " + cfg + " perturb");
  CHECK(pert.code == 0);
  CHECK(pert.out.find("wrote 4 perturbed pairs") != std::string::npos);
  CHECK(fs::exists(tmp.path() + "/work/perturb/pairs.tsv"));

  // A seed override is echoed back.
  const CliResult seeded =
      run_cli(tmp, "seeded", "--config " + cfg + " --seed 77 gen-corpus");
  CHECK(seeded.code == 0);
  CHECK(seeded.out.find("| seed 77 |") != std::string::npos);
}

TEST_CASE("report re-renders a metrics TSV byte-exactly") {
  TempDir tmp("cli-report");
  const std::string cfg = write_micro_config(tmp);
  const std::string out_md = tmp.file("out.md");

  const CliResult r = run_cli(
      tmp, "report",
      "--config " + cfg + " report --input " + data_file("report_fixture.tsv") +
          " --format markdown --out " + out_md);
  CHECK(r.code == 0);
  CHECK(slurp(out_md) == slurp(data_file("report_fixture.md")));

  const std::string out_tsv = tmp.file("round.tsv");
  CHECK(run_cli(tmp, "round",
                "--config " + cfg + " report --input " +
                    data_file("report_fixture.tsv") + " --format tsv --out " +
                    out_tsv)
            .code == 0);
  CHECK(slurp(out_tsv) == slurp(data_file("report_fixture.tsv")));

  CHECK(run_cli(tmp, "badfmt",
                "--config " + cfg + " report --input " +
                    data_file("report_fixture.tsv") +
                    " --format yaml --out " + tmp.file("x"))
            .code == 2);
  CHECK(run_cli(tmp, "noinput",
                "--config " + cfg + " report --input " + tmp.file("no.tsv") +
                    " --format tsv --out " + tmp.file("y"))
            .code == 3);
}
