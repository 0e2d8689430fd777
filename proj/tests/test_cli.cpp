#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "casar/dataset_io.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = [] {
  const char* env = std::getenv("CASAR_TEST_TMP");
  fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "casar_cli";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}();

struct RunResult {
  int code = -1;
  std::string err;
};

RunResult run(const std::string& args) {
  const fs::path err = kTmp / "stderr.txt";
  const std::string cmd = std::string(CASAR_CLI_PATH) + " " + args + " >" +
                          (kTmp / "stdout.txt").string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = casar::read_text(err);
  return r;
}

std::string out_text() { return casar::read_text(kTmp / "stdout.txt"); }

std::string p(const fs::path& path) { return "'" + path.string() + "'"; }

const char* kSmall = " --classes 2 --clips-per-class 3 --test-clips-per-class 1 --min-frames 6 --max-frames 10";
const char* kQuickContact = " --contact-hidden 8 --contact-epochs 2";
const char* kQuickAction = " --action-hidden 8 --action-epochs 2 --action-head softmax_ce";

}  // namespace

TEST_CASE("synth is deterministic and validates its arguments") {
  const fs::path a = kTmp / "synth_a", b = kTmp / "synth_b";
  REQUIRE(run("synth --out " + p(a) + kSmall).code == 0);
  REQUIRE(run("synth --out " + p(b) + kSmall).code == 0);
  for (const char* f : {"clips.jsonl", "contacts.jsonl", "test_clips.jsonl", "test_contacts.jsonl"}) {
    CHECK(casar::read_text(a / f) == casar::read_text(b / f));
  }
  CHECK(fs::exists(a / "config.json"));
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(fs::is_directory(a / "meshes"));

  const RunResult bad = run("synth --classes 1 --out " + p(kTmp / "synth_bad"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("\"error\"") != std::string::npos);
}

TEST_CASE("derive-contact reproduces the generator's labels") {
  const fs::path d = kTmp / "derive";
  REQUIRE(run("synth --out " + p(d) + kSmall).code == 0);
  REQUIRE(run("derive-contact --clips " + p(d / "clips.jsonl") + " --meshes " + p(d / "meshes") +
              " --out " + p(d / "derived.jsonl") + " --config " + p(d / "config.json"))
              .code == 0);
  CHECK(casar::read_text(d / "derived.jsonl") == casar::read_text(d / "contacts.jsonl"));

  const RunResult thresholds =
      run("derive-contact --clips " + p(d / "clips.jsonl") + " --meshes " + p(d / "meshes") +
          " --out " + p(d / "x.jsonl") + " --config " + p(d / "config.json") +
          " --eta-c 0.3 --eta-d 0.2");
  CHECK(thresholds.code == 2);

  // Drop the first clip's mesh: the error names it.
  const std::string clips = casar::read_text(d / "clips.jsonl");
  const auto first = nlohmann::json::parse(clips.substr(0, clips.find('\n')));
  const std::string removed = first.at("mesh_id").get<std::string>();
  const fs::path partial = kTmp / "derive_meshes";
  fs::create_directories(partial);
  for (const auto& e : fs::directory_iterator(d / "meshes")) {
    if (e.path().stem() != removed) fs::copy_file(e.path(), partial / e.path().filename());
  }
  const RunResult missing = run("derive-contact --clips " + p(d / "clips.jsonl") + " --meshes " +
                                p(partial) + " --out " + p(d / "y.jsonl") + " --config " +
                                p(d / "config.json"));
  CHECK(missing.code != 0);
  CHECK(missing.err.find(removed) != std::string::npos);
}

TEST_CASE("train, evaluate and predict end to end") {
  const fs::path d = kTmp / "e2e";
  REQUIRE(run("synth --out " + p(d) + kSmall).code == 0);
  const std::string cfg = " --config " + p(d / "config.json");
  REQUIRE(run("train-contact --data " + p(d / "clips.jsonl") + " --meshes " + p(d / "meshes") +
              " --out " + p(d / "f.ckpt") + cfg + kQuickContact)
              .code == 0);
  CHECK(fs::exists(d / "f.meta.json"));
  REQUIRE(run("train-action --data " + p(d / "clips.jsonl") + " --contact-ckpt " + p(d / "f.ckpt") +
              " --out " + p(d / "g.ckpt") + cfg + kQuickAction)
              .code == 0);
  const RunResult ev = run("eval --data " + p(d / "test_clips.jsonl") + " --meshes " +
                           p(d / "meshes") + " --contact-ckpt " + p(d / "f.ckpt") +
                           " --action-ckpt " + p(d / "g.ckpt") + " --report " + p(d / "report"));
  REQUIRE(ev.code == 0);
  for (const char* f : {"metrics.json", "confusion.csv", "per_object.csv"}) {
    CHECK(fs::exists(d / "report" / f));
  }

  REQUIRE(run("predict --clip " + p(d / "test_clips.jsonl") + " --contact-ckpt " +
              p(d / "f.ckpt") + " --action-ckpt " + p(d / "g.ckpt"))
              .code == 0);
  std::istringstream lines(out_text());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("clip_id"));
    CHECK(j.at("predicted_class").get<int>() >= 0);
    CHECK(j.at("probabilities").size() == 2);
    ++count;
  }
  CHECK(count == 2);

  // An action checkpoint trained without contact does not fit a contact-augmented run.
  REQUIRE(run("train-action --data " + p(d / "clips.jsonl") + " --contact-ckpt " + p(d / "f.ckpt") +
              " --out " + p(d / "g_plain.ckpt") + cfg + kQuickAction + " --no-contact")
              .code == 0);
  std::string meta = casar::read_text(d / "g_plain.meta.json");
  auto mj = nlohmann::json::parse(meta);
  mj["training"]["use_contact"] = true;
  std::ofstream(d / "g_plain.meta.json") << mj.dump();
  const RunResult mismatch = run("predict --clip " + p(d / "test_clips.jsonl") + " --contact-ckpt " +
                                 p(d / "f.ckpt") + " --action-ckpt " + p(d / "g_plain.ckpt"));
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("6176") != std::string::npos);
  CHECK(mismatch.err.find("8864") != std::string::npos);
}
