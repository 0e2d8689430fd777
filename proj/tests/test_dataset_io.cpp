#include <filesystem>
#include <fstream>
#include <random>

#include "casar/dataset_io.hpp"
#include "casar/error.hpp"
#include "doctest.h"

using namespace casar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("casar_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name, const std::string& content) const {
    std::ofstream(path / name, std::ios::binary) << content;
    return path / name;
  }
};

DatasetConfig tiny_config() {
  DatasetConfig c;
  c.hands = 1;
  c.joints_per_hand = 2;
  c.object_class_count = 3;
  c.action_class_count = 2;
  c.frames_per_clip = 2;
  return c;
}

const char* kCorners =
    "[[0,0,0],[1,0,0],[0,1,0],[1,1,0],[0,0,1],[1,0,1],[0,1,1],[1,1,1]]";
const char* kPose = "[[1,0,0,0.5],[0,1,0,0],[0,0,1,0],[0,0,0,1]]";

std::string fixture_line(int object_label) {
  std::string frame = std::string("{\"left\":null,\"right\":[[0.1,0.2,0.3],[0.4,0.5,0.6]],") +
                      "\"bbox_corners\":" + kCorners + ",\"object_pose\":" + kPose + "}";
  std::string frame2 = std::string("{\"left\":null,\"right\":[[1.5,-2,3],[0,0,0.25]],") +
                       "\"bbox_corners\":" + kCorners + ",\"object_pose\":" + kPose + "}";
  return "{\"clip_id\":\"fix\",\"action_label\":1,\"object_label\":" +
         std::to_string(object_label) + ",\"mesh_id\":\"cube\",\"frames\":[" + frame + "," +
         frame2 + "]}\n";
}

}  // namespace

TEST_CASE("empty clip file") {
  TempDir dir;
  CHECK(load_clips(dir.file("clips.jsonl", ""), tiny_config()).empty());
}

TEST_CASE("hand-written fixture parses to its values") {
  TempDir dir;
  const auto clips = load_clips(dir.file("clips.jsonl", fixture_line(2)), tiny_config());
  REQUIRE(clips.size() == 1);
  const ActionClip& c = clips[0];
  CHECK(c.clip_id == "fix");
  CHECK(c.action_label == 1);
  CHECK(c.object_label() == 2);
  CHECK(c.mesh_id == std::optional<std::string>("cube"));
  REQUIRE(c.frames.size() == 2);
  CHECK(c.frames[0].hand.left.empty());
  CHECK(c.frames[0].hand.right[1] == Point3{0.4, 0.5, 0.6});
  CHECK(c.frames[1].hand.right[0] == Point3{1.5, -2, 3});
  CHECK(c.frames[0].object.pose_points[0] == Point3{0.5, 0.5, 0.5});
  CHECK(c.frames[0].object.pose_points[8] == Point3{1, 1, 1});
  CHECK(c.frames[0].object.world_from_canonical.translation_part() == Point3{0.5, 0, 0});
}

TEST_CASE("corrupted object label is a parse error naming the file and line") {
  TempDir dir;
  const auto path = dir.file("clips.jsonl", fixture_line(0) + fixture_line(3));
  try {
    load_clips(path, tiny_config());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("clips.jsonl") != std::string::npos);
    CHECK(msg.find(":2") != std::string::npos);
  }
}

TEST_CASE("malformed records") {
  TempDir dir;
  const auto c = tiny_config();
  CHECK_THROWS_AS(load_clips(dir.file("a.jsonl", "{not json}\n"), c), ParseError);
  std::string nan_line = fixture_line(0);
  nan_line.replace(nan_line.find("0.1"), 3, "1e999");
  CHECK_THROWS_AS(load_clips(dir.file("b.jsonl", nan_line), c), ParseError);
  CHECK_THROWS_AS(load_clips(dir.path / "missing.jsonl", c), IoError);
}

TEST_CASE("clip writer is canonical: write(load(write(x))) is byte-identical") {
  TempDir dir;
  const auto c = tiny_config();
  const auto first = load_clips(dir.file("in.jsonl", fixture_line(1)), c);
  write_clips(dir.path / "a.jsonl", first);
  const auto again = load_clips(dir.path / "a.jsonl", c);
  CHECK(again == first);
  write_clips(dir.path / "b.jsonl", again);
  CHECK(read_text(dir.path / "a.jsonl") == read_text(dir.path / "b.jsonl"));
}

TEST_CASE("contact records join onto clips") {
  TempDir dir;
  const auto c = tiny_config();
  const auto clips = load_clips(dir.file("clips.jsonl", fixture_line(0)), c);
  const std::string records =
      "{\"clip_id\":\"fix\",\"frame_index\":1,\"contact\":[0,1],\"distant\":[0,0]}\n"
      "{\"clip_id\":\"fix\",\"frame_index\":0,\"contact\":[1,0],\"distant\":[0,1]}\n";
  const auto samples = load_contact_targets(dir.file("contacts.jsonl", records), clips, c);
  REQUIRE(samples.size() == 2);
  // File order is kept.
  CHECK(samples[0].frame == clips[0].frames[1]);
  CHECK(samples[0].target.contact == std::vector<std::uint8_t>{0, 1});
  CHECK(samples[1].frame == clips[0].frames[0]);
  CHECK(samples[1].target.distant == std::vector<std::uint8_t>{0, 1});

  const std::string wide = "{\"clip_id\":\"fix\",\"frame_index\":0,\"contact\":[1,0,0],\"distant\":[0,1,0]}\n";
  CHECK_THROWS_AS(load_contact_records(dir.file("wide.jsonl", wide), c), ParseError);
  const std::string subset = "{\"clip_id\":\"fix\",\"frame_index\":0,\"contact\":[1,0],\"distant\":[0,1]}\n";
  CHECK(load_contact_targets(dir.file("subset.jsonl", subset), clips, c).size() == 1);
  const std::string past_end = "{\"clip_id\":\"fix\",\"frame_index\":2,\"contact\":[1,0],\"distant\":[0,1]}\n";
  CHECK_THROWS(load_contact_targets(dir.file("past_end.jsonl", past_end), clips, c));
  const std::string stray = "{\"clip_id\":\"other\",\"frame_index\":0,\"contact\":[1,0],\"distant\":[0,1]}\n";
  CHECK_THROWS(load_contact_targets(dir.file("stray.jsonl", records + stray), clips, c));
}

TEST_CASE("meshes") {
  TempDir dir;
  fs::create_directories(dir.path / "meshes");
  std::ofstream(dir.path / "meshes" / "cube.obj")
      << "# comment\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nf 1 2 3\n";
  const MeshLibrary lib = load_meshes(dir.path / "meshes");
  REQUIRE(lib.count("cube") == 1);
  CHECK(lib.at("cube").vertices.size() == 3);
  CHECK(lib.at("cube").vertices[2] == Point3{0, 1, 0});

  std::ofstream(dir.path / "bad.obj") << "v 0 0\n";
  CHECK_THROWS_AS(load_mesh(dir.path / "bad.obj", "bad"), ParseError);
  CHECK_THROWS_AS(load_meshes(dir.path / "nowhere"), IoError);

  write_mesh(dir.path / "copy.obj", lib.at("cube"));
  CHECK(load_mesh(dir.path / "copy.obj", "cube").vertices == lib.at("cube").vertices);
}

TEST_CASE("shortest round-trip double formatting") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
