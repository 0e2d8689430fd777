#include "casar/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "casar/error.hpp"
#include "json.hpp"

namespace casar {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

namespace {

// Line-oriented reader that prefixes errors with "file:line".
template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(line);
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

double finite_number(const json& v, const char* what) {
  if (!v.is_number()) throw ParseError(std::string(what) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(std::string(what) + " is not finite");
  return d;
}

Point3 parse_point(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 3) {
    throw ParseError(std::string(what) + " must be an [x, y, z] array");
  }
  return {finite_number(v[0], what), finite_number(v[1], what), finite_number(v[2], what)};
}

std::vector<Point3> parse_points(const json& v, std::size_t count, const char* what) {
  if (!v.is_array() || v.size() != count) {
    throw ParseError(std::string(what) + " must hold " + std::to_string(count) + " points");
  }
  std::vector<Point3> out;
  out.reserve(count);
  for (const auto& p : v) out.push_back(parse_point(p, what));
  return out;
}

RigidTransform parse_pose(const json& v) {
  if (!v.is_array() || v.size() != 4) {
    throw ParseError("object_pose must be a 4x4 row-major matrix");
  }
  std::array<double, 16> m{};
  for (std::size_t r = 0; r < 4; ++r) {
    if (!v[r].is_array() || v[r].size() != 4) {
      throw ParseError("object_pose must be a 4x4 row-major matrix");
    }
    for (std::size_t c = 0; c < 4; ++c) m[r * 4 + c] = finite_number(v[r][c], "object_pose");
  }
  return RigidTransform::from_row_major(m);
}

ordered_json point_json(const Point3& p) { return ordered_json::array({p.x, p.y, p.z}); }

ordered_json points_json(std::span<const Point3> points) {
  ordered_json arr = ordered_json::array();
  for (const Point3& p : points) arr.push_back(point_json(p));
  return arr;
}

int integer_field(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string(key) + " must be an integer");
  return v.get<int>();
}

std::vector<std::uint8_t> parse_bits(const json& v, std::size_t count, const char* what) {
  if (!v.is_array() || v.size() != count) {
    throw ParseError(std::string(what) + " must hold " + std::to_string(count) + " entries");
  }
  std::vector<std::uint8_t> out;
  out.reserve(count);
  for (const auto& b : v) {
    if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1)) {
      throw ParseError(std::string(what) + " entries must be 0 or 1");
    }
    out.push_back(static_cast<std::uint8_t>(b.get<int>()));
  }
  return out;
}

}  // namespace

std::string clip_to_json_line(const ActionClip& clip) {
  ordered_json j;
  j["clip_id"] = clip.clip_id;
  j["action_label"] = clip.action_label;
  j["object_label"] = clip.object_label();
  j["mesh_id"] = clip.mesh_id ? ordered_json(*clip.mesh_id) : ordered_json(nullptr);
  ordered_json frames = ordered_json::array();
  for (const FrameSample& f : clip.frames) {
    ordered_json fj;
    fj["left"] = f.hand.left.empty() ? ordered_json(nullptr) : points_json(f.hand.left);
    fj["right"] = points_json(f.hand.right);
    fj["bbox_corners"] = points_json(f.object.corners());
    ordered_json pose = ordered_json::array();
    const auto& m = f.object.world_from_canonical.row_major();
    for (int r = 0; r < 4; ++r) {
      pose.push_back(ordered_json::array({m[r * 4], m[r * 4 + 1], m[r * 4 + 2], m[r * 4 + 3]}));
    }
    fj["object_pose"] = std::move(pose);
    frames.push_back(std::move(fj));
  }
  j["frames"] = std::move(frames);
  return j.dump();
}

ActionClip clip_from_json_line(const std::string& line, const DatasetConfig& config) {
  const json j = json::parse(line);
  if (!j.is_object()) throw ParseError("clip record must be a JSON object");
  ActionClip clip;
  if (!j.at("clip_id").is_string()) throw ParseError("clip_id must be a string");
  clip.clip_id = j.at("clip_id").get<std::string>();
  clip.action_label = integer_field(j, "action_label");
  const int object_label = integer_field(j, "object_label");
  const auto& mesh = j.at("mesh_id");
  if (mesh.is_string()) {
    clip.mesh_id = mesh.get<std::string>();
  } else if (!mesh.is_null()) {
    throw ParseError("mesh_id must be a string or null");
  }
  if (object_label < 0 || object_label >= config.object_class_count) {
    throw ParseError("object_label " + std::to_string(object_label) + " outside [0, " +
                     std::to_string(config.object_class_count) + ")");
  }
  const auto per_hand = static_cast<std::size_t>(config.joints_per_hand);
  const auto& frames = j.at("frames");
  if (!frames.is_array()) throw ParseError("frames must be an array");
  clip.frames.reserve(frames.size());
  for (const auto& fj : frames) {
    FrameSample f;
    const auto& left = fj.at("left");
    if (config.hands == 2) {
      f.hand.left = parse_points(left, per_hand, "left");
    } else if (!left.is_null()) {
      throw ParseError("left must be null for single-hand datasets");
    }
    f.hand.right = parse_points(fj.at("right"), per_hand, "right");
    const auto corners = parse_points(fj.at("bbox_corners"), kBoxCorners, "bbox_corners");
    f.object.pose_points = expand_bbox_21(corners);
    f.object.world_from_canonical = parse_pose(fj.at("object_pose"));
    f.object.label = object_label;
    clip.frames.push_back(std::move(f));
  }
  validate_clip(clip, config);
  return clip;
}

std::vector<ActionClip> load_clips(const fs::path& path, const DatasetConfig& config) {
  config.validate();
  std::vector<ActionClip> clips;
  for_each_jsonl(path, [&](const std::string& line) {
    clips.push_back(clip_from_json_line(line, config));
  });
  return clips;
}

void write_clips(const fs::path& path, std::span<const ActionClip> clips) {
  std::string out;
  for (const ActionClip& c : clips) {
    out += clip_to_json_line(c);
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<ContactRecord> load_contact_records(const fs::path& path,
                                                const DatasetConfig& config) {
  const std::size_t joints = config.joint_count();
  std::vector<ContactRecord> records;
  for_each_jsonl(path, [&](const std::string& line) {
    const json j = json::parse(line);
    ContactRecord r;
    if (!j.at("clip_id").is_string()) throw ParseError("clip_id must be a string");
    r.clip_id = j.at("clip_id").get<std::string>();
    const int idx = integer_field(j, "frame_index");
    if (idx < 0) throw ParseError("frame_index must be >= 0");
    r.frame_index = static_cast<std::size_t>(idx);
    r.map.contact = parse_bits(j.at("contact"), joints, "contact");
    r.map.distant = parse_bits(j.at("distant"), joints, "distant");
    for (std::size_t i = 0; i < joints; ++i) {
      if (r.map.contact[i] && r.map.distant[i]) {
        throw ParseError("joint " + std::to_string(i) + " is both contact and distant");
      }
    }
    records.push_back(std::move(r));
  });
  return records;
}

void write_contact_records(const fs::path& path, std::span<const ContactRecord> records) {
  std::string out;
  for (const ContactRecord& r : records) {
    ordered_json j;
    j["clip_id"] = r.clip_id;
    j["frame_index"] = r.frame_index;
    j["contact"] = r.map.contact;
    j["distant"] = r.map.distant;
    out += j.dump();
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<ContactSample> join_contact_samples(std::span<const ActionClip> clips,
                                                std::span<const ContactRecord> records) {
  std::unordered_map<std::string, const ActionClip*> by_id;
  for (const ActionClip& c : clips) by_id.emplace(c.clip_id, &c);
  std::vector<ContactSample> out;
  out.reserve(records.size());
  for (const ContactRecord& r : records) {
    const auto it = by_id.find(r.clip_id);
    if (it == by_id.end()) {
      throw ParseError("contact record references unknown clip '" + r.clip_id + "'");
    }
    const ActionClip& clip = *it->second;
    if (r.frame_index >= clip.frames.size()) {
      throw ParseError("contact record frame_index " + std::to_string(r.frame_index) +
                       " out of range for clip '" + r.clip_id + "'");
    }
    if (r.map.contact.size() != clip.frames[r.frame_index].hand.joints().size()) {
      throw ShapeError("contact record width does not match clip '" + r.clip_id + "'");
    }
    out.push_back({clip.frames[r.frame_index], r.map});
  }
  return out;
}

std::vector<ContactSample> load_contact_targets(const fs::path& path,
                                                std::span<const ActionClip> clips,
                                                const DatasetConfig& config) {
  const auto records = load_contact_records(path, config);
  return join_contact_samples(clips, records);
}

ObjectMesh load_mesh(const fs::path& path, const std::string& mesh_id) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh '" + mesh_id + "' at '" + path.string() + "'");
  ObjectMesh mesh;
  mesh.mesh_id = mesh_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag != "v") continue;
    std::string tok[3];
    double xyz[3];
    for (int k = 0; k < 3; ++k) {
      if (!(ls >> tok[k])) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": vertex line needs three coordinates");
      }
      const char* b = tok[k].data();
      const char* e = b + tok[k].size();
      const auto res = std::from_chars(b, e, xyz[k]);
      if (res.ec != std::errc() || res.ptr != e || !std::isfinite(xyz[k])) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": invalid vertex coordinate '" + tok[k] + "'");
      }
    }
    mesh.vertices.push_back({xyz[0], xyz[1], xyz[2]});
  }
  try {
    mesh.validate();
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return mesh;
}

MeshLibrary load_meshes(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("mesh directory '" + dir.string() + "' does not exist");
  }
  MeshLibrary meshes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".obj") continue;
    const std::string id = entry.path().stem().string();
    meshes.emplace(id, load_mesh(entry.path(), id));
  }
  return meshes;
}

void write_mesh(const fs::path& path, const ObjectMesh& mesh) {
  std::string out;
  for (const Point3& v : mesh.vertices) {
    out += "v " + format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z) +
           "\n";
  }
  write_text_atomic(path, out);
}

void write_meshes(const fs::path& dir, const MeshLibrary& meshes) {
  fs::create_directories(dir);
  for (const auto& [id, mesh] : meshes) write_mesh(dir / (id + ".obj"), mesh);
}

}  // namespace casar
