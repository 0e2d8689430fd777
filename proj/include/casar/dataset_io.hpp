#pragma once

// On-disk formats:
//   clips     JSON Lines, one clip per line (hands, 8 box corners and a 4x4
//             object pose per frame; corners expanded to 21 points on load)
//   contacts  JSON Lines, one {clip_id, frame_index, contact, distant} per line
//   meshes    one "<mesh_id>.obj" per mesh, "v x y z" lines only
// Writers emit canonical form, so write(load(x)) == x for files they produced.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "casar/datamodel.hpp"

namespace casar {

struct ContactRecord {
  std::string clip_id;
  std::size_t frame_index = 0;
  ContactMap map;

  friend bool operator==(const ContactRecord&, const ContactRecord&) = default;
};

using MeshLibrary = std::map<std::string, ObjectMesh>;

std::vector<ActionClip> load_clips(const std::filesystem::path& path,
                                   const DatasetConfig& config);
void write_clips(const std::filesystem::path& path, std::span<const ActionClip> clips);
std::string clip_to_json_line(const ActionClip& clip);
ActionClip clip_from_json_line(const std::string& line, const DatasetConfig& config);

std::vector<ContactRecord> load_contact_records(const std::filesystem::path& path,
                                                const DatasetConfig& config);
void write_contact_records(const std::filesystem::path& path,
                           std::span<const ContactRecord> records);

// Pairs every record with its frame. Unknown clip ids or frame indices throw.
std::vector<ContactSample> join_contact_samples(std::span<const ActionClip> clips,
                                                std::span<const ContactRecord> records);
// Convenience: load_contact_records + join_contact_samples.
std::vector<ContactSample> load_contact_targets(const std::filesystem::path& path,
                                                std::span<const ActionClip> clips,
                                                const DatasetConfig& config);

ObjectMesh load_mesh(const std::filesystem::path& path, const std::string& mesh_id);
// Every "*.obj" in `dir`, keyed by file stem.
MeshLibrary load_meshes(const std::filesystem::path& dir);
void write_mesh(const std::filesystem::path& path, const ObjectMesh& mesh);
void write_meshes(const std::filesystem::path& dir, const MeshLibrary& meshes);

// Writes via a temporary sibling and rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace casar
