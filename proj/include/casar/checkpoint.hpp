#pragma once

// Binary model checkpoints (all integers little-endian):
//   "CASARNET"                          8 bytes
//   u32 version (1), u32 layer count
//   per layer: u32 in_dim, u32 out_dim, u8 activation (0 relu, 1 sigmoid, 2 identity)
//   per layer: f32 weights row-major (out*in), then f32 bias (out)
// A JSON sidecar "<stem>.meta.json" next to the checkpoint carries the
// dataset config and training provenance.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "casar/neuralcore.hpp"
#include "json.hpp"

namespace casar {

inline constexpr std::string_view kCheckpointMagic = "CASARNET";
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const MlpModel& model);
MlpModel deserialize_checkpoint(std::string_view bytes, const std::string& source = "<memory>");

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

std::filesystem::path checkpoint_meta_path(const std::filesystem::path& checkpoint);
void save_checkpoint_meta(const std::filesystem::path& checkpoint,
                          const nlohmann::ordered_json& meta);
nlohmann::json load_checkpoint_meta(const std::filesystem::path& checkpoint);

// Parameters rounded through single precision, i.e. what a save/load yields.
MlpModel round_to_single(const MlpModel& model);

}  // namespace casar
