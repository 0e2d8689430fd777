#include "casar/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "casar/dataset_io.hpp"
#include "casar/error.hpp"

namespace casar {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "checkpoints need IEEE-754 floats");

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view take(std::size_t n) {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError(source_ + ": checkpoint is truncated");
  }
  std::string_view bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const MlpModel& model) {
  model.validate();
  std::string out(kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(model.layers.size()));
  for (const DenseLayer& l : model.layers) {
    put_u32(out, static_cast<std::uint32_t>(l.in_dim()));
    put_u32(out, static_cast<std::uint32_t>(l.out_dim()));
    out.push_back(static_cast<char>(l.activation));
  }
  for (const DenseLayer& l : model.layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
        put_f32(out, static_cast<float>(l.weights(r, c)));
      }
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_f32(out, static_cast<float>(l.bias(r)));
  }
  return out;
}

MlpModel deserialize_checkpoint(std::string_view bytes, const std::string& source) {
  Reader in(bytes, source);
  if (bytes.size() < kCheckpointMagic.size() || in.take(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw ParseError(source + ": bad checkpoint magic (expected CASARNET)");
  }
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw ParseError(source + ": unsupported checkpoint version " + std::to_string(version) +
                     " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t count = in.u32();
  if (count == 0 || count > 1024) {
    throw ParseError(source + ": implausible layer count " + std::to_string(count));
  }
  MlpModel model;
  std::uint64_t expected_floats = 0;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t in_dim = in.u32();
    const std::uint32_t out_dim = in.u32();
    const std::uint8_t act = in.u8();
    if (in_dim == 0 || out_dim == 0) throw ParseError(source + ": zero layer width");
    if (act > 2) {
      throw ParseError(source + ": unknown activation code " + std::to_string(act));
    }
    expected_floats += static_cast<std::uint64_t>(in_dim) * out_dim + out_dim;
    DenseLayer l;
    l.activation = static_cast<Activation>(act);
    l.weights.resize(out_dim, in_dim);
    l.bias.resize(out_dim);
    model.layers.push_back(std::move(l));
  }
  if (in.remaining() != expected_floats * 4) {
    throw ParseError(source + ": checkpoint payload is " + std::to_string(in.remaining()) +
                     " bytes, expected " + std::to_string(expected_floats * 4) +
                     (in.remaining() < expected_floats * 4 ? " (truncated)" : ""));
  }
  for (DenseLayer& l : model.layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = in.f32();
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = in.f32();
  }
  try {
    model.validate();
  } catch (const Error& e) {
    throw ParseError(source + ": " + e.what());
  }
  return model;
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  write_text_atomic(path, serialize_checkpoint(model));
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_text(path), path.string());
}

std::filesystem::path checkpoint_meta_path(const std::filesystem::path& checkpoint) {
  std::filesystem::path p = checkpoint;
  p.replace_extension(".meta.json");
  return p;
}

void save_checkpoint_meta(const std::filesystem::path& checkpoint,
                          const nlohmann::ordered_json& meta) {
  write_text_atomic(checkpoint_meta_path(checkpoint), meta.dump(2) + "\n");
}

nlohmann::json load_checkpoint_meta(const std::filesystem::path& checkpoint) {
  const auto path = checkpoint_meta_path(checkpoint);
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

MlpModel round_to_single(const MlpModel& model) {
  MlpModel out = model;
  for (DenseLayer& l : out.layers) {
    l.weights = l.weights.cast<float>().cast<double>();
    l.bias = l.bias.cast<float>().cast<double>();
  }
  return out;
}

}  // namespace casar
