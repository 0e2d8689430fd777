#include "casar/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>

#include "casar/error.hpp"

namespace casar {

namespace {

constexpr int kJointsPerHand = 21;
constexpr int kFingers = 5;

// Object surfaces are convex and centred at the origin, so the tangent plane
// at every vertex supports the whole body: a point offset by s along a vertex
// normal is at least s away from every mesh vertex.
struct Surface {
  std::string id;
  std::vector<Point3> points;
  std::vector<Point3> normals;
};

Point3 normalized(const Point3& p) { return (1.0 / norm(p)) * p; }

Surface make_box(double hx, double hy, double hz, double spacing) {
  Surface s{"box", {}, {}};
  const double half[3] = {hx, hy, hz};
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    const int nu = static_cast<int>(std::round(2 * half[u] / spacing));
    const int nv = static_cast<int>(std::round(2 * half[v] / spacing));
    for (int sign : {-1, 1}) {
      for (int i = 0; i <= nu; ++i) {
        for (int j = 0; j <= nv; ++j) {
          double c[3];
          c[axis] = sign * half[axis];
          c[u] = -half[u] + 2 * half[u] * i / nu;
          c[v] = -half[v] + 2 * half[v] * j / nv;
          double n[3] = {0, 0, 0};
          n[axis] = sign;
          s.points.push_back({c[0], c[1], c[2]});
          s.normals.push_back({n[0], n[1], n[2]});
        }
      }
    }
  }
  return s;
}

Surface make_cylinder(double radius, double height, double spacing) {
  Surface s{"cylinder", {}, {}};
  const int around = static_cast<int>(std::round(2 * std::numbers::pi * radius / spacing));
  const int rings = static_cast<int>(std::round(height / spacing));
  for (int r = 0; r <= rings; ++r) {
    const double z = -height / 2 + height * r / rings;
    for (int a = 0; a < around; ++a) {
      const double t = 2 * std::numbers::pi * a / around;
      s.points.push_back({radius * std::cos(t), radius * std::sin(t), z});
      s.normals.push_back({std::cos(t), std::sin(t), 0});
    }
  }
  for (int sign : {-1, 1}) {
    s.points.push_back({0, 0, sign * height / 2});
    s.normals.push_back({0, 0, static_cast<double>(sign)});
    for (double rr = spacing; rr < radius - 0.5 * spacing; rr += spacing) {
      const int count = static_cast<int>(std::round(2 * std::numbers::pi * rr / spacing));
      for (int a = 0; a < count; ++a) {
        const double t = 2 * std::numbers::pi * a / count;
        s.points.push_back({rr * std::cos(t), rr * std::sin(t), sign * height / 2});
        s.normals.push_back({0, 0, static_cast<double>(sign)});
      }
    }
  }
  return s;
}

// Fibonacci-lattice ellipsoid; a == b == c gives a sphere.
Surface make_ellipsoid(std::string id, double a, double b, double c, int count) {
  Surface s{std::move(id), {}, {}};
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * i;
    const Point3 p{a * r * std::cos(phi), b * r * std::sin(phi), c * z};
    s.points.push_back(p);
    s.normals.push_back(normalized({p.x / (a * a), p.y / (b * b), p.z / (c * c)}));
  }
  return s;
}

// Index order is the object label.
const std::vector<Surface>& surfaces();

// Vertices whose outward normal points up (-y) by more than `min_up`.
std::vector<std::vector<std::size_t>> upward_points(double min_up) {
  std::vector<std::vector<std::size_t>> out;
  for (const Surface& surf : surfaces()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < surf.points.size(); ++i) {
      if (-surf.normals[i].y > min_up) idx.push_back(i);
    }
    out.push_back(std::move(idx));
  }
  return out;
}

std::size_t surface_index(const Surface& s) {
  for (std::size_t k = 0; k < surfaces().size(); ++k) {
    if (&surfaces()[k] == &s) return k;
  }
  throw ValidationError("unknown synthetic surface");
}

// Fingertip targets: the upper surface.
const std::vector<std::size_t>& top_points(const Surface& s) {
  static const auto all = upward_points(0.6);
  return all[surface_index(s)];
}

// Hand anchors: the central part of the upper surface.
const std::vector<std::size_t>& cap_points(const Surface& s) {
  static const auto all = upward_points(0.9);
  return all[surface_index(s)];
}

const std::vector<Surface>& surfaces() {
  static const std::vector<Surface> all = {
      make_box(0.04, 0.03, 0.06, 0.008),
      make_cylinder(0.035, 0.12, 0.008),
      make_ellipsoid("ellipsoid", 0.05, 0.035, 0.07, 520),
      make_ellipsoid("sphere", 0.045, 0.045, 0.045, 400),
  };
  return all;
}

enum class Role { touch, near, distant };

struct HandRole {
  Role role;
  std::uint8_t fingers;  // bit f set: fingertip f touches (thumb = bit 0)
};

struct ClassConfig {
  HandRole left;
  HandRole right;
};

constexpr std::uint8_t kAll = 0b11111;

// Contact configurations; class c uses configuration c / 2 with phase c % 2.
// Configurations 0 and 1 touch identically and differ only in where the free
// hand rests, so telling them apart needs the distant bits.
constexpr std::array<ClassConfig, 12> kConfigs = {{
    {{Role::distant, 0}, {Role::touch, 0b00011}},
    {{Role::near, 0}, {Role::touch, 0b00011}},
    {{Role::touch, 0b00110}, {Role::distant, 0}},
    {{Role::near, 0}, {Role::touch, 0b00010}},
    {{Role::touch, 0b00011}, {Role::touch, 0b00111}},
    {{Role::touch, kAll}, {Role::near, 0}},
    {{Role::near, 0}, {Role::touch, 0b00110}},
    {{Role::touch, 0b00010}, {Role::distant, 0}},
    {{Role::distant, 0}, {Role::touch, 0b11100}},
    {{Role::touch, 0b00111}, {Role::near, 0}},
    {{Role::near, 0}, {Role::touch, 0b10001}},
    {{Role::touch, 0b11000}, {Role::touch, 0b00011}},
}};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double sigma) {
    if (sigma == 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng_);
  }
  Point3 unit_vector() {
    for (;;) {
      const Point3 p{normal(1.0), normal(1.0), normal(1.0)};
      const double n = norm(p);
      if (n > 1e-6) return (1.0 / n) * p;
    }
  }

 private:
  std::mt19937_64 rng_;
};

Point3 perpendicular(const Point3& n, const Point3& hint) {
  Point3 t = hint - dot(hint, n) * n;
  if (norm(t) < 1e-6) {
    t = std::abs(n.x) < 0.9 ? cross(n, Point3{1, 0, 0}) : cross(n, Point3{0, 1, 0});
  }
  return normalized(t);
}

std::size_t nearest_point(const Surface& s, const Point3& target,
                          std::span<const std::size_t> candidates) {
  std::size_t best = candidates.front();
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i : candidates) {
    const double d = squared_distance(s.points[i], target);
    if (d < best_sq) {
      best_sq = d;
      best = i;
    }
  }
  return best;
}

// Per-clip layout of one hand resting on / hovering over the surface.
struct HandedLayout {
  std::size_t anchor = 0;
  Point3 t1, t2;
  double side = 1.0;  // +1 right hand, -1 left hand (mirrors finger order)
  std::array<double, kFingers> gap{};
  std::array<double, kFingers> lift{};
  double wrist_lift = 0.0;
};

HandedLayout layout_hand(const Surface& s, std::size_t anchor, double side, double min_lift,
                         double max_lift, double wrist_lift, Sampler& rng) {
  HandedLayout h;
  h.anchor = anchor;
  h.side = side;
  const Point3 n0 = s.normals[anchor];
  h.t1 = perpendicular(n0, rng.unit_vector());
  h.t2 = cross(n0, h.t1);
  for (int f = 0; f < kFingers; ++f) {
    h.gap[f] = rng.uniform(0.002, 0.008);
    h.lift[f] = rng.uniform(min_lift, max_lift);
  }
  h.wrist_lift = wrist_lift;
  return h;
}

// Joint order: wrist, then per finger (thumb..pinky) MCP, PIP, DIP, tip.
std::vector<Point3> pose_hand(const Surface& s, const HandedLayout& h,
                              std::uint8_t touching) {
  static constexpr std::array<double, kFingers> kOffsets = {-0.03, -0.015, 0.0, 0.015, 0.03};
  std::vector<Point3> joints(kJointsPerHand);
  const Point3 v0 = s.points[h.anchor];
  const Point3 n0 = s.normals[h.anchor];
  joints[0] = v0 + (0.07 + h.wrist_lift) * n0 + 0.13 * h.t2;
  for (int f = 0; f < kFingers; ++f) {
    const Point3 target = v0 + (h.side * kOffsets[f]) * h.t1;
    const std::size_t vi = nearest_point(s, target, top_points(s));
    const Point3 v = s.points[vi];
    const Point3 n = s.normals[vi];
    const Point3 up = perpendicular(n, h.t2);
    // A lifted finger extends away from the surface; the knuckle barely moves.
    const double lift = (touching >> f) & 1 ? 0.0 : h.lift[f];
    const double base = h.wrist_lift;
    joints[4 * f + 1] = v + (0.060 + base + 0.1 * lift) * n + 0.075 * up;
    joints[4 * f + 2] = v + (0.045 + base + 0.4 * lift) * n + 0.040 * up;
    joints[4 * f + 3] = v + (0.028 + base + 0.7 * lift) * n + 0.018 * up;
    joints[4 * f + 4] = v + (h.gap[f] + base + lift) * n;
  }
  return joints;
}

// Open hand far from the object: every joint lies beyond `reach` from the
// origin along `dir`.
std::vector<Point3> distant_hand(double side, Sampler& rng) {
  const Point3 dir = rng.unit_vector();
  const Point3 x_axis = perpendicular(dir, rng.unit_vector());
  const Point3 z_axis = cross(x_axis, dir);
  const double reach = rng.uniform(0.32, 0.45);
  const Point3 wrist = reach * dir;
  std::vector<Point3> local(kJointsPerHand);
  local[0] = {0, 0, 0};
  local[1] = {-0.030, 0.030, 0.010};
  local[2] = {-0.045, 0.060, 0.015};
  local[3] = {-0.055, 0.085, 0.018};
  local[4] = {-0.060, 0.105, 0.020};
  for (int f = 1; f < kFingers; ++f) {
    const double x = (f - 2.5) * 0.018;
    local[4 * f + 1] = {x, 0.090, 0.0};
    local[4 * f + 2] = {x * 1.05, 0.125, -0.004};
    local[4 * f + 3] = {x * 1.10, 0.150, -0.006};
    local[4 * f + 4] = {x * 1.12, 0.170, -0.008};
  }
  std::vector<Point3> out;
  out.reserve(local.size());
  for (const Point3& p : local) {
    out.push_back(wrist + (side * p.x) * x_axis + p.y * dir + p.z * z_axis);
  }
  return out;
}

RigidTransform random_rotation(Sampler& rng, double max_angle, const Point3& t) {
  return RigidTransform::axis_angle(rng.unit_vector(), rng.uniform(-max_angle, max_angle), t);
}

struct Generated {
  ActionClip clip;
  std::vector<ContactRecord> contacts;
};

Generated generate_clip(const std::string& clip_id, int action, const SynthSpec& spec,
                        const DatasetConfig& config, const MeshLibrary& meshes,
                        Sampler& rng) {
  const ClassConfig& cls = kConfigs[static_cast<std::size_t>(action / 2)];
  const bool approach = action % 2 == 0;
  const int object = rng.uniform_int(0, synth_object_count() - 1);
  const Surface& surf = surfaces()[static_cast<std::size_t>(object)];
  const ObjectMesh& mesh = meshes.at(surf.id);

  // Hands reach down onto the upper surface (y points down). The primary
  // anchor belongs to the first touching hand, the other hand takes the
  // mirrored spot across the vertical axis.
  const std::vector<std::size_t>& top = top_points(surf);
  const std::vector<std::size_t>& cap = cap_points(surf);
  const std::size_t primary =
      cap[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(cap.size()) - 1))];
  const Point3 p0 = surf.points[primary];
  const std::size_t opposite = nearest_point(surf, {-p0.x, p0.y, -p0.z}, top);
  const bool right_first = cls.right.role == Role::touch;

  std::array<HandedLayout, 2> layouts{};
  for (int hand = 0; hand < 2; ++hand) {
    const HandRole& role = hand == 0 ? cls.left : cls.right;
    const double side = hand == 0 ? -1.0 : 1.0;
    const bool is_primary = (hand == 1) == right_first;
    const std::size_t anchor = is_primary ? primary : opposite;
    if (role.role == Role::near) {
      layouts[hand] = layout_hand(surf, anchor, side, 0.05, 0.06, 0.03, rng);
    } else {
      layouts[hand] = layout_hand(surf, anchor, side, 0.045, 0.07, 0.0, rng);
    }
  }
  std::array<std::vector<Point3>, 2> far_hands;
  for (int hand = 0; hand < 2; ++hand) {
    const HandRole& role = hand == 0 ? cls.left : cls.right;
    if (role.role == Role::distant) far_hands[hand] = distant_hand(hand == 0 ? -1.0 : 1.0, rng);
  }

  const int length = rng.uniform_int(spec.min_frames, spec.max_frames);
  int switch_at = static_cast<int>(std::floor(length * rng.uniform(0.3, 0.7)));
  switch_at = std::clamp(switch_at, 1, std::max(1, length - 1));

  // Object placed on a table in front of the camera (y down): free yaw, mild tilt.
  const RigidTransform yaw = RigidTransform::axis_angle(
      {0, 1, 0}, rng.uniform(-std::numbers::pi, std::numbers::pi),
      {rng.uniform(-0.25, 0.25), rng.uniform(-0.1, 0.1), rng.uniform(0.35, 0.75)});
  const Point3 tilt_axis = perpendicular({0, 1, 0}, rng.unit_vector());
  const RigidTransform scene = yaw.compose(RigidTransform::axis_angle(
      tilt_axis, rng.uniform(-15.0, 15.0) * std::numbers::pi / 180.0, {0, 0, 0}));
  const auto canonical_corners = bounding_box_corners(mesh.vertices);

  Generated out;
  out.clip.clip_id = clip_id;
  out.clip.action_label = action;
  out.clip.mesh_id = surf.id;
  out.clip.frames.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    const bool touching_now = approach ? t >= switch_at : t < switch_at;
    const RigidTransform jitter = random_rotation(
        rng, 1.5 * std::numbers::pi / 180.0,
        {rng.normal(0.004), rng.normal(0.004), rng.normal(0.004)});
    const RigidTransform pose = scene.compose(jitter);

    FrameSample frame;
    for (int hand = 0; hand < 2; ++hand) {
      const HandRole& role = hand == 0 ? cls.left : cls.right;
      std::vector<Point3> joints;
      if (role.role == Role::distant) {
        joints = far_hands[hand];
      } else {
        const std::uint8_t touching =
            role.role == Role::touch && touching_now ? role.fingers : 0;
        joints = pose_hand(surf, layouts[hand], touching);
      }
      for (Point3& p : joints) {
        p = pose.apply(p);
        p = p + Point3{rng.normal(spec.noise_sigma), rng.normal(spec.noise_sigma),
                       rng.normal(spec.noise_sigma)};
      }
      (hand == 0 ? frame.hand.left : frame.hand.right) = std::move(joints);
    }
    const auto corners = transform_points(pose, canonical_corners);
    frame.object.label = object;
    frame.object.pose_points = expand_bbox_21(corners);
    frame.object.world_from_canonical = pose;

    const VertexIndex index(transform_points(pose, mesh.vertices));
    const auto joints = frame.hand.joints();
    out.contacts.push_back({clip_id, static_cast<std::size_t>(t),
                            label_contact_map(joints, index, config.thresholds,
                                              config.joint_count())});
    out.clip.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  if (class_count < 2 || class_count > synth_max_classes()) {
    throw ValidationError("synthetic class_count must be in [2, " +
                          std::to_string(synth_max_classes()) + "], got " +
                          std::to_string(class_count));
  }
  if (clips_per_class < 1) throw ValidationError("clips_per_class must be >= 1");
  if (test_clips_per_class < 0) throw ValidationError("test_clips_per_class must be >= 0");
  if (min_frames < 2 || max_frames < min_frames) {
    throw ValidationError("frame range must satisfy 2 <= min_frames <= max_frames");
  }
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0 || noise_sigma > 0.05) {
    throw ValidationError("noise_sigma must be in [0, 0.05] meters");
  }
}

int synth_max_classes() { return static_cast<int>(2 * kConfigs.size()); }

int synth_object_count() { return static_cast<int>(surfaces().size()); }

DatasetConfig synth_dataset_config(int class_count) {
  DatasetConfig c;
  c.hands = 2;
  c.joints_per_hand = kJointsPerHand;
  c.object_class_count = synth_object_count();
  c.action_class_count = class_count;
  c.frames_per_clip = 32;
  return c;
}

MeshLibrary synth_meshes() {
  MeshLibrary out;
  for (const Surface& s : surfaces()) out.emplace(s.id, ObjectMesh{s.id, s.points});
  return out;
}

SynthDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  SynthDataset data;
  data.config = synth_dataset_config(spec.class_count);
  data.meshes = synth_meshes();
  Sampler rng(spec.seed);

  auto emit = [&](const char* prefix, int per_class, std::vector<ActionClip>& clips,
                  std::vector<ContactRecord>& contacts) {
    for (int c = 0; c < spec.class_count; ++c) {
      for (int i = 0; i < per_class; ++i) {
        const std::string id =
            std::string(prefix) + "_c" + std::to_string(c) + "_" + std::to_string(i);
        Generated g = generate_clip(id, c, spec, data.config, data.meshes, rng);
        clips.push_back(std::move(g.clip));
        contacts.insert(contacts.end(), g.contacts.begin(), g.contacts.end());
      }
    }
  };
  emit("train", spec.clips_per_class, data.train_clips, data.train_contacts);
  emit("test", spec.test_clips_per_class, data.test_clips, data.test_contacts);
  return data;
}

}  // namespace casar
