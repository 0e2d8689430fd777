#pragma once

// Rigid transforms, oriented-box expansion, exact nearest-vertex queries and
// per-joint contact / distant labelling.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace casar {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Point3 operator+(const Point3& a, const Point3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Point3 operator-(const Point3& a, const Point3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Point3 operator*(double s, const Point3& p) {
    return {s * p.x, s * p.y, s * p.z};
  }
  friend Point3 operator*(const Point3& p, double s) { return s * p; }
  friend bool operator==(const Point3&, const Point3&) = default;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  bool is_finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double dot(const Point3& a, const Point3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline Point3 cross(const Point3& a, const Point3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Point3& p) { return std::sqrt(dot(p, p)); }

inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Point3& a, const Point3& b) {
  return std::sqrt(squared_distance(a, b));
}

// Homogeneous 4x4 rigid transform, row-major. Construction validates that the
// bottom row is (0,0,0,1) and the rotation block is a proper rotation.
class RigidTransform {
 public:
  static constexpr double kOrthonormalTolerance = 1e-6;

  RigidTransform();  // identity

  // Throws ValidationError when the matrix is not a rigid transform.
  static RigidTransform from_row_major(const std::array<double, 16>& m);
  static RigidTransform from_rotation_translation(
      const std::array<double, 9>& rotation, const Point3& translation);
  static RigidTransform translation(const Point3& t);
  // Rotation of `radians` about the (normalized) `axis`.
  static RigidTransform axis_angle(const Point3& axis, double radians,
                                   const Point3& t = {});

  Point3 apply(const Point3& p) const;
  RigidTransform compose(const RigidTransform& rhs) const;  // this * rhs
  RigidTransform inverse() const;

  const std::array<double, 16>& row_major() const { return m_; }
  double operator()(int row, int col) const { return m_[row * 4 + col]; }
  Point3 translation_part() const { return {m_[3], m_[7], m_[11]}; }

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;

 private:
  explicit RigidTransform(const std::array<double, 16>& m) : m_(m) {}
  std::array<double, 16> m_;
};

std::vector<Point3> transform_points(const RigidTransform& transform,
                                     std::span<const Point3> points);

struct ObjectMesh {
  std::string mesh_id;
  std::vector<Point3> vertices;  // canonical object frame

  // Throws ValidationError on an empty or non-finite vertex list.
  void validate() const;
};

// Exact nearest-neighbour structure over a vertex set (bucketed kd-tree).
// Immutable after construction; safe for concurrent queries.
class VertexIndex {
 public:
  explicit VertexIndex(std::span<const Point3> vertices);

  std::size_t size() const { return points_.size(); }

  // Minimum Euclidean distance from `query` to any indexed vertex.
  double nearest_distance(const Point3& query) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double split = 0.0;
    std::uint8_t axis = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, double& best_sq) const;

  std::vector<Point3> points_;  // private copy, reordered by the tree
  std::vector<Node> nodes_;
};

inline double nearest_vertex_distance(const VertexIndex& index, const Point3& query) {
  return index.nearest_distance(query);
}

struct ContactThresholds {
  double eta_c = 0.02;  // contact, meters
  double eta_d = 0.20;  // distant, meters

  // Throws ValidationError unless 0 < eta_c < eta_d.
  void validate() const;
};

struct ContactMap {
  std::vector<std::uint8_t> contact;
  std::vector<std::uint8_t> distant;

  std::size_t joint_count() const { return contact.size(); }
  // [contact | distant] as 0/1 doubles.
  std::vector<double> as_target() const;

  friend bool operator==(const ContactMap&, const ContactMap&) = default;
};

// Labels each joint: contact iff d < eta_c, distant iff d > eta_d (strict).
// `joints` must hold exactly `expected_joints` points ordered left then right.
ContactMap label_contact_map(std::span<const Point3> joints, const VertexIndex& index,
                             const ContactThresholds& thresholds,
                             std::size_t expected_joints);

// Corner i selects min/max per axis from bits (x: bit 0, y: bit 1, z: bit 2).
// Edges are corner pairs differing in one bit, sorted by (low, high).
inline constexpr std::array<std::array<int, 2>, 12> kBoxEdges = {{
    {0, 1}, {0, 2}, {0, 4}, {1, 3}, {1, 5}, {2, 3},
    {2, 6}, {3, 7}, {4, 5}, {4, 6}, {5, 7}, {6, 7},
}};

inline constexpr std::size_t kBoxCorners = 8;
inline constexpr std::size_t kBoxPoints = 21;

// [center, corners 0..7, 12 edge midpoints in kBoxEdges order].
std::array<Point3, kBoxPoints> expand_bbox_21(std::span<const Point3> corners);

// Axis-aligned canonical-frame box corners of a vertex set, canonical order.
std::array<Point3, kBoxCorners> bounding_box_corners(std::span<const Point3> vertices);

}  // namespace casar
