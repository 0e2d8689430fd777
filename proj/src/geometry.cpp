#include "casar/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "casar/error.hpp"

namespace casar {

namespace {

std::array<double, 16> identity_matrix() {
  return {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
}

void validate_rigid(const std::array<double, 16>& m) {
  for (double v : m) {
    if (!std::isfinite(v)) throw ValidationError("rigid transform has a non-finite entry");
  }
  if (m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0) {
    throw ValidationError("rigid transform bottom row must be (0,0,0,1)");
  }
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double rtr = 0.0;
      for (int k = 0; k < 3; ++k) rtr += m[k * 4 + i] * m[k * 4 + j];
      worst = std::max(worst, std::abs(rtr - (i == j ? 1.0 : 0.0)));
    }
  }
  if (worst > RigidTransform::kOrthonormalTolerance) {
    std::ostringstream os;
    os << "rigid transform rotation is not orthonormal (max |R^T R - I| = " << worst << ")";
    throw ValidationError(os.str());
  }
  const double det = m[0] * (m[5] * m[10] - m[6] * m[9]) -
                     m[1] * (m[4] * m[10] - m[6] * m[8]) +
                     m[2] * (m[4] * m[9] - m[5] * m[8]);
  if (det <= 0.0) throw ValidationError("rigid transform rotation has det <= 0");
}

}  // namespace

RigidTransform::RigidTransform() : m_(identity_matrix()) {}

RigidTransform RigidTransform::from_row_major(const std::array<double, 16>& m) {
  validate_rigid(m);
  return RigidTransform(m);
}

RigidTransform RigidTransform::from_rotation_translation(const std::array<double, 9>& r,
                                                         const Point3& t) {
  return from_row_major({r[0], r[1], r[2], t.x,  //
                         r[3], r[4], r[5], t.y,  //
                         r[6], r[7], r[8], t.z,  //
                         0, 0, 0, 1});
}

RigidTransform RigidTransform::translation(const Point3& t) {
  return from_rotation_translation({1, 0, 0, 0, 1, 0, 0, 0, 1}, t);
}

RigidTransform RigidTransform::axis_angle(const Point3& axis, double radians,
                                          const Point3& t) {
  const double len = norm(axis);
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw ValidationError("rotation axis must be a finite non-zero vector");
  }
  const Point3 u = (1.0 / len) * axis;
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  const double C = 1.0 - c;
  return from_rotation_translation(
      {c + u.x * u.x * C, u.x * u.y * C - u.z * s, u.x * u.z * C + u.y * s,
       u.y * u.x * C + u.z * s, c + u.y * u.y * C, u.y * u.z * C - u.x * s,
       u.z * u.x * C - u.y * s, u.z * u.y * C + u.x * s, c + u.z * u.z * C},
      t);
}

Point3 RigidTransform::apply(const Point3& p) const {
  return {m_[0] * p.x + m_[1] * p.y + m_[2] * p.z + m_[3],
          m_[4] * p.x + m_[5] * p.y + m_[6] * p.z + m_[7],
          m_[8] * p.x + m_[9] * p.y + m_[10] * p.z + m_[11]};
}

RigidTransform RigidTransform::compose(const RigidTransform& rhs) const {
  std::array<double, 16> out{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += m_[i * 4 + k] * rhs.m_[k * 4 + j];
      out[i * 4 + j] = acc;
    }
  }
  out[12] = out[13] = out[14] = 0.0;
  out[15] = 1.0;
  return from_row_major(out);
}

RigidTransform RigidTransform::inverse() const {
  // [R t]^-1 = [R^T, -R^T t]
  std::array<double, 9> rt{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) rt[i * 3 + j] = m_[j * 4 + i];
  }
  const Point3 t = translation_part();
  const Point3 ti{-(rt[0] * t.x + rt[1] * t.y + rt[2] * t.z),
                  -(rt[3] * t.x + rt[4] * t.y + rt[5] * t.z),
                  -(rt[6] * t.x + rt[7] * t.y + rt[8] * t.z)};
  return from_rotation_translation(rt, ti);
}

std::vector<Point3> transform_points(const RigidTransform& transform,
                                     std::span<const Point3> points) {
  std::vector<Point3> out;
  out.reserve(points.size());
  for (const Point3& p : points) out.push_back(transform.apply(p));
  return out;
}

void ObjectMesh::validate() const {
  if (vertices.empty()) {
    throw ValidationError("mesh '" + mesh_id + "' has no vertices");
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!vertices[i].is_finite()) {
      throw ValidationError("mesh '" + mesh_id + "' vertex " + std::to_string(i) +
                            " is not finite");
    }
  }
}

void ContactThresholds::validate() const {
  if (!std::isfinite(eta_c) || !std::isfinite(eta_d) || !(eta_c > 0.0) ||
      !(eta_c < eta_d)) {
    std::ostringstream os;
    os << "contact thresholds require 0 < eta_c < eta_d (got eta_c=" << eta_c
       << ", eta_d=" << eta_d << ")";
    throw ValidationError(os.str());
  }
}

std::vector<double> ContactMap::as_target() const {
  std::vector<double> out;
  out.reserve(contact.size() + distant.size());
  for (auto b : contact) out.push_back(b ? 1.0 : 0.0);
  for (auto b : distant) out.push_back(b ? 1.0 : 0.0);
  return out;
}

ContactMap label_contact_map(std::span<const Point3> joints, const VertexIndex& index,
                             const ContactThresholds& thresholds,
                             std::size_t expected_joints) {
  thresholds.validate();
  if (joints.size() != expected_joints) {
    throw ShapeError("contact labelling expects " + std::to_string(expected_joints) +
                     " joints, got " + std::to_string(joints.size()));
  }
  ContactMap map;
  map.contact.assign(joints.size(), 0);
  map.distant.assign(joints.size(), 0);
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (!joints[i].is_finite()) {
      throw ValidationError("joint " + std::to_string(i) + " is not finite");
    }
    const double d = index.nearest_distance(joints[i]);
    map.contact[i] = d < thresholds.eta_c ? 1 : 0;
    map.distant[i] = d > thresholds.eta_d ? 1 : 0;
  }
  return map;
}

std::array<Point3, kBoxPoints> expand_bbox_21(std::span<const Point3> corners) {
  if (corners.size() != kBoxCorners) {
    throw ShapeError("bounding box expects 8 corners, got " +
                     std::to_string(corners.size()));
  }
  std::array<Point3, kBoxPoints> out{};
  Point3 sum{};
  for (const Point3& c : corners) sum = sum + c;
  out[0] = (1.0 / 8.0) * sum;
  for (std::size_t i = 0; i < kBoxCorners; ++i) out[1 + i] = corners[i];
  for (std::size_t e = 0; e < kBoxEdges.size(); ++e) {
    out[1 + kBoxCorners + e] =
        0.5 * (corners[kBoxEdges[e][0]] + corners[kBoxEdges[e][1]]);
  }
  return out;
}

std::array<Point3, kBoxCorners> bounding_box_corners(std::span<const Point3> vertices) {
  if (vertices.empty()) throw ValidationError("bounding box of an empty vertex set");
  Point3 lo = vertices.front();
  Point3 hi = vertices.front();
  for (const Point3& v : vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  std::array<Point3, kBoxCorners> out{};
  for (std::size_t i = 0; i < kBoxCorners; ++i) {
    out[i] = {(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z};
  }
  return out;
}

}  // namespace casar
