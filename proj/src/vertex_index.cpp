#include <algorithm>
#include <limits>

#include "casar/error.hpp"
#include "casar/geometry.hpp"

namespace casar {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

VertexIndex::VertexIndex(std::span<const Point3> vertices)
    : points_(vertices.begin(), vertices.end()) {
  if (points_.empty()) throw ValidationError("cannot index an empty vertex list");
  if (points_.size() > std::numeric_limits<std::uint32_t>::max() / 2) {
    throw ValidationError("vertex list too large to index");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].is_finite()) {
      throw ValidationError("vertex " + std::to_string(i) + " is not finite");
    }
  }
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t VertexIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0.0, 0});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[begin];
  Point3 hi = points_[begin];
  for (std::uint32_t i = begin; i < end; ++i) {
    const Point3& p = points_[i];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Point3 extent = hi - lo;
  std::uint8_t axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                   [axis](const Point3& a, const Point3& b) { return a[axis] < b[axis]; });
  const double split = points_[mid][axis];

  // Children are [begin, mid) with coord <= split and [mid, end) with coord >= split.
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.left = left;
  node.right = right;
  node.axis = axis;
  node.split = split;
  return id;
}

void VertexIndex::search(std::int32_t node_id, const Point3& q, double& best_sq) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      best_sq = std::min(best_sq, squared_distance(points_[i], q));
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, best_sq);
  // Every point on the far side is at least |diff| away along the split axis.
  if (diff * diff <= best_sq) search(far, q, best_sq);
}

double VertexIndex::nearest_distance(const Point3& query) const {
  if (!query.is_finite()) throw ValidationError("nearest-vertex query is not finite");
  double best_sq = std::numeric_limits<double>::infinity();
  search(0, query, best_sq);
  return std::sqrt(best_sq);
}

}  // namespace casar
