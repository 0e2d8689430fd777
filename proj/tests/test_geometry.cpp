#include <random>

#include "casar/error.hpp"
#include "casar/geometry.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace casar;

TEST_CASE("vertex index basics") {
  const std::vector<Point3> one = {{0, 0, 0}};
  const VertexIndex idx(one);
  CHECK(idx.size() == 1);
  CHECK(nearest_vertex_distance(idx, {1, 0, 0}) == 1.0);

  std::vector<Point3> cube;
  for (int c = 0; c < 8; ++c) cube.push_back({double(c & 1), double((c >> 1) & 1), double(c >> 2)});
  CHECK(VertexIndex(cube).size() == 8);

  const std::vector<Point3> two = {{1, 0, 0}, {0, 2, 0}};
  const VertexIndex idx2(two);
  CHECK(idx2.nearest_distance({0, 0, 0}) == 1.0);
  CHECK(idx2.nearest_distance({0, 2, 0}) == 0.0);
}

TEST_CASE("vertex index rejects bad input") {
  CHECK_THROWS_AS(VertexIndex(std::vector<Point3>{}), ValidationError);
  const std::vector<Point3> bad = {{0, 0, 0}, {std::nan(""), 0, 0}};
  CHECK_THROWS_AS(VertexIndex{bad}, ValidationError);
}

TEST_CASE("vertex index matches brute force") {
  std::mt19937_64 rng(11);
  const auto vertices = oracle::random_points(rng, 5000);
  const VertexIndex idx(vertices);
  const auto queries = oracle::random_points(rng, 1000, -0.2, 1.2);
  double worst = 0.0;
  for (const auto& q : queries) {
    worst = std::max(worst, std::abs(idx.nearest_distance(q) - oracle::brute_nearest(vertices, q)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("vertex index handles duplicates and clustered points") {
  std::mt19937_64 rng(5);
  std::vector<Point3> v(300, Point3{0.5, 0.5, 0.5});
  const auto extra = oracle::random_points(rng, 50, 0.49, 0.51);
  v.insert(v.end(), extra.begin(), extra.end());
  const VertexIndex idx(v);
  for (const auto& q : oracle::random_points(rng, 200)) {
    CHECK(std::abs(idx.nearest_distance(q) - oracle::brute_nearest(v, q)) <= 1e-12);
  }
}

TEST_CASE("rigid transforms") {
  const std::vector<Point3> pts = {{0, 0, 0}, {1, 2, 3}, {-4, 0.5, 2}};
  CHECK(transform_points(RigidTransform{}, pts) == pts);

  const auto moved = transform_points(RigidTransform::translation({1, 2, 3}), pts);
  CHECK(moved[0] == Point3{1, 2, 3});

  const auto rz = RigidTransform::axis_angle({0, 0, 1}, std::numbers::pi / 2);
  const Point3 r = rz.apply({1, 0, 0});
  CHECK(std::abs(r.x) <= 1e-9);
  CHECK(std::abs(r.y - 1.0) <= 1e-9);
  CHECK(std::abs(r.z) <= 1e-9);

  std::mt19937_64 rng(3);
  const auto t = oracle::random_rigid(rng);
  const Point3 p{0.3, -0.2, 0.9};
  const Point3 back = t.inverse().apply(t.apply(p));
  CHECK(distance(back, p) <= 1e-12);
}

TEST_CASE("rigid transform validation") {
  std::array<double, 16> m = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  CHECK_NOTHROW(RigidTransform::from_row_major(m));
  auto bottom = m;
  bottom[12] = 0.1;
  CHECK_THROWS_AS(RigidTransform::from_row_major(bottom), ValidationError);
  auto scaled = m;
  scaled[0] = 1.1;
  CHECK_THROWS_AS(RigidTransform::from_row_major(scaled), ValidationError);
  auto mirrored = m;
  mirrored[0] = -1.0;
  CHECK_THROWS_AS(RigidTransform::from_row_major(mirrored), ValidationError);
  auto nan = m;
  nan[3] = std::nan("");
  CHECK_THROWS_AS(RigidTransform::from_row_major(nan), ValidationError);
}

TEST_CASE("contact labels at the thresholds") {
  const std::vector<Point3> mesh = {{0, 0, 0}};
  const VertexIndex idx(mesh);
  const ContactThresholds t{0.02, 0.20};
  const std::vector<Point3> joints = {{0.015, 0, 0}, {0.25, 0, 0}, {0.10, 0, 0},
                                      {0.02, 0, 0},  {0.20, 0, 0}};
  const ContactMap m = label_contact_map(joints, idx, t, joints.size());
  CHECK(m.contact == std::vector<std::uint8_t>{1, 0, 0, 0, 0});
  CHECK(m.distant == std::vector<std::uint8_t>{0, 1, 0, 0, 0});
  CHECK(m.as_target() == std::vector<double>{1, 0, 0, 0, 0, 0, 1, 0, 0, 0});

  CHECK_THROWS_AS(label_contact_map(joints, idx, t, 42), ShapeError);
  CHECK_THROWS_AS(label_contact_map(joints, idx, ContactThresholds{0.3, 0.2}, joints.size()),
                  ValidationError);
}

TEST_CASE("contact labels: monotone in distance, invariant under rigid motion") {
  std::mt19937_64 rng(19);
  const auto mesh = oracle::random_points(rng, 400, -0.05, 0.05);
  const VertexIndex idx(mesh);
  const ContactThresholds t;
  const auto joints = oracle::random_points(rng, 42, -0.3, 0.3);
  const ContactMap base = label_contact_map(joints, idx, t, 42);
  CHECK(base == oracle::brute_contact_map(mesh, joints, t));

  // Pushing joints radially away from the mesh cannot create contacts.
  std::vector<Point3> farther;
  for (const auto& j : joints) farther.push_back(1.5 * j);
  const ContactMap pushed = label_contact_map(farther, idx, t, 42);
  for (std::size_t k = 0; k < 42; ++k) {
    if (idx.nearest_distance(farther[k]) >= idx.nearest_distance(joints[k])) {
      CHECK(pushed.contact[k] <= base.contact[k]);
      CHECK(pushed.distant[k] >= base.distant[k]);
    }
  }

  const auto T = oracle::random_rigid(rng);
  const VertexIndex moved(transform_points(T, mesh));
  CHECK(label_contact_map(transform_points(T, joints), moved, t, 42) == base);
}

TEST_CASE("21-point bounding box") {
  std::vector<Point3> cube;
  for (int c = 0; c < 8; ++c) cube.push_back({double(c & 1), double((c >> 1) & 1), double(c >> 2)});
  const auto box = expand_bbox_21(cube);
  CHECK(box[0] == Point3{0.5, 0.5, 0.5});
  for (int c = 0; c < 8; ++c) CHECK(box[1 + c] == cube[c]);
  for (int e = 0; e < 12; ++e) {
    const Point3& p = box[9 + e];
    int halves = 0, ends = 0;
    for (int a = 0; a < 3; ++a) {
      if (p[a] == 0.5) ++halves;
      if (p[a] == 0.0 || p[a] == 1.0) ++ends;
    }
    CHECK(halves == 1);
    CHECK(ends == 2);
  }

  const std::vector<Point3> degenerate(8, Point3{1, 1, 1});
  for (const auto& p : expand_bbox_21(degenerate)) CHECK(p == Point3{1, 1, 1});

  CHECK_THROWS_AS(expand_bbox_21(std::vector<Point3>(7)), ShapeError);
}

TEST_CASE("bounding box expansion commutes with rigid motion") {
  std::mt19937_64 rng(23);
  const auto corners = bounding_box_corners(oracle::random_points(rng, 100));
  for (int trial = 0; trial < 20; ++trial) {
    const auto T = oracle::random_rigid(rng);
    const auto a = expand_bbox_21(transform_points(T, corners));
    const auto expanded = expand_bbox_21(corners);
    const auto b = transform_points(T, expanded);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(distance(a[i], b[i]) <= 1e-9);
  }
}

TEST_CASE("object mesh validation") {
  ObjectMesh m{"m", {}};
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m.vertices = {{0, 0, 0}, {std::numeric_limits<double>::infinity(), 0, 0}};
  CHECK_THROWS_AS(m.validate(), ValidationError);
}
