#pragma once

// Rays, range-truncated cones and the intersection predicates used to resolve
// gaze and pointing targets. Everything here is templated on the scalar type
// and free of state.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <ranges>
#include <string>
#include <tuple>
#include <vector>

#include "ef/error.hpp"

namespace ef {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
struct Aabb {
  Vector3<Scalar> min = Vector3<Scalar>::Zero();
  Vector3<Scalar> max = Vector3<Scalar>::Zero();

  Vector3<Scalar> center() const { return (min + max) / Scalar(2); }
  Scalar bounding_radius() const { return (max - min).norm() / Scalar(2); }

  // Corner i selects max on axis k when bit k of i is set.
  Vector3<Scalar> corner(int i) const {
    return {(i & 1) ? max.x() : min.x(), (i & 2) ? max.y() : min.y(), (i & 4) ? max.z() : min.z()};
  }

  bool contains(const Vector3<Scalar>& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  // min <= max componentwise and strictly less on at least one axis.
  bool valid() const {
    return min.allFinite() && max.allFinite() && (min.array() <= max.array()).all() &&
           (min.array() < max.array()).any();
  }
};

template <typename Scalar>
struct UnitRay {
  Vector3<Scalar> origin;
  Vector3<Scalar> direction;
};

template <typename Scalar>
UnitRay<Scalar> ray_from_points(const Vector3<Scalar>& origin, const Vector3<Scalar>& through) {
  const Vector3<Scalar> d = through - origin;
  const Scalar n = d.norm();
  if (!(n > Scalar(1e-9))) {
    throw Error(Errc::DegenerateRay, "ray endpoints coincide");
  }
  return {origin, d / n};
}

template <typename Scalar>
struct Cone {
  Vector3<Scalar> apex = Vector3<Scalar>::Zero();
  Vector3<Scalar> axis = Vector3<Scalar>::UnitZ();
  Scalar half_angle = Scalar(0);
  Scalar range = Scalar(0);

  // Normalizes the axis and checks 0 < half_angle < pi/2, range > 0.
  static Cone make(const Vector3<Scalar>& apex, const Vector3<Scalar>& axis, Scalar half_angle,
                   Scalar range) {
    const Scalar n = axis.norm();
    if (!(n > Scalar(1e-12)) || !apex.allFinite()) {
      throw Error(Errc::InvalidCone, "cone axis is degenerate");
    }
    if (!(half_angle > Scalar(0) && half_angle < Scalar(EIGEN_PI / 2))) {
      throw Error(Errc::InvalidCone, "half angle outside (0, pi/2)");
    }
    if (!(range > Scalar(0))) {
      throw Error(Errc::InvalidCone, "range must be positive");
    }
    return Cone{apex, axis / n, half_angle, range};
  }

  Vector3<Scalar> far_center() const { return apex + range * axis; }
};

template <typename Scalar>
Cone<Scalar> cone_from_ray(const UnitRay<Scalar>& ray, Scalar half_angle, Scalar range) {
  return Cone<Scalar>::make(ray.origin, ray.direction, half_angle, range);
}

// Angle between (p - apex) and the cone axis; zero at the apex.
template <typename Scalar>
Scalar angle_from_axis(const Cone<Scalar>& cone, const Vector3<Scalar>& p) {
  const Vector3<Scalar> v = p - cone.apex;
  return std::atan2(v.cross(cone.axis).norm(), v.dot(cone.axis));
}

template <typename Scalar>
bool point_in_cone(const Cone<Scalar>& cone, const Vector3<Scalar>& p) {
  const Vector3<Scalar> v = p - cone.apex;
  const Scalar axial = v.dot(cone.axis);
  if (axial < Scalar(0) || axial > cone.range) return false;
  const Scalar n = v.norm();
  if (n == Scalar(0)) return true;
  return axial >= n * std::cos(cone.half_angle);
}

namespace detail {

template <typename Scalar>
Scalar segment_distance_2d(Scalar px, Scalar py, Scalar ax, Scalar ay, Scalar bx, Scalar by) {
  const Scalar dx = bx - ax, dy = by - ay;
  const Scalar len2 = dx * dx + dy * dy;
  Scalar s = len2 > Scalar(0) ? ((px - ax) * dx + (py - ay) * dy) / len2 : Scalar(0);
  s = std::clamp(s, Scalar(0), Scalar(1));
  return std::hypot(px - (ax + s * dx), py - (ay + s * dy));
}

}  // namespace detail

// Euclidean distance from p to the solid, range-truncated cone (zero inside).
//
// The solid is a body of revolution, so the nearest point lies in the
// meridian half-plane through p. There the cross-section is the triangle
// (0,0), (range,0), (range, range*tan(half_angle)) in (axial, radial)
// coordinates and the distance reduces to a point-triangle distance.
template <typename Scalar>
Scalar distance_to_cone(const Cone<Scalar>& cone, const Vector3<Scalar>& p) {
  const Vector3<Scalar> v = p - cone.apex;
  const Scalar x = v.dot(cone.axis);
  const Scalar rho = (v - x * cone.axis).norm();
  const Scalar reach = cone.range * std::tan(cone.half_angle);
  if (x >= Scalar(0) && x <= cone.range && rho <= x * std::tan(cone.half_angle)) {
    return Scalar(0);
  }
  const Scalar to_side = detail::segment_distance_2d(x, rho, Scalar(0), Scalar(0), cone.range, reach);
  const Scalar to_cap = detail::segment_distance_2d(x, rho, cone.range, Scalar(0), cone.range, reach);
  const Scalar to_axis = detail::segment_distance_2d(x, rho, Scalar(0), Scalar(0), cone.range, Scalar(0));
  return std::min({to_side, to_cap, to_axis});
}

template <typename Scalar>
bool sphere_cone_intersect(const Cone<Scalar>& cone, const Vector3<Scalar>& center, Scalar radius) {
  return distance_to_cone(cone, center) <= radius;
}

// Exact minimum distance between the segment a + t*dir, t in [0, length]
// (dir unit) and a box. The squared distance is piecewise quadratic in t with
// breaks where the segment crosses a slab plane; each piece is minimized in
// closed form.
template <typename Scalar>
Scalar segment_box_distance(const Vector3<Scalar>& a, const Vector3<Scalar>& dir, Scalar length,
                            const Aabb<Scalar>& box) {
  std::vector<Scalar> breaks{Scalar(0), length};
  for (int i = 0; i < 3; ++i) {
    if (dir[i] == Scalar(0)) continue;
    for (const Scalar plane : {box.min[i], box.max[i]}) {
      const Scalar t = (plane - a[i]) / dir[i];
      if (t > Scalar(0) && t < length) breaks.push_back(t);
    }
  }
  std::sort(breaks.begin(), breaks.end());

  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    const Scalar lo = breaks[j], hi = breaks[j + 1];
    const Scalar mid = (lo + hi) / Scalar(2);
    Scalar qa = 0, qb = 0, qc = 0;
    for (int i = 0; i < 3; ++i) {
      const Scalar x = a[i] + mid * dir[i];
      Scalar offset;
      if (x < box.min[i]) {
        offset = a[i] - box.min[i];
      } else if (x > box.max[i]) {
        offset = a[i] - box.max[i];
      } else {
        continue;
      }
      qa += dir[i] * dir[i];
      qb += Scalar(2) * offset * dir[i];
      qc += offset * offset;
    }
    Scalar t = lo;
    if (qa > Scalar(0)) t = std::clamp(-qb / (Scalar(2) * qa), lo, hi);
    best = std::min(best, std::max(Scalar(0), qa * t * t + qb * t + qc));
  }
  return std::sqrt(best);
}

template <typename T, typename Scalar>
concept BoxedObject = requires(const T& object) {
  { object.id } -> std::convertible_to<std::string>;
  { object.aabb } -> std::convertible_to<Aabb<Scalar>>;
};

inline constexpr double kSelectionSlack = 1e-6;

// Conservative cone/box overlap test. True when a box corner lies in the cone,
// or when the box's bounding sphere touches the cone and the box comes within
// (max axial extent) * tan(half_angle) of the axis segment. The second clause
// never rejects a box that contains a point of the cone.
template <typename Scalar>
bool box_intersects_cone(const Cone<Scalar>& cone, const Aabb<Scalar>& box) {
  Scalar max_axial = -std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < 8; ++i) {
    const Vector3<Scalar> c = box.corner(i);
    if (point_in_cone(cone, c)) return true;
    max_axial = std::max(max_axial, (c - cone.apex).dot(cone.axis));
  }
  if (max_axial < Scalar(0)) return false;
  if (!sphere_cone_intersect(cone, box.center(), box.bounding_radius())) return false;
  const Scalar reach = std::min(max_axial, cone.range) * std::tan(cone.half_angle);
  return segment_box_distance(cone.apex, cone.axis, cone.range, box) <= reach + Scalar(kSelectionSlack);
}

// Ids of all objects whose box passes box_intersects_cone, nearest to the
// axis first (angle of the box center), ties by id.
template <typename Scalar, std::ranges::input_range Objects>
  requires BoxedObject<std::ranges::range_value_t<Objects>, Scalar>
std::vector<std::string> select_objects(const Cone<Scalar>& cone, const Objects& objects) {
  std::vector<std::pair<Scalar, std::string>> hits;
  for (const auto& object : objects) {
    const Aabb<Scalar>& box = object.aabb;
    if (box_intersects_cone(cone, box)) {
      hits.emplace_back(angle_from_axis(cone, box.center()), object.id);
    }
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::string> ids;
  ids.reserve(hits.size());
  for (auto& hit : hits) ids.push_back(std::move(hit.second));
  return ids;
}

using Vec3 = Vector3<double>;
using Aabbd = Aabb<double>;
using UnitRayd = UnitRay<double>;
using Coned = Cone<double>;

constexpr double deg_to_rad(double degrees) { return degrees * EIGEN_PI / 180.0; }
constexpr double rad_to_deg(double radians) { return radians * 180.0 / EIGEN_PI; }

}  // namespace ef
