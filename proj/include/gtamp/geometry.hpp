#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

namespace gtamp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Circle {
  double radius = 0.0;
  friend bool operator==(const Circle&, const Circle&) = default;
};

struct AxisRect {
  double half_w = 0.0;
  double half_h = 0.0;
  friend bool operator==(const AxisRect&, const AxisRect&) = default;
};

using Shape = std::variant<Circle, AxisRect>;

/// Radius of the smallest origin-centred disc containing the shape.
double circumradius(const Shape& shape);

/// Half extents of the shape's axis-aligned bounding box.
Vec2 half_extents(const Shape& shape);

bool valid_shape(const Shape& shape);

/// Translation-only pose. Orientation is not modelled: every shape is
/// axis aligned and placements are pure translations.
struct Pose {
  Vec2 position;
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct PlacedShape {
  Shape shape;
  Vec2 center;
};

/// Capsule {p : dist(p, segment(start, end)) <= half_width}. Stands in for the
/// volume swept by a straight-line robot motion.
struct Corridor {
  Vec2 start;
  Vec2 end;
  double half_width = 0.0;
  friend bool operator==(const Corridor&, const Corridor&) = default;
};

/// Anything that can occupy space: a placed object or a swept corridor.
using Body = std::variant<PlacedShape, Corridor>;

struct Rect {
  Vec2 lo;
  Vec2 hi;
  bool contains(Vec2 p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  bool empty() const { return lo.x > hi.x || lo.y > hi.y; }
  double area() const { return empty() ? 0.0 : (hi.x - lo.x) * (hi.y - lo.y); }
};

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);
/// Zero when the segment touches or crosses the rectangle.
double segment_rect_distance(Vec2 a, Vec2 b, const Rect& rect);
double point_rect_distance(Vec2 p, const Rect& rect);

/// Closed-set intersection. Touching bodies intersect. Exact for every pair
/// of circles, axis-aligned rectangles and capsules.
bool intersects(const Body& a, const Body& b);

/// True iff the placed shape lies entirely inside the closed rectangle.
bool contained_in(const PlacedShape& obj, const Rect& area);

/// Sweep used when a robot reaches out to grasp an object: robot body only.
Corridor pick_corridor(Vec2 robot_base, double body_radius, Vec2 target, double clearance);

/// Sweep used when a robot carries an object to `target`: robot body plus the
/// carried object's circumradius.
Corridor place_corridor(Vec2 robot_base, double body_radius, Vec2 target, const Shape& carried,
                        double clearance);

/// Deterministic generator owned by one consumer. Uniform draws are computed
/// from the raw 64-bit stream so results do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// Rejection-samples a centre for `shape` inside `area` (the whole shape must
/// fit) that avoids every body in `forbidden`. `window`, when given, further
/// restricts the sampled centres (used to bias draws toward a robot's reach).
std::optional<Pose> sample_placement(const Shape& shape, const Rect& area,
                                     std::span<const Body> forbidden, Rng& rng, int max_attempts,
                                     const std::optional<Rect>& window = std::nullopt);

/// Halton low-discrepancy point in [0,1)^2 (bases 2 and 3), index >= 1.
Vec2 halton2(int index);

/// Smallest absolute difference between two angles, in [0, pi].
double angle_difference(double a, double b);

}  // namespace gtamp
