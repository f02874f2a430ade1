#include "gtamp/geometry.hpp"

#include <algorithm>
#include <array>
#include <numbers>

namespace gtamp {

double circumradius(const Shape& shape) {
  if (const auto* c = std::get_if<Circle>(&shape)) return c->radius;
  const auto& r = std::get<AxisRect>(shape);
  return std::hypot(r.half_w, r.half_h);
}

Vec2 half_extents(const Shape& shape) {
  if (const auto* c = std::get_if<Circle>(&shape)) return {c->radius, c->radius};
  const auto& r = std::get<AxisRect>(shape);
  return {r.half_w, r.half_h};
}

bool valid_shape(const Shape& shape) {
  if (const auto* c = std::get_if<Circle>(&shape)) return std::isfinite(c->radius) && c->radius > 0.0;
  const auto& r = std::get<AxisRect>(shape);
  return std::isfinite(r.half_w) && std::isfinite(r.half_h) && r.half_w > 0.0 && r.half_h > 0.0;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

namespace {

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_cross(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  const int d1 = sign(cross(b0, b1, a0));
  const int d2 = sign(cross(b0, b1, a1));
  const int d3 = sign(cross(a0, a1, b0));
  const int d4 = sign(cross(a0, a1, b1));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(a0, b0, b1)) return true;
  if (d2 == 0 && on_segment(a1, b0, b1)) return true;
  if (d3 == 0 && on_segment(b0, a0, a1)) return true;
  if (d4 == 0 && on_segment(b1, a0, a1)) return true;
  return false;
}

// Every body is a convex core (segment or rectangle) inflated by a radius.
struct Core {
  bool is_rect = false;
  Vec2 a, b;  // segment endpoints, or rect lo/hi
  double inflate = 0.0;
};

Core core_of(const Body& body) {
  if (const auto* c = std::get_if<Corridor>(&body)) return {false, c->start, c->end, c->half_width};
  const auto& placed = std::get<PlacedShape>(body);
  if (const auto* circ = std::get_if<Circle>(&placed.shape))
    return {false, placed.center, placed.center, circ->radius};
  const auto& r = std::get<AxisRect>(placed.shape);
  return {true, placed.center - Vec2{r.half_w, r.half_h}, placed.center + Vec2{r.half_w, r.half_h}, 0.0};
}

double rect_rect_distance(const Rect& p, const Rect& q) {
  const double dx = std::max({0.0, p.lo.x - q.hi.x, q.lo.x - p.hi.x});
  const double dy = std::max({0.0, p.lo.y - q.hi.y, q.lo.y - p.hi.y});
  return std::hypot(dx, dy);
}

}  // namespace

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  if (segments_cross(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double point_rect_distance(Vec2 p, const Rect& rect) {
  const double dx = std::max({0.0, rect.lo.x - p.x, p.x - rect.hi.x});
  const double dy = std::max({0.0, rect.lo.y - p.y, p.y - rect.hi.y});
  return std::hypot(dx, dy);
}

double segment_rect_distance(Vec2 a, Vec2 b, const Rect& rect) {
  if (rect.contains(a) || rect.contains(b)) return 0.0;
  const std::array<Vec2, 4> corners{rect.lo, Vec2{rect.hi.x, rect.lo.y}, rect.hi, Vec2{rect.lo.x, rect.hi.y}};
  double best = std::min(point_rect_distance(a, rect), point_rect_distance(b, rect));
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Vec2 c0 = corners[i];
    const Vec2 c1 = corners[(i + 1) % corners.size()];
    if (segments_cross(a, b, c0, c1)) return 0.0;
    best = std::min(best, point_segment_distance(c0, a, b));
  }
  return best;
}

bool intersects(const Body& a, const Body& b) {
  const Core p = core_of(a);
  const Core q = core_of(b);
  double d = 0.0;
  if (p.is_rect && q.is_rect) {
    d = rect_rect_distance({p.a, p.b}, {q.a, q.b});
  } else if (p.is_rect) {
    d = segment_rect_distance(q.a, q.b, {p.a, p.b});
  } else if (q.is_rect) {
    d = segment_rect_distance(p.a, p.b, {q.a, q.b});
  } else {
    d = segment_segment_distance(p.a, p.b, q.a, q.b);
  }
  return d <= p.inflate + q.inflate;
}

bool contained_in(const PlacedShape& obj, const Rect& area) {
  const Vec2 h = half_extents(obj.shape);
  return obj.center.x - h.x >= area.lo.x && obj.center.x + h.x <= area.hi.x &&
         obj.center.y - h.y >= area.lo.y && obj.center.y + h.y <= area.hi.y;
}

Corridor pick_corridor(Vec2 robot_base, double body_radius, Vec2 target, double clearance) {
  return {robot_base, target, body_radius + clearance};
}

Corridor place_corridor(Vec2 robot_base, double body_radius, Vec2 target, const Shape& carried,
                        double clearance) {
  return {robot_base, target, body_radius + circumradius(carried) + clearance};
}

std::optional<Pose> sample_placement(const Shape& shape, const Rect& area,
                                     std::span<const Body> forbidden, Rng& rng, int max_attempts,
                                     const std::optional<Rect>& window) {
  const Vec2 h = half_extents(shape);
  Rect centers{area.lo + h, area.hi - h};
  if (window) {
    centers.lo = {std::max(centers.lo.x, window->lo.x), std::max(centers.lo.y, window->lo.y)};
    centers.hi = {std::min(centers.hi.x, window->hi.x), std::min(centers.hi.y, window->hi.y)};
  }
  if (centers.empty()) return std::nullopt;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Vec2 c{rng.uniform(centers.lo.x, centers.hi.x), rng.uniform(centers.lo.y, centers.hi.y)};
    const Body candidate = PlacedShape{shape, c};
    const bool blocked = std::any_of(forbidden.begin(), forbidden.end(),
                                     [&](const Body& f) { return intersects(candidate, f); });
    if (!blocked) return Pose{c};
  }
  return std::nullopt;
}

Vec2 halton2(int index) {
  auto radical_inverse = [](int i, int base) {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * (i % base);
      i /= base;
    }
    return r;
  };
  return {radical_inverse(index, 2), radical_inverse(index, 3)};
}

double angle_difference(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

}  // namespace gtamp
