#pragma once
// 2D BEV geometry primitives: oriented rectangles, segment tests, angle helpers.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace coopsim {

constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into [-pi, pi).
inline double normalize_angle(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("normalize_angle: non-finite angle");
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 rotate(const Vec2& v, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Axis-oriented rectangle in BEV, rotated by yaw about its center.
struct OrientedRect {
  Vec2 center;
  double length = 0.0;  // along local x (heading)
  double width = 0.0;   // along local y
  double yaw = 0.0;

  std::array<Vec2, 4> corners() const {
    const double hl = 0.5 * length, hw = 0.5 * width;
    const std::array<Vec2, 4> local{{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
    std::array<Vec2, 4> out{};
    for (int i = 0; i < 4; ++i) out[i] = center + rotate(local[i], yaw);
    return out;
  }

  bool contains(const Vec2& p) const {
    const Vec2 d = rotate(p - center, -yaw);
    return std::abs(d.x) <= 0.5 * length && std::abs(d.y) <= 0.5 * width;
  }

  // Evenly spaced points along the perimeter, starting at the front-left corner.
  std::vector<Vec2> boundary_points(int k) const {
    if (k < 1) throw std::invalid_argument("boundary_points: k must be >= 1");
    const auto c = corners();
    std::array<double, 4> side_len{};
    double perimeter = 0.0;
    for (int i = 0; i < 4; ++i) {
      side_len[i] = (c[(i + 1) % 4] - c[i]).norm();
      perimeter += side_len[i];
    }
    std::vector<Vec2> pts;
    pts.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      double s = perimeter * static_cast<double>(i) / static_cast<double>(k);
      int side = 0;
      while (side < 3 && s > side_len[side]) {
        s -= side_len[side];
        ++side;
      }
      const Vec2 a = c[side], b = c[(side + 1) % 4];
      const double t = side_len[side] > 0.0 ? s / side_len[side] : 0.0;
      pts.push_back(a + (b - a) * t);
    }
    return pts;
  }
};

// Proper or touching intersection of segments [a,b] and [c,d].
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const double v = (q - p).cross(r - p);
    constexpr double eps = 1e-12;
    if (v > eps) return 1;
    if (v < -eps) return -1;
    return 0;
  };
  const auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, r.x) - 1e-12 <= q.x && q.x <= std::max(p.x, r.x) + 1e-12 &&
           std::min(p.y, r.y) - 1e-12 <= q.y && q.y <= std::max(p.y, r.y) + 1e-12;
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, c, b)) return true;
  if (o2 == 0 && on_segment(a, d, b)) return true;
  if (o3 == 0 && on_segment(c, a, d)) return true;
  if (o4 == 0 && on_segment(c, b, d)) return true;
  return false;
}

// True when segment [a,b] touches or passes through the rectangle.
inline bool segment_hits_rect(const Vec2& a, const Vec2& b, const OrientedRect& r) {
  // cheap bounding-circle reject
  const double rad = 0.5 * std::hypot(r.length, r.width);
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  double t = len2 > 0.0 ? (r.center - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  if ((a + ab * t - r.center).norm() > rad) return false;

  if (r.contains(a) || r.contains(b)) return true;
  const auto c = r.corners();
  for (int i = 0; i < 4; ++i)
    if (segments_intersect(a, b, c[i], c[(i + 1) % 4])) return true;
  return false;
}

inline bool rects_overlap(const OrientedRect& p, const OrientedRect& q) {
  // separating-axis test on the 4 face normals
  const auto pc = p.corners(), qc = q.corners();
  const auto axes_of = [](const std::array<Vec2, 4>& c) {
    return std::array<Vec2, 2>{{{c[1].x - c[0].x, c[1].y - c[0].y},
                                {c[3].x - c[0].x, c[3].y - c[0].y}}};
  };
  for (const auto& axes : {axes_of(pc), axes_of(qc)}) {
    for (const Vec2& ax : axes) {
      if (ax.norm() == 0.0) continue;
      double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
      for (const auto& v : pc) {
        const double d = v.dot(ax);
        pmin = std::min(pmin, d);
        pmax = std::max(pmax, d);
      }
      for (const auto& v : qc) {
        const double d = v.dot(ax);
        qmin = std::min(qmin, d);
        qmax = std::max(qmax, d);
      }
      if (pmax < qmin || qmax < pmin) return false;
    }
  }
  return true;
}

}  // namespace coopsim
