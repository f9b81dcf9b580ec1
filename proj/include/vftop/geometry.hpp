#pragma once

#include <cmath>
#include <utility>

namespace vftop {

struct Vec2 {
    double x = 0, y = 0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    Vec2 operator/(double k) const { return {x / k, y / k}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double k, Vec2 v) { return v * k; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return a + (b - a) * t; }

struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;  // [[a b] [c d]]
    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    Vec2 operator*(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
};

struct Box {
    Vec2 lo, hi;
    bool contains(Vec2 p, double tol = 0) const {
        return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol;
    }
    bool intersects(const Box& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
};

// ordered from smaller y to larger y, ties by x
std::pair<Vec2, Vec2> canonical_edge_direction(Vec2 pa, Vec2 pb);
// true when pa comes first in canonical order
bool canonical_first(Vec2 pa, Vec2 pb);

// throws DegenerateCell when |area| < eps * diameter^2
double oriented_area(Vec2 p1, Vec2 p2, Vec2 p3, double eps = 1e-9);

}  // namespace vftop
