#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace taskgen {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& v) const { return {x + v.x, y + v.y}; }
    Vec2 operator-(const Vec2& v) const { return {x - v.x, y - v.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }

    Vec2& operator+=(const Vec2& v) { x += v.x; y += v.y; return *this; }
    Vec2& operator-=(const Vec2& v) { x -= v.x; y -= v.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    double dot(const Vec2& v) const { return x * v.x + y * v.y; }
    double cross(const Vec2& v) const { return x * v.y - y * v.x; }
    double length() const { return std::sqrt(x * x + y * y); }
    double length_sq() const { return x * x + y * y; }

    Vec2 normalized() const {
        double len = length();
        if (len < 1e-12) return {0.0, 0.0};
        return {x / len, y / len};
    }
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

inline Vec2 rotate(const Vec2& v, double angle_rad) {
    double c = std::cos(angle_rad), s = std::sin(angle_rad);
    return {v.x * c - v.y * s, v.x * s + v.y * c};
}

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double denom = ab.length_sq();
    if (denom < 1e-12) return (p - a).length();
    double t = std::clamp((p - a).dot(ab) / denom, 0.0, 1.0);
    return (p - (a + ab * t)).length();
}

// ============================================================================
// Five-point object representation
// ============================================================================
//
// A 2D object described by the positions of its four corner points plus the
// centre. Corner labels follow the unrotated rectangle; for rotations in
// [0, 90) degrees the labels keep the orderings ll.x <= lr.x, ul.x <= ur.x,
// ll.y <= ul.y, lr.y <= ur.y.

struct FivePointBox {
    Vec2 ll, lr, ul, ur, c;
    double rotation_deg = 0.0;

    // Axis extents over the four corners.
    double min_x() const { return std::min(std::min(ll.x, lr.x), std::min(ul.x, ur.x)); }
    double max_x() const { return std::max(std::max(ll.x, lr.x), std::max(ul.x, ur.x)); }
    double min_y() const { return std::min(std::min(ll.y, lr.y), std::min(ul.y, ur.y)); }
    double max_y() const { return std::max(std::max(ll.y, lr.y), std::max(ul.y, ur.y)); }

    double width() const { return max_x() - min_x(); }
    double height() const { return max_y() - min_y(); }

    FivePointBox translated(const Vec2& t) const {
        FivePointBox b = *this;
        b.ll += t; b.lr += t; b.ul += t; b.ur += t; b.c += t;
        return b;
    }

    bool valid() const {
        Vec2 centroid = (ll + lr + ul + ur) / 4.0;
        if ((centroid - c).length() > 1e-6) return false;
        return ll.x <= lr.x + 1e-9 && ul.x <= ur.x + 1e-9 &&
               ll.y <= ul.y + 1e-9 && lr.y <= ur.y + 1e-9;
    }
};

// Build a five-point box for a w-by-h rectangle centred at `centre`, rotated
// counter-clockwise. Rotations outside [0, 90) are normalized by swapping the
// roles of width and height (a rectangle is symmetric under 180 degrees), so
// the stored rotation always lands in [0, 90).
inline FivePointBox make_box(const Vec2& centre, double w, double h, double rotation_deg = 0.0) {
    double rot = std::fmod(rotation_deg, 180.0);
    if (rot < 0.0) rot += 180.0;
    if (rot >= 90.0) {
        std::swap(w, h);
        rot -= 90.0;
    }
    double rad = deg_to_rad(rot);
    FivePointBox b;
    b.ll = centre + rotate({-w / 2, -h / 2}, rad);
    b.lr = centre + rotate({w / 2, -h / 2}, rad);
    b.ul = centre + rotate({-w / 2, h / 2}, rad);
    b.ur = centre + rotate({w / 2, h / 2}, rad);
    b.c = centre;
    b.rotation_deg = rot;
    return b;
}

// Corner indices into {ll, lr, ur, ul} (counter-clockwise order).
enum class CornerId { ll = 0, lr = 1, ur = 2, ul = 3 };

inline Vec2 corner(const FivePointBox& b, CornerId id) {
    switch (id) {
        case CornerId::ll: return b.ll;
        case CornerId::lr: return b.lr;
        case CornerId::ur: return b.ur;
        case CornerId::ul: return b.ul;
    }
    return b.c;
}

// Endpoints of the face whose outward normal points most upward: the face an
// object can rest or travel on. For an axis-aligned box these are ul and ur;
// for a tilted platform they are the top corners of the walkable face.
inline std::pair<CornerId, CornerId> top_face(const FivePointBox& b) {
    const CornerId order[4] = {CornerId::ll, CornerId::lr, CornerId::ur, CornerId::ul};
    double best = -2.0;
    int best_i = 0;
    for (int i = 0; i < 4; ++i) {
        Vec2 p = corner(b, order[i]);
        Vec2 q = corner(b, order[(i + 1) % 4]);
        Vec2 n = Vec2{(q - p).y, -(q - p).x}.normalized();
        if (n.y > best) {
            best = n.y;
            best_i = i;
        }
    }
    return {order[best_i], order[(best_i + 1) % 4]};
}

// Left/right endpoints of the top face.
inline CornerId top_left_corner(const FivePointBox& b) {
    auto [p, q] = top_face(b);
    return corner(b, p).x <= corner(b, q).x ? p : q;
}

inline CornerId top_right_corner(const FivePointBox& b) {
    auto [p, q] = top_face(b);
    return corner(b, p).x <= corner(b, q).x ? q : p;
}

// Offsets of the five points relative to the centre, per axis, for a box of
// the given size and rotation. Used when projecting objects onto dimension
// graphs where point coordinates are centre + constant offset.
struct PointOffsets {
    // Order: ll, lr, ul, ur, c.
    std::array<double, 5> dx{};
    std::array<double, 5> dy{};
};

inline PointOffsets point_offsets(double w, double h, double rotation_deg) {
    FivePointBox b = make_box({0.0, 0.0}, w, h, rotation_deg);
    PointOffsets o;
    const Vec2 pts[5] = {b.ll, b.lr, b.ul, b.ur, b.c};
    for (int i = 0; i < 5; ++i) {
        o.dx[i] = pts[i].x;
        o.dy[i] = pts[i].y;
    }
    return o;
}

} // namespace taskgen
