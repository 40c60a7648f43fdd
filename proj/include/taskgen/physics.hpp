#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "taskgen/geom.hpp"
#include "taskgen/objects.hpp"
#include "taskgen/scenario.hpp"

namespace taskgen {

// ============================================================================
// Parameters
// ============================================================================

struct PhysicsParams {
    double gravity = 9.8;
    double dt = 1.0 / 60.0;
    int solver_iterations = 12;
    double baumgarte = 0.2;
    double slop = 0.005;
    double contact_skin = 0.006;        // contacts begin this far before touch
    double restitution_threshold = 1.0; // approach speed below which no bounce
    double angular_damping = 1.0;       // 1/s, spin decay
    double damage_threshold = 0.5;      // impulses below this do no damage
    double damage_speed = 0.8;          // min approach speed for damage
    double launch_speed = 18.0;         // full slingshot stretch
    double settle_speed = 0.05;
    int settle_ticks = 60;
    int max_ticks = 900;
    double kill_plane_y = -2.0;
};

inline double material_friction(Material m) {
    switch (m) {
        case Material::bird: return 0.3;
        case Material::pig: return 0.35;
        case Material::wood: return 0.4;
        case Material::stone: return 0.5;
        case Material::platform: return 0.5;
    }
    return 0.4;
}

// Restitution by contact pair. Birds stay lively against platforms (bounce
// shots depend on it) while blocks deaden on the surfaces they travel over,
// keeping rolls and slides in contact.
inline double material_restitution(Material a, Material b) {
    if (a > b) std::swap(a, b);
    auto pair = [](Material x, Material y) { return static_cast<int>(x) * 16 + static_cast<int>(y); };
    static_assert(static_cast<int>(Material::platform) < 16);
    int key = pair(a, b);
    if (key == pair(Material::bird, Material::platform)) return 0.5;
    if (key == pair(Material::bird, Material::wood)) return 0.65;
    if (key == pair(Material::bird, Material::stone)) return 0.3;
    if (key == pair(Material::bird, Material::bird)) return 0.3;
    if (key == pair(Material::bird, Material::pig)) return 0.1;
    if (key == pair(Material::wood, Material::wood)) return 0.8;
    if (key == pair(Material::wood, Material::stone)) return 0.8;
    if (key == pair(Material::stone, Material::stone)) return 0.8;
    if (key == pair(Material::pig, Material::wood)) return 0.1;
    if (key == pair(Material::pig, Material::stone)) return 0.1;
    return 0.05; // anything resting on platforms, pigs on pigs
}

// Health lost by the victim per unit of contact impulse.
inline double damage_factor(Material attacker, Material victim) {
    if (victim == Material::pig) {
        switch (attacker) {
            case Material::bird: return 1.0;
            case Material::wood: return 0.8;
            case Material::stone: return 1.2;
            case Material::pig: return 0.8;
            case Material::platform: return 0.2;
        }
    }
    if (victim == Material::wood) return 0.12;
    return 0.0; // platforms and birds are indestructible
}

// ============================================================================
// Bodies and the world
// ============================================================================

struct Body {
    int id = -1;
    std::string name;
    ShapeKind shape = ShapeKind::circle;
    double radius = 0.0;            // circle
    std::vector<Vec2> local_verts;  // polygon, CCW around the centroid
    Vec2 pos;
    double angle = 0.0;
    Vec2 vel;
    double omega = 0.0;
    double inv_mass = 0.0;
    double inv_inertia = 0.0;
    Material material = Material::platform;
    double health = -1.0; // < 0: indestructible
    bool alive = true;
    bool frozen = false; // fell out of the world

    bool is_static() const { return inv_mass == 0.0; }
    bool active() const { return alive && !frozen; }

    std::vector<Vec2> world_verts() const {
        std::vector<Vec2> out;
        out.reserve(local_verts.size());
        for (const auto& v : local_verts) out.push_back(pos + rotate(v, angle));
        return out;
    }
};

struct ContactRecord {
    int a = 0;
    int b = 0;
    Vec2 point;
    Vec2 normal; // from a to b
    double impulse = 0.0;
    double vn_pre = 0.0;  // relative normal speed before solving (negative = closing)
    double vn_post = 0.0; // after solving
};

struct DestructionRecord {
    int victim = -1;
    int attacker = -1;
    int tick = 0;
};

struct BodySnapshot {
    Vec2 pos;
    double angle = 0.0;
    Vec2 vel;
    double omega = 0.0;
    bool alive = true;
};

struct SimTrace {
    std::vector<std::string> names;
    std::vector<Material> materials;
    std::vector<bool> dynamic;
    std::vector<std::vector<BodySnapshot>> frames;    // [tick][body]
    std::vector<std::vector<ContactRecord>> contacts; // [tick]
    std::vector<DestructionRecord> destructions;
    bool truncated = false;
    int ticks = 0;

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    // Centre polyline of one body while it is alive.
    std::vector<Vec2> path_of(int body) const {
        std::vector<Vec2> out;
        for (const auto& frame : frames) {
            if (!frame[body].alive) break;
            out.push_back(frame[body].pos);
        }
        return out;
    }
};

class World {
public:
    explicit World(PhysicsParams params = {}) : params_(params) {}

    const PhysicsParams& params() const { return params_; }
    int tick() const { return tick_; }
    const std::vector<Body>& bodies() const { return bodies_; }
    std::vector<Body>& bodies() { return bodies_; }

    Body* find(const std::string& name) {
        for (auto& b : bodies_)
            if (b.name == name) return &b;
        return nullptr;
    }
    const Body* find(const std::string& name) const {
        for (const auto& b : bodies_)
            if (b.name == name) return &b;
        return nullptr;
    }

    int add_circle(const std::string& name, Vec2 centre, double radius, double mass,
                   Material mat, double health = -1.0) {
        Body b;
        b.id = static_cast<int>(bodies_.size());
        b.name = name;
        b.shape = ShapeKind::circle;
        b.radius = radius;
        b.pos = centre;
        b.material = mat;
        b.health = health;
        if (mass > 0.0) {
            b.inv_mass = 1.0 / mass;
            b.inv_inertia = 1.0 / (0.5 * mass * radius * radius);
        }
        bodies_.push_back(std::move(b));
        return bodies_.back().id;
    }

    // `inertia_scale` > 1 models hollow blocks: the same mass concentrated at
    // the rim resists spin more than a solid shape.
    int add_polygon(const std::string& name, Vec2 centroid, std::vector<Vec2> local_verts,
                    double angle_rad, double mass, Material mat, double health = -1.0,
                    double inertia_scale = 1.0) {
        Body b;
        b.id = static_cast<int>(bodies_.size());
        b.name = name;
        b.shape = ShapeKind::box;
        b.local_verts = std::move(local_verts);
        b.pos = centroid;
        b.angle = angle_rad;
        b.material = mat;
        b.health = health;
        if (mass > 0.0) {
            b.inv_mass = 1.0 / mass;
            b.inv_inertia = 1.0 / (inertia_scale * polygon_inertia(b.local_verts, mass));
        }
        bodies_.push_back(std::move(b));
        return bodies_.back().id;
    }

    int add_box(const std::string& name, Vec2 centre, double w, double h, double angle_rad,
                double mass, Material mat, double health = -1.0, double inertia_scale = 1.0) {
        std::vector<Vec2> verts = {
            {-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
        return add_polygon(name, centre, std::move(verts), angle_rad, mass, mat, health,
                           inertia_scale);
    }

    // Right triangle with legs w (bottom) and h (left side). `bbox_centre` is
    // the centre of the shape's axis-aligned bounding box before rotation,
    // matching how placement boxes describe objects.
    int add_right_triangle(const std::string& name, Vec2 bbox_centre, double w, double h,
                           double angle_rad, double mass, Material mat, double health = -1.0,
                           double inertia_scale = 1.0) {
        Vec2 centroid_from_corner{w / 3.0, h / 3.0};
        std::vector<Vec2> verts = {
            Vec2{0, 0} - centroid_from_corner,
            Vec2{w, 0} - centroid_from_corner,
            Vec2{0, h} - centroid_from_corner,
        };
        Vec2 centroid =
            bbox_centre + rotate(centroid_from_corner - Vec2{w / 2.0, h / 2.0}, angle_rad);
        return add_polygon(name, centroid, std::move(verts), angle_rad, mass, mat, health,
                           inertia_scale);
    }

    // One fixed-dt advance: integrate velocities, resolve contacts, integrate
    // positions, apply damage, drop destroyed bodies.
    void step(std::vector<ContactRecord>* out_contacts = nullptr,
              std::vector<DestructionRecord>* out_destructions = nullptr) {
        const double dt = params_.dt;

        for (auto& b : bodies_) {
            if (b.is_static() || !b.active()) continue;
            b.vel.y -= params_.gravity * dt;
            b.omega *= std::max(0.0, 1.0 - params_.angular_damping * dt);
        }

        auto contacts = generate_contacts();
        solve_contacts(contacts);

        std::vector<char> had_contact(bodies_.size(), 0);
        std::set<std::pair<int, int>> touching_pairs;
        for (const auto& c : contacts) {
            had_contact[c.a] = 1;
            had_contact[c.b] = 1;
            touching_pairs.insert({std::min(c.a, c.b), std::max(c.a, c.b)});
        }

        for (auto& b : bodies_) {
            if (b.is_static() || !b.active()) continue;
            double toi = time_of_impact(b, dt, touching_pairs);
            b.pos += b.vel * (dt * toi);
            // Contact-free flight follows the exact ballistic arc; this term
            // cancels the first-order integration error.
            if (!had_contact[b.id]) b.pos.y += 0.5 * params_.gravity * dt * dt * toi * toi;
            b.angle += b.omega * dt * toi;
            if (b.pos.y < params_.kill_plane_y) {
                b.frozen = true;
                b.vel = {0, 0};
                b.omega = 0;
            }
        }

        if (out_contacts) record_contacts(contacts, *out_contacts);
        apply_damage(contacts, out_destructions);
        ++tick_;
    }

    // True when every active dynamic body is slower than the settle speed.
    bool all_slow() const {
        for (const auto& b : bodies_) {
            if (b.is_static() || !b.active()) continue;
            if (b.vel.length() > params_.settle_speed ||
                std::abs(b.omega) > params_.settle_speed * 4.0)
                return false;
        }
        return true;
    }

private:
    static double polygon_inertia(const std::vector<Vec2>& verts, double mass) {
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < verts.size(); ++i) {
            const Vec2& p = verts[i];
            const Vec2& q = verts[(i + 1) % verts.size()];
            double cross = p.cross(q);
            num += cross * (p.dot(p) + p.dot(q) + q.dot(q));
            den += cross;
        }
        if (std::abs(den) < 1e-12) return mass * 0.1;
        return std::max(1e-6, mass * num / (6.0 * den));
    }

    struct ContactPoint {
        Vec2 point;
        double penetration = 0.0;
        double pn_acc = 0.0;
        double pt_acc = 0.0;
        double mass_n = 0.0;
        double mass_t = 0.0;
        double bias = 0.0;
        double restitution_target = 0.0;
        double vn_pre = 0.0;
    };

    struct Contact {
        int a = 0;
        int b = 0;
        Vec2 normal; // from a to b
        double friction = 0.0;
        double restitution = 0.0;
        std::vector<ContactPoint> points;
    };

    static Vec2 closest_point_on_polygon(const Vec2& p, const std::vector<Vec2>& verts,
                                         bool* inside = nullptr) {
        bool in = true;
        double best_d = std::numeric_limits<double>::infinity();
        Vec2 best = verts[0];
        for (size_t i = 0; i < verts.size(); ++i) {
            const Vec2& a = verts[i];
            const Vec2& b = verts[(i + 1) % verts.size()];
            Vec2 e = b - a;
            if (e.cross(p - a) < 0.0) in = false;
            double t = std::clamp((p - a).dot(e) / std::max(1e-12, e.length_sq()), 0.0, 1.0);
            Vec2 q = a + e * t;
            double d = (p - q).length_sq();
            if (d < best_d) {
                best_d = d;
                best = q;
            }
        }
        if (inside) *inside = in;
        return best;
    }

    void collide_circle_circle(const Body& a, const Body& b, std::vector<Contact>& out) {
        Vec2 d = b.pos - a.pos;
        double dist = d.length();
        double r = a.radius + b.radius;
        if (dist >= r + params_.contact_skin || dist < 1e-12) return;
        Contact c;
        c.a = a.id;
        c.b = b.id;
        c.normal = d / dist;
        ContactPoint p;
        p.point = a.pos + c.normal * (a.radius - (r - dist) * 0.5);
        p.penetration = r + params_.contact_skin - dist;
        c.points.push_back(p);
        out.push_back(std::move(c));
    }

    void collide_circle_polygon(const Body& circle, const Body& poly, std::vector<Contact>& out) {
        auto verts = poly.world_verts();
        bool inside = false;
        Vec2 q = closest_point_on_polygon(circle.pos, verts, &inside);
        Vec2 d = circle.pos - q; // from surface point toward circle centre
        double dist = d.length();
        if (!inside && dist >= circle.radius + params_.contact_skin) return;

        Contact c;
        c.a = circle.id;
        c.b = poly.id;
        if (inside) {
            // Centre past the surface: escape direction is centre -> q.
            c.normal = dist < 1e-9 ? Vec2{0, -1} : (q - circle.pos) / dist;
        } else {
            c.normal = dist < 1e-9 ? Vec2{0, -1} : (d / dist) * -1.0;
        }
        ContactPoint p;
        p.point = q;
        p.penetration = params_.contact_skin +
                        (inside ? circle.radius + dist : circle.radius - dist);
        c.points.push_back(p);
        out.push_back(std::move(c));
    }

    // SAT over both polygons' face normals, then clip the incident face.
    void collide_polygon_polygon(const Body& a, const Body& b, std::vector<Contact>& out) {
        auto va = a.world_verts();
        auto vb = b.world_verts();

        auto min_separation = [](const std::vector<Vec2>& ref, const std::vector<Vec2>& other,
                                 int& best_face) {
            double best = -std::numeric_limits<double>::infinity();
            best_face = 0;
            for (size_t i = 0; i < ref.size(); ++i) {
                Vec2 p = ref[i];
                Vec2 q = ref[(i + 1) % ref.size()];
                Vec2 n = Vec2{(q - p).y, -(q - p).x}.normalized();
                double sep = std::numeric_limits<double>::infinity();
                for (const auto& v : other) sep = std::min(sep, (v - p).dot(n));
                if (sep > best) {
                    best = sep;
                    best_face = static_cast<int>(i);
                }
            }
            return best;
        };

        int face_a = 0, face_b = 0;
        double sep_a = min_separation(va, vb, face_a);
        if (sep_a > params_.contact_skin) return;
        double sep_b = min_separation(vb, va, face_b);
        if (sep_b > params_.contact_skin) return;

        const bool ref_is_a = sep_a >= sep_b;
        const auto& ref_verts = ref_is_a ? va : vb;
        const auto& inc_verts = ref_is_a ? vb : va;
        int ref_face = ref_is_a ? face_a : face_b;

        Vec2 rp = ref_verts[ref_face];
        Vec2 rq = ref_verts[(ref_face + 1) % ref_verts.size()];
        Vec2 ref_n = Vec2{(rq - rp).y, -(rq - rp).x}.normalized();

        int inc_face = 0;
        double best_dot = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < inc_verts.size(); ++i) {
            Vec2 p = inc_verts[i];
            Vec2 q = inc_verts[(i + 1) % inc_verts.size()];
            Vec2 n = Vec2{(q - p).y, -(q - p).x}.normalized();
            double dn = n.dot(ref_n);
            if (dn < best_dot) {
                best_dot = dn;
                inc_face = static_cast<int>(i);
            }
        }
        Vec2 i1 = inc_verts[inc_face];
        Vec2 i2 = inc_verts[(inc_face + 1) % inc_verts.size()];

        Vec2 tangent = (rq - rp).normalized();
        auto clip = [](Vec2& p1, Vec2& p2, const Vec2& n, double offset) {
            double d1 = p1.dot(n) - offset;
            double d2 = p2.dot(n) - offset;
            if (d1 < 0 && d2 < 0) return false;
            if (d1 < 0) p1 = p1 + (p2 - p1) * (d1 / (d1 - d2));
            else if (d2 < 0) p2 = p2 + (p1 - p2) * (d2 / (d2 - d1));
            return true;
        };
        if (!clip(i1, i2, tangent * -1.0, -(rq.dot(tangent)))) return;
        if (!clip(i1, i2, tangent, rp.dot(tangent))) return;

        Contact c;
        c.a = ref_is_a ? a.id : b.id;
        c.b = ref_is_a ? b.id : a.id;
        c.normal = ref_n;
        for (Vec2 p : {i1, i2}) {
            double sep = (p - rp).dot(ref_n);
            if (sep <= params_.contact_skin) {
                ContactPoint cp;
                cp.point = p;
                cp.penetration = params_.contact_skin - sep;
                c.points.push_back(cp);
            }
        }
        // Normal convention holds: ref_n points outward from the reference
        // body, which is contact.a.
        if (!c.points.empty()) out.push_back(std::move(c));
    }

    std::vector<Contact> generate_contacts() {
        std::vector<Contact> out;
        for (size_t i = 0; i < bodies_.size(); ++i) {
            for (size_t j = i + 1; j < bodies_.size(); ++j) {
                Body& a = bodies_[i];
                Body& b = bodies_[j];
                if (!a.active() || !b.active()) continue;
                if (a.is_static() && b.is_static()) continue;

                if (a.shape == ShapeKind::circle && b.shape == ShapeKind::circle)
                    collide_circle_circle(a, b, out);
                else if (a.shape == ShapeKind::circle)
                    collide_circle_polygon(a, b, out);
                else if (b.shape == ShapeKind::circle) {
                    size_t before = out.size();
                    collide_circle_polygon(b, a, out);
                    for (size_t k = before; k < out.size(); ++k) {
                        std::swap(out[k].a, out[k].b);
                        out[k].normal = out[k].normal * -1.0;
                    }
                } else {
                    collide_polygon_polygon(a, b, out);
                }
            }
        }
        return out;
    }

    double rel_normal_speed(const Contact& c, const ContactPoint& p) const {
        const Body& A = bodies_[c.a];
        const Body& B = bodies_[c.b];
        Vec2 ra = p.point - A.pos;
        Vec2 rb = p.point - B.pos;
        Vec2 dv = B.vel + Vec2{-B.omega * rb.y, B.omega * rb.x} - A.vel -
                  Vec2{-A.omega * ra.y, A.omega * ra.x};
        return dv.dot(c.normal);
    }

    void solve_contacts(std::vector<Contact>& contacts) {
        const double dt = params_.dt;

        for (auto& c : contacts) {
            Body& A = bodies_[c.a];
            Body& B = bodies_[c.b];
            c.friction = std::sqrt(material_friction(A.material) * material_friction(B.material));
            c.restitution = material_restitution(A.material, B.material);
            for (auto& p : c.points) {
                Vec2 ra = p.point - A.pos;
                Vec2 rb = p.point - B.pos;
                double rna = ra.cross(c.normal);
                double rnb = rb.cross(c.normal);
                p.mass_n = 1.0 / std::max(1e-12, A.inv_mass + B.inv_mass +
                                                     rna * rna * A.inv_inertia +
                                                     rnb * rnb * B.inv_inertia);
                Vec2 t = c.normal.perp();
                double rta = ra.cross(t);
                double rtb = rb.cross(t);
                p.mass_t = 1.0 / std::max(1e-12, A.inv_mass + B.inv_mass +
                                                     rta * rta * A.inv_inertia +
                                                     rtb * rtb * B.inv_inertia);
                p.bias = params_.baumgarte / dt * std::max(0.0, p.penetration - params_.slop);
                p.vn_pre = rel_normal_speed(c, p);
                p.restitution_target =
                    (p.vn_pre < -params_.restitution_threshold) ? -c.restitution * p.vn_pre : 0.0;
            }
        }

        for (int iter = 0; iter < params_.solver_iterations; ++iter) {
            for (auto& c : contacts) {
                Body& A = bodies_[c.a];
                Body& B = bodies_[c.b];
                for (auto& p : c.points) {
                    Vec2 ra = p.point - A.pos;
                    Vec2 rb = p.point - B.pos;

                    double vn = rel_normal_speed(c, p);
                    double target = std::max(p.bias, p.restitution_target);
                    double d_pn = p.mass_n * (target - vn);
                    double pn_new = std::max(p.pn_acc + d_pn, 0.0);
                    d_pn = pn_new - p.pn_acc;
                    p.pn_acc = pn_new;

                    Vec2 impulse = c.normal * d_pn;
                    A.vel -= impulse * A.inv_mass;
                    A.omega -= ra.cross(impulse) * A.inv_inertia;
                    B.vel += impulse * B.inv_mass;
                    B.omega += rb.cross(impulse) * B.inv_inertia;

                    Vec2 dv = B.vel + Vec2{-B.omega * rb.y, B.omega * rb.x} - A.vel -
                              Vec2{-A.omega * ra.y, A.omega * ra.x};
                    Vec2 t = c.normal.perp();
                    double vt = dv.dot(t);
                    double d_pt = p.mass_t * (-vt);
                    double max_pt = c.friction * p.pn_acc;
                    double pt_new = std::clamp(p.pt_acc + d_pt, -max_pt, max_pt);
                    d_pt = pt_new - p.pt_acc;
                    p.pt_acc = pt_new;

                    Vec2 f_impulse = t * d_pt;
                    A.vel -= f_impulse * A.inv_mass;
                    A.omega -= ra.cross(f_impulse) * A.inv_inertia;
                    B.vel += f_impulse * B.inv_mass;
                    B.omega += rb.cross(f_impulse) * B.inv_inertia;
                }
            }
        }
    }

    // Fraction of dt a fast circle may advance before touching a body it is
    // not already in contact with. Conservative advancement; prevents thin
    // platforms from being skipped at launch speeds.
    double time_of_impact(const Body& b, double dt,
                          const std::set<std::pair<int, int>>& touching) const {
        if (b.shape != ShapeKind::circle) return 1.0;
        double travel = b.vel.length() * dt;
        if (travel < b.radius) return 1.0;

        double best = 1.0;
        for (const auto& other : bodies_) {
            if (other.id == b.id || !other.active()) continue;
            if (touching.count({std::min(b.id, other.id), std::max(b.id, other.id)}))
                continue; // the contact solver owns this pair
            double s = 0.0;
            for (int it = 0; it < 10 && s < 1.0; ++it) {
                Vec2 at = b.pos + b.vel * (dt * s);
                double dist;
                if (other.shape == ShapeKind::circle) {
                    dist = (other.pos - at).length() - other.radius - b.radius;
                } else {
                    auto verts = other.world_verts();
                    bool inside = false;
                    Vec2 q = closest_point_on_polygon(at, verts, &inside);
                    dist = inside ? -1.0 : (q - at).length() - b.radius;
                }
                if (dist <= params_.contact_skin * 0.5) {
                    if (s < best) best = s;
                    break;
                }
                s += dist / std::max(1e-9, travel);
            }
        }
        return best;
    }

    void record_contacts(const std::vector<Contact>& contacts,
                         std::vector<ContactRecord>& out) const {
        out.clear();
        out.reserve(contacts.size());
        for (const auto& c : contacts) {
            ContactRecord r;
            r.a = c.a;
            r.b = c.b;
            r.normal = c.normal;
            Vec2 pt{0, 0};
            double vn_pre = std::numeric_limits<double>::infinity();
            for (const auto& p : c.points) {
                r.impulse += p.pn_acc;
                vn_pre = std::min(vn_pre, p.vn_pre);
                pt += p.point;
            }
            r.point = pt / static_cast<double>(c.points.size());
            r.vn_pre = vn_pre;
            ContactPoint probe;
            probe.point = r.point;
            r.vn_post = rel_normal_speed(c, probe);
            out.push_back(r);
        }
    }

    void apply_damage(const std::vector<Contact>& contacts,
                      std::vector<DestructionRecord>* out) {
        std::map<int, std::pair<double, int>> damage; // victim -> (amount, attacker)
        std::map<int, double> best_hit;
        for (const auto& c : contacts) {
            double j = 0.0;
            double vn_pre = 0.0;
            for (const auto& p : c.points) {
                j += p.pn_acc;
                vn_pre = std::min(vn_pre, p.vn_pre);
            }
            if (j <= params_.damage_threshold) continue;
            // Sustained pushes transfer large impulses without being hits;
            // only impacts with real approach speed wound.
            if (vn_pre > -params_.damage_speed) continue;
            const Body& A = bodies_[c.a];
            const Body& B = bodies_[c.b];
            auto hurt = [&](const Body& victim, const Body& attacker) {
                if (victim.health < 0.0) return;
                double f = damage_factor(attacker.material, victim.material);
                if (f <= 0.0) return;
                auto& entry = damage[victim.id];
                entry.first += j * f;
                if (j * f > best_hit[victim.id]) {
                    best_hit[victim.id] = j * f;
                    entry.second = attacker.id;
                }
            };
            hurt(A, B);
            hurt(B, A);
        }
        for (const auto& [victim_id, entry] : damage) {
            Body& victim = bodies_[victim_id];
            if (!victim.active() || victim.health < 0.0) continue;
            victim.health -= entry.first;
            if (victim.health <= 0.0) {
                victim.health = 0.0;
                victim.alive = false;
                if (out) out->push_back({victim_id, entry.second, tick_});
            }
        }
    }

    PhysicsParams params_;
    std::vector<Body> bodies_;
    int tick_ = 0;
};

// ============================================================================
// Launching and running
// ============================================================================

struct LaunchSpec {
    std::string bird;
    double angle_rad = 0.0;
    double speed = 18.0;
    bool high_arc = false;
    Vec2 aim_point;     // diagnostic: where this shot was aimed
    std::string target; // diagnostic: what it was aimed at

    Vec2 velocity() const { return {speed * std::cos(angle_rad), speed * std::sin(angle_rad)}; }
};

// Runs a world to rest. `launch`, when given, sets the named bird's velocity
// at tick zero. Frame 0 of the trace is the state before the first step.
inline SimTrace run(World world, const std::optional<LaunchSpec>& launch, int max_ticks = -1) {
    const PhysicsParams P = world.params();
    if (max_ticks < 0) max_ticks = P.max_ticks;

    if (launch) {
        Body* bird = world.find(launch->bird);
        if (!bird) throw std::invalid_argument("launch references unknown body " + launch->bird);
        bird->vel = launch->velocity();
    }

    SimTrace trace;
    for (const auto& b : world.bodies()) {
        trace.names.push_back(b.name);
        trace.materials.push_back(b.material);
        trace.dynamic.push_back(!b.is_static());
    }

    int slow_streak = 0;
    for (int t = 0; t < max_ticks; ++t) {
        std::vector<BodySnapshot> frame;
        frame.reserve(world.bodies().size());
        for (const auto& b : world.bodies())
            frame.push_back({b.pos, b.angle, b.vel, b.omega, b.active()});
        trace.frames.push_back(std::move(frame));

        std::vector<ContactRecord> tick_contacts;
        std::vector<DestructionRecord> dests;
        world.step(&tick_contacts, &dests);
        trace.contacts.push_back(std::move(tick_contacts));
        for (const auto& d : dests) trace.destructions.push_back(d);

        if (world.all_slow()) {
            if (++slow_streak >= P.settle_ticks) {
                trace.ticks = t + 1;
                return trace;
            }
        } else {
            slow_streak = 0;
        }
    }
    trace.ticks = max_ticks;
    trace.truncated = true;
    return trace;
}

// ============================================================================
// Trajectory solving
// ============================================================================

// Both drag-free launch angles that land a full-stretch shot on `target`,
// verified by simulating an empty world. Low arc first. Out-of-range targets
// yield an empty set.
inline std::vector<LaunchSpec> launch_trajectories(Vec2 target, Vec2 origin, double v0,
                                                   const PhysicsParams& params = {},
                                                   const std::string& bird_name = "bird") {
    std::vector<LaunchSpec> out;
    double dx = target.x - origin.x;
    double dy = target.y - origin.y;
    double g = params.gravity;
    if (dx <= 1e-6) return out; // forward shots only

    // v0^4 - g*(g*dx^2 + 2*dy*v0^2) must be non-negative for a solution.
    double disc = v0 * v0 * v0 * v0 - g * (g * dx * dx + 2.0 * dy * v0 * v0);
    if (disc < 0.0) return out;
    double root = std::sqrt(disc);
    double tan_low = (v0 * v0 - root) / (g * dx);
    double tan_high = (v0 * v0 + root) / (g * dx);

    auto verify = [&](double angle) {
        PhysicsParams empty = params;
        World w(empty);
        w.add_circle(bird_name, origin, 0.175, 1.0, Material::bird);
        LaunchSpec shot;
        shot.bird = bird_name;
        shot.angle_rad = angle;
        shot.speed = v0;
        Body* bird = w.find(bird_name);
        bird->vel = shot.velocity();

        double best = (origin - target).length();
        Vec2 prev = origin;
        int ticks = static_cast<int>(8.0 / params.dt);
        for (int t = 0; t < ticks; ++t) {
            w.step();
            Vec2 cur = w.bodies()[0].pos;
            best = std::min(best, point_segment_distance(target, prev, cur));
            prev = cur;
            if (cur.y < target.y - 8.0 && cur.x > target.x) break;
        }
        return best;
    };

    for (bool high : {false, true}) {
        double tn = high ? tan_high : tan_low;
        if (high && std::abs(tan_high - tan_low) < 1e-9) continue; // single tangent apex shot
        double angle = std::atan(tn);
        if (verify(angle) <= 0.05) {
            LaunchSpec s;
            s.bird = bird_name;
            s.angle_rad = angle;
            s.speed = v0;
            s.high_arc = high;
            s.aim_point = target;
            out.push_back(s);
        }
    }
    return out;
}

// ============================================================================
// Event classification
// ============================================================================

struct InteractionEvent {
    InteractionVerb verb = InteractionVerb::hit;
    std::string actor;
    std::string patient;
    std::optional<Direction> direction;
    int tick = 0;
};

inline std::string to_string(const InteractionEvent& e) {
    std::string s = std::string(to_string(e.verb)) + "(" + e.actor + ")(" + e.patient + ")";
    if (e.direction) s += std::string("(") + to_string(*e.direction) + ")";
    s += "@" + std::to_string(e.tick);
    return s;
}

struct ClassifierParams {
    double hit_speed = 0.5;        // min approach speed for a hit event
    double move_speed = 0.1;       // min speed for roll/slide
    int sustain_ticks = 6;         // contact window for roll/slide
    double roll_slip_ratio = 0.2;  // max slip/|v| while rolling
    double slide_omega = 1.2;      // max |omega| while sliding
    double fall_speed = 0.5;       // min downward speed while falling
    int fall_ticks = 5;
    double fall_min_drop = 0.6;    // total descent below which a hop is not a fall
    double bounce_ratio = 0.2;     // outgoing/incoming normal speed
    int episode_gap = 3;           // ticks without contact ending an episode
};

namespace classify_detail {

inline Direction side_of(const Vec2& rel) {
    // rel points from the patient toward the actor.
    if (std::abs(rel.x) >= std::abs(rel.y)) return rel.x < 0 ? Direction::left : Direction::right;
    return rel.y > 0 ? Direction::above : Direction::below;
}

inline Direction heading_of(const Vec2& v) {
    if (std::abs(v.x) >= std::abs(v.y)) return v.x < 0 ? Direction::left : Direction::right;
    return v.y > 0 ? Direction::above : Direction::below;
}

} // namespace classify_detail

// Reads a finished trace back into the interaction vocabulary.
inline std::vector<InteractionEvent> classify_events(const SimTrace& trace,
                                                     const ClassifierParams& cp = {}) {
    std::vector<InteractionEvent> events;
    const int n = static_cast<int>(trace.names.size());
    const int T = static_cast<int>(trace.frames.size());

    // --- contact bookkeeping per ordered pair ------------------------------
    auto pair_key = [n](int a, int b) { return a * n + b; };
    std::map<int, int> last_contact_tick; // unordered pair (min,max) -> tick

    // hit: first strong contact of an episode.
    for (int t = 0; t < T; ++t) {
        if (t >= static_cast<int>(trace.contacts.size())) break;
        for (const auto& c : trace.contacts[t]) {
            int lo = std::min(c.a, c.b), hi = std::max(c.a, c.b);
            int key = pair_key(lo, hi);
            auto it = last_contact_tick.find(key);
            bool fresh = it == last_contact_tick.end() || t - it->second > cp.episode_gap;
            last_contact_tick[key] = t;
            if (!fresh) continue;
            if (-c.vn_pre < cp.hit_speed) continue;

            // Actor: the faster of the two at the moment of contact.
            const auto& fa = trace.frames[t][c.a];
            const auto& fb = trace.frames[t][c.b];
            bool a_is_actor = fa.vel.length() >= fb.vel.length();
            int actor = a_is_actor ? c.a : c.b;
            int patient = a_is_actor ? c.b : c.a;
            // The side the actor comes from: dominant axis of its approach
            // velocity relative to the patient. Contact normals on curved
            // shapes flip between axes when a shot clips the dome; the
            // approach direction reflects what actually happened.
            Vec2 approach = (a_is_actor ? fa.vel - fb.vel : fb.vel - fa.vel);
            Vec2 rel;
            if (approach.length() > 0.3) {
                rel = approach * -1.0; // actor sits opposite its motion
            } else {
                rel = (actor == c.a) ? c.normal * -1.0 : c.normal;
            }
            InteractionEvent e;
            e.verb = InteractionVerb::hit;
            e.actor = trace.names[actor];
            e.patient = trace.names[patient];
            e.direction = classify_detail::side_of(rel);
            e.tick = t;
            events.push_back(e);

            // bounce: the actor's normal velocity reverses on this contact.
            if (c.vn_pre < -cp.hit_speed && c.vn_post > 0.0 &&
                c.vn_post / -c.vn_pre > cp.bounce_ratio) {
                // vn is relative; attribute the bounce to the faster body
                // moving against something effectively unyielding.
                int bouncer = actor;
                if (t + 1 < T) {
                    InteractionEvent be;
                    be.verb = InteractionVerb::bounce;
                    be.actor = trace.names[bouncer];
                    be.patient = trace.names[patient == bouncer ? actor : patient];
                    be.direction =
                        classify_detail::heading_of(trace.frames[t + 1][bouncer].vel);
                    be.tick = t;
                    events.push_back(be);
                }
            }
        }
    }

    // destroy events straight from the destruction records.
    for (const auto& d : trace.destructions) {
        InteractionEvent e;
        e.verb = InteractionVerb::destroy;
        e.actor = d.attacker >= 0 ? trace.names[d.attacker] : "";
        e.patient = trace.names[d.victim];
        e.tick = d.tick;
        events.push_back(e);
    }

    // --- per-body motion phases: fall, roll, slide --------------------------
    // contact partners per tick per body.
    std::vector<std::vector<std::vector<int>>> touching(T,
                                                        std::vector<std::vector<int>>(n));
    std::vector<std::vector<Vec2>> contact_point(T, std::vector<Vec2>(n));
    for (int t = 0; t < T && t < static_cast<int>(trace.contacts.size()); ++t) {
        for (const auto& c : trace.contacts[t]) {
            touching[t][c.a].push_back(c.b);
            touching[t][c.b].push_back(c.a);
            contact_point[t][c.a] = c.point;
            contact_point[t][c.b] = c.point;
        }
    }

    for (int body = 0; body < n; ++body) {
        if (!trace.dynamic[body]) continue;

        // fall: a contact-free descent of real height; the landing partner is
        // the patient. Small hops of a struck object do not qualify.
        {
            int streak = 0;
            int fall_start = -1;
            bool airborne_desc = false;
            double peak_y = 0.0;
            for (int t = 0; t < T; ++t) {
                const auto& f = trace.frames[t][body];
                if (!f.alive) break;
                bool contact_free = touching[t][body].empty();
                if (contact_free && f.vel.y < -cp.fall_speed) {
                    if (streak == 0) peak_y = f.pos.y;
                    peak_y = std::max(peak_y, f.pos.y);
                    if (++streak >= cp.fall_ticks && !airborne_desc) {
                        airborne_desc = true;
                        fall_start = t - cp.fall_ticks + 1;
                    }
                } else if (!contact_free) {
                    if (airborne_desc && peak_y - f.pos.y >= cp.fall_min_drop) {
                        InteractionEvent e;
                        e.verb = InteractionVerb::fall;
                        e.actor = trace.names[body];
                        e.patient = trace.names[touching[t][body].front()];
                        e.tick = fall_start;
                        events.push_back(e);
                    }
                    airborne_desc = false;
                    streak = 0;
                }
                // Contact-free but not descending (rising part of an arc):
                // keep the streak alive only for the peak bookkeeping.
            }
            if (airborne_desc) { // still falling when the trace ended
                const auto& last = trace.frames[T - 1][body];
                if (last.alive && peak_y - last.pos.y >= cp.fall_min_drop) {
                    InteractionEvent e;
                    e.verb = InteractionVerb::fall;
                    e.actor = trace.names[body];
                    e.patient = "";
                    e.tick = fall_start;
                    events.push_back(e);
                }
            }
        }

        // roll/slide: sustained moving contact with one support. Brief
        // contact dropouts (a hard-struck block skimming its surface) do not
        // reset the window.
        std::map<int, int> window; // support -> consecutive qualifying ticks
        std::map<int, int> misses; // support -> ticks since last contact
        std::map<int, bool> emitted;
        std::map<int, double> dir_sum;
        for (int t = 0; t < T; ++t) {
            const auto& f = trace.frames[t][body];
            if (!f.alive) break;
            std::map<int, int> next_window;
            for (auto& [support, w] : window) {
                bool touched = false;
                for (int s : touching[t][body])
                    if (s == support) touched = true;
                if (!touched && ++misses[support] <= 2) next_window[support] = w;
            }
            for (int support : touching[t][body]) {
                double speed = f.vel.length();
                if (speed < cp.move_speed) continue;

                Vec2 r = contact_point[t][body] - f.pos;
                Vec2 contact_vel = f.vel + Vec2{-f.omega * r.y, f.omega * r.x};
                double slip = contact_vel.length();
                // Rolling covers both clean rolling (little contact slip) and
                // the spin-up phase of a hard-struck wheel, whose rotation
                // already runs with its travel while the contact still skids.
                bool spin_matches = f.omega * f.vel.x < 0.0 && std::abs(f.omega) >= 2.0;
                bool rolls = slip / speed < cp.roll_slip_ratio || spin_matches;
                bool slides = !spin_matches && std::abs(f.omega) < cp.slide_omega;
                if (!rolls && !slides) continue;

                int w = window.count(support) ? window[support] + 1 : 1;
                next_window[support] = w;
                misses[support] = 0;
                dir_sum[support] += f.vel.x;
                if (w >= cp.sustain_ticks && !emitted[support]) {
                    emitted[support] = true;
                    InteractionEvent e;
                    e.verb = rolls ? InteractionVerb::roll : InteractionVerb::slide;
                    e.actor = trace.names[body];
                    e.patient = trace.names[support];
                    e.direction = dir_sum[support] >= 0 ? Direction::right : Direction::left;
                    e.tick = t - cp.sustain_ticks + 1;
                    events.push_back(e);
                }
            }
            window = std::move(next_window);
        }
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const InteractionEvent& a, const InteractionEvent& b) {
                         return a.tick < b.tick;
                     });
    return events;
}

// ============================================================================
// Matching classified events against a scenario definition
// ============================================================================

inline bool direction_matches(const std::vector<Direction>& options,
                              std::optional<Direction> got) {
    if (options.empty()) return true;
    for (Direction d : options) {
        if (d == Direction::any) return true;
        if (got && *got == d) return true;
    }
    return false;
}

// True iff the scenario's interactions occur in order as a subsequence of the
// events and no restriction is violated while the solution sequence executes.
// Two scoping rules follow from what restrictions mean: events after the
// chain completes (the spent block rolling off an edge) do not count, and an
// event the chain itself consumed is never a violation (a bounce scenario
// both requires the bird to reach the pig and forbids hitting it any other
// way).
inline bool matches_sequence(const std::vector<InteractionEvent>& events,
                             const ScenarioDefinition& def) {
    size_t idx = 0;
    int completion_tick = std::numeric_limits<int>::max();
    std::vector<char> consumed(events.size(), 0);
    for (size_t i = 0; i < events.size(); ++i) {
        if (idx >= def.interactions.size()) break;
        const InteractionEvent& e = events[i];
        const Interaction& want = def.interactions[idx];
        if (e.verb == want.verb && e.actor == want.actor.name &&
            e.patient == want.patient.name &&
            direction_matches(want.direction_options, e.direction)) {
            consumed[i] = 1;
            ++idx;
            if (idx == def.interactions.size()) completion_tick = e.tick;
        }
    }
    if (idx != def.interactions.size()) return false;

    for (size_t i = 0; i < events.size(); ++i) {
        const InteractionEvent& e = events[i];
        if (consumed[i] || e.tick > completion_tick) continue;
        for (const auto& r : def.restrictions) {
            switch (r.verb) {
                case RestrictionVerb::cannot_hit:
                    if (e.verb == InteractionVerb::hit && e.actor == r.subject.name &&
                        e.patient == r.object.name &&
                        (r.direction == Direction::any ||
                         (e.direction && *e.direction == r.direction)))
                        return false;
                    break;
                case RestrictionVerb::cannot_fall:
                    if (e.verb == InteractionVerb::fall && e.actor == r.subject.name)
                        return false;
                    break;
            }
        }
    }
    return true;
}

} // namespace taskgen
