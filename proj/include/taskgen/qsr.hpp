#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taskgen/layout.hpp"

namespace taskgen {

// ============================================================================
// Qualitative spatial relations
// ============================================================================

enum class QsrKind {
    N, S, E, W, NE, NW, SE, SW,
    MeetN, MeetW, MeetNW, MeetSW, MeetDuringW, MeetDuringE,
    FarN, FarS, FarE, FarW, FarNE, FarNW, FarSE, FarSW,
};

inline const char* to_string(QsrKind k) {
    switch (k) {
        case QsrKind::N: return "N";
        case QsrKind::S: return "S";
        case QsrKind::E: return "E";
        case QsrKind::W: return "W";
        case QsrKind::NE: return "NE";
        case QsrKind::NW: return "NW";
        case QsrKind::SE: return "SE";
        case QsrKind::SW: return "SW";
        case QsrKind::MeetN: return "MeetN";
        case QsrKind::MeetW: return "MeetW";
        case QsrKind::MeetNW: return "MeetNW";
        case QsrKind::MeetSW: return "MeetSW";
        case QsrKind::MeetDuringW: return "MeetDuringW";
        case QsrKind::MeetDuringE: return "MeetDuringE";
        case QsrKind::FarN: return "FarN";
        case QsrKind::FarS: return "FarS";
        case QsrKind::FarE: return "FarE";
        case QsrKind::FarW: return "FarW";
        case QsrKind::FarNE: return "FarNE";
        case QsrKind::FarNW: return "FarNW";
        case QsrKind::FarSE: return "FarSE";
        case QsrKind::FarSW: return "FarSW";
    }
    return "?";
}

struct QsrRelation {
    QsrKind kind = QsrKind::N;
    std::string a;
    std::string b;

    bool operator==(const QsrRelation& o) const {
        return kind == o.kind && a == o.a && b == o.b;
    }
};

// A disjunction of relations over one object pair; exactly one disjunct has
// to hold in a solved configuration.
struct QsrConstraint {
    std::vector<QsrRelation> disjuncts;
};

// Spatial constraints plus the layout predicates whose satisfaction is left
// to simulation.
struct QsrGraph {
    std::vector<QsrConstraint> constraints;
    std::vector<LayoutPredicate> deferred; // liesOnPath, pathObstructed
};

struct QsrParams {
    double contact_eps = 0.01;
    double far_threshold = 1.0;
};

// ============================================================================
// Layout -> QSR translation
// ============================================================================

inline QsrGraph translate_layout(const LayoutGraph& g) {
    QsrGraph out;
    for (const auto& e : g.edges) {
        auto disjunction = [&](std::initializer_list<QsrKind> kinds) {
            QsrConstraint c;
            for (QsrKind k : kinds) c.disjuncts.push_back({k, e.a, e.b});
            out.constraints.push_back(std::move(c));
        };

        switch (e.verb) {
            case LayoutVerb::in_direction:
                switch (e.direction) {
                    case Direction::left: disjunction({QsrKind::W, QsrKind::NW, QsrKind::SW}); break;
                    case Direction::right: disjunction({QsrKind::E, QsrKind::NE, QsrKind::SE}); break;
                    case Direction::above: disjunction({QsrKind::N, QsrKind::NE, QsrKind::NW}); break;
                    case Direction::below: disjunction({QsrKind::S, QsrKind::SE, QsrKind::SW}); break;
                    case Direction::any:
                        throw UnsupportedPredicate("inDirection has no 'any' translation");
                }
                break;
            case LayoutVerb::on_location:
                switch (e.location) {
                    case OnLocationTag::left: disjunction({QsrKind::MeetDuringW}); break;
                    case OnLocationTag::centre: disjunction({QsrKind::MeetN}); break;
                    case OnLocationTag::right: disjunction({QsrKind::MeetDuringE}); break;
                }
                break;
            case LayoutVerb::located_far:
                switch (e.direction) {
                    case Direction::left:
                        disjunction({QsrKind::FarW, QsrKind::FarNW, QsrKind::FarSW});
                        break;
                    case Direction::right:
                        disjunction({QsrKind::FarE, QsrKind::FarNE, QsrKind::FarSE});
                        break;
                    case Direction::above:
                        disjunction({QsrKind::FarN, QsrKind::FarNE, QsrKind::FarNW});
                        break;
                    case Direction::below:
                        disjunction({QsrKind::FarS, QsrKind::FarSE, QsrKind::FarSW});
                        break;
                    case Direction::any:
                        throw UnsupportedPredicate("locatedFar has no 'any' translation");
                }
                break;
            case LayoutVerb::touching:
                switch (e.touch) {
                    case TouchLocationTag::upper_left: disjunction({QsrKind::MeetNW}); break;
                    case TouchLocationTag::centre_left: disjunction({QsrKind::MeetW}); break;
                    case TouchLocationTag::lower_left: disjunction({QsrKind::MeetSW}); break;
                }
                break;
            case LayoutVerb::lies_on_path:
            case LayoutVerb::path_obstructed:
                out.deferred.push_back(e);
                break;
        }
    }
    return out;
}

// ============================================================================
// Relation semantics
// ============================================================================
//
// Extents are min/max over the four corner points. Cardinal relations demand
// separation of at least eps in their direction; Far* relations refine them
// with a gap of at least far (so FarN implies N where the overlap condition
// matches). Meet* relations demand contact within eps. Contact relations on
// a tilted object are anchored at the corners of its walkable top face.

namespace qsr_detail {

inline bool x_overlap(const FivePointBox& a, const FivePointBox& b, double eps) {
    return a.min_x() <= b.max_x() + eps && b.min_x() <= a.max_x() + eps;
}

inline bool y_overlap(const FivePointBox& a, const FivePointBox& b, double eps) {
    return a.min_y() <= b.max_y() + eps && b.min_y() <= a.max_y() + eps;
}

inline double corner_radius(const FivePointBox& b) {
    return std::max(0.1, 0.25 * std::min(b.width(), b.height()));
}

} // namespace qsr_detail

inline bool holds(QsrKind kind, const FivePointBox& a, const FivePointBox& b,
                  const QsrParams& params = {}) {
    using namespace qsr_detail;
    const double eps = params.contact_eps;
    const double far = params.far_threshold;

    const double gap_n = a.min_y() - b.max_y(); // a above b
    const double gap_s = b.min_y() - a.max_y(); // a below b
    const double gap_e = a.min_x() - b.max_x(); // a right of b
    const double gap_w = b.min_x() - a.max_x(); // a left of b

    auto apart = [&](double g) { return g >= eps; };

    switch (kind) {
        case QsrKind::N: return apart(gap_n) && x_overlap(a, b, eps);
        case QsrKind::S: return apart(gap_s) && x_overlap(a, b, eps);
        case QsrKind::E: return apart(gap_e) && y_overlap(a, b, eps);
        case QsrKind::W: return apart(gap_w) && y_overlap(a, b, eps);
        case QsrKind::NE: return apart(gap_n) && apart(gap_e);
        case QsrKind::NW: return apart(gap_n) && apart(gap_w);
        case QsrKind::SE: return apart(gap_s) && apart(gap_e);
        case QsrKind::SW: return apart(gap_s) && apart(gap_w);

        case QsrKind::FarN: return gap_n >= far && x_overlap(a, b, eps);
        case QsrKind::FarS: return gap_s >= far && x_overlap(a, b, eps);
        case QsrKind::FarE: return gap_e >= far && y_overlap(a, b, eps);
        case QsrKind::FarW: return gap_w >= far && y_overlap(a, b, eps);
        case QsrKind::FarNE: return gap_n >= eps && gap_e >= eps && std::max(gap_n, gap_e) >= far;
        case QsrKind::FarNW: return gap_n >= eps && gap_w >= eps && std::max(gap_n, gap_w) >= far;
        case QsrKind::FarSE: return gap_s >= eps && gap_e >= eps && std::max(gap_s, gap_e) >= far;
        case QsrKind::FarSW: return gap_s >= eps && gap_w >= eps && std::max(gap_s, gap_w) >= far;

        case QsrKind::MeetN: {
            if (std::abs(a.min_y() - b.max_y()) > eps) return false;
            if (a.min_x() < b.min_x() - eps || a.max_x() > b.max_x() + eps) return false;
            double w = b.width();
            return a.c.x >= b.min_x() + w / 3.0 - eps && a.c.x <= b.min_x() + 2.0 * w / 3.0 + eps;
        }
        case QsrKind::MeetDuringW: {
            if (std::abs(a.min_y() - b.max_y()) > eps) return false;
            if (a.min_x() < b.min_x() - eps || a.max_x() > b.max_x() + eps) return false;
            return a.c.x <= b.min_x() + b.width() / 3.0 + eps;
        }
        case QsrKind::MeetDuringE: {
            if (std::abs(a.min_y() - b.max_y()) > eps) return false;
            if (a.min_x() < b.min_x() - eps || a.max_x() > b.max_x() + eps) return false;
            return a.c.x >= b.min_x() + 2.0 * b.width() / 3.0 - eps;
        }
        case QsrKind::MeetW: {
            // a's top-right corner meets b's top-left corner: side contact
            // that continues a movement path across the pair.
            Vec2 rt = corner(a, top_right_corner(a));
            Vec2 lt = corner(b, top_left_corner(b));
            return std::abs(a.max_x() - b.min_x()) <= eps && std::abs(rt.y - lt.y) <= eps &&
                   std::abs(rt.x - lt.x) <= 2.0 * eps;
        }
        case QsrKind::MeetNW: {
            // a rests on top of b at b's upper-left end.
            Vec2 lt = corner(b, top_left_corner(b));
            return std::abs(a.min_y() - b.max_y()) <= eps &&
                   std::abs(a.min_x() - lt.x) <= corner_radius(b);
        }
        case QsrKind::MeetSW: {
            // a touches b from below at b's lower-left end.
            return std::abs(a.max_y() - b.min_y()) <= eps &&
                   std::abs(a.min_x() - b.min_x()) <= corner_radius(b);
        }
    }
    return false;
}

inline bool holds(const QsrRelation& r, const FivePointBox& box_a, const FivePointBox& box_b,
                  const QsrParams& params = {}) {
    return holds(r.kind, box_a, box_b, params);
}

// Converse for the directional relations (Meet* relations are not symmetric
// in this vocabulary).
inline std::optional<QsrKind> converse(QsrKind k) {
    switch (k) {
        case QsrKind::N: return QsrKind::S;
        case QsrKind::S: return QsrKind::N;
        case QsrKind::E: return QsrKind::W;
        case QsrKind::W: return QsrKind::E;
        case QsrKind::NE: return QsrKind::SW;
        case QsrKind::SW: return QsrKind::NE;
        case QsrKind::NW: return QsrKind::SE;
        case QsrKind::SE: return QsrKind::NW;
        case QsrKind::FarN: return QsrKind::FarS;
        case QsrKind::FarS: return QsrKind::FarN;
        case QsrKind::FarE: return QsrKind::FarW;
        case QsrKind::FarW: return QsrKind::FarE;
        case QsrKind::FarNE: return QsrKind::FarSW;
        case QsrKind::FarSW: return QsrKind::FarNE;
        case QsrKind::FarNW: return QsrKind::FarSE;
        case QsrKind::FarSE: return QsrKind::FarNW;
        default: return std::nullopt;
    }
}

} // namespace taskgen
